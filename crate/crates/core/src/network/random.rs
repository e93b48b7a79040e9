use rand::seq::SliceRandom;
use rand::Rng;

use super::{Edge, Lead, Network, Vertex};

/// Bounds for [`random_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetworkSpec {
    pub leads: (usize, usize),
    pub edges: (usize, usize),
    pub length: (f64, f64),
    pub potential: (f64, f64),
    pub delta: (f64, f64),
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        RandomNetworkSpec { leads: (2, 4), edges: (1, 6), length: (0.2, 3.0), potential: (-2.0, 2.0), delta: (-3.0, 3.0) }
    }
}

/// A connected simple network: a random spanning tree plus extra edges
/// between non-adjacent vertices, with leads attached at random vertices.
/// Edge counts are inclusive bounds; fewer edges result when the vertex
/// set has no free pairs left.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, spec: &RandomNetworkSpec) -> Network {
    let n_edges = rng.gen_range(spec.edges.0..=spec.edges.1.max(spec.edges.0));
    let n_leads = rng.gen_range(spec.leads.0..=spec.leads.1.max(spec.leads.0));
    // between a path (n_edges + 1 vertices) and a dense graph
    let min_vertices = (2..).find(|m: &usize| m * (m - 1) / 2 >= n_edges).unwrap_or(2);
    let n_vertices = rng.gen_range(min_vertices..=n_edges + 1);
    let vid = |i: usize| format!("v{i}");
    let vertices: Vec<Vertex> =
        (0..n_vertices).map(|i| Vertex { id: vid(i), delta_strength: rng.gen_range(spec.delta.0..spec.delta.1) }).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..n_vertices {
        pairs.push((rng.gen_range(0..i), i));
    }
    let mut free: Vec<(usize, usize)> =
        (0..n_vertices).flat_map(|a| (a + 1..n_vertices).map(move |b| (a, b))).filter(|p| !pairs.contains(p)).collect();
    free.shuffle(rng);
    pairs.extend(free.into_iter().take(n_edges.saturating_sub(pairs.len())));

    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            Edge {
                id: format!("e{k}"),
                from: vid(from),
                to: vid(to),
                length: rng.gen_range(spec.length.0..spec.length.1),
                potential: rng.gen_range(spec.potential.0..spec.potential.1),
            }
        })
        .collect();
    let leads =
        (0..n_leads).map(|k| Lead { id: (k + 1).to_string(), vertex: vid(rng.gen_range(0..n_vertices)) }).collect();
    Network { vertices, edges, leads }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_networks_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = RandomNetworkSpec::default();
        for _ in 0..300 {
            let net = random_network(&mut rng, &spec);
            net.ensure_valid().unwrap();
            assert!((1..=6).contains(&net.edges.len()));
            assert!((2..=4).contains(&net.leads.len()));
        }
    }

    #[test]
    fn seeded_generation_repeats() {
        let a = random_network(&mut ChaCha8Rng::seed_from_u64(3), &RandomNetworkSpec::default());
        let b = random_network(&mut ChaCha8Rng::seed_from_u64(3), &RandomNetworkSpec::default());
        assert_eq!(a, b);
    }
}
