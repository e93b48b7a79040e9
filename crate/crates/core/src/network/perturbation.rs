use serde::{Deserialize, Serialize};

use super::{Edge, Network, NetworkError, Vertex};

/// A rectangular potential probe of width `width` and height `delta_u`,
/// centred at `center` along `edge`. Used to discretize functional
/// derivatives with respect to the local potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub edge: String,
    pub center: f64,
    pub width: f64,
    pub delta_u: f64,
}

impl PerturbationSpec {
    /// Checks the probe against `net` without building anything.
    pub fn check(&self, net: &Network) -> Result<(), NetworkError> {
        let edge = net
            .edge(&self.edge)
            .ok_or_else(|| NetworkError::UnknownEdge(self.edge.clone()))?;
        if !(self.width > 0.0) {
            return Err(NetworkError::ProbeOutOfRange(format!(
                "probe width {} must be positive",
                self.width
            )));
        }
        let limit = edge.length / 10.0;
        if self.width > limit {
            return Err(NetworkError::ProbeTooWide {
                edge: self.edge.clone(),
                width: self.width,
                limit,
            });
        }
        let lo = self.center - 0.5 * self.width;
        let hi = self.center + 0.5 * self.width;
        if !(lo > 0.0 && hi < edge.length) {
            return Err(NetworkError::ProbeOutOfRange(format!(
                "probe [{lo}, {hi}] not strictly inside edge `{}` of length {}",
                self.edge, edge.length
            )));
        }
        Ok(())
    }
}

/// Returns a copy of `net` where the probed edge is split into
/// left / probe / right pieces. The probe piece carries `V + delta_u`; the
/// potential profile elsewhere is unchanged. The input network is untouched.
pub fn apply_perturbation(net: &Network, p: &PerturbationSpec) -> Result<Network, NetworkError> {
    p.check(net)?;
    let idx = net.edge_index(&p.edge).expect("checked above");
    let e = &net.edges[idx];
    let lo = p.center - 0.5 * p.width;
    let hi = p.center + 0.5 * p.width;

    let left_v = format!("{}@probe-in", e.id);
    let right_v = format!("{}@probe-out", e.id);

    let mut out = net.clone();
    out.vertices.push(Vertex { id: left_v.clone(), delta_strength: 0.0 });
    out.vertices.push(Vertex { id: right_v.clone(), delta_strength: 0.0 });

    let pieces = [
        Edge {
            id: format!("{}.left", e.id),
            from: e.from.clone(),
            to: left_v.clone(),
            length: lo,
            potential: e.potential,
        },
        Edge {
            id: format!("{}.probe", e.id),
            from: left_v,
            to: right_v.clone(),
            length: hi - lo,
            potential: e.potential + p.delta_u,
        },
        Edge {
            id: format!("{}.right", e.id),
            from: right_v,
            to: e.to.clone(),
            length: e.length - hi,
            potential: e.potential,
        },
    ];
    out.edges.splice(idx..=idx, pieces);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::validate_network;

    fn probe(center: f64, width: f64, delta_u: f64) -> PerturbationSpec {
        PerturbationSpec { edge: "w".into(), center, width, delta_u }
    }

    #[test]
    fn splits_edge_into_three() {
        let net = Network::free_wire(2.0, 0.3);
        let out = apply_perturbation(&net, &probe(1.0, 0.1, 0.5)).unwrap();
        assert!(validate_network(&out).is_empty());
        assert_eq!(out.vertices.len(), net.vertices.len() + 2);
        assert_eq!(out.edges.len(), 3);
        let total: f64 = out.edges.iter().map(|e| e.length).sum();
        assert!((total - 2.0).abs() < 1e-15);
        assert_eq!(out.edges[1].potential, 0.8);
        assert_eq!(out.edges[0].potential, 0.3);
        assert_eq!(out.edges[2].potential, 0.3);
        // original untouched
        assert_eq!(net.edges.len(), 1);
    }

    #[test]
    fn out_of_range_and_too_wide() {
        let net = Network::free_wire(1.0, 0.0);
        assert_eq!(
            apply_perturbation(&net, &probe(0.98, 0.05, 1.0)).unwrap_err().code(),
            "PROBE_OUT_OF_RANGE"
        );
        assert_eq!(
            apply_perturbation(&net, &probe(0.5, 0.2, 1.0)).unwrap_err().code(),
            "PROBE_TOO_WIDE"
        );
        let mut bad = probe(0.5, 0.01, 1.0);
        bad.edge = "nope".into();
        assert_eq!(apply_perturbation(&net, &bad).unwrap_err().code(), "UNKNOWN_EDGE");
    }
}
