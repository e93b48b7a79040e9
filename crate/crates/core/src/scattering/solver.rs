use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{wavenumber_eps, SMatrix, ScatteringError, Wavenumber, EPS_THRESHOLD, MAX_CONDITION};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub eps_threshold: f64,
    pub max_condition: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { eps_threshold: EPS_THRESHOLD, max_condition: MAX_CONDITION }
    }
}

/// Interior solution on one edge for every incident lead.
///
/// The backward wave is stored relative to the far endpoint,
/// `psi(x) = A e^{ikx} + C e^{-ik(x - L)}`, so that `|e^{ikL}| <= 1` is the
/// only exponential that ever appears. The conventional amplitude is
/// `B = C e^{ikL}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSolution {
    pub id: String,
    pub length: f64,
    pub k: Wavenumber,
    forward: Vec<Complex64>,
    backward_far: Vec<Complex64>,
}

impl EdgeSolution {
    /// `(A, B)` in `psi(x) = A e^{ikx} + B e^{-ikx}` for incident lead index `gamma`.
    pub fn amplitudes(&self, gamma: usize) -> (Complex64, Complex64) {
        let ph = (Complex64::i() * self.k.0 * self.length).exp();
        (self.forward[gamma], self.backward_far[gamma] * ph)
    }

    pub fn value(&self, gamma: usize, x: f64) -> Complex64 {
        let ik = Complex64::i() * self.k.0;
        self.forward[gamma] * (ik * x).exp() + self.backward_far[gamma] * (-ik * (x - self.length)).exp()
    }

    pub fn derivative(&self, gamma: usize, x: f64) -> Complex64 {
        let ik = Complex64::i() * self.k.0;
        ik * (self.forward[gamma] * (ik * x).exp()
            - self.backward_far[gamma] * (-ik * (x - self.length)).exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub smatrix: SMatrix,
    pub edges: Vec<EdgeSolution>,
}

impl ScatteringSolution {
    pub fn edge(&self, id: &str) -> Result<&EdgeSolution, ScatteringError> {
        self.edges
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| ScatteringError::UnknownEdge(id.to_string()))
    }
}

pub fn solve_scattering(net: &Network, energy: f64) -> Result<ScatteringSolution, ScatteringError> {
    solve_scattering_with(net, energy, &SolverOptions::default())
}

#[derive(Clone, Copy)]
enum End {
    EdgeStart(usize),
    EdgeEnd(usize),
    Lead(usize),
}

/// Builds and solves the wavefunction-matching system once, with one
/// right-hand side per incident lead.
pub fn solve_scattering_with(
    net: &Network,
    energy: f64,
    opts: &SolverOptions,
) -> Result<ScatteringSolution, ScatteringError> {
    net.ensure_valid()?;
    if !(energy > 0.0) {
        return Err(ScatteringError::NonpositiveEnergy(energy));
    }
    let k0 = wavenumber_eps(energy, 0.0, opts.eps_threshold)?.0;
    let ks = net
        .edges
        .iter()
        .map(|e| wavenumber_eps(energy, e.potential, opts.eps_threshold))
        .collect::<Result<Vec<_>, _>>()?;

    let ne = net.edges.len();
    let nl = net.leads.len();
    let n = 2 * ne + nl;
    let i = Complex64::i();

    let vidx: HashMap<&str, usize> =
        net.vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let mut incident: Vec<Vec<End>> = vec![Vec::new(); net.vertices.len()];
    for (e, edge) in net.edges.iter().enumerate() {
        incident[vidx[edge.from.as_str()]].push(End::EdgeStart(e));
        incident[vidx[edge.to.as_str()]].push(End::EdgeEnd(e));
    }
    for (l, lead) in net.leads.iter().enumerate() {
        incident[vidx[lead.vertex.as_str()]].push(End::Lead(l));
    }

    let phase: Vec<Complex64> = net
        .edges
        .iter()
        .zip(&ks)
        .map(|(e, k)| (i * k.0 * e.length).exp())
        .collect();

    // Coefficients of psi at an end: (unknown, coefficient) pairs plus the
    // lead index whose unit incident wave contributes a constant 1.
    let value = |end: End| -> ([(usize, Complex64); 2], Option<usize>) {
        match end {
            End::EdgeStart(e) => ([(2 * e, 1.0.into()), (2 * e + 1, phase[e])], None),
            End::EdgeEnd(e) => ([(2 * e, phase[e]), (2 * e + 1, 1.0.into())], None),
            End::Lead(l) => ([(2 * ne + l, 1.0.into()), (2 * ne + l, 0.0.into())], Some(l)),
        }
    };
    // Outward derivative at an end, with the constant from the incident wave.
    let outward = |end: End| -> ([(usize, Complex64); 2], Option<(usize, Complex64)>) {
        match end {
            End::EdgeStart(e) => {
                let ik = i * ks[e].0;
                ([(2 * e, ik), (2 * e + 1, -ik * phase[e])], None)
            }
            End::EdgeEnd(e) => {
                let ik = i * ks[e].0;
                ([(2 * e, -ik * phase[e]), (2 * e + 1, ik)], None)
            }
            End::Lead(l) => ([(2 * ne + l, i * k0), (2 * ne + l, 0.0.into())], Some((l, -i * k0))),
        }
    };

    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DMatrix::<Complex64>::zeros(n, nl);
    let mut row = 0;
    for (v, ends) in incident.iter().enumerate() {
        let (ref_coef, ref_lead) = value(ends[0]);
        for &end in &ends[1..] {
            let (coef, lead) = value(end);
            for (j, c) in coef {
                m[(row, j)] += c;
            }
            for (j, c) in ref_coef {
                m[(row, j)] -= c;
            }
            if let Some(l) = lead {
                rhs[(row, l)] -= Complex64::from(1.0);
            }
            if let Some(l) = ref_lead {
                rhs[(row, l)] += Complex64::from(1.0);
            }
            row += 1;
        }
        let lambda = net.vertices[v].delta_strength;
        for &end in ends {
            let (coef, constant) = outward(end);
            for (j, c) in coef {
                m[(row, j)] += c;
            }
            if let Some((l, c)) = constant {
                rhs[(row, l)] -= c;
            }
        }
        for (j, c) in ref_coef {
            m[(row, j)] -= lambda * c;
        }
        if let Some(l) = ref_lead {
            rhs[(row, l)] += Complex64::from(lambda);
        }
        row += 1;
    }
    debug_assert_eq!(row, n);

    let norm = one_norm(&m);
    let lu = m.lu();
    let singular = || ScatteringError::SingularSystem { energy, condition: f64::INFINITY };
    let inverse = lu.try_inverse().ok_or_else(singular)?;
    let condition = norm * one_norm(&inverse);
    if !condition.is_finite() || condition > opts.max_condition {
        return Err(ScatteringError::SingularSystem { energy, condition });
    }
    let x = lu.solve(&rhs).ok_or_else(singular)?;

    let elements = x.rows(2 * ne, nl).into_owned();
    let edges = net
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| EdgeSolution {
            id: edge.id.clone(),
            length: edge.length,
            k: ks[e],
            forward: (0..nl).map(|g| x[(2 * e, g)]).collect(),
            backward_far: (0..nl).map(|g| x[(2 * e + 1, g)]).collect(),
        })
        .collect();

    Ok(ScatteringSolution {
        smatrix: SMatrix { energy, channels: net.channel_order(), elements },
        edges,
    })
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `psi_gamma(x)` on `edge` for unit incident amplitude in lead `gamma`.
pub fn wavefunction_at(
    sol: &ScatteringSolution,
    gamma: &str,
    edge: &str,
    x: f64,
) -> Result<Complex64, ScatteringError> {
    let g = sol.smatrix.channel_index(gamma)?;
    let e = sol.edge(edge)?;
    if !(0.0..=e.length).contains(&x) {
        return Err(ScatteringError::PositionOutOfRange { edge: edge.to_string(), x, length: e.length });
    }
    Ok(e.value(g, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{three_prong_preset, Edge, Lead, ThreeProngParams, Vertex};
    use crate::scattering::{reciprocity_defect, unitarity_defect};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_wire_is_pure_propagation() {
        let l = 1.7;
        let sol = solve_scattering(&Network::free_wire(l, 0.0), 1.0).unwrap();
        let s = &sol.smatrix;
        assert!((s.get("2", "1").unwrap() - (c(0.0, l)).exp()).norm() < 1e-13);
        assert!(s.get("1", "1").unwrap().norm() < 1e-13);
        assert!(unitarity_defect(s) < 1e-12);
        assert!(reciprocity_defect(s) < 1e-12);
        assert!((wavefunction_at(&sol, "1", "w", 0.0).unwrap() - 1.0).norm() < 1e-13);
        assert!((wavefunction_at(&sol, "1", "w", l).unwrap() - c(0.0, l).exp()).norm() < 1e-13);
    }

    #[test]
    fn delta_barrier_textbook() {
        let sol = solve_scattering(&Network::delta_barrier(2.0), 1.0).unwrap();
        let t = sol.smatrix.get("2", "1").unwrap();
        assert!((t - c(0.5, -0.5)).norm() < 1e-14);
        assert!((t.norm_sqr() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bare_three_lead_vertex() {
        let sol = solve_scattering(&Network::star_junction(3, 0.0), 2.5).unwrap();
        for a in 0..3 {
            for g in 0..3 {
                let want = if a == g { -1.0 / 3.0 } else { 2.0 / 3.0 };
                assert!((sol.smatrix.elements[(a, g)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn evanescent_dead_end_decays() {
        // wire with a dead-end barrier stub hanging off the middle vertex
        let net = Network {
            vertices: vec![
                Vertex { id: "a".into(), delta_strength: 0.0 },
                Vertex { id: "m".into(), delta_strength: 0.0 },
                Vertex { id: "b".into(), delta_strength: 0.0 },
                Vertex { id: "end".into(), delta_strength: 0.0 },
            ],
            edges: vec![
                Edge { id: "l".into(), from: "a".into(), to: "m".into(), length: 1.0, potential: 0.0 },
                Edge { id: "r".into(), from: "m".into(), to: "b".into(), length: 1.0, potential: 0.0 },
                Edge { id: "stub".into(), from: "m".into(), to: "end".into(), length: 3.0, potential: 25.0 },
            ],
            leads: vec![Lead { id: "1".into(), vertex: "a".into() }, Lead { id: "2".into(), vertex: "b".into() }],
        };
        let sol = solve_scattering(&net, 1.0).unwrap();
        assert!(unitarity_defect(&sol.smatrix) < 1e-12);
        let kappa = 24f64.sqrt();
        let psi0 = wavefunction_at(&sol, "1", "stub", 0.0).unwrap().norm();
        let mut prev = psi0;
        for i in 1..=20 {
            let x = 0.1 * i as f64;
            let p = wavefunction_at(&sol, "1", "stub", x).unwrap().norm();
            assert!(p < prev);
            // cosh profile of a Neumann dead end: psi(x) = psi0 cosh(kappa (L - x)) / cosh(kappa L)
            let want = psi0 * (kappa * (3.0 - x)).cosh() / (kappa * 3.0).cosh();
            assert!((p - want).abs() < 1e-10 * psi0.max(1.0), "x={x} p={p} want={want}");
            prev = p;
        }
    }

    #[test]
    fn deep_evanescent_edge_stays_conditioned() {
        let mut net = Network::free_wire(20.0, 400.0);
        net.edges[0].length = 20.0;
        let sol = solve_scattering(&net, 1.0).unwrap();
        let t = sol.smatrix.get("2", "1").unwrap();
        assert!(t.norm() < 1e-100);
        assert!(unitarity_defect(&sol.smatrix) < 1e-12);
    }

    #[test]
    fn preset_continuity_and_conservation() {
        let net = three_prong_preset(&ThreeProngParams::default()).unwrap();
        let sol = solve_scattering(&net, 2.3).unwrap();
        assert!(unitarity_defect(&sol.smatrix) < 1e-10);
        assert!(reciprocity_defect(&sol.smatrix) < 1e-10);
        for g in ["1", "2", "3"] {
            let j_ii = wavefunction_at(&sol, g, "II", 1.0).unwrap();
            let j_iii = wavefunction_at(&sol, g, "III", 0.0).unwrap();
            let j_v = wavefunction_at(&sol, g, "V", 0.0).unwrap();
            assert!((j_ii - j_iii).norm() < 1e-10);
            assert!((j_ii - j_v).norm() < 1e-10);
        }
    }

    #[test]
    fn errors() {
        let net = Network::free_wire(1.0, 0.5);
        assert_eq!(solve_scattering(&net, 0.5).unwrap_err().code(), "NEAR_THRESHOLD");
        assert_eq!(solve_scattering(&net, -1.0).unwrap_err().code(), "NONPOSITIVE_ENERGY");
        assert_eq!(
            solve_scattering(&Network::free_wire(0.0, 0.0), 1.0).unwrap_err().code(),
            "INVALID_NETWORK"
        );
        let sol = solve_scattering(&net, 2.0).unwrap();
        assert_eq!(wavefunction_at(&sol, "1", "w", 1.5).unwrap_err().code(), "POSITION_OUT_OF_RANGE");
        assert_eq!(wavefunction_at(&sol, "1", "zz", 0.5).unwrap_err().code(), "UNKNOWN_EDGE");
    }
}
