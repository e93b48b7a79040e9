use serde::{Deserialize, Serialize};

use super::{Edge, Lead, Network, NetworkError, Vertex};

/// How the tunnelling region between the side branch and lead 2 is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierModel {
    /// Region VI is an edge of length `l6` whose potential is `u1`.
    #[default]
    Edge,
    /// Region VI collapses into a delta vertex of strength `u1 * l6`.
    Delta,
}

/// Parameters of the three-prong sample.
///
/// Lengths are in units of the reference length `l`, so the value of `u1`
/// is directly the dimensionless sweep coordinate `e0 U1 l`.
///
/// The defaults were tuned so that a `u1` sweep from -10 to -1000 at
/// `E = 2` traces three complete Argand sub-loops of `t31`. They all pass
/// through the point where region VI is transparent (`k6 l6 = n pi`). A k-scan at
/// `u1 = 150` (tunnelling regime) has several Fano transmission zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeProngParams {
    /// Region II: lead 1 to the central junction.
    pub l2: f64,
    /// Region III: central junction to lead 3.
    pub l3: f64,
    /// Region V: side branch from the junction towards lead 2.
    pub l5: f64,
    /// Region VI: tunnelling region in front of lead 2.
    pub l6: f64,
    pub v2: f64,
    pub v3: f64,
    pub v5: f64,
    pub u1: f64,
    pub barrier: BarrierModel,
}

impl Default for ThreeProngParams {
    fn default() -> Self {
        ThreeProngParams {
            l2: 1.0,
            l3: 1.0,
            l5: 2.0,
            l6: 0.4,
            v2: 0.0,
            v3: 0.0,
            v5: 0.0,
            u1: -10.0,
            barrier: BarrierModel::Edge,
        }
    }
}

impl ThreeProngParams {
    pub fn with_u1(&self, u1: f64) -> Self {
        ThreeProngParams { u1, ..self.clone() }
    }
}

/// Energy at which the default `u1` sweep is run.
pub const FIG3_ENERGY: f64 = 2.0;
/// `u1` sweep range, in sweep order.
pub const FIG3_U1_RANGE: (f64, f64) = (-10.0, -1000.0);
/// Tunnelling-barrier height used for the default k-scans.
pub const KSCAN_U1: f64 = 150.0;
pub const KSCAN_K_RANGE: (f64, f64) = (0.5, 10.0);

/// Builds the three-prong star network.
///
/// ```text
///  lead 1 ── II ── J ── III ── lead 3
///                  │
///                  V
///                  │
///                  VI (u1)
///                  │
///               lead 2
/// ```
///
/// Channel order is `1, 2, 3`.
pub fn three_prong_preset(p: &ThreeProngParams) -> Result<Network, NetworkError> {
    let lengths = [("l2", p.l2), ("l3", p.l3), ("l5", p.l5), ("l6", p.l6)];
    let bad: Vec<String> = lengths
        .iter()
        .filter(|(_, l)| !(*l > 0.0) || !l.is_finite())
        .map(|(n, l)| format!("{n} = {l}"))
        .collect();
    if !bad.is_empty() {
        return Err(NetworkError::NonpositiveLength(bad.join(", ")));
    }

    let v = |id: &str, delta_strength: f64| Vertex { id: id.into(), delta_strength };
    let e = |id: &str, from: &str, to: &str, length: f64, potential: f64| Edge {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        length,
        potential,
    };

    let mut vertices = vec![v("a", 0.0), v("J", 0.0), v("b", 0.0)];
    let mut edges = vec![
        e("II", "a", "J", p.l2, p.v2),
        e("III", "J", "b", p.l3, p.v3),
        e("V", "J", "c", p.l5, p.v5),
    ];
    let lead2_vertex = match p.barrier {
        BarrierModel::Edge => {
            vertices.push(v("c", 0.0));
            vertices.push(v("d", 0.0));
            edges.push(e("VI", "c", "d", p.l6, p.u1));
            "d"
        }
        BarrierModel::Delta => {
            vertices.push(v("c", p.u1 * p.l6));
            "c"
        }
    };
    let leads = vec![
        Lead { id: "1".into(), vertex: "a".into() },
        Lead { id: "2".into(), vertex: lead2_vertex.into() },
        Lead { id: "3".into(), vertex: "b".into() },
    ];
    Ok(Network { vertices, edges, leads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::validate_network;

    #[test]
    fn default_preset_is_valid() {
        let net = three_prong_preset(&ThreeProngParams::default()).unwrap();
        assert!(validate_network(&net).is_empty());
        assert_eq!(net.edges.len(), 4);
        assert_eq!(net.leads.len(), 3);
        assert_eq!(net.channel_order(), vec!["1", "2", "3"]);
    }

    #[test]
    fn sweep_endpoints_construct() {
        for u1 in [FIG3_U1_RANGE.0, FIG3_U1_RANGE.1] {
            let net = three_prong_preset(&ThreeProngParams::default().with_u1(u1)).unwrap();
            assert!(validate_network(&net).is_empty());
            assert_eq!(net.edge("VI").unwrap().potential, u1);
        }
    }

    #[test]
    fn zero_lengths_rejected() {
        let p = ThreeProngParams { l5: 0.0, l6: 0.0, ..Default::default() };
        let err = three_prong_preset(&p).unwrap_err();
        assert_eq!(err.code(), "NONPOSITIVE_LENGTH");
    }

    #[test]
    fn delta_barrier_variant() {
        let p = ThreeProngParams { barrier: BarrierModel::Delta, u1: -50.0, ..Default::default() };
        let net = three_prong_preset(&p).unwrap();
        assert!(validate_network(&net).is_empty());
        assert_eq!(net.edges.len(), 3);
        let c = &net.vertices[net.vertex_index("c").unwrap()];
        assert_eq!(c.delta_strength, -50.0 * 0.4);
    }
}
