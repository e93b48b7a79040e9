//! Quantum-network data model.
//!
//! A [`Network`] is a graph of finite edges carrying a constant potential,
//! vertices carrying an optional delta-barrier strength, and semi-infinite
//! leads at zero potential. Lead declaration order defines the channel order
//! of every S-matrix computed from the network.

mod builder;
mod perturbation;
mod preset;
mod random;
mod validate;

pub use builder::{EdgePotentialSweep, NetworkBuilder, ThreeProngU1, VertexDeltaSweep};
pub use perturbation::{apply_perturbation, PerturbationSpec};
pub use preset::{
    three_prong_preset, BarrierModel, ThreeProngParams, FIG3_ENERGY, FIG3_U1_RANGE, KSCAN_K_RANGE,
    KSCAN_U1,
};
pub use random::{random_network, RandomNetworkSpec};
pub use validate::{validate_network, Diagnostic, DiagnosticCode};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("NONPOSITIVE_LENGTH: {0}")]
    NonpositiveLength(String),
    #[error("PROBE_OUT_OF_RANGE: {0}")]
    ProbeOutOfRange(String),
    #[error("PROBE_TOO_WIDE: width {width} exceeds length/10 of edge `{edge}` ({limit})")]
    ProbeTooWide { edge: String, width: f64, limit: f64 },
    #[error("UNKNOWN_EDGE: no edge `{0}`")]
    UnknownEdge(String),
    #[error("UNKNOWN_VERTEX: no vertex `{0}`")]
    UnknownVertex(String),
    #[error("INVALID_NETWORK: {}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

impl NetworkError {
    pub fn code(&self) -> &'static str {
        match self {
            NetworkError::NonpositiveLength(_) => "NONPOSITIVE_LENGTH",
            NetworkError::ProbeOutOfRange(_) => "PROBE_OUT_OF_RANGE",
            NetworkError::ProbeTooWide { .. } => "PROBE_TOO_WIDE",
            NetworkError::UnknownEdge(_) => "UNKNOWN_EDGE",
            NetworkError::UnknownVertex(_) => "UNKNOWN_VERTEX",
            NetworkError::Invalid(_) => "INVALID_NETWORK",
        }
    }
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A vertex. `delta_strength` is the coefficient of the Kirchhoff jump
/// condition; zero gives a transparent junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: String,
    #[serde(default)]
    pub delta_strength: f64,
}

/// A finite edge. Position `x` along the edge runs from `from` (x = 0) to
/// `to` (x = length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    #[serde(default)]
    pub potential: f64,
}

/// A semi-infinite lead at zero potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lead {
    pub id: String,
    pub vertex: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    #[serde(default)]
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub leads: Vec<Lead>,
}

impl Network {
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn lead_index(&self, id: &str) -> Option<usize> {
        self.leads.iter().position(|l| l.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Channel order of the S-matrix.
    pub fn channel_order(&self) -> Vec<String> {
        self.leads.iter().map(|l| l.id.clone()).collect()
    }

    /// Total length of all finite edges.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Errors with every diagnostic if the network is not valid.
    pub fn ensure_valid(&self) -> Result<(), NetworkError> {
        let diags = validate_network(self);
        if diags.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(diags))
        }
    }

    /// Free wire of length `length` and potential `potential` between two
    /// leads `1` and `2`.
    pub fn free_wire(length: f64, potential: f64) -> Network {
        Network {
            vertices: vec![
                Vertex { id: "a".into(), delta_strength: 0.0 },
                Vertex { id: "b".into(), delta_strength: 0.0 },
            ],
            edges: vec![Edge {
                id: "w".into(),
                from: "a".into(),
                to: "b".into(),
                length,
                potential,
            }],
            leads: vec![
                Lead { id: "1".into(), vertex: "a".into() },
                Lead { id: "2".into(), vertex: "b".into() },
            ],
        }
    }

    /// A single delta barrier of strength `strength` between leads `1` and `2`.
    pub fn delta_barrier(strength: f64) -> Network {
        Network {
            vertices: vec![Vertex { id: "d".into(), delta_strength: strength }],
            edges: vec![],
            leads: vec![
                Lead { id: "1".into(), vertex: "d".into() },
                Lead { id: "2".into(), vertex: "d".into() },
            ],
        }
    }

    /// `n` leads meeting at one vertex of strength `strength`.
    pub fn star_junction(n: usize, strength: f64) -> Network {
        Network {
            vertices: vec![Vertex { id: "j".into(), delta_strength: strength }],
            edges: vec![],
            leads: (1..=n)
                .map(|i| Lead { id: i.to_string(), vertex: "j".into() })
                .collect(),
        }
    }
}

/// A point inside a network: an edge and a position along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub edge: String,
    pub x: f64,
}

impl Position {
    pub fn new(edge: impl Into<String>, x: f64) -> Self {
        Position { edge: edge.into(), x }
    }
}
