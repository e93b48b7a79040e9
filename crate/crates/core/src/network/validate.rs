use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    EdgeLengthNonpositive,
    NonfiniteValue,
    DuplicateId,
    UnknownVertex,
    LoopEdge,
    MultiEdge,
    IsolatedVertex,
    Disconnected,
    TooFewLeads,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::EdgeLengthNonpositive => "EDGE_LENGTH_NONPOSITIVE",
            DiagnosticCode::NonfiniteValue => "NONFINITE_VALUE",
            DiagnosticCode::DuplicateId => "DUPLICATE_ID",
            DiagnosticCode::UnknownVertex => "UNKNOWN_VERTEX",
            DiagnosticCode::LoopEdge => "LOOP_EDGE",
            DiagnosticCode::MultiEdge => "MULTI_EDGE",
            DiagnosticCode::IsolatedVertex => "ISOLATED_VERTEX",
            DiagnosticCode::Disconnected => "DISCONNECTED",
            DiagnosticCode::TooFewLeads => "TOO_FEW_LEADS",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Checks every structural invariant of a network and returns one diagnostic
/// per violation. An empty list means the network is valid.
pub fn validate_network(net: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |code, message: String| out.push(Diagnostic { code, message });

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in net.vertices.iter().enumerate() {
        if index.insert(v.id.as_str(), i).is_some() {
            push(DiagnosticCode::DuplicateId, format!("vertex id `{}` repeated", v.id));
        }
        if !v.delta_strength.is_finite() {
            push(
                DiagnosticCode::NonfiniteValue,
                format!("vertex `{}` delta strength is not finite", v.id),
            );
        }
    }
    let mut seen = BTreeSet::new();
    for e in &net.edges {
        if !seen.insert(e.id.as_str()) {
            push(DiagnosticCode::DuplicateId, format!("edge id `{}` repeated", e.id));
        }
    }
    let mut seen = BTreeSet::new();
    for l in &net.leads {
        if !seen.insert(l.id.as_str()) {
            push(DiagnosticCode::DuplicateId, format!("lead id `{}` repeated", l.id));
        }
    }

    let n = net.vertices.len();
    let mut degree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pairs = BTreeSet::new();

    for e in &net.edges {
        if !(e.length > 0.0) || !e.length.is_finite() {
            push(
                DiagnosticCode::EdgeLengthNonpositive,
                format!("edge `{}` has length {}", e.id, e.length),
            );
        }
        if !e.potential.is_finite() {
            push(
                DiagnosticCode::NonfiniteValue,
                format!("edge `{}` potential is not finite", e.id),
            );
        }
        let a = index.get(e.from.as_str()).copied();
        let b = index.get(e.to.as_str()).copied();
        for (name, idx) in [(&e.from, a), (&e.to, b)] {
            if idx.is_none() {
                push(
                    DiagnosticCode::UnknownVertex,
                    format!("edge `{}` references unknown vertex `{}`", e.id, name),
                );
            }
        }
        if let (Some(a), Some(b)) = (a, b) {
            if a == b {
                push(DiagnosticCode::LoopEdge, format!("edge `{}` is a loop at `{}`", e.id, e.from));
                continue;
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                push(
                    DiagnosticCode::MultiEdge,
                    format!("edge `{}` duplicates a connection `{}`-`{}`", e.id, e.from, e.to),
                );
            }
            degree[a] += 1;
            degree[b] += 1;
            adj[a].push(b);
            adj[b].push(a);
        }
    }

    for l in &net.leads {
        match index.get(l.vertex.as_str()) {
            Some(&v) => degree[v] += 1,
            None => push(
                DiagnosticCode::UnknownVertex,
                format!("lead `{}` attaches to unknown vertex `{}`", l.id, l.vertex),
            ),
        }
    }

    for (v, d) in net.vertices.iter().zip(&degree) {
        if *d == 0 {
            push(DiagnosticCode::IsolatedVertex, format!("vertex `{}` has no edges or leads", v.id));
        }
    }

    if net.leads.len() < 2 {
        push(
            DiagnosticCode::TooFewLeads,
            format!("network has {} lead(s), at least 2 required", net.leads.len()),
        );
    }

    if n > 0 {
        let mut visited = vec![false; n];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        let unreached: Vec<&str> = net
            .vertices
            .iter()
            .zip(&visited)
            .filter(|(_, &seen)| !seen)
            .map(|(v, _)| v.id.as_str())
            .collect();
        if !unreached.is_empty() {
            push(
                DiagnosticCode::Disconnected,
                format!("vertices not reachable from `{}`: {}", net.vertices[0].id, unreached.join(", ")),
            );
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Lead, Vertex};

    fn codes(net: &Network) -> Vec<DiagnosticCode> {
        validate_network(net).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn free_wire_is_valid() {
        assert!(validate_network(&Network::free_wire(1.0, 0.0)).is_empty());
    }

    #[test]
    fn zero_length_edge() {
        let net = Network::free_wire(0.0, 0.0);
        assert_eq!(codes(&net), vec![DiagnosticCode::EdgeLengthNonpositive]);
    }

    #[test]
    fn loop_and_multi_edges_rejected() {
        let mut net = Network::free_wire(1.0, 0.0);
        net.edges.push(Edge { id: "x".into(), from: "a".into(), to: "a".into(), length: 1.0, potential: 0.0 });
        net.edges.push(Edge { id: "y".into(), from: "b".into(), to: "a".into(), length: 2.0, potential: 0.0 });
        let c = codes(&net);
        assert!(c.contains(&DiagnosticCode::LoopEdge));
        assert!(c.contains(&DiagnosticCode::MultiEdge));
    }

    #[test]
    fn unknown_vertex_disconnected_and_few_leads() {
        let net = Network {
            vertices: vec![
                Vertex { id: "a".into(), delta_strength: 0.0 },
                Vertex { id: "b".into(), delta_strength: 0.0 },
            ],
            edges: vec![],
            leads: vec![Lead { id: "1".into(), vertex: "a".into() }, Lead { id: "2".into(), vertex: "zz".into() }],
        };
        let c = codes(&net);
        assert!(c.contains(&DiagnosticCode::UnknownVertex));
        assert!(c.contains(&DiagnosticCode::IsolatedVertex));
        assert!(c.contains(&DiagnosticCode::Disconnected));

        let mut one = Network::free_wire(1.0, 0.0);
        one.leads.pop();
        assert!(codes(&one).contains(&DiagnosticCode::TooFewLeads));
    }

    #[test]
    fn duplicate_ids() {
        let mut net = Network::free_wire(1.0, 0.0);
        net.leads[1].id = "1".into();
        assert!(codes(&net).contains(&DiagnosticCode::DuplicateId));
    }
}
