use super::{three_prong_preset, Network, NetworkError, ThreeProngParams};

/// A one-parameter family of networks, used by sweeps and by the
/// finite-difference comparison of two nearby parameter values.
pub trait NetworkBuilder: Send + Sync {
    fn build(&self, param: f64) -> Result<Network, NetworkError>;

    /// Short name of the swept quantity, written into output headers.
    fn parameter_name(&self) -> String {
        "param".to_string()
    }
}

impl<F> NetworkBuilder for F
where
    F: Fn(f64) -> Result<Network, NetworkError> + Send + Sync,
{
    fn build(&self, param: f64) -> Result<Network, NetworkError> {
        self(param)
    }
}

/// The three-prong preset with `u1` (region VI potential) as the parameter.
#[derive(Debug, Clone, Default)]
pub struct ThreeProngU1(pub ThreeProngParams);

impl NetworkBuilder for ThreeProngU1 {
    fn build(&self, param: f64) -> Result<Network, NetworkError> {
        three_prong_preset(&self.0.with_u1(param))
    }

    fn parameter_name(&self) -> String {
        "u1".to_string()
    }
}

/// A fixed network with one edge potential as the parameter.
#[derive(Debug, Clone)]
pub struct EdgePotentialSweep {
    pub network: Network,
    pub edge: String,
}

impl EdgePotentialSweep {
    pub fn new(network: Network, edge: impl Into<String>) -> Result<Self, NetworkError> {
        let edge = edge.into();
        if network.edge_index(&edge).is_none() {
            return Err(NetworkError::UnknownEdge(edge));
        }
        Ok(EdgePotentialSweep { network, edge })
    }
}

impl NetworkBuilder for EdgePotentialSweep {
    fn build(&self, param: f64) -> Result<Network, NetworkError> {
        let mut net = self.network.clone();
        let i = net
            .edge_index(&self.edge)
            .ok_or_else(|| NetworkError::UnknownEdge(self.edge.clone()))?;
        net.edges[i].potential = param;
        Ok(net)
    }

    fn parameter_name(&self) -> String {
        format!("potential({})", self.edge)
    }
}

/// A fixed network with one vertex delta strength as the parameter.
#[derive(Debug, Clone)]
pub struct VertexDeltaSweep {
    pub network: Network,
    pub vertex: String,
}

impl VertexDeltaSweep {
    pub fn new(network: Network, vertex: impl Into<String>) -> Result<Self, NetworkError> {
        let vertex = vertex.into();
        if network.vertex_index(&vertex).is_none() {
            return Err(NetworkError::UnknownVertex(vertex));
        }
        Ok(VertexDeltaSweep { network, vertex })
    }
}

impl NetworkBuilder for VertexDeltaSweep {
    fn build(&self, param: f64) -> Result<Network, NetworkError> {
        let mut net = self.network.clone();
        let i = net
            .vertex_index(&self.vertex)
            .ok_or_else(|| NetworkError::UnknownVertex(self.vertex.clone()))?;
        net.vertices[i].delta_strength = param;
        Ok(net)
    }

    fn parameter_name(&self) -> String {
        format!("delta({})", self.vertex)
    }
}
