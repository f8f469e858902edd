//! Station graph, shortest-path metric and subnetwork overlays.

use std::collections::HashMap;
use std::fmt;

use crate::error::ModelError;
use crate::Tick;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StationId(pub u32);

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubnetworkId(pub u32);

impl fmt::Display for SubnetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: StationId,
    /// Free-form station role (`parking`, `building`, `restaurant`).
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: StationId,
    pub v: StationId,
    pub len: Tick,
}

/// Undirected station graph with a distinguished depot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    depot: StationId,
    index: HashMap<StationId, usize>,
    lengths: HashMap<(StationId, StationId), Tick>,
}

impl Network {
    /// Checks every structural invariant except connectivity, which
    /// [`build_metric`] reports.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>, depot: StationId) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::EmptyNetwork);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(ModelError::DuplicateStation(node.id));
            }
        }
        if !index.contains_key(&depot) {
            return Err(ModelError::UnknownStation(depot));
        }
        let mut lengths = HashMap::with_capacity(edges.len() * 2);
        for e in &edges {
            for s in [e.u, e.v] {
                if !index.contains_key(&s) {
                    return Err(ModelError::UnknownStation(s));
                }
            }
            if e.u == e.v {
                return Err(ModelError::SelfLoop(e.u, e.v));
            }
            if e.len == 0 {
                return Err(ModelError::ZeroLengthEdge(e.u, e.v));
            }
            if lengths.insert((e.u, e.v), e.len).is_some() {
                return Err(ModelError::DuplicateEdge(e.u, e.v));
            }
            lengths.insert((e.v, e.u), e.len);
        }
        Ok(Network {
            nodes,
            edges,
            depot,
            index,
            lengths,
        })
    }

    /// Builds a network from bare ids, without labels.
    pub fn from_edges(
        stations: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32, Tick)>,
        depot: u32,
    ) -> Result<Self, ModelError> {
        let nodes = stations
            .into_iter()
            .map(|id| Node {
                id: StationId(id),
                label: None,
            })
            .collect();
        let edges = edges
            .into_iter()
            .map(|(u, v, len)| Edge {
                u: StationId(u),
                v: StationId(v),
                len,
            })
            .collect();
        Network::new(nodes, edges, StationId(depot))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn depot(&self) -> StationId {
        self.depot
    }

    pub fn contains(&self, s: StationId) -> bool {
        self.index.contains_key(&s)
    }

    pub fn label(&self, s: StationId) -> Option<&str> {
        self.index
            .get(&s)
            .and_then(|&i| self.nodes[i].label.as_deref())
    }

    pub fn edge_length(&self, u: StationId, v: StationId) -> Option<Tick> {
        self.lengths.get(&(u, v)).copied()
    }
}

/// All-pairs shortest-path lengths of a connected network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricClosure {
    index: HashMap<StationId, usize>,
    dist: Vec<Tick>,
    n: usize,
}

impl MetricClosure {
    pub fn get(&self, u: StationId, v: StationId) -> Option<Tick> {
        let (i, j) = (*self.index.get(&u)?, *self.index.get(&v)?);
        Some(self.dist[i * self.n + j])
    }

    /// Shortest-path length between two stations of the network.
    ///
    /// Panics if either station is unknown; use [`MetricClosure::get`] otherwise.
    pub fn dist(&self, u: StationId, v: StationId) -> Tick {
        self.get(u, v)
            .unwrap_or_else(|| panic!("stations {u} and {v} are not both in the metric"))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Floyd-Warshall over the undirected network.
pub fn build_metric(network: &Network) -> Result<MetricClosure, ModelError> {
    let n = network.nodes.len();
    let mut dist: Vec<Option<Tick>> = vec![None; n * n];
    for i in 0..n {
        dist[i * n + i] = Some(0);
    }
    for e in &network.edges {
        let (i, j) = (network.index[&e.u], network.index[&e.v]);
        dist[i * n + j] = Some(e.len);
        dist[j * n + i] = Some(e.len);
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = dist[i * n + k] else { continue };
            for j in 0..n {
                if let Some(kj) = dist[k * n + j] {
                    let via = ik + kj;
                    if dist[i * n + j].is_none_or(|d| via < d) {
                        dist[i * n + j] = Some(via);
                    }
                }
            }
        }
    }
    let dist = dist
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(ModelError::GraphNotConnected)?;
    let index = network.index.clone();
    Ok(MetricClosure { index, dist, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubnetworkKind {
    /// Directed cycle, traversed in list order only.
    Circuit,
    /// Path, traversed in both directions.
    Line,
}

/// A circuit or line overlay on the network with a distinguished origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subnetwork {
    id: SubnetworkId,
    kind: SubnetworkKind,
    stations: Vec<StationId>,
    origin_index: usize,
    /// `offsets[i]` is the distance from `stations[0]` to `stations[i]` along the list.
    offsets: Vec<Tick>,
    length: Tick,
}

impl Subnetwork {
    pub fn new(
        id: SubnetworkId,
        kind: SubnetworkKind,
        stations: Vec<StationId>,
        origin_index: usize,
        network: &Network,
    ) -> Result<Self, ModelError> {
        let bad = |reason: String| ModelError::BadSubnetwork { sub: id, reason };
        if stations.len() < 2 {
            return Err(bad("needs at least two stations".into()));
        }
        if origin_index >= stations.len() {
            return Err(bad(format!("origin index {origin_index} out of range")));
        }
        for (i, s) in stations.iter().enumerate() {
            if !network.contains(*s) {
                return Err(ModelError::UnknownStation(*s));
            }
            if stations[..i].contains(s) {
                return Err(bad(format!("station {s} listed twice")));
            }
        }
        let mut offsets = Vec::with_capacity(stations.len());
        let mut acc = 0;
        offsets.push(0);
        for w in stations.windows(2) {
            let len = network
                .edge_length(w[0], w[1])
                .ok_or_else(|| bad(format!("{}-{} is not an edge", w[0], w[1])))?;
            acc += len;
            offsets.push(acc);
        }
        let length = match kind {
            SubnetworkKind::Line => acc,
            SubnetworkKind::Circuit => {
                let (last, first) = (stations[stations.len() - 1], stations[0]);
                let closing = network
                    .edge_length(last, first)
                    .ok_or_else(|| bad(format!("closing pair {last}-{first} is not an edge")))?;
                acc + closing
            }
        };
        Ok(Subnetwork {
            id,
            kind,
            stations,
            origin_index,
            offsets,
            length,
        })
    }

    /// Origin given by station id rather than list position.
    pub fn with_origin(
        id: SubnetworkId,
        kind: SubnetworkKind,
        stations: Vec<StationId>,
        origin: StationId,
        network: &Network,
    ) -> Result<Self, ModelError> {
        let origin_index = stations
            .iter()
            .position(|&s| s == origin)
            .ok_or(ModelError::NotOnSubnetwork { sub: id, station: origin })?;
        Subnetwork::new(id, kind, stations, origin_index, network)
    }

    pub fn id(&self) -> SubnetworkId {
        self.id
    }

    pub fn kind(&self) -> SubnetworkKind {
        self.kind
    }

    pub fn stations(&self) -> &[StationId] {
        &self.stations
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn origin(&self) -> StationId {
        self.stations[self.origin_index]
    }

    /// `|C|` for a circuit, end-to-end length for a line.
    pub fn length(&self) -> Tick {
        self.length
    }

    pub fn contains(&self, s: StationId) -> bool {
        self.stations.contains(&s)
    }

    pub fn position(&self, s: StationId) -> Option<usize> {
        self.stations.iter().position(|&x| x == s)
    }

    fn pos(&self, s: StationId) -> Result<usize, ModelError> {
        self.position(s).ok_or(ModelError::NotOnSubnetwork {
            sub: self.id,
            station: s,
        })
    }

    /// Directed travel cost from `u` to `v` along a circuit.
    pub fn circuit_distance(&self, u: StationId, v: StationId) -> Result<Tick, ModelError> {
        if self.kind != SubnetworkKind::Circuit {
            return Err(ModelError::NotACircuit(self.id));
        }
        let (i, j) = (self.pos(u)?, self.pos(v)?);
        let (a, b) = (self.offsets[i], self.offsets[j]);
        Ok(if b >= a { b - a } else { self.length - a + b })
    }

    /// Cheapest permitted travel cost between two stations of this subnetwork.
    pub fn travel(&self, u: StationId, v: StationId) -> Result<Tick, ModelError> {
        match self.kind {
            SubnetworkKind::Circuit => self.circuit_distance(u, v),
            SubnetworkKind::Line => {
                let (i, j) = (self.pos(u)?, self.pos(v)?);
                Ok(self.offsets[i].abs_diff(self.offsets[j]))
            }
        }
    }

    /// Station sequence of the cheapest permitted route, both ends included.
    pub fn path(&self, u: StationId, v: StationId) -> Result<Vec<StationId>, ModelError> {
        let (i, j) = (self.pos(u)?, self.pos(v)?);
        let n = self.stations.len();
        let idx: Vec<usize> = match self.kind {
            SubnetworkKind::Circuit => {
                let steps = (j + n - i) % n;
                (0..=steps).map(|k| (i + k) % n).collect()
            }
            SubnetworkKind::Line if i <= j => (i..=j).collect(),
            SubnetworkKind::Line => (j..=i).rev().collect(),
        };
        Ok(idx.into_iter().map(|k| self.stations[k]).collect())
    }

    /// One full round of a circuit starting and ending at `u`.
    pub fn round_from(&self, u: StationId) -> Result<Vec<StationId>, ModelError> {
        if self.kind != SubnetworkKind::Circuit {
            return Err(ModelError::NotACircuit(self.id));
        }
        let i = self.pos(u)?;
        let n = self.stations.len();
        Ok((0..=n).map(|k| self.stations[(i + k) % n]).collect())
    }

    /// Length of the edge `a -> b` if it may be traversed in that direction.
    pub fn step_length(&self, a: StationId, b: StationId) -> Option<Tick> {
        let (i, j) = (self.position(a)?, self.position(b)?);
        let n = self.stations.len();
        match self.kind {
            SubnetworkKind::Circuit if (i + 1) % n == j => Some(if j == 0 {
                self.length - self.offsets[i]
            } else {
                self.offsets[j] - self.offsets[i]
            }),
            SubnetworkKind::Line if i + 1 == j || j + 1 == i => {
                Some(self.offsets[i].abs_diff(self.offsets[j]))
            }
            _ => None,
        }
    }

    /// Next station in the fixed direction of a circuit.
    pub fn next_on_circuit(&self, u: StationId) -> Option<StationId> {
        if self.kind != SubnetworkKind::Circuit {
            return None;
        }
        let i = self.position(u)?;
        Some(self.stations[(i + 1) % self.stations.len()])
    }

    /// Neighbour of `u` on the route toward `target`; `None` when already there.
    pub fn step_toward(&self, u: StationId, target: StationId) -> Option<StationId> {
        let (i, j) = (self.position(u)?, self.position(target)?);
        if i == j {
            return None;
        }
        match self.kind {
            SubnetworkKind::Circuit => self.next_on_circuit(u),
            SubnetworkKind::Line if i < j => Some(self.stations[i + 1]),
            SubnetworkKind::Line => Some(self.stations[i - 1]),
        }
    }

    /// Distance from the origin in the direction of travel.
    ///
    /// For a circuit this is the directed distance from the origin; for a line
    /// it is the distance along the line, so that "away from the origin"
    /// means increasing values.
    pub fn offset_from_origin(&self, s: StationId) -> Option<Tick> {
        let i = self.position(s)?;
        let o = self.origin_index;
        Some(match self.kind {
            SubnetworkKind::Circuit => {
                let (a, b) = (self.offsets[o], self.offsets[i]);
                if b >= a {
                    b - a
                } else {
                    self.length - a + b
                }
            }
            SubnetworkKind::Line => self.offsets[o].abs_diff(self.offsets[i]),
        })
    }

    /// Whether the origin is one of the two ends of a line.
    pub fn origin_at_line_end(&self) -> bool {
        self.kind == SubnetworkKind::Line
            && (self.origin_index == 0 || self.origin_index + 1 == self.stations.len())
    }
}
