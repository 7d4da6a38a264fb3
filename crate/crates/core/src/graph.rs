//! Anonymous port-labeled graphs.
//!
//! Every node numbers its incident edges with ports `0..δ(v)`. Node indices
//! exist only for the simulator's bookkeeping; robot logic never sees them.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulator-internal node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A local edge label at some node. The "no port" value is `Option::<Port>::None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Port(pub u32);

impl Port {
    /// The port that follows `self` in cyclic order at a node of degree `degree`.
    pub fn next(self, degree: u32) -> Port {
        Port((self.0 + 1) % degree)
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {node} uses port {port} more than once")]
    DuplicatePort { node: usize, port: u32 },
    #[error("ports at node {node} are not exactly 0..{degree}")]
    PortGap { node: usize, degree: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("nodes {0} and {1} are joined by more than one edge")]
    MultiEdge(usize, usize),
    #[error("node {node} out of range for a graph of {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("port {port} out of range at node {node} of degree {degree}")]
    PortOutOfRange { node: usize, port: u32, degree: usize },
    #[error("{family} needs at least {min} nodes, got {got}")]
    SizeTooSmall { family: &'static str, min: usize, got: usize },
    #[error("{m} edges is infeasible for a connected simple graph on {n} nodes")]
    InfeasibleEdgeCount { n: usize, m: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// One undirected edge written as `(u, port at u, v, port at v)`.
pub type EdgeSpec = (usize, u32, usize, u32);

/// An anonymous connected simple graph with a port numbering at every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortLabeledGraph {
    // adjacency[v][p] = (neighbor reached through port p, port at that neighbor)
    adjacency: Vec<Vec<(NodeId, Port)>>,
}

impl PortLabeledGraph {
    pub fn build(n: usize, edges: &[EdgeSpec]) -> Result<Self, GraphError> {
        let mut slots: Vec<Vec<Option<(NodeId, Port)>>> = vec![Vec::new(); n];
        let mut seen_pairs = std::collections::HashSet::new();
        for &(u, pu, v, pv) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen_pairs.insert((u.min(v), u.max(v))) {
                return Err(GraphError::MultiEdge(u.min(v), u.max(v)));
            }
            for (node, port, other, other_port) in [(u, pu, v, pv), (v, pv, u, pu)] {
                let table = &mut slots[node];
                let idx = port as usize;
                if idx >= table.len() {
                    table.resize(idx + 1, None);
                }
                if table[idx].is_some() {
                    return Err(GraphError::DuplicatePort { node, port });
                }
                table[idx] = Some((NodeId(other), Port(other_port)));
            }
        }
        let mut adjacency = Vec::with_capacity(n);
        for (node, table) in slots.into_iter().enumerate() {
            let ports: Option<Vec<_>> = table.into_iter().collect();
            match ports {
                Some(ports) => adjacency.push(ports),
                None => {
                    let degree = degree_with_gaps(edges, node);
                    return Err(GraphError::PortGap { node, degree });
                }
            }
        }
        let graph = PortLabeledGraph { adjacency };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: NodeId) -> u32 {
        self.adjacency[v.0].len() as u32
    }

    /// Maximum degree Δ.
    pub fn max_degree(&self) -> u32 {
        self.adjacency.iter().map(|a| a.len() as u32).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.adjacency.len()).map(NodeId)
    }

    /// Follows port `p` out of `v`, returning the neighbor and the port through
    /// which the edge arrives there.
    pub fn neighbor_via(&self, v: NodeId, p: Port) -> Result<(NodeId, Port), GraphError> {
        let table = self.adjacency.get(v.0).ok_or(GraphError::NodeOutOfRange { node: v.0, n: self.node_count() })?;
        table.get(p.0 as usize).copied().ok_or(GraphError::PortOutOfRange { node: v.0, port: p.0, degree: table.len() })
    }

    /// `port(u, v)`: the port at `u` leading to `v`, if they are adjacent.
    pub fn port_to(&self, u: NodeId, v: NodeId) -> Option<Port> {
        self.adjacency[u.0].iter().position(|&(w, _)| w == v).map(|p| Port(p as u32))
    }

    pub fn is_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.port_to(u, v).is_some()
    }

    /// Edges in canonical order: one entry per edge, listed from the endpoint
    /// with the smaller `(node, port)` pair, sorted by that pair.
    pub fn edges(&self) -> Vec<EdgeSpec> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, table) in self.adjacency.iter().enumerate() {
            for (pu, &(v, pv)) in table.iter().enumerate() {
                if (u, pu as u32) < (v.0, pv.0) {
                    out.push((u, pu as u32, v.0, pv.0));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    queue.push_back(v.0);
                }
            }
        }
        count == n
    }
}

fn degree_with_gaps(edges: &[EdgeSpec], node: usize) -> usize {
    edges.iter().map(|&(u, _, v, _)| usize::from(u == node) + usize::from(v == node)).sum()
}

fn check_size(family: &'static str, min: usize, got: usize) -> Result<(), GraphError> {
    if got < min {
        Err(GraphError::SizeTooSmall { family, min, got })
    } else {
        Ok(())
    }
}

/// Path `0 - 1 - ... - n-1`. Interior node `i` has port 0 toward `i-1` and port 1
/// toward `i+1`; endpoints have the single port 0.
pub fn gen_path(n: usize) -> Result<PortLabeledGraph, GraphError> {
    check_size("path", 2, n)?;
    let edges: Vec<_> = (0..n - 1)
        .map(|i| {
            let out = if i == 0 { 0 } else { 1 };
            (i, out, i + 1, 0)
        })
        .collect();
    PortLabeledGraph::build(n, &edges)
}

/// Ring where node `i` has port 0 toward `i-1 mod n` and port 1 toward `i+1 mod n`.
pub fn gen_ring(n: usize) -> Result<PortLabeledGraph, GraphError> {
    check_size("ring", 3, n)?;
    let edges: Vec<_> = (0..n).map(|i| (i, 1, (i + 1) % n, 0)).collect();
    PortLabeledGraph::build(n, &edges)
}

/// Complete graph; each node numbers its neighbors in increasing index order.
pub fn gen_complete(n: usize) -> Result<PortLabeledGraph, GraphError> {
    check_size("complete", 2, n)?;
    PortLabeledGraph::build(n, &clique_edges(&(0..n).collect::<Vec<_>>(), &vec![0; n]))
}

// Clique on `members`; member i's ports start at `offsets[i]` and follow the
// order of the member list.
fn clique_edges(members: &[usize], offsets: &[u32]) -> Vec<EdgeSpec> {
    let mut edges = Vec::new();
    for (a, &u) in members.iter().enumerate() {
        for (b, &v) in members.iter().enumerate().skip(a + 1) {
            // position of v among u's clique neighbors is b-1, of u among v's is a
            edges.push((u, offsets[a] + (b - 1) as u32, v, offsets[b] + a as u32));
        }
    }
    edges
}

/// Node roles inside [`gen_worstcase`] graphs.
pub mod worstcase {
    use super::NodeId;

    pub const ROOT: NodeId = NodeId(0);
    pub const HUB: NodeId = NodeId(1);
    pub const CLIQUE_ENTRY: NodeId = NodeId(2);

    /// The pendant leaf that receives the last robot.
    pub fn leaf(k: usize) -> NodeId {
        NodeId(k - 1)
    }
}

/// The quadratic-time family: a root hanging off a hub of degree 3 whose other
/// two neighbors are a (k−3)-clique and a pendant leaf.
///
/// Node 0 is the root, node 1 the hub, nodes `2..=k-2` the clique (entered at
/// node 2) and node `k-1` the leaf. Ports: root→hub 0, hub→root 0, hub→clique 1,
/// hub→leaf 2. The clique entry reaches the hub through its port 0, so a DFS that
/// enters the clique there leaves it only after exhausting every clique edge.
pub fn gen_worstcase(k: usize) -> Result<PortLabeledGraph, GraphError> {
    check_size("worstcase", 7, k)?;
    let clique: Vec<usize> = (2..=k - 2).collect();
    let mut offsets = vec![0u32; clique.len()];
    offsets[0] = 1;
    let mut edges = vec![(0, 0, 1, 0), (1, 1, 2, 0), (1, 2, k - 1, 0)];
    edges.extend(clique_edges(&clique, &offsets));
    PortLabeledGraph::build(k, &edges)
}

/// A connected simple graph with exactly `m` edges: a random spanning tree plus
/// uniformly chosen extra edges, with every node's ports randomly permuted.
pub fn gen_random_connected(n: usize, m: usize, seed: u64) -> Result<PortLabeledGraph, GraphError> {
    let max_edges = n * n.saturating_sub(1) / 2;
    if n == 0 || m + 1 < n || m > max_edges {
        return Err(GraphError::InfeasibleEdgeCount { n, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut present = vec![vec![false; n]; n];
    let mut pairs = Vec::with_capacity(m);
    for i in 1..n {
        let (u, v) = (order[i], order[rng.random_range(0..i)]);
        present[u][v] = true;
        present[v][u] = true;
        pairs.push((u, v));
    }
    let mut extra: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !present[u][v]).collect();
    extra.shuffle(&mut rng);
    pairs.extend(extra.into_iter().take(m - (n - 1)));

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, v)) in pairs.iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut port_of = vec![[0u32; 2]; pairs.len()];
    for (node, edges) in incident.iter_mut().enumerate() {
        edges.shuffle(&mut rng);
        for (port, &e) in edges.iter().enumerate() {
            let side = usize::from(pairs[e].0 != node);
            port_of[e][side] = port as u32;
        }
    }
    let edges: Vec<EdgeSpec> = pairs.iter().zip(&port_of).map(|(&(u, v), &[pu, pv])| (u, pu, v, pv)).collect();
    PortLabeledGraph::build(n, &edges)
}

/// Canonical text form: `n m` header, then one `u p_u v p_v` line per edge.
pub fn write_graph(g: &PortLabeledGraph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.node_count(), edges.len());
    for (u, pu, v, pv) in edges {
        out.push_str(&format!("{u} {pu} {v} {pv}\n"));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<PortLabeledGraph, GraphError> {
    let syntax = |line: usize, msg: &str| GraphError::Syntax { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
    let header = parse_fields::<usize>(header, 2).ok_or_else(|| syntax(1, "expected `n m`"))?;
    let (n, m) = (header[0], header[1]);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) =
            lines.next().ok_or_else(|| syntax(edges.len() + 2, "fewer edge lines than the header announces"))?;
        let f = parse_fields::<u64>(line, 4).ok_or_else(|| syntax(no, "expected `u p_u v p_v`"))?;
        let port = |x: u64| u32::try_from(x).map_err(|_| syntax(no, "port does not fit in 32 bits"));
        edges.push((f[0] as usize, port(f[1])?, f[2] as usize, port(f[3])?));
    }
    if let Some((no, _)) = lines.next() {
        return Err(syntax(no, "more edge lines than the header announces"));
    }
    PortLabeledGraph::build(n, &edges)
}

fn parse_fields<T: FromStr>(line: &str, count: usize) -> Option<Vec<T>> {
    let fields: Vec<T> = line.split(' ').map(|f| f.parse().ok()).collect::<Option<_>>()?;
    (fields.len() == count).then_some(fields)
}

/// Inline graph description of the form `gen:<family>:<params>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Path(usize),
    Ring(usize),
    Complete(usize),
    Worstcase(usize),
    Random { n: usize, m: usize, seed: u64 },
}

impl GraphSpec {
    pub fn generate(&self) -> Result<PortLabeledGraph, GraphError> {
        match *self {
            GraphSpec::Path(n) => gen_path(n),
            GraphSpec::Ring(n) => gen_ring(n),
            GraphSpec::Complete(n) => gen_complete(n),
            GraphSpec::Worstcase(k) => gen_worstcase(k),
            GraphSpec::Random { n, m, seed } => gen_random_connected(n, m, seed),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u64, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("`{s}`: missing parameter"))?
                .parse()
                .map_err(|_| format!("`{s}`: parameter {i} is not a number"))
        };
        let arity = |want: usize| {
            if parts.len() == want {
                Ok(())
            } else {
                Err(format!("`{s}`: expected {} parameter(s)", want - 2))
            }
        };
        if parts.first() != Some(&"gen") {
            return Err(format!("`{s}`: graph specs start with `gen:`"));
        }
        match parts.get(1).copied() {
            Some("path") => arity(3).and(Ok(GraphSpec::Path(num(2)? as usize))),
            Some("ring") => arity(3).and(Ok(GraphSpec::Ring(num(2)? as usize))),
            Some("complete") => arity(3).and(Ok(GraphSpec::Complete(num(2)? as usize))),
            Some("worstcase") => arity(3).and(Ok(GraphSpec::Worstcase(num(2)? as usize))),
            Some("random") => {
                arity(5).and(Ok(GraphSpec::Random { n: num(2)? as usize, m: num(3)? as usize, seed: num(4)? }))
            }
            _ => Err(format!("`{s}`: unknown family (path, ring, complete, worstcase, random)")),
        }
    }
}
