//! Centralized reference for the stage-1 traversal.
//!
//! Written as an explicit-stack DFS over port orders, deliberately unlike the
//! robots' local rules, so that agreement between the two is meaningful.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{NodeId, Port, PortLabeledGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleTrace {
    /// `walk[i]` is the group's node at the beginning of round `i + 1`; the
    /// last entry is the last visited node, reached at round `walk.len()`.
    pub walk: Vec<NodeId>,
    /// Nodes in the order they were first visited, with that round.
    pub settle_order: Vec<(u64, NodeId)>,
    /// Port through which each visited node was first entered.
    pub parent: Vec<Option<Port>>,
    /// Tree path from the root to the last visited node.
    pub rootpath: Vec<NodeId>,
}

impl OracleTrace {
    pub fn last_node(&self) -> NodeId {
        *self.walk.last().expect("walk starts at the root")
    }

    pub fn visited(&self, v: NodeId) -> bool {
        self.settle_order.iter().any(|&(_, u)| u == v)
    }

    /// Parent node of every visited node except the root.
    pub fn tree_parent(&self, graph: &PortLabeledGraph, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v.0]?;
        graph.neighbor_via(v, p).ok().map(|(u, _)| u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("k = {k} must be between 1 and n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("root {0} is not a node of the graph")]
    BadRoot(NodeId),
}

struct Frame {
    node: NodeId,
    ports: Vec<Port>,
    next: usize,
}

fn port_order(degree: u32, parent: Option<Port>) -> Vec<Port> {
    match parent {
        None => (0..degree).map(Port).collect(),
        Some(p) => (1..degree).map(|i| Port((p.0 + i) % degree)).collect(),
    }
}

pub fn oracle_dfs(graph: &PortLabeledGraph, root: NodeId, k: usize) -> Result<OracleTrace, OracleError> {
    let n = graph.node_count();
    if k == 0 || k > n {
        return Err(OracleError::KTooLarge { k, n });
    }
    if root.0 >= n {
        return Err(OracleError::BadRoot(root));
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[root.0] = true;
    let mut walk = vec![root];
    let mut settle_order = vec![(1, root)];
    let mut stack = vec![Frame { node: root, ports: port_order(graph.degree(root), None), next: 0 }];

    while settle_order.len() < k {
        let frame = stack.last_mut().ok_or(OracleError::KTooLarge { k, n })?;
        let u = frame.node;
        let Some(&port) = frame.ports.get(frame.next) else {
            stack.pop();
            let up = stack.last().ok_or(OracleError::KTooLarge { k, n })?.node;
            walk.push(up);
            continue;
        };
        frame.next += 1;
        let (v, arrival) = graph.neighbor_via(u, port).expect("port below degree");
        walk.push(v);
        if seen[v.0] {
            walk.push(u);
            continue;
        }
        seen[v.0] = true;
        parent[v.0] = Some(arrival);
        settle_order.push((walk.len() as u64, v));
        stack.push(Frame { node: v, ports: port_order(graph.degree(v), Some(arrival)), next: 0 });
    }

    let rootpath = stack.iter().map(|f| f.node).collect();
    Ok(OracleTrace { walk, settle_order, parent, rootpath })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_path, gen_ring, gen_worstcase, worstcase};

    fn nodes(ids: &[usize]) -> Vec<NodeId> {
        ids.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn path_forces_order() {
        let g = gen_path(3).unwrap();
        let o = oracle_dfs(&g, NodeId(0), 3).unwrap();
        assert_eq!(o.walk, nodes(&[0, 1, 2]));
        assert_eq!(o.rootpath, nodes(&[0, 1, 2]));
        assert_eq!(o.parent, vec![None, Some(Port(0)), Some(Port(0))]);
    }

    #[test]
    fn path_from_the_middle_backtracks() {
        let g = gen_path(5).unwrap();
        let o = oracle_dfs(&g, NodeId(2), 5).unwrap();
        // port 0 leads left first; the left branch is a dead end
        assert_eq!(o.walk, nodes(&[2, 1, 0, 1, 2, 3, 4]));
        assert_eq!(o.rootpath, nodes(&[2, 3, 4]));
        assert_eq!(o.settle_order.last(), Some(&(7, NodeId(4))));
    }

    #[test]
    fn ring_goes_around_once() {
        let g = gen_ring(4).unwrap();
        for root in 0..4 {
            let o = oracle_dfs(&g, NodeId(root), 4).unwrap();
            assert_eq!(o.walk.len(), 4);
            let expected: Vec<_> = (0..4).map(|i| NodeId((root + 4 - i) % 4)).collect();
            assert_eq!(o.walk, expected);
        }
    }

    #[test]
    fn visited_neighbor_bounces() {
        let g = gen_complete(3).unwrap();
        let o = oracle_dfs(&g, NodeId(0), 3).unwrap();
        assert_eq!(o.walk.len(), 3);
        assert_eq!(o.settle_order.len(), 3);
        for w in o.walk.windows(2) {
            assert!(g.is_adjacent(w[0], w[1]));
        }
    }

    #[test]
    fn worstcase_route() {
        let k = 7;
        let g = gen_worstcase(k).unwrap();
        let o = oracle_dfs(&g, worstcase::ROOT, k).unwrap();
        assert_eq!(o.walk[1], worstcase::HUB);
        assert_eq!(o.walk[2], worstcase::CLIQUE_ENTRY);
        assert_eq!(o.last_node(), worstcase::leaf(k));
        assert_eq!(o.rootpath, vec![worstcase::ROOT, worstcase::HUB, worstcase::leaf(k)]);
    }

    #[test]
    fn single_robot() {
        let g = gen_path(2).unwrap();
        let o = oracle_dfs(&g, NodeId(1), 1).unwrap();
        assert_eq!(o.walk, nodes(&[1]));
        assert_eq!(o.rootpath, nodes(&[1]));
        assert!(oracle_dfs(&g, NodeId(0), 3).is_err());
    }
}
