use dispersion_core::checkers::{
    check_dispersion, check_exit_counts, check_memory, check_mirror, check_rootpath_children, check_stage1,
    check_termination, run_all, CheckError, Checker,
};
use dispersion_core::engine::{run, SimulationConfig};
use dispersion_core::graph::{gen_complete, gen_path, gen_random_connected, gen_ring, NodeId, Port, PortLabeledGraph};
use dispersion_core::trace::{Outcome, SimulationResult};

fn simulate(g: &PortLabeledGraph, k: usize, root: usize, seed: u64) -> SimulationResult {
    run(g, &SimulationConfig::new(k).root(NodeId(root)).seed(seed)).unwrap()
}

fn assert_all_pass(g: &PortLabeledGraph, r: &SimulationResult) {
    for v in run_all(r, g) {
        assert!(v.pass, "{}: {:?}", v.checker, v.findings);
    }
}

#[test]
fn random_graphs_pass_every_checker() {
    for seed in 0..40u64 {
        let n = 4 + (seed as usize * 7) % 20;
        let m = n - 1 + (seed as usize * 5) % (n * (n - 1) / 2 - n + 2);
        let g = gen_random_connected(n, m, seed).unwrap();
        let k = 1 + (seed as usize * 3) % n;
        let r = simulate(&g, k, seed as usize % n, seed);
        assert_eq!(r.summary.outcome, Outcome::DispersedAllTerminated, "{:?}", r.summary);
        assert_all_pass(&g, &r);
    }
}

#[test]
fn path_prefix_tree() {
    let g = gen_path(4).unwrap();
    let r = simulate(&g, 3, 0, 1);
    assert!(check_stage1(&r, &g).unwrap().pass);
    assert_eq!(r.summary.positions.iter().max(), Some(&NodeId(2)));
}

#[test]
fn path_rooted_at_an_end_has_child_one_inside() {
    let g = gen_path(4).unwrap();
    let r = simulate(&g, 4, 0, 5);
    assert!(check_rootpath_children(&r, &g).unwrap().pass);
    let t2 = r.summary.t2.unwrap();
    let rec = r.record(t2 + 1).unwrap();
    for v in 1..3 {
        let s = rec.robots.iter().find(|s| s.node == NodeId(v) && s.alive).unwrap();
        assert_eq!(s.child, Some(Port(1)));
    }
    let root = rec
        .robots
        .iter()
        .find(|s| s.node == NodeId(0) && s.parent.is_none() && s.alive && s.id != r.last_robot().unwrap());
    assert_eq!(root.unwrap().child, Some(Port(0)));
}

#[test]
fn two_node_path_root_child_is_port_zero() {
    let g = gen_path(2).unwrap();
    let r = simulate(&g, 2, 0, 0);
    let t2 = r.summary.t2.unwrap();
    let root = r
        .record(t2 + 1)
        .unwrap()
        .robots
        .iter()
        .find(|s| s.node == NodeId(0) && s.id != r.last_robot().unwrap())
        .copied();
    assert_eq!(root.unwrap().child, Some(Port(0)));
    assert_eq!(r.summary.rounds, t2 + r.summary.t1.unwrap() + 2);
    let term = check_termination(&r, &g).unwrap();
    assert!(term.pass, "{:?}", term.findings);
    assert!(term.notes.iter().any(|n| n.contains("repair")));
}

#[test]
fn single_robot_is_vacuous() {
    let g = gen_ring(5).unwrap();
    let r = simulate(&g, 1, 3, 0);
    let v = check_mirror(&r, &g).unwrap();
    assert!(v.pass && v.findings.is_empty());
    assert_all_pass(&g, &r);
}

#[test]
fn mirror_reports_classes() {
    let g = gen_complete(6).unwrap();
    let r = simulate(&g, 5, 1, 8);
    let v = check_mirror(&r, &g).unwrap();
    assert!(v.pass, "{:?}", v.findings);
    assert!(v.notes[0].starts_with("I1: "), "{:?}", v.notes);
}

#[test]
fn truncated_trace_is_incomplete() {
    let g = gen_complete(5).unwrap();
    let mut r = simulate(&g, 5, 0, 2);
    let t1 = r.summary.t1.unwrap();
    let t2 = r.summary.t2.unwrap();
    r.trace.truncate((t2 + t1 - 2) as usize);
    assert_eq!(check_mirror(&r, &g), Err(CheckError::TraceIncomplete(t2 + t1 - 1)));
}

#[test]
fn complete_graph_exit_counts() {
    let g = gen_complete(5).unwrap();
    let r = simulate(&g, 5, 0, 4);
    assert!(check_exit_counts(&r, &g).unwrap().pass);
}

#[test]
fn ring_disperses_onto_every_node() {
    let g = gen_ring(8).unwrap();
    let r = simulate(&g, 8, 0, 6);
    assert!(check_dispersion(&r).pass);
    let mut pos = r.summary.positions.clone();
    pos.sort();
    assert_eq!(pos, (0..8).map(NodeId).collect::<Vec<_>>());
}

#[test]
fn round_budget_fails_dispersion() {
    let g = gen_ring(8).unwrap();
    let r = run(&g, &SimulationConfig::new(8).max_rounds(5)).unwrap();
    assert_eq!(r.summary.outcome, Outcome::MaxRoundsExceeded);
    assert!(!check_dispersion(&r).pass);
}

#[test]
fn memory_footprints_match_degree() {
    for (g, bits) in [(gen_complete(9).unwrap(), 31), (gen_ring(6).unwrap(), 21)] {
        let r = simulate(&g, 6, 0, 3);
        assert!(check_memory(&r, &g).unwrap().pass);
        assert!(r.trace.iter().flat_map(|t| &t.robots).all(|s| s.bits == bits));
    }
}

#[test]
fn checker_names_round_trip() {
    for c in Checker::ALL {
        assert_eq!(c.name().parse::<Checker>(), Ok(c));
        assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
    }
    assert!("nope".parse::<Checker>().is_err());
}
