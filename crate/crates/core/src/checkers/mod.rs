//! Trace validators for the structural properties of the protocol.
//!
//! Checkers read recorded traces only, never engine state, so they can judge
//! traces produced by any implementation of the trace format. Each returns a
//! [`Verdict`] listing every violation found (round, node, robot).

mod oracle;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Port, PortLabeledGraph};
use crate::robot::{memory_bound_bits, Direction, Role};
use crate::trace::{Event, Outcome, RobotSnapshot, SimulationResult, TraceRecord};

pub use oracle::{oracle_dfs, OracleError, OracleTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Checker {
    Stage1,
    Rootpath,
    Mirror,
    Termination,
    ExitCounts,
    Dispersion,
    Memory,
}

impl Checker {
    pub const ALL: [Checker; 7] = [
        Checker::Stage1,
        Checker::Rootpath,
        Checker::Mirror,
        Checker::Termination,
        Checker::ExitCounts,
        Checker::Dispersion,
        Checker::Memory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Checker::Stage1 => "stage1",
            Checker::Rootpath => "rootpath",
            Checker::Mirror => "mirror",
            Checker::Termination => "termination",
            Checker::ExitCounts => "exit-counts",
            Checker::Dispersion => "dispersion",
            Checker::Memory => "memory",
        }
    }

    pub fn check(self, run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
        match self {
            Checker::Stage1 => check_stage1(run, graph),
            Checker::Rootpath => check_rootpath_children(run, graph),
            Checker::Mirror => check_mirror(run, graph),
            Checker::Termination => check_termination(run, graph),
            Checker::ExitCounts => check_exit_counts(run, graph),
            Checker::Dispersion => Ok(check_dispersion(run)),
            Checker::Memory => check_memory(run, graph),
        }
    }

    /// Like [`Checker::check`], with an unusable trace reported as a failure.
    pub fn verdict(self, run: &SimulationResult, graph: &PortLabeledGraph) -> Verdict {
        self.check(run, graph).unwrap_or_else(|e| Verdict {
            checker: self,
            pass: false,
            findings: vec![e.to_string()],
            notes: vec![],
        })
    }
}

impl fmt::Display for Checker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Checker {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Checker::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Checker::ALL.iter().map(|c| c.name()).collect();
            format!("unknown checker `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub checker: Checker,
    pub pass: bool,
    pub findings: Vec<String>,
    /// Informational remarks that do not affect `pass`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    fn from_findings(checker: Checker, findings: Vec<String>) -> Self {
        Verdict { checker, pass: findings.is_empty(), findings, notes: Vec::new() }
    }

    fn vacuous(checker: Checker) -> Self {
        Verdict { checker, pass: true, findings: Vec::new(), notes: vec!["vacuous: single robot".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("trace has no record for round {0}")]
    TraceIncomplete(u64),
    #[error("trace has no robot snapshots (recorded below full level)")]
    NoSnapshots,
    #[error("summary lacks {0}")]
    MissingStage(&'static str),
    #[error("no robot changed to the return role")]
    MissingLastRobot,
    #[error("run ended in a fault: {0}")]
    Faulted(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub fn run_all(run: &SimulationResult, graph: &PortLabeledGraph) -> Vec<Verdict> {
    Checker::ALL.iter().map(|c| c.verdict(run, graph)).collect()
}

fn record(run: &SimulationResult, round: u64) -> Result<&TraceRecord, CheckError> {
    let rec = run.record(round).ok_or(CheckError::TraceIncomplete(round))?;
    if rec.robots.is_empty() {
        return Err(CheckError::NoSnapshots);
    }
    Ok(rec)
}

fn no_fault(run: &SimulationResult) -> Result<(), CheckError> {
    match run.summary.outcome {
        Outcome::Fault => Err(CheckError::Faulted(run.summary.fault.clone().unwrap_or_default())),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy)]
struct Stages {
    t1: u64,
    t2: u64,
    last: usize,
}

fn stages(run: &SimulationResult, need_t2: bool) -> Result<Stages, CheckError> {
    let t1 = run.summary.t1.ok_or(CheckError::MissingStage("t1"))?;
    let t2 = match run.summary.t2 {
        Some(t2) => t2,
        None if need_t2 => return Err(CheckError::MissingStage("t2")),
        None => u64::MAX,
    };
    let last = run.last_robot().ok_or(CheckError::MissingLastRobot)?;
    Ok(Stages { t1, t2, last })
}

fn robot(rec: &TraceRecord, id: usize) -> Result<&RobotSnapshot, CheckError> {
    rec.robots.iter().find(|r| r.id == id).ok_or(CheckError::NoSnapshots)
}

/// Settled robots at `v` in `rec`, terminated ones included.
fn settled_at(rec: &TraceRecord, v: NodeId) -> impl Iterator<Item = &RobotSnapshot> {
    rec.robots.iter().filter(move |r| r.node == v && r.role == Role::Settled)
}

fn active_settled_at(rec: &TraceRecord, v: NodeId) -> Option<&RobotSnapshot> {
    settled_at(rec, v).find(|r| r.alive)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Group {
    node: NodeId,
    dir: Direction,
    entered: Option<Port>,
    size: usize,
}

/// The exploring group of a stage-1 record, after checking co-location.
fn group(rec: &TraceRecord) -> Result<Group, String> {
    let mut explorers = rec.robots.iter().filter(|r| r.alive && r.role == Role::Explore);
    let first = explorers.next().ok_or_else(|| format!("round {}: no exploring robot", rec.round))?;
    let mut size = 1;
    for r in explorers {
        if (r.node, r.dir, r.entered) != (first.node, first.dir, first.entered) {
            return Err(format!(
                "round {}: explorers {} and {} disagree (node {} vs {})",
                rec.round, first.id, r.id, first.node, r.node
            ));
        }
        size += 1;
    }
    Ok(Group { node: first.node, dir: first.dir, entered: first.entered, size })
}

/// Rootpath `v_R, ..., v_L` rebuilt from the parent ports recorded at round
/// `t1` and the port through which the last robot entered `v_L`.
fn trace_rootpath(
    run: &SimulationResult,
    graph: &PortLabeledGraph,
    st: Stages,
) -> Result<Result<Vec<NodeId>, String>, CheckError> {
    let rec = record(run, st.t1)?;
    let r_l = robot(rec, st.last)?;
    let root = run.summary.v_r;
    let mut path = vec![r_l.node];
    let mut cur = r_l.node;
    let mut step = r_l.entered;
    while cur != root {
        let Some(p) = step else {
            return Ok(Err(format!("round {}: node {cur} has no parent port", st.t1)));
        };
        let Ok((up, _)) = graph.neighbor_via(cur, p) else {
            return Ok(Err(format!("round {}: node {cur} parent port {p} does not exist", st.t1)));
        };
        if path.len() > run.summary.k {
            return Ok(Err(format!("round {}: parent ports form a cycle", st.t1)));
        }
        path.push(up);
        cur = up;
        step = active_settled_at(rec, up).and_then(|r| r.parent);
        if cur != root && step.is_none() {
            return Ok(Err(format!("round {}: rootpath node {cur} has no settled robot with a parent", st.t1)));
        }
    }
    path.reverse();
    Ok(Ok(path))
}

/// Dispersion at `t1`, the shape of the settled tree, and the group's walk
/// against the oracle.
pub fn check_stage1(run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    no_fault(run)?;
    let k = run.summary.k;
    if k == 1 {
        return Ok(Verdict::vacuous(Checker::Stage1));
    }
    let st = stages(run, false)?;
    let root = run.summary.v_r;
    let oracle = oracle_dfs(graph, root, k)?;
    let mut findings = Vec::new();

    if st.t1 != oracle.walk.len() as u64 {
        findings.push(format!("t1 = {} but the reference walk takes {} rounds", st.t1, oracle.walk.len()));
    }
    for i in 1..=st.t1 {
        let rec = record(run, i)?;
        match group(rec) {
            Err(f) => findings.push(f),
            Ok(g) => match oracle.walk.get(i as usize - 1) {
                Some(&want) if want == g.node => {}
                Some(&want) => findings.push(format!("round {i}: group at node {} but reference at {want}", g.node)),
                None => findings.push(format!("round {i}: group at node {} after the reference walk ended", g.node)),
            },
        }
    }
    let settle_events: Vec<(u64, NodeId)> = run
        .events()
        .filter_map(|(round, e)| match e {
            Event::Settle { node, .. } => Some((round, node)),
            _ => None,
        })
        .collect();
    if settle_events[..] != oracle.settle_order[..k - 1] {
        findings.push(format!(
            "settle rounds/nodes {settle_events:?} differ from the reference {:?}",
            &oracle.settle_order[..k - 1]
        ));
    }

    let rec = record(run, st.t1)?;
    let alive: Vec<&RobotSnapshot> = rec.robots.iter().filter(|r| r.alive).collect();
    let mut occupied: HashMap<NodeId, &RobotSnapshot> = HashMap::new();
    for r in &alive {
        if let Some(other) = occupied.insert(r.node, r) {
            findings.push(format!("round {}: robots {} and {} share node {}", st.t1, other.id, r.id, r.node));
        }
    }
    let settled: Vec<&RobotSnapshot> = alive.iter().copied().filter(|r| r.role == Role::Settled).collect();
    let others: Vec<usize> = alive.iter().filter(|r| r.role != Role::Settled).map(|r| r.id).collect();
    if alive.len() != k || settled.len() != k - 1 || others != [st.last] {
        findings.push(format!(
            "round {}: expected {} settled robots plus robot {}, found {} settled and {others:?}",
            st.t1,
            k - 1,
            st.last,
            settled.len()
        ));
    }
    if !induces_connected(graph, &occupied.keys().copied().collect()) {
        findings.push(format!("round {}: occupied nodes are not connected", st.t1));
    }

    let r_l = robot(rec, st.last)?;
    let mut tree_edges = vec![(r_l.node, r_l.entered)];
    tree_edges.extend(settled.iter().map(|r| (r.node, r.parent)));
    for (v, p) in tree_edges {
        if oracle.parent.get(v.0) != Some(&p) || !oracle.visited(v) {
            findings.push(format!(
                "round {}: node {v} has parent port {p:?}, reference tree says {:?}",
                st.t1,
                oracle.parent.get(v.0).copied().flatten()
            ));
            continue;
        }
        if let Some(p) = p {
            match graph.neighbor_via(v, p) {
                Ok((u, _)) if occupied.contains_key(&u) => {
                    if u == r_l.node {
                        findings.push(format!("round {}: node {} of the last robot is not a leaf", st.t1, u));
                    }
                }
                _ => findings.push(format!("round {}: parent edge of node {v} leaves the occupied set", st.t1)),
            }
        } else if v != root {
            findings.push(format!("round {}: non-root node {v} has no parent port", st.t1));
        }
    }
    Ok(Verdict::from_findings(Checker::Stage1, findings))
}

fn induces_connected(graph: &PortLabeledGraph, nodes: &BTreeSet<NodeId>) -> bool {
    let Some(&start) = nodes.first() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for p in 0..graph.degree(u) {
            let (v, _) = graph.neighbor_via(u, Port(p)).expect("port below degree");
            if nodes.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == nodes.len()
}

/// State at the end of stage 2: the last robot back at the root and child
/// ports installed exactly along the rootpath.
///
/// The root's child port is installed during round `t2` itself, so children
/// are read from the record of round `t2 + 1`.
pub fn check_rootpath_children(run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    no_fault(run)?;
    if run.summary.k == 1 {
        return Ok(Verdict::vacuous(Checker::Rootpath));
    }
    let st = stages(run, true)?;
    let root = run.summary.v_r;
    let mut findings = Vec::new();

    let at_t2 = robot(record(run, st.t2)?, st.last)?;
    if at_t2.node != root || at_t2.role != Role::Return {
        findings.push(format!(
            "round {}: robot {} is {} at node {}, expected return at the root {root}",
            st.t2,
            st.last,
            at_t2.role.as_str(),
            at_t2.node
        ));
    }
    let rec = record(run, st.t2 + 1)?;
    let r_l = robot(rec, st.last)?;
    if (r_l.node, r_l.role, r_l.dir, r_l.entered) != (root, Role::Acknowledge, Direction::Forward, None) {
        findings.push(format!(
            "round {}: robot {} should be acknowledging at the root with direction forward and no entry port",
            st.t2 + 1,
            st.last
        ));
    }

    let path = match trace_rootpath(run, graph, st)? {
        Ok(path) => path,
        Err(f) => {
            findings.push(f);
            return Ok(Verdict::from_findings(Checker::Rootpath, findings));
        }
    };
    let v_l = *path.last().expect("path ends at the last node");
    let child_of: HashMap<NodeId, Port> =
        path.windows(2).map(|w| (w[0], graph.port_to(w[0], w[1]).expect("rootpath steps are edges"))).collect();

    let tree_nodes: BTreeSet<NodeId> =
        record(run, st.t1)?.robots.iter().filter(|r| r.alive && r.role == Role::Settled).map(|r| r.node).collect();
    for &v in &tree_nodes {
        let Some(r) = active_settled_at(rec, v) else {
            findings.push(format!("round {}: tree node {v} has no active settled robot", st.t2 + 1));
            continue;
        };
        let want = child_of.get(&v).copied();
        if r.child != want {
            let place = if want.is_some() { "rootpath" } else { "non-rootpath" };
            findings.push(format!(
                "round {}: {place} robot {} at node {v} has child {:?}, expected {want:?}",
                st.t2 + 1,
                r.id,
                r.child
            ));
        }
    }
    if tree_nodes.contains(&v_l) {
        findings.push(format!("round {}: last node {v_l} hosts a settled robot", st.t1));
    }
    Ok(Verdict::from_findings(Checker::Rootpath, findings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MirrorClass {
    I1,
    I2,
    I3,
}

/// Round `i` of stage 1 against round `t2 + i` of stage 3 for `1 ≤ i < t1`.
pub fn check_mirror(run: &SimulationResult, _graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    no_fault(run)?;
    if run.summary.k == 1 {
        return Ok(Verdict::vacuous(Checker::Mirror));
    }
    let st = stages(run, true)?;
    record(run, st.t2 + st.t1 - 1)?;
    let mut findings = Vec::new();
    let mut counts = [0usize; 3];

    for i in 1..st.t1 {
        let first = record(run, i)?;
        let third = record(run, st.t2 + i)?;
        let j = st.t2 + i;
        let g = match group(first) {
            Ok(g) => g,
            Err(f) => {
                findings.push(f);
                continue;
            }
        };
        let r = robot(third, st.last)?;
        if (r.node, r.dir, r.entered) != (g.node, g.dir, g.entered) {
            findings.push(format!(
                "round {i} vs {j}: group at node {} ({:?}, entered {:?}), robot {} at node {} ({:?}, entered {:?})",
                g.node, g.dir, g.entered, r.id, r.node, r.dir, r.entered
            ));
            continue;
        }
        let u = g.node;
        let class = match (active_settled_at(first, u).is_some(), g.dir) {
            (false, _) => MirrorClass::I1,
            (true, Direction::Forward) => MirrorClass::I2,
            (true, Direction::Backward) => MirrorClass::I3,
        };
        let later = active_settled_at(third, u);
        let ok = match class {
            MirrorClass::I1 => g.size > 1 && g.dir == Direction::Forward && later.is_some_and(|s| !s.visited),
            MirrorClass::I2 => {
                g.entered.is_some()
                    && (later.is_some_and(|s| s.visited) || (later.is_none() && settled_at(third, u).next().is_some()))
            }
            MirrorClass::I3 => g.entered.is_some() && later.is_some_and(|s| s.visited),
        };
        if ok {
            counts[class as usize] += 1;
        } else {
            findings.push(format!("round {i} vs {j}: node {u} violates the {class:?} side conditions"));
        }
    }
    let mut v = Verdict::from_findings(Checker::Mirror, findings);
    v.notes.push(format!("I1: {}, I2: {}, I3: {}", counts[0], counts[1], counts[2]));
    Ok(v)
}

/// Settled robots gone by `t2 + t1`, the last robot terminating at `v_L` at
/// `t2 + t1 + 2`, and final positions equal to the reference settle nodes.
pub fn check_termination(run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    no_fault(run)?;
    let s = &run.summary;
    let mut findings = Vec::new();
    if s.outcome != Outcome::DispersedAllTerminated {
        findings.push(format!("outcome is {:?}", s.outcome));
        return Ok(Verdict::from_findings(Checker::Termination, findings));
    }
    let oracle = oracle_dfs(graph, s.v_r, s.k)?;
    let want: BTreeSet<NodeId> = oracle.settle_order.iter().map(|&(_, v)| v).collect();
    let got: BTreeSet<NodeId> = s.positions.iter().copied().collect();
    if got != want {
        findings.push(format!("final positions {got:?} differ from the reference settle nodes {want:?}"));
    }
    if s.k == 1 {
        if s.rounds != 1 {
            findings.push(format!("a single robot should stop in round 1, took {}", s.rounds));
        }
        return Ok(Verdict::from_findings(Checker::Termination, findings));
    }

    let st = stages(run, true)?;
    let end = st.t2 + st.t1;
    let v_l = oracle.last_node();
    if s.rounds != end + 2 {
        findings.push(format!("run took {} rounds, expected t2 + t1 + 2 = {}", s.rounds, end + 2));
    }
    if s.v_l != Some(v_l) || s.positions.get(st.last) != Some(&v_l) {
        findings.push(format!("robot {} should finish at the last node {v_l}", st.last));
    }
    for r in &record(run, end)?.robots {
        if r.id != st.last && r.alive {
            findings.push(format!("round {end}: settled robot {} at node {} is still active", r.id, r.node));
        }
    }
    let last_events: Vec<(u64, Event)> = run.events().filter(|(_, e)| e.robot() == st.last).collect();
    let done = last_events.iter().find(|(_, e)| matches!(e, Event::Done { .. })).map(|&(r, _)| r);
    let term = last_events.iter().find(|(_, e)| matches!(e, Event::Terminate { .. })).map(|&(r, _)| r);
    if done != Some(end + 1) {
        findings.push(format!("robot {} became done in round {done:?}, expected {}", st.last, end + 1));
    }
    if term != Some(end + 2) {
        findings.push(format!("robot {} terminated in round {term:?}, expected {}", st.last, end + 2));
    }
    if let Ok(rec) = record(run, end + 2) {
        let r = robot(rec, st.last)?;
        if r.node != v_l || r.role != Role::Done {
            findings.push(format!("round {}: robot {} should be done at node {v_l}", end + 2, st.last));
        }
    }
    let mut v = Verdict::from_findings(Checker::Termination, findings);
    if s.repair_fired {
        v.notes.push("root-termination repair fired".into());
    }
    Ok(v)
}

/// Per-node exit counts of the stage-1 group and the direction of re-entries.
pub fn check_exit_counts(run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    no_fault(run)?;
    if run.summary.k == 1 {
        return Ok(Verdict::vacuous(Checker::ExitCounts));
    }
    let st = stages(run, false)?;
    let mut findings = Vec::new();
    let path = match trace_rootpath(run, graph, st)? {
        Ok(path) => path,
        Err(f) => return Ok(Verdict::from_findings(Checker::ExitCounts, vec![f])),
    };
    let v_l = *path.last().expect("path ends at the last node");
    let child_of: HashMap<NodeId, Port> =
        path.windows(2).map(|w| (w[0], graph.port_to(w[0], w[1]).expect("rootpath steps are edges"))).collect();
    let at_t1 = record(run, st.t1)?;
    let parent_of: HashMap<NodeId, Port> = at_t1
        .robots
        .iter()
        .filter(|r| r.alive && r.role == Role::Settled)
        .filter_map(|r| Some((r.node, r.parent?)))
        .collect();

    let mut walk = Vec::new();
    for i in 1..=st.t1 {
        match group(record(run, i)?) {
            Ok(g) => walk.push(g),
            Err(f) => return Ok(Verdict::from_findings(Checker::ExitCounts, vec![f])),
        }
    }
    let mut parent_exits: HashMap<NodeId, u32> = HashMap::new();
    let mut child_exits: HashMap<NodeId, u32> = HashMap::new();
    // nodes after which every return must be forward, with the round of exit
    let mut sealed: HashMap<NodeId, u64> = HashMap::new();
    for (idx, pair) in walk.windows(2).enumerate() {
        let (round, from, to) = (idx as u64 + 1, pair[0], pair[1]);
        if let Some(&since) = sealed.get(&to.node) {
            if to.dir != Direction::Forward {
                findings.push(format!(
                    "round {}: group re-entered node {} backward after sealing it in round {since}",
                    round + 1,
                    to.node
                ));
            }
        }
        let Some(port) = graph.port_to(from.node, to.node) else {
            findings.push(format!("round {round}: group jumped from node {} to {}", from.node, to.node));
            continue;
        };
        let u = from.node;
        if parent_of.get(&u) == Some(&port) && !child_of.contains_key(&u) {
            *parent_exits.entry(u).or_default() += 1;
            if to.dir == Direction::Backward {
                sealed.entry(u).or_insert(round);
            }
        }
        if child_of.get(&u) == Some(&port) {
            *child_exits.entry(u).or_default() += 1;
            if to.dir == Direction::Forward {
                sealed.entry(u).or_insert(round);
            }
        }
    }
    for &v in parent_of.keys() {
        if child_of.contains_key(&v) {
            continue;
        }
        let n = parent_exits.get(&v).copied().unwrap_or(0);
        if n != 1 {
            findings.push(format!("non-rootpath node {v} was left via its parent port {n} times"));
        }
    }
    for &v in path.iter().filter(|&&v| v != v_l) {
        let n = child_exits.get(&v).copied().unwrap_or(0);
        if n != 1 {
            findings.push(format!("rootpath node {v} was left via its child port {n} times"));
        }
    }
    Ok(Verdict::from_findings(Checker::ExitCounts, findings))
}

/// Final configuration: `k` distinct nodes, every robot terminated.
pub fn check_dispersion(run: &SimulationResult) -> Verdict {
    let s = &run.summary;
    let mut findings = Vec::new();
    if s.outcome != Outcome::DispersedAllTerminated {
        findings.push(format!("outcome is {:?}", s.outcome));
    }
    if s.positions.len() != s.k {
        findings.push(format!("{} positions for {} robots", s.positions.len(), s.k));
    }
    let mut first_at: HashMap<NodeId, usize> = HashMap::new();
    for (id, &v) in s.positions.iter().enumerate() {
        if let Some(other) = first_at.insert(v, id) {
            findings.push(format!("robots {other} and {id} both end at node {v}"));
        }
    }
    for (id, done) in s.terminated.iter().enumerate() {
        if !done {
            findings.push(format!("robot {id} never terminated"));
        }
    }
    Verdict::from_findings(Checker::Dispersion, findings)
}

/// Every recorded footprint within `5·⌈log₂ max(Δ,2)⌉ + 16` bits.
pub fn check_memory(run: &SimulationResult, graph: &PortLabeledGraph) -> Result<Verdict, CheckError> {
    let delta = graph.max_degree();
    let bound = memory_bound_bits(delta);
    let mut findings = Vec::new();
    if run.summary.max_degree != delta {
        findings.push(format!("summary max degree {} but the graph has {delta}", run.summary.max_degree));
    }
    if run.trace.is_empty() || run.trace.iter().all(|r| r.robots.is_empty()) {
        return Err(CheckError::NoSnapshots);
    }
    for rec in &run.trace {
        for r in &rec.robots {
            if r.bits > bound {
                findings.push(format!(
                    "round {}: robot {} at node {} uses {} bits, bound is {bound}",
                    rec.round, r.id, r.node, r.bits
                ));
            }
        }
    }
    Ok(Verdict::from_findings(Checker::Memory, findings))
}
