//! Synchronous round/subround scheduler.
//!
//! Every round follows the same skeleton, globally in lockstep:
//!
//! 1. every explorer, returning or acknowledging robot broadcasts a query;
//!    done robots terminate;
//! 2. settled robots answer queries;
//! 3. movers read the answer and take their role step; explorers that got no
//!    answer start leader election instead;
//! 4. settled robots apply control messages, election continues until every
//!    explorer has resolved.
//!
//! A message broadcast in subround `i` is read in subround `i + 1`. Moves are
//! applied together once every robot has decided.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphError, NodeId, Port, PortLabeledGraph};
use crate::robot::{
    encode_state, le_subround, step_acknowledge, step_done, step_explore, step_return, step_settled, CodecError,
    Decision, ElectionOutcome, HeadsSeen, Inbox, LeaderElectionState, Message, ProtocolFault, RobotState, Role,
    SettledReply, Transition,
};
use crate::trace::{
    BroadcastRecord, Event, Outcome, RobotSnapshot, RunSummary, SimulationResult, TraceLevel, TraceRecord,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationConfig {
    pub k: usize,
    pub root: NodeId,
    pub seed: u64,
    /// Defaults to `8m + 2n + 16`, above the protocol's worst case.
    pub max_rounds: Option<u64>,
    /// Defaults to `64 + 16·⌈log₂ k⌉`.
    pub max_subrounds_per_round: Option<u32>,
    pub trace_level: TraceLevel,
}

impl SimulationConfig {
    pub fn new(k: usize) -> Self {
        SimulationConfig {
            k,
            root: NodeId(0),
            seed: 0,
            max_rounds: None,
            max_subrounds_per_round: None,
            trace_level: TraceLevel::Full,
        }
    }

    pub fn root(mut self, root: NodeId) -> Self {
        self.root = root;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_rounds(mut self, max_rounds: u64) -> Self {
        self.max_rounds = Some(max_rounds);
        self
    }

    pub fn max_subrounds(mut self, max_subrounds: u32) -> Self {
        self.max_subrounds_per_round = Some(max_subrounds);
        self
    }

    pub fn trace_level(mut self, level: TraceLevel) -> Self {
        self.trace_level = level;
        self
    }
}

pub fn default_max_subrounds(k: usize) -> u32 {
    let log_k = usize::BITS - k.max(1).saturating_sub(1).leading_zeros();
    64 + 16 * log_k
}

pub fn default_max_rounds(graph: &PortLabeledGraph) -> u64 {
    8 * graph.edge_count() as u64 + 2 * graph.node_count() as u64 + 16
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("k = {k} must be between 1 and n = {n}")]
    BadRobotCount { k: usize, n: usize },
    #[error("root {root} is not a node of a {n}-node graph")]
    BadRoot { root: NodeId, n: usize },
    #[error("max_rounds must be at least 1")]
    NoRounds,
}

/// A protocol violation detected while simulating. Reported in the result,
/// never raised.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineFault {
    #[error("round {round}: robot {robot}: {fault}")]
    Protocol { round: u64, robot: usize, fault: ProtocolFault },
    #[error("round {round}: robot {robot} memory does not fit its layout: {err}")]
    Memory { round: u64, robot: usize, err: CodecError },
    #[error("round {round}: robot {robot} took an invalid port: {err}")]
    BadMove { round: u64, robot: usize, err: GraphError },
    #[error("round {round}: node {node} received two settled replies in one subround")]
    DuplicateReply { round: u64, node: NodeId },
    #[error("round {round}: node {node} received conflicting child ports")]
    ConflictingChild { round: u64, node: NodeId },
    #[error("round {round}: two settled robots at node {node}")]
    TwoSettled { round: u64, node: NodeId },
    #[error("round {round}: leader election still running after {limit} subrounds")]
    SubroundBudget { round: u64, limit: u32 },
    #[error("all robots terminated but positions are not distinct")]
    NotDispersed,
}

/// Everything broadcast at one node during one subround.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeMail {
    queries: u32,
    reply: Option<(usize, SettledReply)>,
    set_child: Option<Port>,
    set_visited: u32,
    terminate: u32,
    starts: u32,
    heads: u32,
}

/// Aggregates one subround's broadcasts at a node. Aggregation is
/// order-independent; at most one settled reply may be present.
pub fn collect_mail(messages: &[(usize, Message)]) -> Result<NodeMail, MailConflict> {
    let mut mail = NodeMail::default();
    for &(sender, msg) in messages {
        mail.add(sender, msg)?;
    }
    Ok(mail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MailConflict {
    DuplicateReply,
    ConflictingChild,
}

impl NodeMail {
    fn add(&mut self, sender: usize, msg: Message) -> Result<(), MailConflict> {
        match msg {
            Message::Query => self.queries += 1,
            Message::SettledReply(r) => {
                if self.reply.replace((sender, r)).is_some() {
                    return Err(MailConflict::DuplicateReply);
                }
            }
            Message::SetChild { port } => {
                if self.set_child.replace(port).is_some_and(|old| old != port) {
                    return Err(MailConflict::ConflictingChild);
                }
            }
            Message::SetVisited => self.set_visited += 1,
            Message::Terminate => self.terminate += 1,
            Message::LeStart => self.starts += 1,
            Message::LeHeads => self.heads += 1,
        }
        Ok(())
    }

    /// What robot `me`, which itself broadcast `own`, hears from the others.
    pub fn inbox_for(&self, me: usize, own: &[Message]) -> Inbox {
        let sent = |m: Message| own.iter().filter(|&&o| o == m).count() as u32;
        let heads = self.heads - sent(Message::LeHeads);
        Inbox {
            query: self.queries > sent(Message::Query),
            reply: self.reply.filter(|&(sender, _)| sender != me).map(|(_, r)| r),
            set_child: self.set_child.filter(|&p| !own.contains(&Message::SetChild { port: p })),
            set_visited: self.set_visited > sent(Message::SetVisited),
            terminate: self.terminate > sent(Message::Terminate),
            le_start: self.starts > sent(Message::LeStart),
            le_heads: match heads {
                0 => HeadsSeen::None,
                1 => HeadsSeen::One,
                _ => HeadsSeen::Many,
            },
        }
    }
}

/// One node-local delivery: the summary `recipient` reads from `messages`
/// (its own broadcasts excluded).
pub fn deliver(messages: &[(usize, Message)], recipient: usize) -> Result<Inbox, MailConflict> {
    let mail = collect_mail(messages)?;
    let own: Vec<Message> = messages.iter().filter(|&&(s, _)| s == recipient).map(|&(_, m)| m).collect();
    Ok(mail.inbox_for(recipient, &own))
}

fn robot_rng(seed: u64, robot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(robot as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct RobotSlot {
    pub state: RobotState,
    pub node: NodeId,
    pub alive: bool,
    rng: ChaCha8Rng,
}

/// What happened during one round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundLog {
    pub round: u64,
    pub subrounds: u32,
    pub broadcasts: Vec<BroadcastRecord>,
    pub events: Vec<Event>,
}

/// Global configuration of one simulation.
#[derive(Debug, Clone)]
pub struct World<'g> {
    graph: &'g PortLabeledGraph,
    robots: Vec<RobotSlot>,
    round: u64,
    max_subrounds: u32,
    max_degree: u32,
    record_broadcasts: bool,
    // settled_at[v]: the settled robot living at node v
    settled_at: Vec<Option<usize>>,
    // node → messages of the previous subround, reused across subrounds
    mail: Vec<Vec<(usize, Message)>>,
    mail_nodes: Vec<NodeId>,
}

impl<'g> World<'g> {
    pub fn new(graph: &'g PortLabeledGraph, config: &SimulationConfig) -> Result<Self, ConfigError> {
        let n = graph.node_count();
        if config.k == 0 || config.k > n {
            return Err(ConfigError::BadRobotCount { k: config.k, n });
        }
        if config.root.0 >= n {
            return Err(ConfigError::BadRoot { root: config.root, n });
        }
        if config.max_rounds == Some(0) {
            return Err(ConfigError::NoRounds);
        }
        let robots = (0..config.k)
            .map(|i| RobotSlot {
                state: RobotState::default(),
                node: config.root,
                alive: true,
                rng: robot_rng(config.seed, i),
            })
            .collect();
        Ok(World {
            graph,
            robots,
            round: 0,
            max_subrounds: config.max_subrounds_per_round.unwrap_or_else(|| default_max_subrounds(config.k)),
            max_degree: graph.max_degree(),
            record_broadcasts: config.trace_level == TraceLevel::Full,
            settled_at: vec![None; n],
            mail: vec![Vec::new(); n],
            mail_nodes: Vec::new(),
        })
    }

    pub fn robots(&self) -> &[RobotSlot] {
        &self.robots
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn alive_count(&self) -> usize {
        self.robots.iter().filter(|r| r.alive).count()
    }

    pub fn snapshot(&self) -> Result<Vec<RobotSnapshot>, EngineFault> {
        self.robots
            .iter()
            .enumerate()
            .map(|(id, r)| {
                let bits = encode_state(&r.state, self.max_degree)
                    .map_err(|err| EngineFault::Memory { round: self.round + 1, robot: id, err })?
                    .len();
                Ok(RobotSnapshot {
                    id,
                    node: r.node,
                    role: r.state.role,
                    dir: r.state.direction,
                    entered: r.state.entered,
                    parent: r.state.parent,
                    child: r.state.child,
                    visited: r.state.visited,
                    alive: r.alive,
                    bits,
                })
            })
            .collect()
    }

    /// Runs every subround of the next round, then applies all moves and
    /// terminations at once.
    pub fn execute_round(&mut self) -> Result<RoundLog, EngineFault> {
        let round = self.round + 1;
        let mut log = RoundLog { round, ..RoundLog::default() };
        let mut decisions: Vec<Decision> = self
            .robots
            .iter()
            .map(|r| if r.alive && r.state.role != Role::Settled { Decision::NotDone } else { Decision::Stay })
            .collect();
        let mut undecided: Vec<usize> = (0..self.robots.len()).filter(|&i| decisions[i] == Decision::NotDone).collect();
        self.clear_mail();

        let mut sub = 0;
        loop {
            sub += 1;
            if sub > self.max_subrounds {
                return Err(EngineFault::SubroundBudget { round, limit: self.max_subrounds });
            }
            let mut outgoing: Vec<(usize, Message)> = Vec::new();

            // settled robots with mail at their node
            let mut active: Vec<usize> =
                self.mail_nodes.iter().filter_map(|v| self.settled_at[v.0]).filter(|&i| self.robots[i].alive).collect();
            active.extend(undecided.iter().copied());

            for &i in &active {
                let node = self.robots[i].node;
                let inbox = self.inbox_for(i, round)?.filtered_for(self.robots[i].state.role);
                let before = self.robots[i].state;
                let mut state = before;
                state.received = inbox;
                encode_state(&state, self.max_degree).map_err(|err| EngineFault::Memory { round, robot: i, err })?;

                let (t, decision) =
                    self.dispatch(i, state, sub).map_err(|fault| EngineFault::Protocol { round, robot: i, fault })?;
                let mut next = t.state;
                next.received = Inbox::default();
                self.robots[i].state = next;

                if before.role == Role::Settled {
                    if decision == Decision::TerminateSelf {
                        decisions[i] = decision;
                    }
                } else if decision != Decision::NotDone {
                    decisions[i] = decision;
                }
                for &msg in &t.broadcasts {
                    outgoing.push((i, msg));
                    if self.record_broadcasts {
                        log.broadcasts.push(BroadcastRecord { id: i, sub, node, msg });
                    }
                }
                if t.root_repair {
                    log.events.push(Event::Repair { robot: i, node });
                }
                if let Some(e) = role_event(before.role, next.role, i, node) {
                    if next.role == Role::Settled {
                        if let Some(j) = self.settled_at[node.0].filter(|&j| self.robots[j].alive) {
                            let _ = j;
                            return Err(EngineFault::TwoSettled { round, node });
                        }
                        self.settled_at[node.0] = Some(i);
                    }
                    log.events.push(e);
                }
            }

            undecided.retain(|&i| decisions[i] == Decision::NotDone);
            self.clear_mail();
            for &(sender, msg) in &outgoing {
                let v = self.robots[sender].node;
                if self.mail[v.0].is_empty() {
                    self.mail_nodes.push(v);
                }
                self.mail[v.0].push((sender, msg));
            }
            if undecided.is_empty() && outgoing.is_empty() {
                break;
            }
        }
        log.subrounds = sub;

        for (i, decision) in decisions.into_iter().enumerate() {
            match decision {
                Decision::Move(port) => {
                    let slot = &mut self.robots[i];
                    let (to, arrival) = self
                        .graph
                        .neighbor_via(slot.node, port)
                        .map_err(|err| EngineFault::BadMove { round, robot: i, err })?;
                    slot.node = to;
                    slot.state.entered = Some(arrival);
                }
                Decision::TerminateSelf => {
                    self.robots[i].alive = false;
                    log.events.push(Event::Terminate { robot: i });
                }
                Decision::Stay | Decision::NotDone => {}
            }
        }
        self.round = round;
        Ok(log)
    }

    fn clear_mail(&mut self) {
        for v in self.mail_nodes.drain(..) {
            self.mail[v.0].clear();
        }
    }

    fn inbox_for(&self, i: usize, round: u64) -> Result<Inbox, EngineFault> {
        let node = self.robots[i].node;
        let messages = &self.mail[node.0];
        if messages.is_empty() {
            return Ok(Inbox::default());
        }
        deliver(messages, i).map_err(|c| match c {
            MailConflict::DuplicateReply => EngineFault::DuplicateReply { round, node },
            MailConflict::ConflictingChild => EngineFault::ConflictingChild { round, node },
        })
    }

    fn dispatch(&mut self, i: usize, state: RobotState, sub: u32) -> Result<(Transition, Decision), ProtocolFault> {
        let degree = self.graph.degree(self.robots[i].node);
        let idle = |state| Transition {
            state,
            broadcasts: Default::default(),
            decision: Decision::NotDone,
            root_repair: false,
        };
        let t = match (state.role, sub) {
            (Role::Settled, _) => step_settled(state, &state.received)?,
            (Role::Done, _) => {
                let decision = step_done(&state)?;
                Transition { decision, ..idle(state) }
            }
            (_, 1) => {
                let mut t = idle(state);
                t.broadcasts.push(Message::Query);
                t
            }
            (_, 2) => idle(state),
            (Role::Return, 3) => step_return(state, state.received.reply)?,
            (Role::Acknowledge, 3) => step_acknowledge(state, state.received.reply, degree)?,
            (Role::Explore, 3) if state.received.reply.is_some() => {
                step_explore(state, state.received.reply, None, degree)?
            }
            (Role::Explore, _) => {
                let coin = self.robots[i].rng.random::<bool>();
                let (le, msg) = le_subround(state.le, &state.received, coin)?;
                let mut next = RobotState { le, ..state };
                match le.outcome() {
                    Some(outcome) => {
                        next.received = Inbox::default();
                        step_explore(next, None, Some(outcome), degree)?
                    }
                    None => {
                        let mut t = idle(next);
                        t.broadcasts.extend(msg);
                        t
                    }
                }
            }
            (role, _) => return Err(ProtocolFault::WrongRole { expected: Role::Explore, actual: role }),
        };
        let decision = t.decision;
        Ok((t, decision))
    }
}

fn role_event(before: Role, after: Role, robot: usize, node: NodeId) -> Option<Event> {
    if before == after {
        return None;
    }
    match after {
        Role::Settled => Some(Event::Settle { robot, node }),
        Role::Return => Some(Event::Return { robot, node }),
        Role::Acknowledge => Some(Event::Acknowledge { robot, node }),
        Role::Done => Some(Event::Done { robot, node }),
        Role::Explore => None,
    }
}

/// Places `k` robots at the root and runs rounds until every robot has
/// terminated, the round budget runs out, or a fault is detected.
pub fn run(graph: &PortLabeledGraph, config: &SimulationConfig) -> Result<SimulationResult, ConfigError> {
    let mut world = World::new(graph, config)?;
    let max_rounds = config.max_rounds.unwrap_or_else(|| default_max_rounds(graph));
    let mut trace = Vec::new();
    let (mut t1, mut t2, mut v_l, mut repair_fired) = (None, None, None, false);

    let fault = loop {
        if world.alive_count() == 0 {
            break None;
        }
        if world.round() >= max_rounds {
            break None;
        }
        let robots = match config.trace_level {
            TraceLevel::Full => match world.snapshot() {
                Ok(s) => s,
                Err(f) => break Some(f),
            },
            _ => Vec::new(),
        };
        let log = match world.execute_round() {
            Ok(log) => log,
            Err(f) => break Some(f),
        };
        for e in &log.events {
            match *e {
                Event::Return { node, .. } => {
                    t1 = Some(log.round);
                    v_l = Some(node);
                }
                Event::Acknowledge { .. } => t2 = Some(log.round),
                Event::Repair { .. } => repair_fired = true,
                _ => {}
            }
        }
        let keep = match config.trace_level {
            TraceLevel::Full => true,
            TraceLevel::Summary => !log.events.is_empty(),
            TraceLevel::None => false,
        };
        if keep {
            trace.push(TraceRecord { round: log.round, robots, broadcasts: log.broadcasts, events: log.events });
        }
    };

    let positions: Vec<NodeId> = world.robots().iter().map(|r| r.node).collect();
    let all_done = world.alive_count() == 0;
    let fault = fault.or_else(|| {
        let mut sorted = positions.clone();
        sorted.sort();
        sorted.dedup();
        (all_done && sorted.len() != positions.len()).then_some(EngineFault::NotDispersed)
    });
    let outcome = match (&fault, all_done) {
        (Some(_), _) => Outcome::Fault,
        (None, true) => Outcome::DispersedAllTerminated,
        (None, false) => Outcome::MaxRoundsExceeded,
    };
    let summary = RunSummary {
        outcome,
        fault: fault.map(|f| f.to_string()),
        t1,
        t2,
        rounds: world.round(),
        v_r: config.root,
        v_l,
        repair_fired,
        positions,
        terminated: world.robots().iter().map(|r| !r.alive).collect(),
        k: config.k,
        seed: config.seed,
        max_degree: graph.max_degree(),
        trace_level: config.trace_level,
    };
    Ok(SimulationResult { summary, trace })
}

/// Outcome of a stand-alone leader election among co-located robots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElectionReport {
    pub leaders: usize,
    pub followers: usize,
    pub alone: usize,
    /// Subrounds from the `start` broadcast up to and including resolution.
    pub subrounds: u32,
}

/// Runs leader election among `k` robots at one node with the engine's coin
/// and delivery rules.
pub fn run_election(k: usize, seed: u64, max_subrounds: u32) -> Result<ElectionReport, EngineFault> {
    let mut rngs: Vec<ChaCha8Rng> = (0..k).map(|i| robot_rng(seed, i)).collect();
    let mut states = vec![LeaderElectionState::default(); k];
    let mut mail: Vec<(usize, Message)> = Vec::new();
    for sub in 1..=max_subrounds {
        let pending = collect_mail(&mail).expect("election traffic never conflicts");
        let mut outgoing = Vec::new();
        for (i, state) in states.iter_mut().enumerate() {
            if state.outcome().is_some() {
                continue;
            }
            let own: Vec<Message> = mail.iter().filter(|&&(s, _)| s == i).map(|&(_, m)| m).collect();
            let inbox = pending.inbox_for(i, &own);
            let coin = rngs[i].random::<bool>();
            let (next, msg) = le_subround(*state, &inbox, coin).map_err(|fault| EngineFault::Protocol {
                round: 1,
                robot: i,
                fault,
            })?;
            *state = next;
            outgoing.extend(msg.map(|m| (i, m)));
        }
        mail = outgoing;
        if states.iter().all(|s| s.outcome().is_some()) {
            let count = |o| states.iter().filter(|s| s.outcome() == Some(o)).count();
            return Ok(ElectionReport {
                leaders: count(ElectionOutcome::Leader),
                followers: count(ElectionOutcome::Follower),
                alone: count(ElectionOutcome::Alone),
                subrounds: sub,
            });
        }
    }
    Err(EngineFault::SubroundBudget { round: 1, limit: max_subrounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_path, gen_ring};

    #[test]
    fn delivery_excludes_own_messages() {
        let starts = [(0, Message::LeStart), (1, Message::LeStart), (2, Message::LeStart)];
        for r in 0..3 {
            let inbox = deliver(&starts, r).unwrap();
            assert!(inbox.le_start);
        }
        let heads = [(0, Message::LeHeads)];
        assert_eq!(deliver(&heads, 1).unwrap().le_heads, HeadsSeen::One);
        assert_eq!(deliver(&heads, 2).unwrap().le_heads, HeadsSeen::One);
        assert!(deliver(&heads, 0).unwrap().is_empty());

        let two = [(0, Message::LeHeads), (3, Message::LeHeads)];
        assert_eq!(deliver(&two, 1).unwrap().le_heads, HeadsSeen::Many);
        assert_eq!(deliver(&two, 0).unwrap().le_heads, HeadsSeen::One);
    }

    #[test]
    fn delivery_is_order_independent() {
        let reply = SettledReply { parent: Some(Port(1)), child: None, visited: false };
        let mut msgs =
            vec![(0, Message::Query), (1, Message::SettledReply(reply)), (2, Message::Query), (2, Message::SetVisited)];
        let a = deliver(&msgs, 0).unwrap();
        msgs.reverse();
        assert_eq!(deliver(&msgs, 0).unwrap(), a);
        assert_eq!(a.reply, Some(reply));
        assert!(a.query && a.set_visited);
        assert_eq!(deliver(&msgs, 1).unwrap().reply, None);
    }

    #[test]
    fn two_replies_conflict() {
        let r = SettledReply { parent: None, child: None, visited: false };
        let msgs = [(0, Message::SettledReply(r)), (1, Message::SettledReply(r))];
        assert_eq!(deliver(&msgs, 2), Err(MailConflict::DuplicateReply));
    }

    #[test]
    fn config_validation() {
        let g = gen_path(3).unwrap();
        assert!(matches!(run(&g, &SimulationConfig::new(0)), Err(ConfigError::BadRobotCount { .. })));
        assert!(matches!(run(&g, &SimulationConfig::new(4)), Err(ConfigError::BadRobotCount { .. })));
        assert!(matches!(run(&g, &SimulationConfig::new(2).root(NodeId(3))), Err(ConfigError::BadRoot { .. })));
        assert_eq!(run(&g, &SimulationConfig::new(2).max_rounds(0)), Err(ConfigError::NoRounds));
    }

    #[test]
    fn single_robot_terminates_in_round_one() {
        let g = gen_path(2).unwrap();
        let r = run(&g, &SimulationConfig::new(1)).unwrap();
        assert_eq!(r.summary.outcome, Outcome::DispersedAllTerminated);
        assert_eq!(r.summary.rounds, 1);
        assert_eq!(r.summary.positions, vec![NodeId(0)]);
        assert_eq!((r.summary.t1, r.summary.t2), (None, None));
    }

    #[test]
    fn two_path_hand_replay() {
        // round 1: election at node 0, follower moves to node 1
        // round 2 = t1: alone at node 1, returns
        // round 3 = t2: at the root, starts acknowledging
        // rounds 4..7: second traversal, termination of r_L at node 1
        let g = gen_path(2).unwrap();
        for seed in 0..20 {
            let r = run(&g, &SimulationConfig::new(2).seed(seed)).unwrap();
            let s = &r.summary;
            assert_eq!(s.outcome, Outcome::DispersedAllTerminated, "{s:?}");
            assert_eq!((s.t1, s.t2, s.rounds), (Some(2), Some(3), 7));
            let mut pos = s.positions.clone();
            pos.sort();
            assert_eq!(pos, vec![NodeId(0), NodeId(1)]);
            assert_eq!(r.trace.len(), 7);
            assert!(s.repair_fired);
        }
    }

    #[test]
    fn first_round_settles_root() {
        for g in [gen_ring(5).unwrap(), gen_complete(4).unwrap()] {
            let mut world = World::new(&g, &SimulationConfig::new(4).seed(9)).unwrap();
            let log = world.execute_round().unwrap();
            let settled: Vec<_> = world.robots().iter().filter(|r| r.state.role == Role::Settled).collect();
            assert_eq!(settled.len(), 1);
            assert_eq!(settled[0].node, NodeId(0));
            assert_eq!(settled[0].state.parent, None);
            assert!(log.subrounds >= 5);
            // the group moved together through port 0
            let movers: Vec<_> = world.robots().iter().filter(|r| r.state.role == Role::Explore).collect();
            assert_eq!(movers.len(), 3);
            let (to, arrival) = g.neighbor_via(NodeId(0), Port(0)).unwrap();
            assert!(movers.iter().all(|r| r.node == to && r.state.entered == Some(arrival)));
        }
    }

    #[test]
    fn done_robot_terminates() {
        let g = gen_path(2).unwrap();
        let mut world = World::new(&g, &SimulationConfig::new(1)).unwrap();
        world.robots[0].state.role = Role::Done;
        let log = world.execute_round().unwrap();
        assert_eq!(world.alive_count(), 0);
        assert_eq!(log.events, vec![Event::Terminate { robot: 0 }]);
        assert_eq!(log.subrounds, 1);
    }

    #[test]
    fn runs_are_replayable() {
        let g = gen_complete(6).unwrap();
        let cfg = SimulationConfig::new(5).seed(42).root(NodeId(2));
        assert_eq!(run(&g, &cfg).unwrap(), run(&g, &cfg).unwrap());
    }

    #[test]
    fn round_budget_is_reported() {
        let g = gen_complete(6).unwrap();
        let r = run(&g, &SimulationConfig::new(6).max_rounds(3)).unwrap();
        assert_eq!(r.summary.outcome, Outcome::MaxRoundsExceeded);
        assert_eq!(r.summary.rounds, 3);
    }

    #[test]
    fn subround_budget_is_a_fault() {
        let g = gen_complete(8).unwrap();
        let r = run(&g, &SimulationConfig::new(8).max_subrounds(4)).unwrap();
        assert_eq!(r.summary.outcome, Outcome::Fault);
        assert!(r.summary.fault.unwrap().contains("leader election"));
    }

    #[test]
    fn summary_trace_keeps_stage_markers() {
        let g = gen_ring(6).unwrap();
        let full = run(&g, &SimulationConfig::new(6).seed(3)).unwrap();
        let summary = run(&g, &SimulationConfig::new(6).seed(3).trace_level(TraceLevel::Summary)).unwrap();
        let none = run(&g, &SimulationConfig::new(6).seed(3).trace_level(TraceLevel::None)).unwrap();
        assert_eq!(full.trace.len() as u64, full.summary.rounds);
        assert!(summary.trace.iter().all(|r| !r.events.is_empty() && r.robots.is_empty()));
        let returns = summary.events().filter(|(_, e)| matches!(e, Event::Return { .. })).count();
        assert_eq!(returns, 1);
        assert!(none.trace.is_empty());
        assert_eq!(none.summary.rounds, full.summary.rounds);
        assert_eq!(none.summary.t1, full.summary.t1);
    }

    #[test]
    fn elections_resolve() {
        let one = run_election(1, 0, 64).unwrap();
        assert_eq!((one.alone, one.subrounds), (1, 2));
        for seed in 0..50 {
            let r = run_election(5, seed, 200).unwrap();
            assert_eq!((r.leaders, r.followers, r.alone), (1, 4, 0));
        }
    }
}
