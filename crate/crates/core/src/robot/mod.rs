//! The per-robot dispersion protocol.
//!
//! A robot's whole memory is a [`RobotState`]. The step functions below are pure:
//! they take the state plus what the robot heard this subround and return the
//! new state, the messages to broadcast, and what to do at the end of the round.
//! Scheduling (which step runs in which subround) belongs to the engine.

mod election;
mod memory;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Port;

pub use election::{le_subround, ElectionOutcome, LePhase, LeaderElectionState};
pub use memory::{
    decode_state, encode_state, memory_bound_bits, memory_footprint_bits, port_width, CodecError, PackedState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Explore,
    Settled,
    Return,
    Acknowledge,
    Done,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Explore => "explore",
            Role::Settled => "settled",
            Role::Return => "return",
            Role::Acknowledge => "acknowledge",
            Role::Done => "done",
        }
    }

    /// Whether the protocol ever changes a role from `self` to `next`.
    pub fn can_become(self, next: Role) -> bool {
        use Role::*;
        matches!((self, next), (Explore, Settled) | (Explore, Return) | (Return, Acknowledge) | (Acknowledge, Done))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "bwd")]
    Backward,
}

/// The payload a settled robot broadcasts when queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SettledReply {
    pub parent: Option<Port>,
    pub child: Option<Port>,
    pub visited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Message {
    Query,
    SettledReply(SettledReply),
    SetChild { port: Port },
    SetVisited,
    Terminate,
    LeStart,
    LeHeads,
}

/// How many `heads` messages arrived, saturating at two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum HeadsSeen {
    #[default]
    None,
    One,
    Many,
}

impl HeadsSeen {
    pub fn add(self) -> HeadsSeen {
        match self {
            HeadsSeen::None => HeadsSeen::One,
            _ => HeadsSeen::Many,
        }
    }
}

/// What a robot retains from one subround of broadcasts at its node.
///
/// Only bounded summaries are kept: presence bits, a saturating heads counter,
/// and at most one settled reply (a node hosts at most one settled robot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inbox {
    pub query: bool,
    pub reply: Option<SettledReply>,
    pub set_child: Option<Port>,
    pub set_visited: bool,
    pub terminate: bool,
    pub le_start: bool,
    pub le_heads: HeadsSeen,
}

impl Inbox {
    pub fn is_empty(&self) -> bool {
        *self == Inbox::default()
    }

    /// Drops the message kinds a robot in `role` does not react to.
    pub fn filtered_for(self, role: Role) -> Inbox {
        match role {
            Role::Settled => Inbox {
                query: self.query,
                set_child: self.set_child,
                set_visited: self.set_visited,
                terminate: self.terminate,
                ..Inbox::default()
            },
            Role::Explore => {
                Inbox { reply: self.reply, le_start: self.le_start, le_heads: self.le_heads, ..Inbox::default() }
            }
            Role::Return | Role::Acknowledge => Inbox { reply: self.reply, ..Inbox::default() },
            Role::Done => Inbox::default(),
        }
    }
}

/// End-of-round intent of a robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Stay,
    Move(Port),
    TerminateSelf,
    /// Still computing: more subrounds are needed this round.
    NotDone,
}

/// One robot's entire memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub role: Role,
    pub direction: Direction,
    pub entered: Option<Port>,
    pub parent: Option<Port>,
    pub child: Option<Port>,
    pub visited: bool,
    pub le: LeaderElectionState,
    /// Messages heard in the current subround; cleared after every subround.
    pub received: Inbox,
}

impl Default for RobotState {
    fn default() -> Self {
        RobotState {
            role: Role::Explore,
            direction: Direction::Forward,
            entered: None,
            parent: None,
            child: None,
            visited: false,
            le: LeaderElectionState::default(),
            received: Inbox::default(),
        }
    }
}

pub type Broadcasts = ArrayVec<Message, 2>;

/// Result of one protocol step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub state: RobotState,
    pub broadcasts: Broadcasts,
    pub decision: Decision,
    /// Set when the acknowledge step took the root-termination branch that the
    /// plain DFS rules lack (root left through its child port 0).
    pub root_repair: bool,
}

impl Transition {
    fn new(state: RobotState, decision: Decision) -> Self {
        Transition { state, broadcasts: Broadcasts::new(), decision, root_repair: false }
    }

    fn with(mut self, msg: Message) -> Self {
        self.broadcasts.push(msg);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolFault {
    #[error("{0:?} robot needs the port it entered through, but has none")]
    MissingEntered(Role),
    #[error("returning robot found no settled robot on the rootpath")]
    MissingReply,
    #[error("explorer without a settled reply must finish leader election first")]
    MissingElection,
    #[error("leader election step called in phase {0:?}")]
    InvalidPhase(LePhase),
    #[error("step for {expected:?} called on a {actual:?} robot")]
    WrongRole { expected: Role, actual: Role },
}

fn expect_role(state: &RobotState, expected: Role) -> Result<(), ProtocolFault> {
    if state.role == expected {
        Ok(())
    } else {
        Err(ProtocolFault::WrongRole { expected, actual: state.role })
    }
}

fn entered(state: &RobotState) -> Result<Port, ProtocolFault> {
    state.entered.ok_or(ProtocolFault::MissingEntered(state.role))
}

/// Settled robots answer queries and obey control messages; they never move.
pub fn step_settled(mut state: RobotState, inbox: &Inbox) -> Result<Transition, ProtocolFault> {
    expect_role(&state, Role::Settled)?;
    let mut broadcasts = Broadcasts::new();
    if inbox.query {
        broadcasts.push(Message::SettledReply(SettledReply {
            parent: state.parent,
            child: state.child,
            visited: state.visited,
        }));
    }
    if let Some(port) = inbox.set_child {
        state.child = Some(port);
    }
    if inbox.set_visited {
        state.visited = true;
    }
    let decision = if inbox.terminate { Decision::TerminateSelf } else { Decision::Stay };
    Ok(Transition { state, broadcasts, decision, root_repair: false })
}

/// Explorer step, taken once the query has been answered (`reply`) or, at an
/// empty node, once leader election has resolved (`election`).
pub fn step_explore(
    mut state: RobotState,
    reply: Option<SettledReply>,
    election: Option<ElectionOutcome>,
    degree: u32,
) -> Result<Transition, ProtocolFault> {
    expect_role(&state, Role::Explore)?;
    if let Some(reply) = reply {
        let p = entered(&state)?;
        let next = p.next(degree);
        let port = match state.direction {
            Direction::Forward => {
                state.direction = Direction::Backward;
                p
            }
            Direction::Backward => {
                if reply.parent != Some(next) {
                    state.direction = Direction::Forward;
                }
                next
            }
        };
        return Ok(Transition::new(state, Decision::Move(port)));
    }
    let outcome = election.ok_or(ProtocolFault::MissingElection)?;
    state.le = LeaderElectionState::default();
    let decision = match outcome {
        // A lone robot at the root: dispersion already holds.
        ElectionOutcome::Alone if state.entered.is_none() => Decision::TerminateSelf,
        ElectionOutcome::Alone => {
            state.role = Role::Return;
            Decision::Move(entered(&state)?)
        }
        ElectionOutcome::Leader => {
            state.role = Role::Settled;
            state.parent = state.entered;
            Decision::Stay
        }
        ElectionOutcome::Follower => match state.entered {
            None => Decision::Move(Port(0)),
            Some(p) => {
                let next = p.next(degree);
                if next == p {
                    state.direction = Direction::Backward;
                }
                Decision::Move(next)
            }
        },
    };
    Ok(Transition::new(state, decision))
}

/// The last robot walking back to the root, installing child ports on the way.
pub fn step_return(mut state: RobotState, reply: Option<SettledReply>) -> Result<Transition, ProtocolFault> {
    expect_role(&state, Role::Return)?;
    let reply = reply.ok_or(ProtocolFault::MissingReply)?;
    let set_child = Message::SetChild { port: entered(&state)? };
    let t = match reply.parent {
        Some(x) => Transition::new(state, Decision::Move(x)),
        None => {
            state.direction = Direction::Forward;
            state.role = Role::Acknowledge;
            state.entered = None;
            Transition::new(state, Decision::Stay)
        }
    };
    Ok(t.with(set_child))
}

/// The second traversal, which retraces the first one and tells settled robots
/// to terminate once the traversal no longer needs them.
pub fn step_acknowledge(
    mut state: RobotState,
    reply: Option<SettledReply>,
    degree: u32,
) -> Result<Transition, ProtocolFault> {
    expect_role(&state, Role::Acknowledge)?;
    let Some(reply) = reply else {
        let p = entered(&state)?;
        match state.direction {
            Direction::Forward => state.direction = Direction::Backward,
            Direction::Backward => state.role = Role::Done,
        }
        return Ok(Transition::new(state, Decision::Move(p)));
    };

    if !reply.visited {
        let Some(p) = state.entered else {
            // At the root. It is never revisited when the rootpath leaves
            // through port 0, so it must be told to terminate now.
            let mut t = Transition::new(state, Decision::Move(Port(0))).with(Message::SetVisited);
            if reply.child == Some(Port(0)) {
                t = t.with(Message::Terminate);
                t.root_repair = true;
            }
            return Ok(t);
        };
        let next = p.next(degree);
        let mut terminate = false;
        if next == p {
            state.direction = Direction::Backward;
            terminate = true;
        } else if reply.child == Some(next) {
            terminate = true;
        }
        let t = Transition::new(state, Decision::Move(next)).with(Message::SetVisited);
        return Ok(if terminate { t.with(Message::Terminate) } else { t });
    }

    let p = entered(&state)?;
    match state.direction {
        Direction::Forward => {
            state.direction = Direction::Backward;
            Ok(Transition::new(state, Decision::Move(p)))
        }
        Direction::Backward => {
            let next = p.next(degree);
            let mut terminate = false;
            if reply.parent == Some(next) {
                terminate = true;
            } else if reply.child == Some(next) {
                terminate = true;
                state.direction = Direction::Forward;
            } else {
                state.direction = Direction::Forward;
            }
            let t = Transition::new(state, Decision::Move(next));
            Ok(if terminate { t.with(Message::Terminate) } else { t })
        }
    }
}

pub fn step_done(state: &RobotState) -> Result<Decision, ProtocolFault> {
    expect_role(state, Role::Done)?;
    Ok(Decision::TerminateSelf)
}
