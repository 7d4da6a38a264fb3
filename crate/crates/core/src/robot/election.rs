//! Local leader election among co-located anonymous robots.
//!
//! Everybody broadcasts `start`; a robot that hears nothing is alone. Otherwise
//! candidates flip coins each subround and broadcast `heads` on heads. A
//! candidate that flips tails and hears a `heads` drops out. The election ends
//! in the subround after exactly one robot broadcast: that robot heard nothing,
//! every other robot heard exactly one `heads`.

use super::{HeadsSeen, Inbox, Message, ProtocolFault};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LePhase {
    Idle,
    SentStart,
    /// Coin phase. `sent_heads` remembers whether this robot broadcast `heads`
    /// in the previous subround.
    Flipping {
        sent_heads: bool,
    },
    Leader,
    Follower,
    Alone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LeaderElectionState {
    pub phase: LePhase,
    pub candidate: bool,
}

impl Default for LeaderElectionState {
    fn default() -> Self {
        LeaderElectionState { phase: LePhase::Idle, candidate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElectionOutcome {
    Leader,
    Follower,
    Alone,
}

impl LeaderElectionState {
    pub fn outcome(&self) -> Option<ElectionOutcome> {
        match self.phase {
            LePhase::Leader => Some(ElectionOutcome::Leader),
            LePhase::Follower => Some(ElectionOutcome::Follower),
            LePhase::Alone => Some(ElectionOutcome::Alone),
            _ => None,
        }
    }

    pub fn is_running(&self) -> bool {
        !matches!(self.phase, LePhase::Idle) && self.outcome().is_none()
    }
}

/// One subround of leader election. `inbox` holds what was heard from the
/// previous subround; `coin` is this subround's fair bit (`true` = heads).
pub fn le_subround(
    state: LeaderElectionState,
    inbox: &Inbox,
    coin: bool,
) -> Result<(LeaderElectionState, Option<Message>), ProtocolFault> {
    let flip = |candidate: bool| {
        let heads = candidate && coin;
        let next = LeaderElectionState { phase: LePhase::Flipping { sent_heads: heads }, candidate };
        (next, heads.then_some(Message::LeHeads))
    };
    match state.phase {
        LePhase::Idle => {
            Ok((LeaderElectionState { phase: LePhase::SentStart, candidate: true }, Some(Message::LeStart)))
        }
        LePhase::SentStart if !inbox.le_start => {
            Ok((LeaderElectionState { phase: LePhase::Alone, candidate: true }, None))
        }
        LePhase::SentStart => Ok(flip(true)),
        LePhase::Flipping { sent_heads } => {
            let heard = inbox.le_heads;
            if sent_heads && heard == HeadsSeen::None {
                return Ok((LeaderElectionState { phase: LePhase::Leader, candidate: true }, None));
            }
            if !sent_heads && heard == HeadsSeen::One {
                return Ok((LeaderElectionState { phase: LePhase::Follower, candidate: false }, None));
            }
            let candidate = state.candidate && (sent_heads || heard == HeadsSeen::None);
            Ok(flip(candidate))
        }
        phase => Err(ProtocolFault::InvalidPhase(phase)),
    }
}
