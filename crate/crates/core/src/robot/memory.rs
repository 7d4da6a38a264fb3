//! Fixed-width bit encoding of a robot's memory.
//!
//! With `b = ⌈log₂ max(Δ, 2)⌉`, a port field takes `b + 1` bits (one flag bit for
//! "no port"). The layout is
//!
//! | field     | bits       |
//! |-----------|------------|
//! | role      | 3          |
//! | direction | 1          |
//! | visited   | 1          |
//! | LE phase  | 3          |
//! | candidate | 1          |
//! | entered   | b + 1      |
//! | parent    | b + 1      |
//! | child     | b + 1      |
//! | received  | 2(b+1) + 2 |
//!
//! for a total of `5b + 16` bits. The `received` region is read through one of
//! three views picked by the robot's own role and election phase: a settled
//! reply (present, visited, parent, child), election traffic (start, heads
//! counter) or control messages (query, set-visited, terminate, set-child).

use thiserror::Error;

use super::{Direction, HeadsSeen, Inbox, LePhase, LeaderElectionState, RobotState, Role, SettledReply};
use crate::graph::Port;

/// `b`: bits needed for a port value at maximum degree `max_degree`.
pub fn port_width(max_degree: u32) -> u32 {
    let d = max_degree.max(2);
    u32::BITS - (d - 1).leading_zeros()
}

/// Width of the full memory layout for maximum degree `max_degree`.
pub fn memory_footprint_bits(max_degree: u32) -> u32 {
    let port = port_width(max_degree) + 1;
    3 + 1 + 1 + 3 + 1 + 3 * port + received_width(max_degree)
}

/// `5·⌈log₂ max(Δ,2)⌉ + 16`.
pub fn memory_bound_bits(max_degree: u32) -> u32 {
    5 * port_width(max_degree) + 16
}

fn received_width(max_degree: u32) -> u32 {
    2 * (port_width(max_degree) + 1) + 2
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("port {port} does not fit in {width} bits")]
    PortTooWide { port: u32, width: u32 },
    #[error("inbox carries messages the {0} view cannot hold")]
    InboxOverflow(&'static str),
    #[error("invalid {field} code {code}")]
    BadCode { field: &'static str, code: u64 },
    #[error("expected {expected} bits, got {got}")]
    Length { expected: u32, got: u32 },
}

/// A robot's memory packed into `len` bits, least significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedState {
    words: Vec<u64>,
    len: u32,
}

impl PackedState {
    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn push(&mut self, value: u64, width: u32) {
        for i in 0..width {
            let bit = (value >> i) & 1;
            let (w, o) = ((self.len / 64) as usize, self.len % 64);
            if w == self.words.len() {
                self.words.push(0);
            }
            self.words[w] |= bit << o;
            self.len += 1;
        }
    }
}

struct Reader<'a> {
    packed: &'a PackedState,
    pos: u32,
}

impl Reader<'_> {
    fn take(&mut self, width: u32) -> u64 {
        let mut value = 0;
        for i in 0..width {
            let (w, o) = ((self.pos / 64) as usize, self.pos % 64);
            value |= ((self.packed.words[w] >> o) & 1) << i;
            self.pos += 1;
        }
        value
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum View {
    Reply,
    Election,
    Control,
}

fn view_for(role: Role, le: &LeaderElectionState) -> View {
    match role {
        Role::Settled => View::Control,
        Role::Explore if le.phase != LePhase::Idle => View::Election,
        _ => View::Reply,
    }
}

const ROLES: [Role; 5] = [Role::Explore, Role::Settled, Role::Return, Role::Acknowledge, Role::Done];

fn phase_code(phase: LePhase) -> u64 {
    match phase {
        LePhase::Idle => 0,
        LePhase::SentStart => 1,
        LePhase::Flipping { sent_heads: false } => 2,
        LePhase::Flipping { sent_heads: true } => 3,
        LePhase::Leader => 4,
        LePhase::Follower => 5,
        LePhase::Alone => 6,
    }
}

const PHASES: [LePhase; 7] = [
    LePhase::Idle,
    LePhase::SentStart,
    LePhase::Flipping { sent_heads: false },
    LePhase::Flipping { sent_heads: true },
    LePhase::Leader,
    LePhase::Follower,
    LePhase::Alone,
];

fn push_port(out: &mut PackedState, port: Option<Port>, b: u32) -> Result<(), CodecError> {
    match port {
        None => out.push(0, b + 1),
        Some(Port(p)) => {
            if b < 32 && p >> b != 0 {
                return Err(CodecError::PortTooWide { port: p, width: b });
            }
            out.push(1, 1);
            out.push(u64::from(p), b);
        }
    }
    Ok(())
}

fn take_port(r: &mut Reader<'_>, b: u32) -> Option<Port> {
    let present = r.take(1) == 1;
    let value = r.take(b) as u32;
    present.then_some(Port(value))
}

/// Packs `state` into exactly [`memory_footprint_bits`] bits, failing if any
/// field (including the current inbox) does not fit the layout.
pub fn encode_state(state: &RobotState, max_degree: u32) -> Result<PackedState, CodecError> {
    let b = port_width(max_degree);
    let mut out = PackedState { words: Vec::with_capacity(2), len: 0 };
    let role = ROLES.iter().position(|&r| r == state.role).unwrap() as u64;
    out.push(role, 3);
    out.push(u64::from(state.direction == Direction::Backward), 1);
    out.push(u64::from(state.visited), 1);
    out.push(phase_code(state.le.phase), 3);
    out.push(u64::from(state.le.candidate), 1);
    for port in [state.entered, state.parent, state.child] {
        push_port(&mut out, port, b)?;
    }

    let start = out.len;
    let inbox = &state.received;
    match view_for(state.role, &state.le) {
        View::Reply => {
            if *inbox != (Inbox { reply: inbox.reply, ..Inbox::default() }) {
                return Err(CodecError::InboxOverflow("reply"));
            }
            let reply = inbox.reply.unwrap_or(SettledReply { parent: None, child: None, visited: false });
            out.push(u64::from(inbox.reply.is_some()), 1);
            out.push(u64::from(reply.visited), 1);
            push_port(&mut out, reply.parent, b)?;
            push_port(&mut out, reply.child, b)?;
        }
        View::Election => {
            let expected = Inbox { le_start: inbox.le_start, le_heads: inbox.le_heads, ..Inbox::default() };
            if *inbox != expected {
                return Err(CodecError::InboxOverflow("election"));
            }
            out.push(u64::from(inbox.le_start), 1);
            let heads = match inbox.le_heads {
                HeadsSeen::None => 0,
                HeadsSeen::One => 1,
                HeadsSeen::Many => 2,
            };
            out.push(heads, 2);
        }
        View::Control => {
            let expected = Inbox {
                query: inbox.query,
                set_child: inbox.set_child,
                set_visited: inbox.set_visited,
                terminate: inbox.terminate,
                ..Inbox::default()
            };
            if *inbox != expected {
                return Err(CodecError::InboxOverflow("control"));
            }
            out.push(u64::from(inbox.query), 1);
            out.push(u64::from(inbox.set_visited), 1);
            out.push(u64::from(inbox.terminate), 1);
            push_port(&mut out, inbox.set_child, b)?;
        }
    }
    let used = out.len - start;
    out.push(0, received_width(max_degree) - used);
    debug_assert_eq!(out.len, memory_footprint_bits(max_degree));
    Ok(out)
}

pub fn decode_state(packed: &PackedState, max_degree: u32) -> Result<RobotState, CodecError> {
    let expected = memory_footprint_bits(max_degree);
    if packed.len != expected {
        return Err(CodecError::Length { expected, got: packed.len });
    }
    let b = port_width(max_degree);
    let mut r = Reader { packed, pos: 0 };
    let code = r.take(3);
    let role = *ROLES.get(code as usize).ok_or(CodecError::BadCode { field: "role", code })?;
    let direction = if r.take(1) == 1 { Direction::Backward } else { Direction::Forward };
    let visited = r.take(1) == 1;
    let code = r.take(3);
    let phase = *PHASES.get(code as usize).ok_or(CodecError::BadCode { field: "LE phase", code })?;
    let le = LeaderElectionState { phase, candidate: r.take(1) == 1 };
    let entered = take_port(&mut r, b);
    let parent = take_port(&mut r, b);
    let child = take_port(&mut r, b);

    let received = match view_for(role, &le) {
        View::Reply => {
            let present = r.take(1) == 1;
            let visited = r.take(1) == 1;
            let parent = take_port(&mut r, b);
            let child = take_port(&mut r, b);
            Inbox { reply: present.then_some(SettledReply { parent, child, visited }), ..Inbox::default() }
        }
        View::Election => {
            let le_start = r.take(1) == 1;
            let le_heads = match r.take(2) {
                0 => HeadsSeen::None,
                1 => HeadsSeen::One,
                2 => HeadsSeen::Many,
                code => return Err(CodecError::BadCode { field: "heads counter", code }),
            };
            Inbox { le_start, le_heads, ..Inbox::default() }
        }
        View::Control => Inbox {
            query: r.take(1) == 1,
            set_visited: r.take(1) == 1,
            terminate: r.take(1) == 1,
            set_child: take_port(&mut r, b),
            ..Inbox::default()
        },
    };
    Ok(RobotState { role, direction, entered, parent, child, visited, le, received })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn footprint_closed_form() {
        // 3+1+1+3+1 + 3·4 + (2·4+2)
        assert_eq!(memory_footprint_bits(8), 31);
        // 3+1+1+3+1 + 3·2 + (2·2+2)
        assert_eq!(memory_footprint_bits(2), 21);
        assert_eq!(memory_footprint_bits(1), 21);
        assert_eq!(port_width(3), 2);
        assert_eq!(port_width(4), 2);
        assert_eq!(port_width(5), 3);
        assert_eq!(port_width(64), 6);
        assert_eq!(port_width(65), 7);
        for delta in 1..5000 {
            assert!(memory_footprint_bits(delta) <= memory_bound_bits(delta), "Δ={delta}");
        }
    }

    #[test]
    fn encodes_initial_state() {
        let packed = encode_state(&RobotState::default(), 8).unwrap();
        assert_eq!(packed.len(), 31);
        assert_eq!(decode_state(&packed, 8).unwrap(), RobotState::default());
    }

    #[test]
    fn rejects_oversized_values() {
        let s = RobotState { entered: Some(Port(8)), ..RobotState::default() };
        assert_eq!(encode_state(&s, 8), Err(CodecError::PortTooWide { port: 8, width: 3 }));
        let s =
            RobotState { received: Inbox { query: true, le_start: true, ..Inbox::default() }, ..RobotState::default() };
        assert!(matches!(encode_state(&s, 8), Err(CodecError::InboxOverflow(_))));
    }

    fn arb_port(delta: u32) -> impl Strategy<Value = Option<Port>> {
        prop::option::of((0..delta).prop_map(Port))
    }

    fn arb_state(delta: u32) -> impl Strategy<Value = RobotState> {
        let role = prop::sample::select(ROLES.to_vec());
        let phase = prop::sample::select(PHASES.to_vec());
        let heads = prop::sample::select(vec![HeadsSeen::None, HeadsSeen::One, HeadsSeen::Many]);
        (
            (role, any::<bool>(), any::<bool>(), phase, any::<bool>()),
            (arb_port(delta), arb_port(delta), arb_port(delta)),
            (any::<bool>(), arb_port(delta), arb_port(delta), any::<bool>(), any::<bool>(), heads, arb_port(delta)),
        )
            .prop_map(|((role, bwd, visited, phase, candidate), (entered, parent, child), inbox)| {
                let (flag_a, rp, rc, flag_b, flag_c, heads, set_child) = inbox;
                let le = LeaderElectionState { phase, candidate };
                let received = match view_for(role, &le) {
                    View::Reply => Inbox {
                        reply: flag_a.then_some(SettledReply { parent: rp, child: rc, visited: flag_b }),
                        ..Inbox::default()
                    },
                    View::Election => Inbox { le_start: flag_a, le_heads: heads, ..Inbox::default() },
                    View::Control => {
                        Inbox { query: flag_a, set_visited: flag_b, terminate: flag_c, set_child, ..Inbox::default() }
                    }
                };
                RobotState {
                    role,
                    direction: if bwd { Direction::Backward } else { Direction::Forward },
                    entered,
                    parent,
                    child,
                    visited,
                    le,
                    received,
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip((delta, state) in (1u32..300).prop_flat_map(|d| (Just(d), arb_state(d)))) {
            let packed = encode_state(&state, delta).unwrap();
            prop_assert_eq!(packed.len(), memory_footprint_bits(delta));
            prop_assert_eq!(decode_state(&packed, delta).unwrap(), state);
        }
    }
}
