//! JSON-lines traces: one [`TraceRecord`] per round, then a [`RunSummary`] line.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Port};
use crate::robot::{Direction, Message, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    None,
    Summary,
    #[default]
    Full,
}

impl FromStr for TraceLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(TraceLevel::None),
            "summary" => Ok(TraceLevel::Summary),
            "full" => Ok(TraceLevel::Full),
            _ => Err(format!("unknown trace level `{s}` (none, summary, full)")),
        }
    }
}

/// A robot as seen at the beginning of a round. `id` is bookkeeping only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotSnapshot {
    pub id: usize,
    pub node: NodeId,
    pub role: Role,
    pub dir: Direction,
    pub entered: Option<Port>,
    pub parent: Option<Port>,
    pub child: Option<Port>,
    pub visited: bool,
    pub alive: bool,
    pub bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastRecord {
    pub id: usize,
    pub sub: u32,
    pub node: NodeId,
    pub msg: Message,
}

/// Something that happened to a robot during a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Event {
    Settle {
        robot: usize,
        node: NodeId,
    },
    Return {
        robot: usize,
        node: NodeId,
    },
    Acknowledge {
        robot: usize,
        node: NodeId,
    },
    Done {
        robot: usize,
        node: NodeId,
    },
    Terminate {
        robot: usize,
    },
    /// The acknowledge step told the root to terminate on its way out.
    Repair {
        robot: usize,
        node: NodeId,
    },
}

impl Event {
    pub fn robot(&self) -> usize {
        match *self {
            Event::Settle { robot, .. }
            | Event::Return { robot, .. }
            | Event::Acknowledge { robot, .. }
            | Event::Done { robot, .. }
            | Event::Terminate { robot }
            | Event::Repair { robot, .. } => robot,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Event::Settle { robot, node } => write!(f, "settle:{robot}@{node}"),
            Event::Return { robot, node } => write!(f, "return:{robot}@{node}"),
            Event::Acknowledge { robot, node } => write!(f, "acknowledge:{robot}@{node}"),
            Event::Done { robot, node } => write!(f, "done:{robot}@{node}"),
            Event::Terminate { robot } => write!(f, "terminate:{robot}"),
            Event::Repair { robot, node } => write!(f, "repair:{robot}@{node}"),
        }
    }
}

impl FromStr for Event {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed event `{s}`");
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        if kind == "terminate" {
            return Ok(Event::Terminate { robot: rest.parse().map_err(|_| bad())? });
        }
        let (robot, node) = rest.split_once('@').ok_or_else(bad)?;
        let robot = robot.parse().map_err(|_| bad())?;
        let node = NodeId(node.parse().map_err(|_| bad())?);
        match kind {
            "settle" => Ok(Event::Settle { robot, node }),
            "return" => Ok(Event::Return { robot, node }),
            "acknowledge" => Ok(Event::Acknowledge { robot, node }),
            "done" => Ok(Event::Done { robot, node }),
            "repair" => Ok(Event::Repair { robot, node }),
            _ => Err(bad()),
        }
    }
}

impl From<Event> for String {
    fn from(e: Event) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Event {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: u64,
    pub robots: Vec<RobotSnapshot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub broadcasts: Vec<BroadcastRecord>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    DispersedAllTerminated,
    MaxRoundsExceeded,
    Fault,
}

/// Final line of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub fault: Option<String>,
    pub t1: Option<u64>,
    pub t2: Option<u64>,
    pub rounds: u64,
    #[serde(rename = "vR")]
    pub v_r: NodeId,
    #[serde(rename = "vL")]
    pub v_l: Option<NodeId>,
    pub repair_fired: bool,
    pub positions: Vec<NodeId>,
    pub terminated: Vec<bool>,
    pub k: usize,
    pub seed: u64,
    pub max_degree: u32,
    pub trace_level: TraceLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationResult {
    pub summary: RunSummary,
    pub trace: Vec<TraceRecord>,
}

impl SimulationResult {
    /// The record describing the beginning of round `round`, if traced.
    pub fn record(&self, round: u64) -> Option<&TraceRecord> {
        let first = self.trace.first()?.round;
        let rec = self.trace.get(round.checked_sub(first)? as usize)?;
        (rec.round == round).then_some(rec)
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, Event)> + '_ {
        self.trace.iter().flat_map(|r| r.events.iter().map(move |&e| (r.round, e)))
    }

    /// The last robot to find an empty node, once it has been identified.
    pub fn last_robot(&self) -> Option<usize> {
        self.events().find_map(|(_, e)| matches!(e, Event::Return { .. }).then(|| e.robot()))
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace I/O: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("trace has no summary line")]
    MissingSummary,
    #[error("line {0}: record after the summary line")]
    AfterSummary(usize),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Record(TraceRecord),
    Summary(RunSummary),
}

pub fn write_trace<W: Write>(mut out: W, result: &SimulationResult) -> io::Result<()> {
    for record in &result.trace {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &result.summary)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn trace_to_string(result: &SimulationResult) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, result).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn read_trace<R: BufRead>(input: R) -> Result<SimulationResult, TraceError> {
    let mut trace = Vec::new();
    let mut summary = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(TraceError::AfterSummary(i + 1));
        }
        match serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })? {
            Line::Record(r) => trace.push(r),
            Line::Summary(s) => summary = Some(s),
        }
    }
    Ok(SimulationResult { summary: summary.ok_or(TraceError::MissingSummary)?, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_round_trip_as_strings() {
        let events = [
            Event::Settle { robot: 3, node: NodeId(7) },
            Event::Return { robot: 0, node: NodeId(1) },
            Event::Acknowledge { robot: 0, node: NodeId(0) },
            Event::Done { robot: 2, node: NodeId(5) },
            Event::Terminate { robot: 4 },
            Event::Repair { robot: 1, node: NodeId(0) },
        ];
        for e in events {
            assert_eq!(e.to_string().parse::<Event>(), Ok(e));
        }
        assert_eq!(serde_json::to_string(&events[0]).unwrap(), "\"settle:3@7\"");
        assert_eq!(serde_json::to_string(&events[4]).unwrap(), "\"terminate:4\"");
        assert!("settle:3".parse::<Event>().is_err());
        assert!("fly:1@2".parse::<Event>().is_err());
    }

    #[test]
    fn snapshot_json_shape() {
        let snap = RobotSnapshot {
            id: 1,
            node: NodeId(4),
            role: Role::Explore,
            dir: Direction::Forward,
            entered: None,
            parent: None,
            child: None,
            visited: false,
            alive: true,
            bits: 31,
        };
        let json = serde_json::to_string(&snap).unwrap();
        assert!(json.starts_with(r#"{"id":1,"node":4,"role":"explore","dir":"fwd","entered":null"#), "{json}");
        let msg = BroadcastRecord { id: 0, sub: 2, node: NodeId(1), msg: Message::SetChild { port: Port(3) } };
        assert_eq!(
            serde_json::to_string(&msg).unwrap(),
            r#"{"id":0,"sub":2,"node":1,"msg":{"kind":"set_child","port":3}}"#
        );
    }

    #[test]
    fn missing_summary_is_an_error() {
        let line = r#"{"round":1,"robots":[],"events":[]}"#;
        assert!(matches!(read_trace(line.as_bytes()), Err(TraceError::MissingSummary)));
        assert!(matches!(read_trace("{".as_bytes()), Err(TraceError::Json { line: 1, .. })));
    }
}
