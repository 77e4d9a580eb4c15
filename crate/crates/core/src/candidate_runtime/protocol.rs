//! Line-delimited JSON messages exchanged with a candidate process.

use serde::{Deserialize, Serialize};

use crate::heuristics::HeuristicValue;

/// Parent to child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Init { domain_pddl: String, task_pddl: String, code: String },
    Eval { id: u64, states: Vec<Vec<String>> },
    Shutdown,
}

/// Child to parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Ready,
    LoadError { message: String },
    Values { id: u64, h: Vec<HeuristicValue> },
}

/// Serializes a message as one newline-terminated line.
pub fn encode<T: Serialize>(msg: &T) -> String {
    let mut line = serde_json::to_string(msg).expect("protocol messages serialize");
    line.push('\n');
    line
}

pub fn decode_reply(line: &str) -> Result<Reply, serde_json::Error> {
    serde_json::from_str(line.trim_end_matches(['\r', '\n']))
}

pub fn decode_request(line: &str) -> Result<Request, serde_json::Error> {
    serde_json::from_str(line.trim_end_matches(['\r', '\n']))
}
