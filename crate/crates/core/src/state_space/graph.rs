use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{StateSpaceError, TransitionSystem};
use crate::heuristics::HeuristicValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// On-disk form of an explicit graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphDocument {
    nodes: Vec<String>,
    edges: Vec<(String, String, String)>,
    initial: String,
    goals: Vec<String>,
    #[serde(default)]
    h: BTreeMap<String, HeuristicValue>,
}

/// A transition system given by named nodes and labeled edges, optionally
/// annotated with heuristic values.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    adjacency: Vec<Vec<(String, NodeId)>>,
    goals: HashSet<NodeId>,
    initial: NodeId,
    h: BTreeMap<String, HeuristicValue>,
}

impl ExplicitGraph {
    pub fn from_json(text: &str) -> Result<Self, StateSpaceError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| StateSpaceError::InvalidGraph(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StateSpaceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| StateSpaceError::InvalidGraph(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn from_document(doc: GraphDocument) -> Result<Self, StateSpaceError> {
        let mut index = HashMap::new();
        for (i, n) in doc.nodes.iter().enumerate() {
            if index.insert(n.clone(), NodeId(i)).is_some() {
                return Err(StateSpaceError::InvalidGraph(format!("duplicate node `{n}`")));
            }
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| StateSpaceError::InvalidGraph(format!("unknown node `{n}`")))
        };
        let mut adjacency = vec![Vec::new(); doc.nodes.len()];
        for (from, label, to) in &doc.edges {
            let to = lookup(to)?;
            adjacency[lookup(from)?.0].push((label.clone(), to));
        }
        let goals = doc.goals.iter().map(|g| lookup(g)).collect::<Result<_, _>>()?;
        let initial = lookup(&doc.initial)?;
        for node in doc.h.keys() {
            lookup(node)?;
        }
        Ok(ExplicitGraph { names: doc.nodes, index, adjacency, goals, initial, h: doc.h })
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDocument {
            nodes: self.names.clone(),
            edges: self
                .adjacency
                .iter()
                .enumerate()
                .flat_map(|(i, out)| {
                    out.iter().map(move |(l, to)| (self.names[i].clone(), l.clone(), self.names[to.0].clone()))
                })
                .collect(),
            initial: self.names[self.initial.0].clone(),
            goals: self.names.iter().enumerate().filter(|(i, _)| self.goals.contains(&NodeId(*i))).map(|(_, n)| n.clone()).collect(),
            h: self.h.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    /// The annotated heuristic values, keyed by node name.
    pub fn h_values(&self) -> &BTreeMap<String, HeuristicValue> {
        &self.h
    }

    /// Replaces the annotated heuristic value of one node.
    pub fn set_h(&mut self, node: &str, value: HeuristicValue) -> Result<(), StateSpaceError> {
        if self.node(node).is_none() {
            return Err(StateSpaceError::InvalidGraph(format!("unknown node `{node}`")));
        }
        self.h.insert(node.to_string(), value);
        Ok(())
    }
}

impl TransitionSystem for ExplicitGraph {
    type State = NodeId;

    fn initial(&self) -> NodeId {
        self.initial
    }

    fn is_goal(&self, s: &NodeId) -> bool {
        self.goals.contains(s)
    }

    fn successors<'a>(&'a self, s: &NodeId) -> Vec<(&'a str, NodeId)> {
        self.adjacency[s.0].iter().map(|(l, to)| (l.as_str(), *to)).collect()
    }

    fn describe(&self, s: &NodeId) -> Vec<String> {
        vec![self.names[s.0].clone()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dangling_edges() {
        let err = ExplicitGraph::from_json(r#"{"nodes":["a"],"edges":[["a","x","b"]],"initial":"a","goals":[]}"#)
            .unwrap_err();
        assert!(matches!(err, StateSpaceError::InvalidGraph(_)));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"nodes":["a","b"],"edges":[["a","go","b"]],"initial":"a","goals":["b"],"h":{"a":"inf","b":0}}"#;
        let g = ExplicitGraph::from_json(text).unwrap();
        let again = ExplicitGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(again.successors(&NodeId(0)), vec![("go", NodeId(1))]);
        assert_eq!(again.h_values()["a"], HeuristicValue::INFINITY);
    }
}
