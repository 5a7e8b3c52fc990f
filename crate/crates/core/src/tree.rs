//! Ulam–Harris indexing of the weighted branching tree.
//!
//! A node is identified by the sequence of child numbers on the path from the
//! root; the root is the empty sequence. Nodes are visited in
//! length-lexicographic order: shorter indices first, ties broken
//! lexicographically. A FIFO queue fed by expanding parents in that order and
//! enqueuing children `1..=N` emits nodes in exactly this order.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Path from the root: a finite sequence of child numbers, each `>= 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodeIndex(Vec<u32>);

impl NodeIndex {
    pub fn root() -> Self {
        NodeIndex(Vec::new())
    }

    pub fn from_path(path: Vec<u32>) -> Result<Self> {
        if path.contains(&0) {
            return Err(Error::InvalidParameter(
                "child numbers start at 1".to_string(),
            ));
        }
        Ok(NodeIndex(path))
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `(i, j)`: this index with `j` appended.
    pub fn child(&self, j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidParameter(
                "child numbers start at 1".to_string(),
            ));
        }
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.extend_from_slice(&self.0);
        path.push(j);
        Ok(NodeIndex(path))
    }

    /// `i|n`, the ancestor at generation `n`. Panics if `n > |i|`.
    pub fn truncate(&self, n: usize) -> Self {
        NodeIndex(self.0[..n].to_vec())
    }
}

/// Length-lexicographic comparison.
pub fn lenlex_compare(a: &NodeIndex, b: &NodeIndex) -> Ordering {
    a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0))
}

impl Ord for NodeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        lenlex_compare(self, other)
    }
}

impl PartialOrd for NodeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "(")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

/// A materialized node awaiting expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub index: NodeIndex,
    /// `S_i = log Π_i`; zero at the root, `-inf` below a zero weight.
    pub log_weight: f64,
    /// `Y_i = log Q_i`, filled in when the node's own branching vector is drawn.
    pub perturbation: f64,
    pub on_spine: bool,
}

impl NodeState {
    pub fn root() -> Self {
        NodeState {
            index: NodeIndex::root(),
            log_weight: 0.0,
            perturbation: f64::NEG_INFINITY,
            on_spine: true,
        }
    }

    /// Child `j` reached through an edge of weight `c`.
    pub fn child(&self, j: u32, c: f64, on_spine: bool) -> Result<Self> {
        Ok(NodeState {
            index: self.index.child(j)?,
            log_weight: self.log_weight + c.ln(),
            perturbation: f64::NEG_INFINITY,
            on_spine,
        })
    }

    /// `S_i + Y_i`, with `-inf + finite = -inf`.
    pub fn level(&self) -> f64 {
        self.log_weight + self.perturbation
    }
}

/// FIFO of materialized, not yet visited nodes.
#[derive(Debug, Default)]
pub struct Frontier {
    queue: VecDeque<NodeState>,
}

impl Frontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, node: NodeState) {
        debug_assert!(self.queue.back().is_none_or(|last| last.index < node.index));
        self.queue.push_back(node);
    }

    /// Removes and returns the ≺-least unvisited node.
    pub fn advance(&mut self) -> Result<NodeState> {
        self.queue
            .pop_front()
            .ok_or_else(|| Error::InvalidParameter("frontier exhausted".to_string()))
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
