//! Cognitive complexity of a method tree and of contiguous statement runs.

use thiserror::Error;

use crate::ast::{AstNode, NodeKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("root node must be METHOD, found {0}")]
    RootNotMethod(NodeKind),
    #[error("sibling range is empty")]
    EmptyRange,
    #[error("sibling range {0:?} lies outside the tree")]
    OutOfTree(SiblingRange),
    #[error("child nesting depth {child} is shallower than parent depth {parent}")]
    InvalidNesting { child: u32, parent: u32 },
}

/// A contiguous run of siblings: `children[first..=last]` of the node reached
/// by following `parent` child indices from the method root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiblingRange {
    pub parent: Vec<usize>,
    pub first: usize,
    pub last: usize,
}

/// Either the whole method (the 0th extraction) or a sibling run inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sequence {
    WholeMethod,
    Range(SiblingRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SequenceMetrics {
    /// Nesting depth at which the run sits.
    pub lambda: u32,
    /// Accumulated inherent component.
    pub iota: u32,
    /// Accumulated nesting component, measured from the run's own depth.
    pub nu: u32,
    /// Constructs in the run whose nesting component in the method is nonzero.
    pub mu: u32,
}

impl SequenceMetrics {
    /// Complexity of the run once it becomes a method of its own.
    pub fn nmcc(&self) -> u32 {
        self.iota + self.nu
    }
}

/// Cognitive complexity removed from an enclosing sequence at depth
/// `parent_lambda` when `child` is extracted.
pub fn ccr(child: &SequenceMetrics, parent_lambda: u32) -> Result<u32, MetricsError> {
    if child.lambda < parent_lambda {
        return Err(MetricsError::InvalidNesting { child: child.lambda, parent: parent_lambda });
    }
    Ok(child.iota + child.nu + (child.lambda - parent_lambda) * child.mu)
}

pub fn compute_cc(method: &AstNode) -> Result<u32, MetricsError> {
    if method.kind != NodeKind::Method {
        return Err(MetricsError::RootNotMethod(method.kind));
    }
    let mut acc = Accumulator::new(0);
    for child in &method.children {
        acc.visit(child, 0);
    }
    Ok(acc.iota + acc.nu)
}

pub fn sequence_metrics(method: &AstNode, seq: &Sequence) -> Result<SequenceMetrics, MetricsError> {
    if method.kind != NodeKind::Method {
        return Err(MetricsError::RootNotMethod(method.kind));
    }
    match seq {
        Sequence::WholeMethod => {
            let mut acc = Accumulator::new(0);
            for child in &method.children {
                acc.visit(child, 0);
            }
            Ok(acc.finish())
        }
        Sequence::Range(range) => {
            let (nodes, lambda) = resolve_range(method, range)?;
            let mut acc = Accumulator::new(lambda);
            for node in nodes {
                acc.visit(node, lambda);
            }
            Ok(acc.finish())
        }
    }
}

/// Returns the nodes of `range` and the nesting depth they sit at.
pub fn resolve_range<'a>(method: &'a AstNode, range: &SiblingRange) -> Result<(&'a [AstNode], u32), MetricsError> {
    if range.first > range.last {
        return Err(MetricsError::EmptyRange);
    }
    let mut node = method;
    let mut depth = 0;
    for &idx in &range.parent {
        if node.kind.increments_child_depth() {
            depth += 1;
        }
        node = node.children.get(idx).ok_or_else(|| MetricsError::OutOfTree(range.clone()))?;
    }
    if node.kind.increments_child_depth() {
        depth += 1;
    }
    if range.last >= node.children.len() {
        return Err(MetricsError::OutOfTree(range.clone()));
    }
    Ok((&node.children[range.first..=range.last], depth))
}

struct Accumulator {
    base: u32,
    iota: u32,
    nu: u32,
    mu: u32,
}

impl Accumulator {
    fn new(base: u32) -> Self {
        Accumulator { base, iota: 0, nu: 0, mu: 0 }
    }

    fn visit(&mut self, node: &AstNode, depth: u32) {
        if node.kind.adds_inherent() {
            self.iota += 1;
            if node.kind.pays_nesting_penalty() {
                self.nu += depth - self.base;
                if depth > 0 {
                    self.mu += 1;
                }
            }
        }
        let child_depth = depth + u32::from(node.kind.increments_child_depth());
        for child in &node.children {
            self.visit(child, child_depth);
        }
    }

    fn finish(self) -> SequenceMetrics {
        SequenceMetrics { lambda: self.base, iota: self.iota, nu: self.nu, mu: self.mu }
    }
}
