//! Builds a refactoring cache straight from a method tree.
//!
//! A candidate is a contiguous run of units inside one block, where a unit is
//! a single statement or construct, except that an `IF` absorbs the
//! `ELSE_IF`/`ELSE` siblings that follow it. `LOGICAL_SEQUENCE` and `BLOCK`
//! children are not units; `BLOCK` bodies are searched like any other.
//! Runs that remove no complexity from the method are dropped, as is the run
//! covering the whole method body (that is extraction 0).
//!
//! Every `ELSE` branch is also offered as a candidate of its own, tagged
//! [`CandidateOrigin::ElseBranch`].

use crate::ast::{AstNode, NodeKind};
use crate::cache::{CandidateId, ConflictPair, ExtractionCandidate, NestingArc, RefactoringCache};
use crate::metrics::{self, MetricsError, Sequence, SequenceMetrics, SiblingRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrigin {
    /// A run of whole units inside a block.
    Run,
    /// A lone `ELSE` branch, which is not a unit of its enclosing block.
    ElseBranch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateInfo {
    pub id: CandidateId,
    pub range: SiblingRange,
    pub metrics: SequenceMetrics,
    pub origin: CandidateOrigin,
    pub lines: (u32, u32),
    pub offsets: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub cache: RefactoringCache,
    pub method_metrics: SequenceMetrics,
    /// Indexed by `id - 1`.
    pub candidates: Vec<CandidateInfo>,
}

/// Cache of all applicable extractions of `method`.
pub fn enumerate_feasible(method: &AstNode, method_name: &str) -> Result<RefactoringCache, MetricsError> {
    enumerate_detailed(method, method_name).map(|e| e.cache)
}

/// Like [`enumerate_feasible`], keeping where each candidate came from.
pub fn enumerate_detailed(method: &AstNode, method_name: &str) -> Result<Enumeration, MetricsError> {
    if method.kind != NodeKind::Method {
        return Err(MetricsError::RootNotMethod(method.kind));
    }
    let method_metrics = metrics::sequence_metrics(method, &Sequence::WholeMethod)?;

    let mut ranges = Vec::new();
    collect(method, &mut Vec::new(), true, &mut ranges);

    let mut infos: Vec<CandidateInfo> = Vec::new();
    for (range, origin) in ranges {
        let seq = Sequence::Range(range.clone());
        let m = metrics::sequence_metrics(method, &seq)?;
        if metrics::ccr(&m, 0)? == 0 {
            continue;
        }
        let (nodes, _) = metrics::resolve_range(method, &range)?;
        let (first, last) = (&nodes[0], &nodes[nodes.len() - 1]);
        infos.push(CandidateInfo {
            id: infos.len() as CandidateId + 1,
            range,
            metrics: m,
            origin,
            lines: (first.start_line, last.end_line),
            offsets: (first.start_offset, last.end_offset),
        });
    }

    let mut candidates = vec![ExtractionCandidate {
        id: 0,
        loc: method.line_count(),
        nmcc: method_metrics.nmcc(),
        params: 0,
        offsets: Some((method.start_offset, method.end_offset)),
    }];
    let mut arcs = Vec::new();
    let mut conflicts = Vec::new();
    for info in &infos {
        candidates.push(ExtractionCandidate {
            id: info.id,
            loc: info.lines.1 - info.lines.0 + 1,
            nmcc: info.metrics.nmcc(),
            params: 0,
            offsets: Some(info.offsets),
        });
        arcs.push(NestingArc { child: info.id, parent: 0, ccr: metrics::ccr(&info.metrics, 0)? });
    }
    for (a, ia) in infos.iter().enumerate() {
        for ib in &infos[a + 1..] {
            match relation(&ia.range, &ib.range) {
                Relation::Contains => arcs.push(NestingArc {
                    child: ib.id,
                    parent: ia.id,
                    ccr: metrics::ccr(&ib.metrics, ia.metrics.lambda)?,
                }),
                Relation::Inside => arcs.push(NestingArc {
                    child: ia.id,
                    parent: ib.id,
                    ccr: metrics::ccr(&ia.metrics, ib.metrics.lambda)?,
                }),
                Relation::Overlap => conflicts.push(ConflictPair::new(ia.id, ib.id)),
                Relation::Disjoint => {}
            }
        }
    }
    Ok(Enumeration {
        cache: RefactoringCache::new(method_name, candidates, arcs, conflicts),
        method_metrics,
        candidates: infos,
    })
}

/// Upper bound on the number of contiguous runs over `n` statements.
pub fn count_upper_bound(n: u64) -> u64 {
    n * (n + 1) / 2
}

/// Indices `[first, last]` of each unit among `node.children`.
fn units(node: &AstNode) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, child) in node.children.iter().enumerate() {
        match child.kind {
            NodeKind::LogicalSequence | NodeKind::Block => {}
            k if k.continues_chain() && !out.is_empty() => out.last_mut().unwrap().1 = i,
            _ => out.push((i, i)),
        }
    }
    out
}

fn collect(node: &AstNode, path: &mut Vec<usize>, is_root: bool, out: &mut Vec<(SiblingRange, CandidateOrigin)>) {
    let us = units(node);
    for a in 0..us.len() {
        for b in a..us.len() {
            if is_root && a == 0 && b == us.len() - 1 {
                continue;
            }
            let range = SiblingRange { parent: path.clone(), first: us[a].0, last: us[b].1 };
            out.push((range, CandidateOrigin::Run));
        }
    }
    for (i, child) in node.children.iter().enumerate() {
        // An orphan ELSE is already a unit of its own.
        if child.kind == NodeKind::Else && !us.contains(&(i, i)) {
            out.push((SiblingRange { parent: path.clone(), first: i, last: i }, CandidateOrigin::ElseBranch));
        }
        path.push(i);
        collect(child, path, false, out);
        path.pop();
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Relation {
    Contains,
    Inside,
    Overlap,
    Disjoint,
}

fn relation(a: &SiblingRange, b: &SiblingRange) -> Relation {
    if covers(a, b) {
        Relation::Contains
    } else if covers(b, a) {
        Relation::Inside
    } else if a.parent == b.parent && a.first <= b.last && b.first <= a.last {
        Relation::Overlap
    } else {
        Relation::Disjoint
    }
}

/// `inner` lies strictly within `outer`.
fn covers(outer: &SiblingRange, inner: &SiblingRange) -> bool {
    if !inner.parent.starts_with(&outer.parent) {
        return false;
    }
    if inner.parent.len() == outer.parent.len() {
        outer.first <= inner.first && inner.last <= outer.last && outer != inner
    } else {
        let idx = inner.parent[outer.parent.len()];
        outer.first <= idx && idx <= outer.last
    }
}
