//! Hand-shaped caches whose Pareto front is known in advance.
//!
//! [`front_gadget`] builds a flat cache with one group of sibling extractions
//! per target point. Groups conflict pairwise, and every extraction removes
//! more than τ from the method, so the only feasible selections are "the
//! method plus one whole group". Each group's sizes, NMCCs and LOCs are
//! chosen so that its selection evaluates to exactly its target point.

use thiserror::Error;

use crate::cache::{CandidateId, ConflictPair, ExtractionCandidate, NestingArc, RefactoringCache};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("point {0:?}: need 2 or 3 objectives (EXTRACTIONS, CC_DIFF[, LOC_DIFF])")]
    Dimension(Vec<i64>),
    #[error("point {0:?}: extraction count must be at least 2")]
    TooFewExtractions(Vec<i64>),
    #[error("point {0:?}: CC difference must lie in 0..={1}")]
    CcOutOfRange(Vec<i64>, u32),
    #[error("point {0:?}: LOC difference must be non-negative")]
    LocOutOfRange(Vec<i64>),
    #[error("no common method length fits every group")]
    NoLayout,
}

/// Cache whose feasible selections map exactly onto `points`, given as
/// `(EXTRACTIONS, CC_DIFF)` or `(EXTRACTIONS, CC_DIFF, LOC_DIFF)`.
pub fn front_gadget(points: &[Vec<i64>], tau: u32) -> Result<RefactoringCache, GadgetError> {
    for p in points {
        if !(2..=3).contains(&p.len()) {
            return Err(GadgetError::Dimension(p.clone()));
        }
        if p[0] < 2 {
            return Err(GadgetError::TooFewExtractions(p.clone()));
        }
        if p[1] < 0 || p[1] > i64::from(tau) {
            return Err(GadgetError::CcOutOfRange(p.clone(), tau));
        }
        if p.get(2).is_some_and(|&t| t < 0) {
            return Err(GadgetError::LocOutOfRange(p.clone()));
        }
    }
    let tau = i64::from(tau);
    let sizes: Vec<i64> = points.iter().map(|p| p[0] - 1).collect();
    let widest = sizes.iter().copied().max().unwrap_or(1);
    // Method CC: every group leaves exactly τ behind.
    let method_cc = (tau + 1) * widest + tau;

    let loc_layout = match points.first().map(Vec::len) {
        Some(3) => Some(loc_layout(points).ok_or(GadgetError::NoLayout)?),
        _ => None,
    };
    let method_loc = loc_layout.as_ref().map_or(1000, |l| l.0);

    let mut candidates =
        vec![ExtractionCandidate { id: 0, loc: method_loc as u32, nmcc: method_cc as u32, params: 0, offsets: None }];
    let mut arcs = Vec::new();
    let mut groups: Vec<Vec<CandidateId>> = Vec::new();
    for (k, p) in points.iter().enumerate() {
        let m = sizes[k];
        let mut group = Vec::new();
        for x in 0..m {
            let id = candidates.len() as CandidateId;
            let ccr = if x + 1 < m { tau + 1 } else { method_cc - tau - (m - 1) * (tau + 1) };
            let loc = loc_layout.as_ref().map_or(1, |l| l.1[k][x as usize]);
            candidates.push(ExtractionCandidate {
                id,
                loc: loc as u32,
                nmcc: (tau - p[1]) as u32,
                params: 0,
                offsets: None,
            });
            arcs.push(NestingArc { child: id, parent: 0, ccr: ccr as u32 });
            group.push(id);
        }
        groups.push(group);
    }
    let mut conflicts = Vec::new();
    for x in 0..groups.len() {
        for y in x + 1..groups.len() {
            for &a in &groups[x] {
                for &b in &groups[y] {
                    conflicts.push(ConflictPair::new(a, b));
                }
            }
        }
    }
    Ok(RefactoringCache::new("gadget", candidates, arcs, conflicts))
}

/// Method LOC and per-group member LOCs such that the residual LOCs of
/// group `k` span exactly `points[k][2]`.
fn loc_layout(points: &[Vec<i64>]) -> Option<(i64, Vec<Vec<i64>>)> {
    let start = points.iter().map(|p| (p[0] + 1) * (p[2] + 1)).max()?;
    (start..start + 100_000).find_map(|total| {
        let groups: Option<Vec<Vec<i64>>> = points.iter().map(|p| group_locs(total, p[0] - 1, p[2])).collect();
        groups.map(|g| (total, g))
    })
}

/// `m` member LOCs for a method of `total` lines whose residual and members
/// have range exactly `t`.
fn group_locs(total: i64, m: i64, t: i64) -> Option<Vec<i64>> {
    for base in 1..total {
        // Residual on top: members fill [base, base + t], one at base.
        let sum = total - base - t;
        if sum < m * base {
            break;
        }
        if sum <= m * base + (m - 1) * t && (t > 0 || sum == m * base) {
            return Some(spread(m, base, t, sum - m * base, false));
        }
        // Residual at the bottom: one member at base + t.
        let sum = total - base;
        if m >= 1 && sum >= m * base + t && sum <= m * (base + t) {
            return Some(spread(m, base, t, sum - m * base, true));
        }
    }
    None
}

fn spread(m: i64, base: i64, t: i64, mut extra: i64, top_pinned: bool) -> Vec<i64> {
    let mut out = vec![base; m as usize];
    if top_pinned {
        out[0] = base + t;
        extra -= t;
    }
    for v in out.iter_mut().skip(1) {
        let add = extra.min(t);
        *v += add;
        extra -= add;
    }
    out
}
