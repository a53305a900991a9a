//! Shared builders for the integration tests.
#![allow(dead_code)]

use ccreduce::cache::{CandidateId, ConflictPair, ExtractionCandidate, NestingArc, RefactoringCache};
use ccreduce::model::ObjectiveKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn candidate(id: CandidateId, loc: u32, nmcc: u32) -> ExtractionCandidate {
    ExtractionCandidate { id, loc, nmcc, params: 0, offsets: None }
}

/// Random cache with `n` extractions drawn as intervals over a statement
/// line: containment nests, partial overlap conflicts. Always valid and
/// laminar.
pub fn random_cache(seed: u64, n: usize) -> RefactoringCache {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.gen_range(n.max(4)..=2 * n + 4) as u32;
    let mut intervals: Vec<(u32, u32)> = Vec::new();
    let mut guard = 0;
    while intervals.len() < n && guard < 10_000 {
        guard += 1;
        let a = rng.gen_range(0..width);
        let b = rng.gen_range(a..width);
        if (a, b) == (0, width - 1) || intervals.contains(&(a, b)) {
            continue;
        }
        intervals.push((a, b));
    }
    let mut candidates = vec![candidate(0, width + 2, rng.gen_range(8..40))];
    let mut arcs = Vec::new();
    let mut conflicts = Vec::new();
    for (k, &(a, b)) in intervals.iter().enumerate() {
        let id = k as CandidateId + 1;
        let nmcc = rng.gen_range(0..12);
        candidates.push(candidate(id, b - a + 1, nmcc));
        arcs.push(NestingArc { child: id, parent: 0, ccr: nmcc + rng.gen_range(0..6) });
        for (m, &(c, d)) in intervals[..k].iter().enumerate() {
            let other = m as CandidateId + 1;
            let inside = c <= a && b <= d;
            let outside = a <= c && d <= b;
            if inside {
                arcs.push(NestingArc { child: id, parent: other, ccr: nmcc + rng.gen_range(0..3) });
            } else if outside {
                let child_nmcc = candidates[other as usize].nmcc;
                arcs.push(NestingArc { child: other, parent: id, ccr: child_nmcc + rng.gen_range(0..3) });
            } else if a <= d && c <= b {
                conflicts.push(ConflictPair::new(other, id));
            }
        }
    }
    RefactoringCache::new("random", candidates, arcs, conflicts)
}

/// The seven non-empty objective subsets, in canonical order.
pub fn objective_subsets() -> Vec<Vec<ObjectiveKind>> {
    (1u8..8)
        .map(|mask| {
            ObjectiveKind::ALL.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &o)| o).collect()
        })
        .collect()
}

/// Brute-force front straight from the cache: every subset of extractions,
/// checked and evaluated by the model, then Pareto-filtered by hand.
/// Returns the full objective vectors of all feasible selections.
pub fn all_feasible_objectives(cache: &RefactoringCache, tau: u32) -> Vec<[i64; 3]> {
    use ccreduce::model::{evaluate, is_feasible, ModelConfig, Selection};
    let ids: Vec<CandidateId> = cache.candidates.iter().map(|c| c.id).filter(|&id| id != 0).collect();
    assert!(ids.len() <= 20, "oracle is exponential");
    let config = ModelConfig::new(tau, ObjectiveKind::ALL.to_vec()).unwrap();
    let mut out = Vec::new();
    for mask in 0u32..(1 << ids.len()) {
        let chosen: Vec<CandidateId> =
            ids.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &id)| id).collect();
        if cache.conflicts.iter().any(|p| chosen.contains(&p.a) && chosen.contains(&p.b)) {
            continue;
        }
        let sel = Selection::new(chosen);
        if !is_feasible(&sel, cache, tau).0 {
            continue;
        }
        out.push(evaluate(&sel, cache, &config).unwrap().objectives);
    }
    out
}

/// Nondominated projections onto `objectives`, sorted.
pub fn oracle_front(all: &[[i64; 3]], objectives: &[ObjectiveKind]) -> Vec<Vec<i64>> {
    let proj: Vec<Vec<i64>> = all.iter().map(|f| objectives.iter().map(|k| f[k.index()]).collect()).collect();
    let mut front: Vec<Vec<i64>> = proj
        .iter()
        .filter(|p| !proj.iter().any(|q| q != *p && q.iter().zip(p.iter()).all(|(a, b)| a <= b)))
        .cloned()
        .collect();
    front.sort();
    front.dedup();
    front
}
