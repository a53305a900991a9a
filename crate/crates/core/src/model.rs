//! Optimization instance built from a cache: which extractions are chosen,
//! who hosts whom, and what the three objectives evaluate to.
//!
//! Residual CC of a kept method `i` is `NMCC_i` minus the CCR of every chosen
//! extraction whose nearest chosen ancestor is `i`; residual LOC works the
//! same way with LOC. The objective max/min values are computed directly
//! instead of being searched.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{validate_cache, CandidateId, RefactoringCache};

pub const DEFAULT_TAU: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Number of methods in the result, the original one included.
    Extractions,
    /// Largest minus smallest residual CC.
    CcDiff,
    /// Largest minus smallest residual LOC.
    LocDiff,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [ObjectiveKind::Extractions, ObjectiveKind::CcDiff, ObjectiveKind::LocDiff];

    /// Position in the full `(EXTRACTIONS, CC, LOC)` vector.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short name used on the command line and in CSV headers.
    pub fn short_name(self) -> &'static str {
        match self {
            ObjectiveKind::Extractions => "EXTRACTIONS",
            ObjectiveKind::CcDiff => "CC",
            ObjectiveKind::LocDiff => "LOC",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E" | "EXTRACTIONS" => Ok(ObjectiveKind::Extractions),
            "C" | "CC" | "CC_DIFF" => Ok(ObjectiveKind::CcDiff),
            "L" | "LOC" | "LOC_DIFF" => Ok(ObjectiveKind::LocDiff),
            other => Err(ModelError::InvalidConfig(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid cache: {0}")]
    InvalidCache(String),
    #[error("unknown candidate id {0}")]
    UnknownId(CandidateId),
    #[error("candidate {0} has no nesting arc to the method")]
    MissingAncestor(CandidateId),
    #[error("candidate {child} has incomparable chosen ancestors {a} and {b}")]
    AmbiguousParent { child: CandidateId, a: CandidateId, b: CandidateId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub tau: u32,
    pub objectives: Vec<ObjectiveKind>,
}

impl ModelConfig {
    pub fn new(tau: u32, objectives: Vec<ObjectiveKind>) -> Result<Self, ModelError> {
        let c = ModelConfig { tau, objectives };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.tau == 0 {
            return Err(ModelError::InvalidConfig("threshold must be at least 1".into()));
        }
        if self.objectives.is_empty() || self.objectives.len() > 3 {
            return Err(ModelError::InvalidConfig("between 1 and 3 objectives are required".into()));
        }
        let unique: BTreeSet<_> = self.objectives.iter().collect();
        if unique.len() != self.objectives.len() {
            return Err(ModelError::InvalidConfig("duplicate objective".into()));
        }
        Ok(())
    }

    /// Projects a full `(E, CC, LOC)` vector onto the configured order.
    pub fn project(&self, full: &[i64; 3]) -> Vec<i64> {
        self.objectives.iter().map(|k| full[k.index()]).collect()
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { tau: DEFAULT_TAU, objectives: ObjectiveKind::ALL.to_vec() }
    }
}

/// Chosen extractions; always contains 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection {
    chosen: BTreeSet<CandidateId>,
}

impl Selection {
    pub fn new(ids: impl IntoIterator<Item = CandidateId>) -> Self {
        let mut chosen: BTreeSet<_> = ids.into_iter().collect();
        chosen.insert(0);
        Selection { chosen }
    }

    pub fn method_only() -> Self {
        Selection::new([])
    }

    pub fn contains(&self, id: CandidateId) -> bool {
        self.chosen.contains(&id)
    }

    /// Sorted ids, 0 included.
    pub fn ids(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.chosen.iter().copied()
    }

    /// Sorted ids of the extractions proper, 0 excluded.
    pub fn extracted(&self) -> Vec<CandidateId> {
        self.chosen.iter().copied().filter(|&i| i != 0).collect()
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluatedSolution {
    pub selection: Selection,
    /// Nearest chosen ancestor of every chosen extraction.
    pub direct_parent: BTreeMap<CandidateId, CandidateId>,
    pub residual_cc: BTreeMap<CandidateId, i64>,
    pub residual_loc: BTreeMap<CandidateId, i64>,
    pub c_max: i64,
    pub c_min: i64,
    pub t_max: i64,
    pub t_min: i64,
    /// `(EXTRACTIONS, CC_DIFF, LOC_DIFF)`.
    pub objectives: [i64; 3],
    /// `objectives` projected onto the configured order.
    pub objective_vector: Vec<i64>,
}

/// Direct parent of every chosen extraction.
pub fn derive_z(
    selection: &Selection,
    cache: &RefactoringCache,
) -> Result<BTreeMap<CandidateId, CandidateId>, ModelError> {
    let mut out = BTreeMap::new();
    for j in selection.ids().filter(|&j| j != 0) {
        if cache.candidate(j).is_none() {
            return Err(ModelError::UnknownId(j));
        }
        if cache.ccr(j, 0).is_none() {
            return Err(ModelError::MissingAncestor(j));
        }
        let hosts: Vec<CandidateId> = selection.ids().filter(|&i| i != j && cache.ccr(j, i).is_some()).collect();
        let direct: Vec<CandidateId> =
            hosts.iter().copied().filter(|&i| !hosts.iter().any(|&l| l != i && cache.ccr(l, i).is_some())).collect();
        match direct[..] {
            [p] => {
                out.insert(j, p);
            }
            [a, b, ..] => return Err(ModelError::AmbiguousParent { child: j, a, b }),
            [] => return Err(ModelError::MissingAncestor(j)),
        }
    }
    Ok(out)
}

pub fn evaluate(
    selection: &Selection,
    cache: &RefactoringCache,
    config: &ModelConfig,
) -> Result<EvaluatedSolution, ModelError> {
    if let Some(id) = selection.ids().find(|&id| cache.candidate(id).is_none()) {
        return Err(ModelError::UnknownId(id));
    }
    let direct_parent = derive_z(selection, cache)?;
    let mut residual_cc = BTreeMap::new();
    let mut residual_loc = BTreeMap::new();
    for i in selection.ids() {
        let c = cache.candidate(i).expect("checked above");
        residual_cc.insert(i, i64::from(c.nmcc));
        residual_loc.insert(i, i64::from(c.loc));
    }
    for (&j, &i) in &direct_parent {
        let ccr = cache.ccr(j, i).expect("derive_z only returns existing arcs");
        *residual_cc.get_mut(&i).unwrap() -= i64::from(ccr);
        *residual_loc.get_mut(&i).unwrap() -= i64::from(cache.candidate(j).unwrap().loc);
    }
    let c_max = residual_cc.values().copied().max().unwrap_or(0);
    let c_min = residual_cc.values().copied().min().unwrap_or(0);
    let t_max = residual_loc.values().copied().max().unwrap_or(0);
    let t_min = residual_loc.values().copied().min().unwrap_or(0);
    let objectives = [selection.len() as i64, c_max - c_min, t_max - t_min];
    Ok(EvaluatedSolution {
        selection: selection.clone(),
        direct_parent,
        residual_cc,
        residual_loc,
        c_max,
        c_min,
        t_max,
        t_min,
        objective_vector: config.project(&objectives),
        objectives,
    })
}

/// Feasibility plus a human-readable list of what is violated.
pub fn is_feasible(selection: &Selection, cache: &RefactoringCache, tau: u32) -> (bool, Vec<String>) {
    let mut report = Vec::new();
    if !selection.contains(0) {
        report.push("method 0 is not selected".to_string());
    }
    for p in &cache.conflicts {
        if selection.contains(p.a) && selection.contains(p.b) {
            report.push(format!("conflicting extractions {} and {} both selected", p.a, p.b));
        }
    }
    if report.is_empty() {
        match evaluate(selection, cache, &ModelConfig::default()) {
            Ok(ev) => {
                for (i, r) in &ev.residual_cc {
                    if *r > i64::from(tau) {
                        report.push(format!("residual CC {r} > {tau} for method {i}"));
                    }
                }
            }
            Err(e) => report.push(e.to_string()),
        }
    }
    (report.is_empty(), report)
}

/// Fixed-width bit set over dense candidate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { words: vec![0; len.div_ceil(64)] }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }
}

/// A cache compiled for fast repeated evaluation. Candidates are addressed
/// by dense index; index 0 is the method.
#[derive(Debug, Clone)]
pub struct Instance {
    pub cache: RefactoringCache,
    pub config: ModelConfig,
    pub ids: Vec<CandidateId>,
    pub loc: Vec<i64>,
    pub nmcc: Vec<i64>,
    /// Ancestors of each candidate with the CCR toward them, deepest first.
    pub ancestors: Vec<Vec<(usize, i64)>>,
    pub conflicts: Vec<BitSet>,
    /// Number of ancestors; strictly larger for deeper candidates.
    pub depth: Vec<usize>,
}

impl Instance {
    /// Validates the cache and checks that any two ancestors of a candidate
    /// are either nested or in conflict, so the nearest chosen ancestor is
    /// always unique.
    pub fn new(cache: &RefactoringCache, config: &ModelConfig) -> Result<Self, ModelError> {
        config.check()?;
        let violations = validate_cache(cache);
        if let Some(v) = violations.first() {
            return Err(ModelError::InvalidCache(v.message.clone()));
        }
        let ids: Vec<CandidateId> = cache.candidates.iter().map(|c| c.id).collect();
        let index: BTreeMap<CandidateId, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let n = ids.len();
        let mut ancestors: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for a in &cache.arcs {
            ancestors[index[&a.child]].push((index[&a.parent], i64::from(a.ccr)));
        }
        let mut conflicts = vec![BitSet::new(n); n];
        for p in &cache.conflicts {
            let (a, b) = (index[&p.a], index[&p.b]);
            conflicts[a].insert(b);
            conflicts[b].insert(a);
        }
        let depth: Vec<usize> = ancestors.iter().map(Vec::len).collect();
        for (j, anc) in ancestors.iter_mut().enumerate() {
            anc.sort_by_key(|&(i, _)| (std::cmp::Reverse(depth[i]), i));
            for (x, &(a, _)) in anc.iter().enumerate() {
                for &(b, _) in &anc[x + 1..] {
                    let comparable = ancestors_contains(&cache.arcs, ids[a], ids[b])
                        || ancestors_contains(&cache.arcs, ids[b], ids[a]);
                    if !comparable && !conflicts[a].contains(b) {
                        return Err(ModelError::AmbiguousParent { child: ids[j], a: ids[a], b: ids[b] });
                    }
                }
            }
        }
        Ok(Instance {
            cache: cache.clone(),
            config: config.clone(),
            loc: cache.candidates.iter().map(|c| i64::from(c.loc)).collect(),
            nmcc: cache.candidates.iter().map(|c| i64::from(c.nmcc)).collect(),
            ids,
            ancestors,
            conflicts,
            depth,
        })
    }

    /// Number of candidates including the method.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn tau(&self) -> i64 {
        i64::from(self.config.tau)
    }

    /// Nearest chosen ancestor of `j`.
    pub fn host(&self, j: usize, chosen: &BitSet) -> Option<(usize, i64)> {
        self.ancestors[j].iter().copied().find(|&(i, _)| chosen.contains(i))
    }

    /// Residual CC and LOC per chosen index (other entries are 0).
    pub fn residuals(&self, chosen: &BitSet, members: &[usize]) -> (Vec<i64>, Vec<i64>) {
        let mut cc = vec![0; self.len()];
        let mut loc = vec![0; self.len()];
        for &i in members {
            cc[i] = self.nmcc[i];
            loc[i] = self.loc[i];
        }
        for &j in members.iter().filter(|&&j| j != 0) {
            let (i, ccr) = self.host(j, chosen).expect("every candidate nests in the method");
            cc[i] -= ccr;
            loc[i] -= self.loc[j];
        }
        (cc, loc)
    }

    /// Full objective vector of a conflict-free selection given by dense
    /// indices (0 included), or `None` when some residual exceeds τ.
    pub fn evaluate_dense(&self, members: &[usize]) -> Option<[i64; 3]> {
        let mut chosen = BitSet::new(self.len());
        for &i in members {
            chosen.insert(i);
        }
        let (cc, loc) = self.residuals(&chosen, members);
        let tau = self.tau();
        let (mut cmax, mut cmin, mut tmax, mut tmin) = (i64::MIN, i64::MAX, i64::MIN, i64::MAX);
        for &i in members {
            if cc[i] > tau {
                return None;
            }
            cmax = cmax.max(cc[i]);
            cmin = cmin.min(cc[i]);
            tmax = tmax.max(loc[i]);
            tmin = tmin.min(loc[i]);
        }
        Some([members.len() as i64, cmax - cmin, tmax - tmin])
    }

    pub fn selection_of(&self, members: &[usize]) -> Selection {
        Selection::new(members.iter().map(|&k| self.ids[k]))
    }

    pub fn members_of(&self, selection: &Selection) -> Result<Vec<usize>, ModelError> {
        selection.ids().map(|id| self.ids.binary_search(&id).map_err(|_| ModelError::UnknownId(id))).collect()
    }
}

fn ancestors_contains(arcs: &[crate::cache::NestingArc], child: CandidateId, parent: CandidateId) -> bool {
    arcs.binary_search_by(|a| (a.child, a.parent).cmp(&(child, parent))).is_ok()
}
