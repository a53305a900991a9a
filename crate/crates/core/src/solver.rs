//! Exact single-objective optimization over selections.
//!
//! A sub-problem minimizes a non-negative rational combination of the three
//! objectives, optionally with ε-constraints (`f ≤ e`, slack `e − f`
//! rewarded with its own weight), exclusive box bounds and a lexicographic
//! tail. Remaining ties go to the lexicographically smallest id set, so every
//! call is deterministic.
//!
//! [`solve`] is a depth-first branch and bound over the extraction decisions;
//! [`solve_exhaustive`] enumerates every conflict-free subset and serves as
//! the reference.

use std::cmp::Ordering;
use std::time::Duration;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;
use web_time::Instant;

use crate::model::{BitSet, Instance, ObjectiveKind, Selection};

pub type Weight = Ratio<i64>;

/// Largest candidate count (method excluded) [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonConstraint {
    pub kind: ObjectiveKind,
    pub bound: i64,
    /// Weight of the slack `bound − f` subtracted from the objective.
    pub slack_weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubProblem {
    pub objective_terms: Vec<(ObjectiveKind, Weight)>,
    pub epsilon_constraints: Vec<EpsilonConstraint>,
    /// Exclusive upper bounds: `f < u`.
    pub box_bound: Vec<(ObjectiveKind, i64)>,
    /// Minimized in order among primary-optimal selections.
    pub lexicographic_tail: Vec<ObjectiveKind>,
}

impl SubProblem {
    pub fn minimize(kind: ObjectiveKind) -> Self {
        SubProblem { objective_terms: vec![(kind, Weight::from_integer(1))], ..Default::default() }
    }

    pub fn weighted(terms: impl IntoIterator<Item = (ObjectiveKind, Weight)>) -> Self {
        SubProblem { objective_terms: terms.into_iter().collect(), ..Default::default() }
    }

    /// Adds `f ≤ bound`, rewarding the slack with `slack_weight`.
    pub fn with_epsilon(mut self, kind: ObjectiveKind, bound: i64, slack_weight: Weight) -> Self {
        self.epsilon_constraints.push(EpsilonConstraint { kind, bound, slack_weight });
        self
    }

    /// Adds `f < upper`.
    pub fn with_box(mut self, kind: ObjectiveKind, upper: i64) -> Self {
        self.box_bound.push((kind, upper));
        self
    }

    pub fn then_minimize(mut self, kind: ObjectiveKind) -> Self {
        self.lexicographic_tail.push(kind);
        self
    }

    fn check(&self) -> Result<(), SolveError> {
        if self.objective_terms.is_empty() {
            return Err(SolveError::InvalidSubProblem("at least one objective term is required".into()));
        }
        let negative =
            self.objective_terms.iter().map(|t| &t.1).chain(self.epsilon_constraints.iter().map(|e| &e.slack_weight));
        for w in negative {
            if w.is_negative() {
                return Err(SolveError::InvalidSubProblem(format!("weight {w} is negative")));
            }
        }
        Ok(())
    }

    /// Value of the objective expression at a full objective vector.
    pub fn value(&self, f: &[i64; 3]) -> Ratio<i128> {
        let wide = |w: &Weight| Ratio::new(i128::from(*w.numer()), i128::from(*w.denom()));
        let mut v = Ratio::zero();
        for (k, w) in &self.objective_terms {
            v += wide(w) * i128::from(f[k.index()]);
        }
        for e in &self.epsilon_constraints {
            v -= wide(&e.slack_weight) * i128::from(e.bound - f[e.kind.index()]);
        }
        v
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid sub-problem: {0}")]
    InvalidSubProblem(String),
    #[error("{0} candidates exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Stopped early; any selection reported is only the incumbent.
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub selection: Option<Selection>,
    /// `(EXTRACTIONS, CC_DIFF, LOC_DIFF)` of `selection`.
    pub objectives: Option<[i64; 3]>,
    pub objective_value: Option<Ratio<i128>>,
    /// `bound − f` per ε-constraint, in order.
    pub slacks: Vec<i64>,
    pub nodes_explored: u64,
    pub elapsed: f64,
}

/// Stopping rule shared by a sequence of solver calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub max_nodes: Option<u64>,
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits::default()
    }

    pub fn within(budget: Duration) -> Self {
        Limits { deadline: Instant::now().checked_add(budget), max_nodes: None }
    }

    pub fn with_max_nodes(mut self, nodes: u64) -> Self {
        self.max_nodes = Some(nodes);
        self
    }

    /// The same limits after `used` nodes were spent.
    pub fn after(&self, used: u64) -> Self {
        Limits { deadline: self.deadline, max_nodes: self.max_nodes.map(|m| m.saturating_sub(used)) }
    }

    pub fn expired(&self) -> bool {
        self.max_nodes == Some(0) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Integer form of a sub-problem: `Σ coef_k·f_k − constant`, scaled by
/// the common denominator of all weights.
#[derive(Debug, Clone)]
struct Scaled {
    coef: [i128; 3],
    constant: i128,
    upper: [i64; 3],
    tail: Vec<usize>,
}

impl Scaled {
    fn new(sub: &SubProblem) -> Self {
        let weights =
            sub.objective_terms.iter().map(|t| t.1).chain(sub.epsilon_constraints.iter().map(|e| e.slack_weight));
        let scale = weights.fold(1i128, |acc, w| acc.lcm(&i128::from(*w.denom())));
        let int = |w: &Weight| i128::from(*w.numer()) * (scale / i128::from(*w.denom()));
        let mut coef = [0i128; 3];
        let mut constant = 0i128;
        let mut upper = [i64::MAX; 3];
        for (k, w) in &sub.objective_terms {
            coef[k.index()] += int(w);
        }
        for e in &sub.epsilon_constraints {
            coef[e.kind.index()] += int(&e.slack_weight);
            constant += int(&e.slack_weight) * i128::from(e.bound);
            upper[e.kind.index()] = upper[e.kind.index()].min(e.bound);
        }
        for (k, u) in &sub.box_bound {
            upper[k.index()] = upper[k.index()].min(u.saturating_sub(1));
        }
        Scaled { coef, constant, upper, tail: sub.lexicographic_tail.iter().map(|k| k.index()).collect() }
    }

    fn primary(&self, f: &[i64; 3]) -> i128 {
        (0..3).map(|k| self.coef[k] * i128::from(f[k])).sum::<i128>() - self.constant
    }

    fn key(&self, f: &[i64; 3]) -> Key {
        Key { primary: self.primary(f), tail: self.tail.iter().map(|&k| f[k]).collect() }
    }

    fn within(&self, f: &[i64; 3]) -> bool {
        (0..3).all(|k| f[k] <= self.upper[k])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    primary: i128,
    tail: Vec<i64>,
}

#[derive(Debug, Clone)]
struct Incumbent {
    key: Key,
    members: Vec<usize>,
    f: [i64; 3],
}

impl Incumbent {
    fn beats(&self, other: &Option<Incumbent>) -> bool {
        match other {
            None => true,
            Some(o) => match self.key.cmp(&o.key) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => self.members < o.members,
            },
        }
    }
}

fn finish(
    sub: &SubProblem,
    inst: &Instance,
    best: Option<Incumbent>,
    stopped: bool,
    nodes: u64,
    start: Instant,
) -> SolveResult {
    let status = match (stopped, &best) {
        (true, _) => SolveStatus::Timeout,
        (false, Some(_)) => SolveStatus::Optimal,
        (false, None) => SolveStatus::Infeasible,
    };
    let elapsed = start.elapsed().as_secs_f64();
    match best {
        Some(b) => SolveResult {
            status,
            selection: Some(inst.selection_of(&b.members)),
            objectives: Some(b.f),
            objective_value: Some(sub.value(&b.f)),
            slacks: sub.epsilon_constraints.iter().map(|e| e.bound - b.f[e.kind.index()]).collect(),
            nodes_explored: nodes,
            elapsed,
        },
        None => SolveResult {
            status,
            selection: None,
            objectives: None,
            objective_value: None,
            slacks: Vec::new(),
            nodes_explored: nodes,
            elapsed,
        },
    }
}

/// Branch and bound. Candidates are decided in order of decreasing CCR
/// toward the method (ties: larger id first), trying inclusion first.
pub fn solve(sub: &SubProblem, inst: &Instance, limits: &Limits) -> Result<SolveResult, SolveError> {
    sub.check()?;
    let start = Instant::now();
    let n = inst.len();
    let mut order: Vec<usize> = (1..n).collect();
    let ccr0 = |j: usize| inst.ancestors[j].iter().find(|a| a.0 == 0).map_or(0, |a| a.1);
    order.sort_by_key(|&j| (std::cmp::Reverse(ccr0(j)), std::cmp::Reverse(inst.ids[j])));

    let mut chosen = BitSet::new(n);
    chosen.insert(0);
    let mut search = Search {
        inst,
        scaled: Scaled::new(sub),
        order,
        chosen,
        members: vec![0],
        best: None,
        nodes: 0,
        limits: *limits,
        stopped: false,
        scratch: Scratch::new(n),
    };
    search.dfs(0);
    let Search { best, stopped, nodes, .. } = search;
    Ok(finish(sub, inst, best, stopped, nodes, start))
}

struct Scratch {
    cc: Vec<i64>,
    loc: Vec<i64>,
    adopt_cc: Vec<i64>,
    adopt_loc: Vec<i64>,
    attach_cc: Vec<i64>,
    attach_loc: Vec<i64>,
    max_ccr: Vec<i64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            cc: vec![0; n],
            loc: vec![0; n],
            adopt_cc: vec![0; n],
            adopt_loc: vec![0; n],
            attach_cc: vec![0; n],
            attach_loc: vec![0; n],
            max_ccr: vec![0; n],
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    scaled: Scaled,
    order: Vec<usize>,
    chosen: BitSet,
    members: Vec<usize>,
    best: Option<Incumbent>,
    nodes: u64,
    limits: Limits,
    stopped: bool,
    scratch: Scratch,
}

impl Search<'_> {
    fn dfs(&mut self, pos: usize) {
        if self.stopped {
            return;
        }
        self.nodes += 1;
        if self.limits.max_nodes.is_some_and(|m| self.nodes > m)
            || (self.nodes.is_multiple_of(512) && self.limits.expired())
        {
            self.stopped = true;
            return;
        }
        let Some(lb) = self.bounds(pos) else { return };
        if let Some(best) = &self.best {
            if self.scaled.key(&lb) > best.key {
                return;
            }
        }
        if pos == self.order.len() {
            self.leaf();
            return;
        }
        let j = self.order[pos];
        if !self.inst.conflicts[j].intersects(&self.chosen) {
            self.chosen.insert(j);
            self.members.push(j);
            self.dfs(pos + 1);
            self.members.pop();
            self.chosen.remove(j);
        }
        self.dfs(pos + 1);
    }

    fn leaf(&mut self) {
        let mut members = self.members.clone();
        members.sort_unstable();
        let Some(f) = self.inst.evaluate_dense(&members) else { return };
        if !self.scaled.within(&f) {
            return;
        }
        let cand = Incumbent { key: self.scaled.key(&f), members, f };
        if cand.beats(&self.best) {
            self.best = Some(cand);
        }
    }

    /// Per-objective lower bounds over all feasible completions, or `None`
    /// when no completion can be feasible.
    fn bounds(&mut self, pos: usize) -> Option<[i64; 3]> {
        let inst = self.inst;
        let tau = inst.tau();
        let s = &mut self.scratch;
        for &i in &self.members {
            s.cc[i] = inst.nmcc[i];
            s.loc[i] = inst.loc[i];
            s.adopt_cc[i] = 0;
            s.adopt_loc[i] = 0;
            s.attach_cc[i] = 0;
            s.attach_loc[i] = 0;
            s.max_ccr[i] = 0;
        }
        for &j in self.members.iter().filter(|&&j| j != 0) {
            let (h, ccr) = inst.host(j, &self.chosen).expect("nested in the method");
            s.cc[h] -= ccr;
            s.loc[h] -= inst.loc[j];
            s.adopt_cc[h] += ccr;
            s.adopt_loc[h] += inst.loc[j];
        }
        for &j in &self.order[pos..] {
            if inst.conflicts[j].intersects(&self.chosen) {
                continue;
            }
            let (h, ccr) = inst.host(j, &self.chosen).expect("nested in the method");
            s.attach_cc[h] += ccr;
            s.attach_loc[h] += inst.loc[j];
            s.max_ccr[h] = s.max_ccr[h].max(ccr);
        }

        let mut extra = 0i64;
        let (mut cc_lo_max, mut cc_hi_min) = (i64::MIN, i64::MAX);
        let (mut loc_lo_max, mut loc_hi_min) = (i64::MIN, i64::MAX);
        for &i in &self.members {
            let lo = s.cc[i] - s.attach_cc[i];
            if lo > tau {
                return None;
            }
            let excess = s.cc[i] - tau;
            if excess > 0 {
                extra += (excess + s.max_ccr[i] - 1) / s.max_ccr[i];
            }
            cc_lo_max = cc_lo_max.max(lo);
            cc_hi_min = cc_hi_min.min((s.cc[i] + s.adopt_cc[i]).min(tau));
            loc_lo_max = loc_lo_max.max(s.loc[i] - s.attach_loc[i]);
            loc_hi_min = loc_hi_min.min(s.loc[i] + s.adopt_loc[i]);
        }
        let lb = [self.members.len() as i64 + extra, (cc_lo_max - cc_hi_min).max(0), (loc_lo_max - loc_hi_min).max(0)];
        self.scaled.within(&lb).then_some(lb)
    }
}

/// Reference optimizer: evaluates every conflict-free subset.
pub fn solve_exhaustive(sub: &SubProblem, inst: &Instance) -> Result<SolveResult, SolveError> {
    sub.check()?;
    let extractions = inst.len().saturating_sub(1);
    if extractions > EXHAUSTIVE_LIMIT {
        return Err(SolveError::TooLarge(extractions));
    }
    let start = Instant::now();
    let scaled = Scaled::new(sub);
    let mut best: Option<Incumbent> = None;
    let mut nodes = 0u64;
    for_each_feasible(inst, |members, f| {
        nodes += 1;
        if scaled.within(f) {
            let cand = Incumbent { key: scaled.key(f), members: members.to_vec(), f: *f };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
    });
    Ok(finish(sub, inst, best, false, nodes, start))
}

/// Calls `visit` with every feasible selection (sorted dense indices, 0
/// included) and its full objective vector.
pub fn for_each_feasible(inst: &Instance, mut visit: impl FnMut(&[usize], &[i64; 3])) {
    fn rec(
        inst: &Instance,
        k: usize,
        chosen: &mut BitSet,
        members: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], &[i64; 3]),
    ) {
        if k == inst.len() {
            if let Some(f) = inst.evaluate_dense(members) {
                visit(members, &f);
            }
            return;
        }
        if !inst.conflicts[k].intersects(chosen) {
            chosen.insert(k);
            members.push(k);
            rec(inst, k + 1, chosen, members, visit);
            members.pop();
            chosen.remove(k);
        }
        rec(inst, k + 1, chosen, members, visit);
    }
    if inst.is_empty() {
        return;
    }
    let mut chosen = BitSet::new(inst.len());
    chosen.insert(0);
    rec(inst, 1, &mut chosen, &mut vec![0], &mut visit);
}
