//! Pareto-front drivers: weighted sum, AUGMECON, and the hybrid method with
//! full p-split box decomposition, plus the redundancy-elimination step the
//! latter relies on.
//!
//! Every driver reports each point the moment it is proven efficient through
//! an `on_point` callback, so callers can stream results.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{Instance, ObjectiveKind, Selection};
use crate::solver::{self, Limits, SolveError, SolveResult, SolveStatus, SubProblem, Weight};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoError {
    #[error("{algorithm} requires {expected} objectives, got {got}")]
    ObjectiveCount { algorithm: &'static str, expected: &'static str, got: usize },
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPoint {
    /// Objective values in the configured order.
    pub objectives: Vec<i64>,
    /// `(EXTRACTIONS, CC_DIFF, LOC_DIFF)`.
    pub full: [i64; 3],
    pub selection: Selection,
}

/// Mutually nondominated points, kept in discovery order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParetoFront {
    points: Vec<FrontPoint>,
}

impl ParetoFront {
    pub fn new() -> Self {
        ParetoFront::default()
    }

    /// Adds `p` unless an existing point weakly dominates it; points `p`
    /// dominates are dropped. Returns whether `p` was added.
    pub fn insert(&mut self, p: FrontPoint) -> bool {
        if self.points.iter().any(|q| dominates_weakly(&q.objectives, &p.objectives)) {
            return false;
        }
        self.points.retain(|q| !dominates_weakly(&p.objectives, &q.objectives));
        self.points.push(p);
        true
    }

    pub fn points(&self) -> &[FrontPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Objective vectors in ascending lexicographic order.
    pub fn vectors(&self) -> Vec<Vec<i64>> {
        let mut v: Vec<_> = self.points.iter().map(|p| p.objectives.clone()).collect();
        v.sort();
        v
    }
}

fn dominates_weakly(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// What a driver produced and whether it ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub front: ParetoFront,
    /// False when the budget ran out first.
    pub complete: bool,
    pub solves: usize,
    pub nodes_explored: u64,
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightVector {
    w: Vec<Weight>,
}

impl WeightVector {
    pub fn new(w: Vec<Weight>) -> Result<Self, MoError> {
        if w.is_empty() {
            return Err(MoError::InvalidWeights("no components".into()));
        }
        if w.iter().any(|x| x.is_negative()) {
            return Err(MoError::InvalidWeights("negative component".into()));
        }
        if w.iter().fold(Weight::zero(), |a, b| a + b) != Weight::one() {
            return Err(MoError::InvalidWeights("components must sum to 1".into()));
        }
        Ok(WeightVector { w })
    }

    /// Normalizes arbitrary non-negative reals given as rationals.
    pub fn normalized(raw: &[Weight]) -> Result<Self, MoError> {
        let total = raw.iter().fold(Weight::zero(), |a, b| a + b);
        if total.is_zero() || raw.iter().any(|x| x.is_negative()) {
            return Err(MoError::InvalidWeights("weights must be non-negative and not all zero".into()));
        }
        WeightVector::new(raw.iter().map(|x| x / total).collect())
    }

    pub fn components(&self) -> &[Weight] {
        &self.w
    }
}

/// Uniform simplex lattice with `per_axis` values along each axis:
/// every `(k_1, …, k_p) / (per_axis − 1)` with `Σ k = per_axis − 1`.
pub fn simplex_lattice(p: usize, per_axis: usize) -> Vec<WeightVector> {
    if p == 0 || per_axis == 0 {
        return Vec::new();
    }
    if per_axis == 1 {
        let share = Weight::new(1, p as i64);
        return vec![WeightVector { w: vec![share; p] }];
    }
    let steps = per_axis as i64 - 1;
    let mut out = Vec::new();
    let mut cur = vec![0i64; p];
    fn rec(k: usize, left: i64, steps: i64, cur: &mut Vec<i64>, out: &mut Vec<WeightVector>) {
        if k == cur.len() - 1 {
            cur[k] = left;
            out.push(WeightVector { w: cur.iter().map(|&c| Weight::new(c, steps)).collect() });
            return;
        }
        for c in (0..=left).rev() {
            cur[k] = c;
            rec(k + 1, left - c, steps, cur, out);
        }
    }
    rec(0, steps, steps, &mut cur, &mut out);
    out
}

fn require(inst: &Instance, algorithm: &'static str, expected: &'static str, ok: bool) -> Result<(), MoError> {
    if ok {
        Ok(())
    } else {
        Err(MoError::ObjectiveCount { algorithm, expected, got: inst.config.objectives.len() })
    }
}

fn point_of(inst: &Instance, r: &SolveResult) -> FrontPoint {
    let full = r.objectives.expect("optimal results carry objectives");
    FrontPoint {
        objectives: inst.config.project(&full),
        full,
        selection: r.selection.clone().expect("optimal results carry a selection"),
    }
}

/// Bookkeeping shared by the drivers.
struct Run<'a, F: FnMut(&FrontPoint)> {
    inst: &'a Instance,
    limits: Limits,
    front: ParetoFront,
    solves: usize,
    nodes: u64,
    complete: bool,
    on_point: F,
}

impl<'a, F: FnMut(&FrontPoint)> Run<'a, F> {
    fn new(inst: &'a Instance, limits: &Limits, on_point: F) -> Self {
        Run { inst, limits: *limits, front: ParetoFront::new(), solves: 0, nodes: 0, complete: true, on_point }
    }

    fn solve(&mut self, sub: &SubProblem) -> Result<SolveResult, MoError> {
        let r = solver::solve(sub, self.inst, &self.limits.after(self.nodes))?;
        self.record(&r);
        Ok(r)
    }

    fn record(&mut self, r: &SolveResult) {
        self.solves += 1;
        self.nodes += r.nodes_explored;
        if r.status == SolveStatus::Timeout {
            self.complete = false;
        }
    }

    fn accept(&mut self, r: &SolveResult) {
        let p = point_of(self.inst, r);
        if self.front.insert(p.clone()) {
            (self.on_point)(&p);
        }
    }

    fn finish(self) -> RunOutcome {
        RunOutcome { front: self.front, complete: self.complete, solves: self.solves, nodes_explored: self.nodes }
    }
}

/// Single-objective optimum: a front of at most one point.
pub fn obtain_results(
    inst: &Instance,
    limits: &Limits,
    on_point: impl FnMut(&FrontPoint),
) -> Result<RunOutcome, MoError> {
    let objectives = inst.config.objectives.clone();
    require(inst, "obtain-results", "exactly 1", objectives.len() == 1)?;
    let mut run = Run::new(inst, limits, on_point);
    let r = run.solve(&SubProblem::minimize(objectives[0]))?;
    if r.status == SolveStatus::Optimal {
        run.accept(&r);
    }
    Ok(run.finish())
}

/// Solves one scalarization per weight vector. Ties inside a scalarization
/// are broken lexicographically on the objectives in configured order, so
/// even zero weights yield efficient points.
pub fn weighted_sum(
    inst: &Instance,
    weights: &[WeightVector],
    limits: &Limits,
    on_point: impl FnMut(&FrontPoint),
) -> Result<RunOutcome, MoError> {
    let objectives = inst.config.objectives.clone();
    require(inst, "weighted-sum", "at least 2", objectives.len() >= 2)?;
    for w in weights {
        if w.components().len() != objectives.len() {
            return Err(MoError::InvalidWeights(format!(
                "expected {} components, got {}",
                objectives.len(),
                w.components().len()
            )));
        }
    }
    let mut run = Run::new(inst, limits, on_point);
    for w in weights {
        let mut sub = SubProblem::weighted(objectives.iter().copied().zip(w.components().iter().copied()));
        sub.lexicographic_tail = objectives.clone();
        let r = run.solve(&sub)?;
        match r.status {
            SolveStatus::Optimal => run.accept(&r),
            SolveStatus::Infeasible => break,
            SolveStatus::Timeout => {}
        }
    }
    Ok(run.finish())
}

/// Slack weight for AUGMECON: `1 / ((f1(z) − l1)·10⁻³)` clamped into
/// `[10⁻⁶, 10⁻³]`; a zero range gives `10⁻³`.
pub fn augmecon_lambda(f1_of_z: i64, lower_bound_l1: i64) -> Weight {
    let lo = Weight::new(1, 1_000_000);
    let hi = Weight::new(1, 1000);
    let range = f1_of_z - lower_bound_l1;
    if range <= 0 {
        return hi;
    }
    let raw = Weight::new(1000, range);
    raw.clamp(lo, hi)
}

/// Augmented ε-constraint method for two objectives `(f1, f2)` taken from
/// the configured order.
pub fn augmecon(inst: &Instance, limits: &Limits, on_point: impl FnMut(&FrontPoint)) -> Result<RunOutcome, MoError> {
    let objectives = inst.config.objectives.clone();
    require(inst, "epsilon-constraint", "exactly 2", objectives.len() == 2)?;
    let (f1, f2) = (objectives[0], objectives[1]);
    let mut run = Run::new(inst, limits, on_point);

    let first = run.solve(&SubProblem::minimize(f2))?;
    if first.status != SolveStatus::Optimal {
        return Ok(run.finish());
    }
    let f2_best = first.objectives.unwrap()[f2.index()];
    let mut z = run.solve(&SubProblem::minimize(f1).with_epsilon(f2, f2_best, Weight::zero()))?;
    if z.status != SolveStatus::Optimal {
        return Ok(run.finish());
    }
    run.accept(&z);
    let l1_result = run.solve(&SubProblem::minimize(f1))?;
    if l1_result.status != SolveStatus::Optimal {
        return Ok(run.finish());
    }
    let l1 = l1_result.objectives.unwrap()[f1.index()];
    let range = z.objectives.unwrap()[f1.index()] - l1;
    // The slack never exceeds `range − 1`; keeping λ·range ≤ 1 makes any
    // one-unit gain in f2 outweigh every slack difference (docs/augmecon-lambda.md).
    let lambda = augmecon_lambda(z.objectives.unwrap()[f1.index()], l1).min(Weight::new(1, range.max(1)));

    let mut epsilon = z.objectives.unwrap()[f1.index()] - 1;
    loop {
        let sub = SubProblem::minimize(f2).with_epsilon(f1, epsilon, lambda);
        z = run.solve(&sub)?;
        match z.status {
            SolveStatus::Optimal => {
                run.accept(&z);
                epsilon = z.objectives.unwrap()[f1.index()] - 1;
            }
            SolveStatus::Infeasible | SolveStatus::Timeout => break,
        }
    }
    Ok(run.finish())
}

/// An objective-space box with exclusive upper corner.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectiveBox {
    pub upper: Vec<i64>,
    /// Informational lower corner.
    pub lower: Vec<i64>,
}

/// Redundancy elimination: splits every box strictly containing `z` along
/// each axis and drops generated boxes contained in another candidate.
/// Order is preserved: surviving boxes first, then the new ones axis by axis.
pub fn redundancy_elimination(boxes: &[Vec<i64>], z: &[i64]) -> Vec<Vec<i64>> {
    let p = z.len();
    let strictly_below = |u: &[i64]| z.iter().zip(u).all(|(a, b)| a < b);
    let (r, keep): (Vec<&Vec<i64>>, Vec<&Vec<i64>>) = boxes.iter().partition(|u| strictly_below(u));
    let mut out: Vec<Vec<i64>> = keep.into_iter().cloned().collect();
    for j in 0..p {
        let d: Vec<&Vec<i64>> =
            boxes.iter().filter(|u| z[j] == u[j] && (0..p).all(|k| k == j || z[k] < u[k])).collect();
        let mut pj: Vec<Vec<i64>> = Vec::new();
        for u in &r {
            let mut v = (*u).clone();
            v[j] = z[j];
            if !pj.contains(&v) {
                pj.push(v);
            }
        }
        let filtered: Vec<Vec<i64>> = pj
            .iter()
            .filter(|zp| !pj.iter().chain(d.iter().copied()).any(|up| up != *zp && dominates_weakly(zp, up)))
            .cloned()
            .collect();
        for b in filtered {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    out
}

/// Safe exclusive upper corner of the initial box, per configured objective.
pub fn initial_box(inst: &Instance) -> Vec<i64> {
    let n = inst.len() as i64;
    let mut cc_floor = 0i64;
    let mut loc_floor = 0i64;
    for i in 0..inst.len() {
        let mut cc = inst.nmcc[i];
        let mut loc = inst.loc[i];
        for (j, anc) in inst.ancestors.iter().enumerate() {
            if let Some(&(_, ccr)) = anc.iter().find(|a| a.0 == i) {
                cc -= ccr;
                loc -= inst.loc[j];
            }
        }
        cc_floor = cc_floor.min(cc);
        loc_floor = loc_floor.min(loc);
    }
    let max_cc = inst.nmcc.iter().copied().max().unwrap_or(0).max(inst.tau());
    let max_loc = inst.loc.iter().copied().max().unwrap_or(0);
    inst.config
        .objectives
        .iter()
        .map(|k| match k {
            ObjectiveKind::Extractions => n + 1,
            ObjectiveKind::CcDiff => max_cc - cc_floor + 1,
            ObjectiveKind::LocDiff => max_loc - loc_floor + 1,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HybridOptions {
    /// Boxes solved speculatively ahead of the queue head; 0 or 1 means
    /// strictly sequential. Results are identical either way.
    pub lookahead: usize,
}

fn box_problem(objectives: &[ObjectiveKind], upper: &[i64]) -> SubProblem {
    let mut sub = SubProblem::weighted(objectives.iter().map(|&k| (k, Weight::one())));
    for (&k, &u) in objectives.iter().zip(upper) {
        sub = sub.with_box(k, u);
    }
    sub.lexicographic_tail = objectives.to_vec();
    sub
}

/// Hybrid method with full p-split: FIFO queue of boxes, each solved as
/// `min Σ f` strictly inside the box; every optimum is efficient and splits
/// the boxes containing it.
pub fn hybrid_full_p_split(
    inst: &Instance,
    limits: &Limits,
    options: HybridOptions,
    on_point: impl FnMut(&FrontPoint),
) -> Result<RunOutcome, MoError> {
    let objectives = inst.config.objectives.clone();
    require(inst, "hybrid-method", "2 or 3", (2..=3).contains(&objectives.len()))?;
    let mut run = Run::new(inst, limits, on_point);
    let mut queue: Vec<Vec<i64>> = vec![initial_box(inst)];
    let mut cache: HashMap<Vec<i64>, SolveResult> = HashMap::new();

    while let Some(head) = queue.first().cloned() {
        if run.limits.after(run.nodes).expired() {
            run.complete = false;
            break;
        }
        let r = match cache.remove(&head) {
            Some(r) => {
                run.record(&r);
                r
            }
            None => {
                speculate(inst, &objectives, &queue, options.lookahead, &run.limits.after(run.nodes), &mut cache)?;
                match cache.remove(&head) {
                    Some(r) => {
                        run.record(&r);
                        r
                    }
                    None => run.solve(&box_problem(&objectives, &head))?,
                }
            }
        };
        match r.status {
            SolveStatus::Optimal => {
                run.accept(&r);
                let z = inst.config.project(&r.objectives.unwrap());
                queue = redundancy_elimination(&queue, &z);
            }
            SolveStatus::Infeasible => {
                queue.remove(0);
            }
            SolveStatus::Timeout => {
                run.complete = false;
                break;
            }
        }
    }
    Ok(run.finish())
}

/// Solves up to `lookahead` queued boxes concurrently into `cache`.
#[cfg(feature = "parallel")]
fn speculate(
    inst: &Instance,
    objectives: &[ObjectiveKind],
    queue: &[Vec<i64>],
    lookahead: usize,
    limits: &Limits,
    cache: &mut HashMap<Vec<i64>, SolveResult>,
) -> Result<(), MoError> {
    use rayon::prelude::*;
    if lookahead <= 1 {
        return Ok(());
    }
    let todo: Vec<&Vec<i64>> = queue.iter().filter(|u| !cache.contains_key(*u)).take(lookahead).collect();
    let solved: Vec<(Vec<i64>, Result<SolveResult, SolveError>)> =
        todo.par_iter().map(|u| ((*u).clone(), solver::solve(&box_problem(objectives, u), inst, limits))).collect();
    for (u, r) in solved {
        let r = r?;
        // A box cut short by the budget is not a result; leave it unsolved.
        if r.status != SolveStatus::Timeout {
            cache.insert(u, r);
        }
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn speculate(
    _inst: &Instance,
    _objectives: &[ObjectiveKind],
    _queue: &[Vec<i64>],
    _lookahead: usize,
    _limits: &Limits,
    _cache: &mut HashMap<Vec<i64>, SolveResult>,
) -> Result<(), MoError> {
    Ok(())
}

/// Reference front: every feasible selection, Pareto-filtered on the
/// configured objectives. Each point keeps its lexicographically smallest
/// selection.
pub fn exhaustive_front(inst: &Instance) -> Result<ParetoFront, MoError> {
    let extractions = inst.len().saturating_sub(1);
    if extractions > solver::EXHAUSTIVE_LIMIT {
        return Err(SolveError::TooLarge(extractions).into());
    }
    let mut best: BTreeMap<Vec<i64>, (Vec<usize>, [i64; 3])> = BTreeMap::new();
    solver::for_each_feasible(inst, |members, f| {
        let v = inst.config.project(f);
        match best.get(&v) {
            Some((m, _)) if m.as_slice() <= members => {}
            _ => {
                best.insert(v, (members.to_vec(), *f));
            }
        }
    });
    let vectors: Vec<Vec<i64>> = best.keys().cloned().collect();
    let mut front = ParetoFront::new();
    for (v, (members, full)) in best {
        if vectors.iter().any(|q| q != &v && dominates_weakly(q, &v)) {
            continue;
        }
        front.insert(FrontPoint { objectives: v, full, selection: inst.selection_of(&members) });
    }
    Ok(front)
}

/// Ratio helper for callers building weights from integers.
pub fn weight(num: i64, den: i64) -> Weight {
    Ratio::new(num, den)
}
