//! Browser bindings: analyze a method AST, compute its Pareto front of
//! extraction plans, and score a front by hypervolume.
//!
//! Every export takes and returns JSON strings; the plain `*_json`
//! functions are the same operations without the JS boundary.

use std::time::Duration;

use ccreduce::analysis::front_stats;
use ccreduce::ast::AstNode;
use ccreduce::enumerator::enumerate_detailed;
use ccreduce::metrics::compute_cc;
use ccreduce::moalgo::{hybrid_full_p_split, HybridOptions};
use ccreduce::model::{Instance, ModelConfig, ObjectiveKind};
use ccreduce::solver::Limits;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const SAMPLE: &str = include_str!("../../core/fixtures/routeAPacketTo.json");

#[derive(Serialize)]
struct CandidateView {
    id: u32,
    lines: (u32, u32),
    loc: u32,
    nmcc: u32,
}

#[derive(Serialize)]
struct Analysis {
    cc: u32,
    candidates: Vec<CandidateView>,
}

#[derive(Deserialize)]
struct FrontRequest {
    method: serde_json::Value,
    #[serde(default = "default_tau")]
    threshold: u32,
    #[serde(default = "default_order")]
    objectives: Vec<String>,
    #[serde(default = "default_budget")]
    time_budget_ms: u64,
}

fn default_tau() -> u32 {
    15
}

fn default_order() -> Vec<String> {
    vec!["EXTRACTIONS".into(), "CC".into(), "LOC".into()]
}

fn default_budget() -> u64 {
    10_000
}

#[derive(Serialize)]
struct FrontView {
    objectives: Vec<String>,
    complete: bool,
    points: Vec<PointView>,
}

#[derive(Serialize)]
struct PointView {
    values: Vec<i64>,
    extractions: Vec<u32>,
}

#[derive(Serialize)]
struct HvView {
    n_solutions: usize,
    ideal: Vec<i64>,
    reference: Vec<i64>,
    normalized_hv: f64,
}

fn parse_method(text: &str) -> Result<AstNode, String> {
    AstNode::from_json(text).map_err(|e| e.to_string())
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// The bundled example method, as AST JSON.
#[wasm_bindgen]
pub fn sample_method() -> String {
    SAMPLE.to_string()
}

pub fn analyze_json(method: &str) -> Result<String, String> {
    let ast = parse_method(method)?;
    let cc = compute_cc(&ast).map_err(|e| e.to_string())?;
    let e = enumerate_detailed(&ast, "method").map_err(|e| e.to_string())?;
    let candidates = e
        .candidates
        .iter()
        .map(|c| {
            let cand = e.cache.candidate(c.id).expect("enumerated");
            CandidateView { id: c.id, lines: c.lines, loc: cand.loc, nmcc: cand.nmcc }
        })
        .collect();
    to_json(&Analysis { cc, candidates })
}

pub fn front_json(request: &str) -> Result<String, String> {
    let req: FrontRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let ast = parse_method(&req.method.to_string())?;
    let cache = ccreduce::enumerator::enumerate_feasible(&ast, "method").map_err(|e| e.to_string())?;
    let objectives: Vec<ObjectiveKind> = req
        .objectives
        .iter()
        .map(|s| s.parse::<ObjectiveKind>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let config = ModelConfig::new(req.threshold, objectives.clone()).map_err(|e| e.to_string())?;
    let inst = Instance::new(&cache, &config).map_err(|e| e.to_string())?;
    let limits = Limits::within(Duration::from_millis(req.time_budget_ms));
    let outcome = hybrid_full_p_split(&inst, &limits, HybridOptions::default(), |_| {}).map_err(|e| e.to_string())?;
    let points = outcome
        .front
        .points()
        .iter()
        .map(|p| PointView { values: p.objectives.clone(), extractions: p.selection.extracted() })
        .collect();
    let names = objectives.iter().map(|k| k.short_name().to_string()).collect();
    to_json(&FrontView { objectives: names, complete: outcome.complete, points })
}

pub fn hypervolume_json(points: &str) -> Result<String, String> {
    let pts: Vec<Vec<i64>> = serde_json::from_str(points).map_err(|e| e.to_string())?;
    let s = front_stats(&pts).map_err(|e| e.to_string())?;
    let view = HvView {
        n_solutions: s.n_solutions,
        normalized_hv: s.normalized_hv_f64(),
        ideal: s.ideal,
        reference: s.reference,
    };
    to_json(&view)
}

/// `{cc, candidates: [{id, lines, loc, nmcc}]}` for a method AST.
#[wasm_bindgen]
pub fn analyze(method: &str) -> Result<String, JsValue> {
    analyze_json(method).map_err(|e| JsValue::from_str(&e))
}

/// Pareto front of a method; request is
/// `{method, threshold?, objectives?, time_budget_ms?}`.
#[wasm_bindgen]
pub fn pareto_front(request: &str) -> Result<String, JsValue> {
    front_json(request).map_err(|e| JsValue::from_str(&e))
}

/// Normalized hypervolume of a JSON array of objective vectors.
#[wasm_bindgen]
pub fn hypervolume(points: &str) -> Result<String, JsValue> {
    hypervolume_json(points).map_err(|e| JsValue::from_str(&e))
}
