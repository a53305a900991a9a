//! Refactoring cache: every feasible extraction of one method, how the
//! extractions nest, and which pairs conflict.
//!
//! On disk a cache is four CSV files sharing the method name as prefix:
//!
//! | file                                   | header            |
//! |----------------------------------------|-------------------|
//! | `<m>_extractions.csv`                  | `id,loc,nmcc,params` |
//! | `<m>_nested.csv`                       | `child,parent,ccr` |
//! | `<m>_conflict.csv`                     | `a,b`             |
//! | `<m>_feasible_extractions_offsets.csv` | `id,start,end`    |
//!
//! The nested file lists every ancestor pair, not only direct containment.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CandidateId = u32;

pub const EXTRACTIONS_HEADER: [&str; 4] = ["id", "loc", "nmcc", "params"];
pub const NESTED_HEADER: [&str; 3] = ["child", "parent", "ccr"];
pub const CONFLICT_HEADER: [&str; 2] = ["a", "b"];
pub const OFFSETS_HEADER: [&str; 3] = ["id", "start", "end"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionCandidate {
    pub id: CandidateId,
    pub loc: u32,
    pub nmcc: u32,
    /// Parameters the extracted method would need; carried but unused.
    pub params: u32,
    pub offsets: Option<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestingArc {
    pub child: CandidateId,
    pub parent: CandidateId,
    pub ccr: u32,
}

/// Unordered pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictPair {
    pub a: CandidateId,
    pub b: CandidateId,
}

impl ConflictPair {
    pub fn new(x: CandidateId, y: CandidateId) -> Self {
        ConflictPair { a: x.min(y), b: x.max(y) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RefactoringCache {
    pub method_name: String,
    /// Sorted by id; id 0 is the whole method.
    pub candidates: Vec<ExtractionCandidate>,
    /// Sorted by `(child, parent)`.
    pub arcs: Vec<NestingArc>,
    /// Sorted by `(a, b)`.
    pub conflicts: Vec<ConflictPair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: PathBuf,
    pub line: Option<u64>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file.display(), line, self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid refactoring cache:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("no `*_extractions.csv` file found in {0}")]
    NoCacheInDir(PathBuf),
}

fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// The four file locations of one cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachePaths {
    pub extractions: PathBuf,
    pub nested: PathBuf,
    pub conflict: PathBuf,
    pub offsets: PathBuf,
}

impl CachePaths {
    pub fn in_dir(dir: &Path, method: &str) -> Self {
        CachePaths {
            extractions: dir.join(format!("{method}_extractions.csv")),
            nested: dir.join(format!("{method}_nested.csv")),
            conflict: dir.join(format!("{method}_conflict.csv")),
            offsets: dir.join(format!("{method}_feasible_extractions_offsets.csv")),
        }
    }

    /// Locates the single cache stored in `dir`.
    pub fn discover(dir: &Path) -> Result<(String, Self), CacheError> {
        let entries = fs::read_dir(dir).map_err(|source| CacheError::Io { path: dir.to_path_buf(), source })?;
        let mut methods: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix("_extractions.csv")).map(str::to_string))
            .collect();
        methods.sort();
        let method = methods.into_iter().next().ok_or_else(|| CacheError::NoCacheInDir(dir.to_path_buf()))?;
        let paths = CachePaths::in_dir(dir, &method);
        Ok((method, paths))
    }
}

impl RefactoringCache {
    /// Builds a cache and sorts its collections into canonical order.
    pub fn new(
        method_name: impl Into<String>,
        mut candidates: Vec<ExtractionCandidate>,
        mut arcs: Vec<NestingArc>,
        conflicts: Vec<ConflictPair>,
    ) -> Self {
        candidates.sort_by_key(|c| c.id);
        arcs.sort();
        let mut conflicts: Vec<_> = conflicts.into_iter().map(|p| ConflictPair::new(p.a, p.b)).collect();
        conflicts.sort();
        conflicts.dedup();
        RefactoringCache { method_name: method_name.into(), candidates, arcs, conflicts }
    }

    pub fn candidate(&self, id: CandidateId) -> Option<&ExtractionCandidate> {
        self.candidates.binary_search_by_key(&id, |c| c.id).ok().map(|i| &self.candidates[i])
    }

    /// The 0th extraction, i.e. the method body.
    pub fn method(&self) -> Option<&ExtractionCandidate> {
        self.candidate(0)
    }

    /// Number of extraction candidates, excluding the method itself.
    pub fn extraction_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.id != 0).count()
    }

    pub fn ccr(&self, child: CandidateId, parent: CandidateId) -> Option<u32> {
        self.arcs.binary_search_by(|a| (a.child, a.parent).cmp(&(child, parent))).ok().map(|i| self.arcs[i].ccr)
    }
}

/// Loads and validates a cache. Every problem found is reported, each with
/// the file and line it came from.
pub fn load_cache(paths: &CachePaths, method_name: &str) -> Result<RefactoringCache, CacheError> {
    let mut diags = Vec::new();

    let mut candidates = Vec::new();
    let mut candidate_lines = HashMap::new();
    for (line, row) in read_rows(&paths.extractions, &EXTRACTIONS_HEADER, &mut diags)? {
        let [id, loc, nmcc, params] = row[..] else { unreachable!() };
        if candidate_lines.insert(id, line).is_some() {
            diags.push(diag(&paths.extractions, Some(line), format!("duplicate candidate id {id}")));
            continue;
        }
        candidates.push(ExtractionCandidate { id, loc, nmcc, params, offsets: None });
    }
    if !candidate_lines.contains_key(&0) {
        diags.push(diag(&paths.extractions, None, "missing id 0 (the method itself)".into()));
    }

    let known = |id: CandidateId| candidate_lines.contains_key(&id);

    let mut arcs = Vec::new();
    let mut arc_lines = HashMap::new();
    for (line, row) in read_rows(&paths.nested, &NESTED_HEADER, &mut diags)? {
        let [child, parent, ccr] = row[..] else { unreachable!() };
        let mut ok = true;
        for id in [child, parent] {
            if !known(id) {
                diags.push(diag(&paths.nested, Some(line), format!("dangling candidate id {id}")));
                ok = false;
            }
        }
        if child == parent {
            diags.push(diag(&paths.nested, Some(line), format!("candidate {child} nested in itself")));
            ok = false;
        }
        if arc_lines.insert((child, parent), line).is_some() {
            diags.push(diag(&paths.nested, Some(line), format!("duplicate arc {child}->{parent}")));
            ok = false;
        }
        if ok {
            arcs.push(NestingArc { child, parent, ccr });
        }
    }

    let mut conflicts = Vec::new();
    let mut conflict_seen = HashSet::new();
    for (line, row) in read_rows(&paths.conflict, &CONFLICT_HEADER, &mut diags)? {
        let [a, b] = row[..] else { unreachable!() };
        let mut ok = true;
        for id in [a, b] {
            if !known(id) {
                diags.push(diag(&paths.conflict, Some(line), format!("dangling candidate id {id}")));
                ok = false;
            }
        }
        if a == b {
            diags.push(diag(&paths.conflict, Some(line), format!("candidate {a} in conflict with itself")));
            ok = false;
        }
        let pair = ConflictPair::new(a, b);
        if ok && conflict_seen.insert(pair) {
            conflicts.push(pair);
        }
    }

    let mut offsets = HashMap::new();
    for (line, row) in read_rows(&paths.offsets, &OFFSETS_HEADER, &mut diags)? {
        let [id, start, end] = row[..] else { unreachable!() };
        if !known(id) {
            diags.push(diag(&paths.offsets, Some(line), format!("dangling candidate id {id}")));
            continue;
        }
        if offsets.insert(id, (start, end)).is_some() {
            diags.push(diag(&paths.offsets, Some(line), format!("duplicate offsets for id {id}")));
        }
    }
    for c in &mut candidates {
        c.offsets = offsets.get(&c.id).copied();
    }

    for cycle in find_cycles(&arcs) {
        let line = arc_lines.get(&cycle).copied();
        diags.push(diag(&paths.nested, line, format!("arc cycle through {}->{}", cycle.0, cycle.1)));
    }

    if diags.is_empty() {
        let cache = RefactoringCache::new(method_name, candidates, arcs, conflicts);
        for violation in validate_cache(&cache) {
            let file = match violation.kind {
                ViolationKind::Candidate => &paths.extractions,
                ViolationKind::Arc => &paths.nested,
                ViolationKind::Conflict => &paths.conflict,
                ViolationKind::Offsets => &paths.offsets,
            };
            let line = violation.line_hint.and_then(|key| match key {
                LineKey::Candidate(id) => candidate_lines.get(&id).copied(),
                LineKey::Arc(c, p) => arc_lines.get(&(c, p)).copied(),
            });
            diags.push(diag(file, line, violation.message));
        }
        if diags.is_empty() {
            return Ok(cache);
        }
    }
    Err(CacheError::Invalid(diags))
}

/// Convenience wrapper: loads `<dir>/<method>_*.csv`, discovering the method
/// name when it is not given.
pub fn load_cache_dir(dir: &Path, method: Option<&str>) -> Result<RefactoringCache, CacheError> {
    let (name, paths) = match method {
        Some(m) => (m.to_string(), CachePaths::in_dir(dir, m)),
        None => CachePaths::discover(dir)?,
    };
    load_cache(&paths, &name)
}

fn diag(file: &Path, line: Option<u64>, message: String) -> Diagnostic {
    Diagnostic { file: file.to_path_buf(), line, message }
}

/// Reads integer rows of a headed CSV file. Malformed rows become
/// diagnostics; only I/O failures abort.
fn read_rows<const N: usize>(
    path: &Path,
    header: &[&str; N],
    diags: &mut Vec<Diagnostic>,
) -> Result<Vec<(u64, [u32; N])>, CacheError> {
    let text = fs::read_to_string(path).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    match reader.headers() {
        Ok(h) if h.iter().eq(header.iter().copied()) => {}
        Ok(h) => {
            diags.push(diag(
                path,
                Some(1),
                format!("expected header `{}`, found `{}`", header.join(","), h.iter().collect::<Vec<_>>().join(",")),
            ));
            return Ok(Vec::new());
        }
        Err(e) => {
            diags.push(diag(path, Some(1), format!("malformed header: {e}")));
            return Ok(Vec::new());
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line());
                diags.push(diag(path, line, format!("malformed row: {e}")));
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != N {
            diags.push(diag(path, Some(line), format!("malformed row: expected {N} fields, found {}", record.len())));
            continue;
        }
        let mut values = [0u32; N];
        let mut ok = true;
        for (slot, field) in values.iter_mut().zip(record.iter()) {
            match parse_decimal(field) {
                Some(v) => *slot = v,
                None => {
                    diags.push(diag(
                        path,
                        Some(line),
                        format!("malformed row: `{field}` is not a non-negative integer"),
                    ));
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            rows.push((line, values));
        }
    }
    Ok(rows)
}

fn parse_decimal(field: &str) -> Option<u32> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    field.parse().ok()
}

/// Arcs `(child, parent)` that lie on a cycle.
fn find_cycles(arcs: &[NestingArc]) -> Vec<(CandidateId, CandidateId)> {
    let mut graph: BTreeMap<CandidateId, Vec<CandidateId>> = BTreeMap::new();
    for a in arcs {
        graph.entry(a.child).or_default().push(a.parent);
    }
    let reaches = |from: CandidateId, to: CandidateId| {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(graph.get(&n).into_iter().flatten().copied());
            }
        }
        false
    };
    let mut out: Vec<_> = arcs
        .iter()
        .filter(|a| a.child != a.parent && reaches(a.parent, a.child))
        .map(|a| (a.child, a.parent))
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Candidate,
    Arc,
    Conflict,
    Offsets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKey {
    Candidate(CandidateId),
    Arc(CandidateId, CandidateId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
    line_hint: Option<LineKey>,
}

impl Violation {
    fn candidate(id: CandidateId, message: impl Into<String>) -> Self {
        Violation { kind: ViolationKind::Candidate, message: message.into(), line_hint: Some(LineKey::Candidate(id)) }
    }

    fn arc(child: CandidateId, parent: CandidateId, message: impl Into<String>) -> Self {
        Violation { kind: ViolationKind::Arc, message: message.into(), line_hint: Some(LineKey::Arc(child, parent)) }
    }

    fn other(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation { kind, message: message.into(), line_hint: None }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every cache invariant; an empty result means the cache is valid.
pub fn validate_cache(cache: &RefactoringCache) -> Vec<Violation> {
    let mut out = Vec::new();
    let ids: BTreeSet<CandidateId> = cache.candidates.iter().map(|c| c.id).collect();
    if ids.len() != cache.candidates.len() {
        out.push(Violation::other(ViolationKind::Candidate, "duplicate candidate ids"));
    }
    if !ids.contains(&0) {
        out.push(Violation::other(ViolationKind::Candidate, "missing id 0 (the method itself)"));
    }
    for c in &cache.candidates {
        if c.loc == 0 {
            out.push(Violation::candidate(c.id, format!("loc must be positive (candidate {})", c.id)));
        }
        if let Some((s, e)) = c.offsets {
            if s > e {
                out.push(Violation::candidate(c.id, format!("start offset after end offset (candidate {})", c.id)));
            }
        }
    }

    let arc_set: HashSet<(CandidateId, CandidateId)> = cache.arcs.iter().map(|a| (a.child, a.parent)).collect();
    if arc_set.len() != cache.arcs.len() {
        out.push(Violation::other(ViolationKind::Arc, "duplicate arcs"));
    }
    for a in &cache.arcs {
        for id in [a.child, a.parent] {
            if !ids.contains(&id) {
                out.push(Violation::arc(a.child, a.parent, format!("dangling candidate id {id}")));
            }
        }
        if a.child == a.parent {
            out.push(Violation::arc(a.child, a.parent, format!("candidate {} nested in itself", a.child)));
        }
        if a.child == 0 {
            out.push(Violation::arc(a.child, a.parent, "the method cannot be nested in an extraction"));
        }
    }
    for &id in ids.iter().filter(|&&id| id != 0) {
        if !arc_set.contains(&(id, 0)) {
            out.push(Violation::candidate(id, format!("candidate {id} has no arc to the method (id 0)")));
        }
    }
    for (c, p) in find_cycles(&cache.arcs) {
        out.push(Violation::arc(c, p, format!("arc cycle through {c}->{p}")));
    }
    // Transitive closure: j->l and l->i imply j->i.
    let mut parents: BTreeMap<CandidateId, Vec<CandidateId>> = BTreeMap::new();
    for a in &cache.arcs {
        parents.entry(a.child).or_default().push(a.parent);
    }
    for a in &cache.arcs {
        for &grand in parents.get(&a.parent).into_iter().flatten() {
            if grand != a.child && !arc_set.contains(&(a.child, grand)) {
                out.push(Violation::arc(
                    a.child,
                    a.parent,
                    format!(
                        "nested arcs are not transitively closed: {}->{}->{} present but {}->{} missing",
                        a.child, a.parent, grand, a.child, grand
                    ),
                ));
            }
        }
    }

    let mut seen = HashSet::new();
    for p in &cache.conflicts {
        if !seen.insert((p.a.min(p.b), p.a.max(p.b))) {
            out.push(Violation::other(ViolationKind::Conflict, format!("duplicate conflict pair ({},{})", p.a, p.b)));
        }
        for id in [p.a, p.b] {
            if !ids.contains(&id) {
                out.push(Violation::other(ViolationKind::Conflict, format!("dangling candidate id {id}")));
            }
        }
        if p.a == p.b {
            out.push(Violation::other(ViolationKind::Conflict, format!("candidate {} in conflict with itself", p.a)));
        }
        if arc_set.contains(&(p.a, p.b)) || arc_set.contains(&(p.b, p.a)) {
            out.push(Violation::other(
                ViolationKind::Conflict,
                format!("conflict pair is a nesting pair ({},{})", p.a, p.b),
            ));
        }
    }

    // Offsets, when every candidate has them, must agree with arcs and conflicts.
    let all_offsets: Option<Vec<(CandidateId, (u32, u32))>> =
        cache.candidates.iter().map(|c| c.offsets.map(|o| (c.id, o))).collect();
    if let Some(spans) = all_offsets {
        let conflict_set: HashSet<(CandidateId, CandidateId)> = cache.conflicts.iter().map(|p| (p.a, p.b)).collect();
        for &(i, si) in &spans {
            for &(j, sj) in &spans {
                if i == j {
                    continue;
                }
                let contained = strictly_contains(si, sj);
                if contained != arc_set.contains(&(j, i)) {
                    let message = if contained {
                        format!("offsets nest {j} inside {i} but the arc {j}->{i} is missing")
                    } else {
                        format!("arc {j}->{i} contradicts offsets")
                    };
                    out.push(Violation::other(ViolationKind::Offsets, message));
                }
                if i < j {
                    let overlapping = si.0 <= sj.1 && sj.0 <= si.1 && !contained && !strictly_contains(sj, si);
                    if overlapping != conflict_set.contains(&(i, j)) {
                        let message = if overlapping {
                            format!("offsets of {i} and {j} overlap but the pair is not a conflict")
                        } else {
                            format!("conflict pair ({i},{j}) does not overlap without nesting")
                        };
                        out.push(Violation::other(ViolationKind::Offsets, message));
                    }
                }
            }
        }
    }
    out
}

fn strictly_contains(outer: (u32, u32), inner: (u32, u32)) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1 && outer != inner
}

/// Writes the four canonical CSV files into `dir`.
pub fn write_cache(cache: &RefactoringCache, dir: &Path) -> Result<CachePaths, CacheError> {
    let paths = CachePaths::in_dir(dir, &cache.method_name);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CacheError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let (extractions, nested, conflict, offsets) = render_cache(cache);
    fs::write(&paths.extractions, extractions).map_err(io_err(&paths.extractions))?;
    fs::write(&paths.nested, nested).map_err(io_err(&paths.nested))?;
    fs::write(&paths.conflict, conflict).map_err(io_err(&paths.conflict))?;
    fs::write(&paths.offsets, offsets).map_err(io_err(&paths.offsets))?;
    Ok(paths)
}

/// Canonical text of the four files, in the order extractions, nested,
/// conflict, offsets.
pub fn render_cache(cache: &RefactoringCache) -> (String, String, String, String) {
    let mut candidates: Vec<_> = cache.candidates.iter().collect();
    candidates.sort_by_key(|c| c.id);
    let mut arcs = cache.arcs.clone();
    arcs.sort();
    let mut conflicts: Vec<_> = cache.conflicts.iter().map(|p| ConflictPair::new(p.a, p.b)).collect();
    conflicts.sort();

    let mut extractions = format!("{}\n", EXTRACTIONS_HEADER.join(","));
    let mut offsets = format!("{}\n", OFFSETS_HEADER.join(","));
    for c in &candidates {
        extractions.push_str(&format!("{},{},{},{}\n", c.id, c.loc, c.nmcc, c.params));
        if let Some((s, e)) = c.offsets {
            offsets.push_str(&format!("{},{},{}\n", c.id, s, e));
        }
    }
    let mut nested = format!("{}\n", NESTED_HEADER.join(","));
    for a in &arcs {
        nested.push_str(&format!("{},{},{}\n", a.child, a.parent, a.ccr));
    }
    let mut conflict = format!("{}\n", CONFLICT_HEADER.join(","));
    for p in &conflicts {
        conflict.push_str(&format!("{},{}\n", p.a, p.b));
    }
    (extractions, nested, conflict, offsets)
}
