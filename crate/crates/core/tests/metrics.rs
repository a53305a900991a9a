use ccreduce::ast::{AstError, AstNode, NodeKind};
use ccreduce::cache::validate_cache;
use ccreduce::enumerator::{count_upper_bound, enumerate_detailed, CandidateOrigin};
use ccreduce::metrics::{ccr, compute_cc, sequence_metrics, Sequence, SiblingRange};
use ccreduce::model::{Instance, ModelConfig};
use proptest::prelude::*;

/// (adds inherent, pays nesting penalty, deepens children), written out
/// independently of the library.
fn attributes(kind: NodeKind) -> (bool, bool, bool) {
    match kind.as_str() {
        "IF" | "ELSE_IF" | "FOR" | "WHILE" | "DO_WHILE" | "SWITCH" | "CATCH" => (true, true, true),
        "ELSE" => (true, false, true),
        "LOGICAL_SEQUENCE" => (true, false, false),
        _ => (false, false, false),
    }
}

/// Every node under `nodes` with its absolute nesting depth.
fn flatten(nodes: &[AstNode], depth: u32, out: &mut Vec<(NodeKind, u32)>) {
    for n in nodes {
        out.push((n.kind, depth));
        let deeper = depth + u32::from(attributes(n.kind).2);
        flatten(&n.children, deeper, out);
    }
}

fn oracle_cc(method: &AstNode) -> u32 {
    let mut all = Vec::new();
    flatten(&method.children, 0, &mut all);
    all.iter()
        .map(|&(k, d)| match attributes(k) {
            (true, true, _) => 1 + d,
            (true, false, _) => 1,
            _ => 0,
        })
        .sum()
}

/// (λ, ι, ν, μ) of a sibling run found by walking `path` from the root.
fn oracle_metrics(method: &AstNode, range: &SiblingRange) -> (u32, u32, u32, u32) {
    let mut node = method;
    let mut lambda = 0;
    for &i in &range.parent {
        lambda += u32::from(attributes(node.children[i].kind).2);
        node = &node.children[i];
    }
    let mut all = Vec::new();
    flatten(&node.children[range.first..=range.last], lambda, &mut all);
    let iota = all.iter().filter(|(k, _)| attributes(*k).0).count() as u32;
    let penalized: Vec<u32> = all.iter().filter(|(k, _)| attributes(*k).1).map(|&(_, d)| d).collect();
    let nu = penalized.iter().map(|d| d - lambda).sum();
    let mu = penalized.iter().filter(|&&d| d > 0).count() as u32;
    (lambda, iota, nu, mu)
}

fn fixture() -> AstNode {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/routeAPacketTo.json");
    AstNode::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixture_round_trips_through_json() {
    let m = fixture();
    assert_eq!(AstNode::from_json(&m.to_json()).unwrap(), m);
    assert_eq!(m.line_count(), 30);
}

#[test]
fn fixture_cc_matches_oracle() {
    let m = fixture();
    assert_eq!(compute_cc(&m), Ok(20));
    assert_eq!(oracle_cc(&m), 20);
    assert_eq!(sequence_metrics(&m, &Sequence::WholeMethod).unwrap().nmcc(), 20);
}

#[test]
fn else_branch_uses_the_three_statement_convention() {
    let e = enumerate_detailed(&fixture(), "routeAPacketTo").unwrap();
    let else_branch = e.candidates.iter().find(|c| c.origin == CandidateOrigin::ElseBranch).unwrap();
    let m = else_branch.metrics;
    assert_eq!((m.lambda, m.iota, m.nu, m.mu), (1, 4, 4, 3));
    assert_eq!(ccr(&m, 0), Ok(11));
}

#[test]
fn fixture_candidates_follow_the_rules() {
    let m = fixture();
    let e = enumerate_detailed(&m, "routeAPacketTo").unwrap();
    assert_eq!(validate_cache(&e.cache), vec![]);
    assert_eq!(e.candidates.len(), 23);
    assert_eq!(e.candidates.iter().filter(|c| c.origin == CandidateOrigin::ElseBranch).count(), 1);
    // The whole body is never a candidate, and nothing that removes no CC is.
    for c in &e.candidates {
        assert!(ccr(&c.metrics, 0).unwrap() > 0);
        assert_ne!(c.lines, (2, 29));
    }
    assert!(e.candidates.len() as u64 <= count_upper_bound(28));
}

#[test]
fn unknown_kind_names_its_path() {
    let json = r#"{"kind":"METHOD","startLine":1,"endLine":3,"startOffset":0,"endOffset":30,
        "children":[{"kind":"TRY","startLine":2,"endLine":2,"startOffset":5,"endOffset":9}]}"#;
    match AstNode::from_json(json) {
        Err(AstError::UnknownKind { kind, path }) => {
            assert_eq!(kind, "TRY");
            assert_eq!(path, "$.children[0]");
        }
        other => panic!("{other:?}"),
    }
}

#[derive(Debug, Clone)]
struct Shape(NodeKind, Vec<Shape>);

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        4 => Just(Shape(NodeKind::Statement, vec![])),
        1 => Just(Shape(NodeKind::LogicalSequence, vec![])),
    ];
    leaf.prop_recursive(4, 40, 4, |inner| {
        (
            prop::sample::select(vec![
                NodeKind::If,
                NodeKind::ElseIf,
                NodeKind::Else,
                NodeKind::For,
                NodeKind::While,
                NodeKind::DoWhile,
                NodeKind::Switch,
                NodeKind::Catch,
                NodeKind::Block,
            ]),
            prop::collection::vec(inner, 1..4),
        )
            .prop_map(|(k, c)| Shape(k, c))
    })
}

/// Lays shapes out one line per leaf and one header/footer line per construct.
fn lay(s: &Shape, line: &mut u32) -> AstNode {
    let start = *line;
    if s.1.is_empty() {
        *line += 1;
        return AstNode::new(s.0, (start, start), (start * 100, start * 100 + 40));
    }
    *line += 1;
    let children: Vec<AstNode> = s.1.iter().map(|c| lay(c, line)).collect();
    let end = *line;
    *line += 1;
    AstNode::new(s.0, (start, end), (start * 100, end * 100 + 60)).with_children(children)
}

fn method_strategy() -> impl Strategy<Value = AstNode> {
    prop::collection::vec(shape(), 1..5).prop_map(|body| {
        let mut line = 2;
        let children: Vec<AstNode> = body.iter().map(|s| lay(s, &mut line)).collect();
        AstNode::new(NodeKind::Method, (1, line), (100, line * 100 + 60)).with_children(children)
    })
}

fn all_ranges(node: &AstNode, path: &mut Vec<usize>, out: &mut Vec<SiblingRange>) {
    for a in 0..node.children.len() {
        for b in a..node.children.len() {
            out.push(SiblingRange { parent: path.clone(), first: a, last: b });
        }
    }
    for (i, c) in node.children.iter().enumerate() {
        path.push(i);
        all_ranges(c, path, out);
        path.pop();
    }
}

fn with_statement_inserted(node: &AstNode) -> AstNode {
    // Deep copy with an extra leaf at the end of every non-empty child list;
    // geometry is irrelevant to metrics.
    let mut n = node.clone();
    if !n.children.is_empty() {
        n.children = n.children.iter().map(with_statement_inserted).collect();
        let last = n.children.last().unwrap().end_line;
        n.children.push(AstNode::new(NodeKind::Statement, (last, last), (0, 0)));
    }
    n
}

proptest! {
    #[test]
    fn cc_matches_oracle(m in method_strategy()) {
        prop_assert_eq!(compute_cc(&m).unwrap(), oracle_cc(&m));
        prop_assert_eq!(sequence_metrics(&m, &Sequence::WholeMethod).unwrap().nmcc(), oracle_cc(&m));
    }

    #[test]
    fn sequence_metrics_match_oracle(m in method_strategy()) {
        let mut ranges = Vec::new();
        all_ranges(&m, &mut Vec::new(), &mut ranges);
        for r in ranges {
            let got = sequence_metrics(&m, &Sequence::Range(r.clone())).unwrap();
            prop_assert_eq!((got.lambda, got.iota, got.nu, got.mu), oracle_metrics(&m, &r));
            prop_assert_eq!(got.nmcc(), got.iota + got.nu);
            prop_assert!(got.mu <= got.iota);
            // ccr is non-increasing in the parent depth and equals nmcc at equal depth.
            prop_assert_eq!(ccr(&got, got.lambda).unwrap(), got.nmcc());
            for l in 0..got.lambda {
                prop_assert!(ccr(&got, l).unwrap() >= ccr(&got, l + 1).unwrap());
            }
            prop_assert!(ccr(&got, got.lambda + 1).is_err());
        }
    }

    #[test]
    fn statements_change_nothing(m in method_strategy()) {
        let padded = with_statement_inserted(&m);
        prop_assert_eq!(compute_cc(&padded).unwrap(), compute_cc(&m).unwrap());
    }

    #[test]
    fn enumerated_caches_are_consistent(m in method_strategy()) {
        let e = enumerate_detailed(&m, "m").unwrap();
        prop_assert_eq!(validate_cache(&e.cache), vec![]);
        prop_assert!(Instance::new(&e.cache, &ModelConfig::default()).is_ok());
        for c in &e.candidates {
            prop_assert!(ccr(&c.metrics, 0).unwrap() > 0);
            prop_assert_eq!(e.cache.ccr(c.id, 0), Some(ccr(&c.metrics, 0).unwrap()));
        }
        for arc in &e.cache.arcs {
            if arc.parent == 0 { continue; }
            let child = &e.candidates[arc.child as usize - 1];
            let parent = &e.candidates[arc.parent as usize - 1];
            prop_assert_eq!(arc.ccr, ccr(&child.metrics, parent.metrics.lambda).unwrap());
            prop_assert!(parent.offsets.0 <= child.offsets.0 && child.offsets.1 <= parent.offsets.1);
        }
        for p in &e.cache.conflicts {
            let (a, b) = (e.candidates[p.a as usize - 1].offsets, e.candidates[p.b as usize - 1].offsets);
            prop_assert!(a.0 <= b.1 && b.0 <= a.1);
            prop_assert!(!(a.0 <= b.0 && b.1 <= a.1) && !(b.0 <= a.0 && a.1 <= b.1));
        }
    }
}
