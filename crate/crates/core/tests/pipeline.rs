use std::collections::HashSet;
use std::io::Cursor;

use predpath::features::{build_matrix, importance, information_gain};
use predpath::fixture::{capital_world, CapitalWorld};
use predpath::graph::{EntityId, GraphBuilder, KnowledgeGraph};
use predpath::interpret::explain;
use predpath::model::{fit_pairs, read_model, score_statement, write_model, FactCheckModel, TrainConfig};
use predpath::paths::{enumerate_paths, extract_path_features, AnchorPolicy, PathInstance};
use predpath::sampling::{generate_negatives, generate_positives, infer_anchors, Pair, Statement};

fn world() -> (CapitalWorld, KnowledgeGraph) {
    let w = capital_world(15, 42).unwrap();
    let g = w.fixture.graph();
    (w, g)
}

fn pairs(g: &KnowledgeGraph, names: &[(&str, &str)]) -> Vec<Pair> {
    names
        .iter()
        .map(|(s, o)| (g.entity(s).unwrap(), g.entity(o).unwrap()))
        .collect()
}

fn trained(w: &CapitalWorld, g: &KnowledgeGraph) -> FactCheckModel {
    let pos = pairs(g, &w.capital_pairs());
    let neg = pairs(g, &w.confounder_pairs());
    fit_pairs(
        &g.view_without("capitalOf"),
        "capitalOf",
        &pos,
        &neg,
        &TrainConfig::default(),
    )
    .unwrap()
}

fn stmt(g: &KnowledgeGraph, s: &str, o: &str) -> Statement {
    Statement {
        subject: g.entity(s).unwrap(),
        predicate: "capitalOf".into(),
        object: g.entity(o).unwrap(),
        label: None,
    }
}

#[test]
fn target_predicate_never_leaks_into_features() {
    let (w, g) = world();
    let model = trained(&w, &g);
    let p = g.predicate("capitalOf").unwrap();
    assert!(model.columns.iter().all(|c| c.steps.iter().all(|s| s.predicate != p)));

    // Adding a capitalOf edge for a false pair must not move its score.
    let mut b = GraphBuilder::new();
    for (s, pr, o) in &w.fixture.triples {
        b.add_triple(s, pr, o);
    }
    for (e, ls) in &w.fixture.labels {
        b.add_labels(e, ls.iter().map(String::as_str));
    }
    b.add_triple("Chicago", "capitalOf", "Illinois");
    let leaked = b.build();
    let model2 = trained(&w, &leaked);
    let a = score_statement(&model, &g, &stmt(&g, "Chicago", "Illinois")).unwrap();
    let b = score_statement(&model2, &leaked, &stmt(&leaked, "Chicago", "Illinois")).unwrap();
    let c = score_statement(&model, &leaked, &stmt(&leaked, "Chicago", "Illinois")).unwrap();
    assert_eq!(a.to_bits(), c.to_bits());
    assert!(b < 0.5);
}

#[test]
fn model_round_trip_scores_bit_identical() {
    let (w, g) = world();
    let model = trained(&w, &g);
    let mut bytes = Vec::new();
    write_model(&model, &g, &mut bytes).unwrap();
    let back = read_model(Cursor::new(&bytes), &g).unwrap();
    assert_eq!(back, model);
    let mut again = Vec::new();
    write_model(&back, &g, &mut again).unwrap();
    assert_eq!(bytes, again);
    for (s, o) in w.capital_pairs().into_iter().chain(w.confounder_pairs()) {
        let st = stmt(&g, s, o);
        assert_eq!(
            score_statement(&model, &g, &st).unwrap().to_bits(),
            score_statement(&back, &g, &st).unwrap().to_bits()
        );
    }
}

#[test]
fn explanation_evidence_exists_in_masked_graph() {
    let (w, g) = world();
    let model = trained(&w, &g);
    let view = g.view_without("capitalOf");
    let e = explain(&model, &g, &stmt(&g, "Springfield", "Illinois")).unwrap();
    assert!(e.verdict);
    assert!(!e.definition[0].evidence.is_empty());
    let ranks: Vec<usize> = e.definition.iter().map(|p| p.rank).collect();
    assert_eq!(ranks, (1..=e.definition.len()).collect::<Vec<_>>());

    let s = g.entity("Springfield").unwrap();
    let t = g.entity("Illinois").unwrap();
    let instances = enumerate_paths(&view, s, t, &model.config.mining).unwrap();
    for p in &e.definition {
        for ev in &p.evidence {
            let nodes: Vec<EntityId> = ev.nodes.iter().map(|n| g.entity(n).unwrap()).collect();
            let inst: &PathInstance = &instances.iter().find(|wp| wp.path.nodes == nodes).unwrap().path;
            assert!(inst.is_valid_in(&view));
            assert_eq!(inst.nodes.first(), Some(&s));
            assert_eq!(inst.nodes.last(), Some(&t));
        }
    }
}

#[test]
fn importance_matches_columns_of_extracted_features() {
    let (w, g) = world();
    let view = g.view_without("capitalOf");
    let pos = pairs(&g, &w.capital_pairs());
    let neg = pairs(&g, &w.confounder_pairs());
    let all: Vec<Pair> = pos.iter().chain(&neg).copied().collect();
    let feats = extract_path_features(&view, &all, &Default::default(), AnchorPolicy::SharedLabel).unwrap();
    let f = build_matrix(&feats, &pos, &neg).unwrap();
    let w_all = importance(&f).unwrap();
    for (j, &wj) in w_all.iter().enumerate() {
        let col: Vec<u64> = all
            .iter()
            .map(|&p| feats.count(p, feats.columns.iter().position(|c| *c == f.columns[j]).unwrap()))
            .collect();
        assert_eq!(col, f.column(j));
        assert_eq!(information_gain(&col, &f.y).unwrap(), wj);
    }
}

#[test]
fn sampling_on_fixture() {
    let (w, g) = world();
    let settlement = g.label_set(["settlement"]);
    let state = g.label_set(["state"]);
    let pos = generate_positives(&g, "capitalOf", &settlement, &state).unwrap();
    assert_eq!(pos.len(), 15);
    let (src, dst) = infer_anchors(&g, &pos);
    let neg = generate_negatives(&g, "capitalOf", &src, &dst, 60, 42).unwrap();
    assert_eq!(neg.len(), 60);
    let truth: HashSet<Pair> = pos.iter().copied().collect();
    assert!(neg.iter().all(|p| !truth.contains(p) && p.0 != p.1));
    assert_eq!(neg, generate_negatives(&g, "capitalOf", &src, &dst, 60, 42).unwrap());

    let populous: HashSet<String> = w
        .states
        .iter()
        .flat_map(|s| s.cities.iter().filter(|c| **c != s.capital).cloned())
        .collect();
    assert!(w.confounder_pairs().iter().all(|(c, _)| populous.contains(*c)));
    assert_eq!(w.confounder_pairs().len(), 60);
}
