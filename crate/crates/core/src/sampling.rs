//! Training pairs and labeled test cases.
//!
//! Positive pairs are the endpoints of existing `p` edges; negatives are
//! type-compatible pairs with no `p` edge. "Type-compatible" means the entity
//! shares at least one ontology label with the anchor set; an empty anchor
//! set accepts every entity.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, OntologyLabelSet};

pub type Pair = (EntityId, EntityId);

/// A `(subject, predicate, object)` claim, optionally labeled.
///
/// The predicate is kept by name because it need not exist in the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub subject: EntityId,
    pub predicate: String,
    pub object: EntityId,
    pub label: Option<bool>,
}

impl Statement {
    pub fn pair(&self) -> Pair {
        (self.subject, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSet {
    pub positives: Vec<Pair>,
    pub negatives: Vec<Pair>,
    pub seed: u64,
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn accepts(anchor: &OntologyLabelSet, labels: &OntologyLabelSet) -> bool {
    anchor.is_empty() || anchor.intersects(labels)
}

/// Every distinct `p` edge `(u, v)`, `u != v`, whose endpoints are
/// type-compatible with the anchors.
pub fn generate_positives(
    g: &KnowledgeGraph,
    predicate: &str,
    anchor_src: &OntologyLabelSet,
    anchor_dst: &OntologyLabelSet,
) -> Result<Vec<Pair>> {
    let p = g
        .predicate(predicate)
        .ok_or_else(|| Error::UnseenPredicate(predicate.to_string()))?;
    let out: Vec<Pair> = g
        .view()
        .edges()
        .filter(|e| e.1 == p && e.0 != e.2)
        .filter(|e| accepts(anchor_src, g.entity_labels(e.0)) && accepts(anchor_dst, g.entity_labels(e.2)))
        .map(|e| (e.0, e.2))
        .collect();
    if out.is_empty() {
        return Err(Error::UnseenPredicate(predicate.to_string()));
    }
    Ok(out)
}

/// Union of the subjects' and objects' label sets.
pub fn infer_anchors(g: &KnowledgeGraph, positives: &[Pair]) -> (OntologyLabelSet, OntologyLabelSet) {
    let mut src = OntologyLabelSet::empty();
    let mut dst = OntologyLabelSet::empty();
    for &(u, v) in positives {
        src = src.union(g.entity_labels(u));
        dst = dst.union(g.entity_labels(v));
    }
    (src, dst)
}

/// `n` seeded, uniformly drawn, distinct type-compatible pairs with no `p`
/// edge and distinct endpoints. Returns the whole pool (with a warning) when
/// it holds fewer than `n` pairs.
pub fn generate_negatives(
    g: &KnowledgeGraph,
    predicate: &str,
    anchor_src: &OntologyLabelSet,
    anchor_dst: &OntologyLabelSet,
    n: usize,
    seed: u64,
) -> Result<Vec<Pair>> {
    if n == 0 {
        return Err(Error::InvalidArgument("negative count must be >= 1".into()));
    }
    let subjects: Vec<EntityId> = g
        .entities()
        .filter(|&v| accepts(anchor_src, g.entity_labels(v)))
        .collect();
    let objects: Vec<EntityId> = g
        .entities()
        .filter(|&v| accepts(anchor_dst, g.entity_labels(v)))
        .collect();
    let p = g.predicate(predicate);
    let view = g.view();
    let is_valid = |u: EntityId, v: EntityId| u != v && p.is_none_or(|p| view.multiplicity(u, p, v) == 0);

    let obj_set: HashSet<EntityId> = objects.iter().copied().collect();
    let subj_set: HashSet<EntityId> = subjects.iter().copied().collect();
    let both = subjects.iter().filter(|v| obj_set.contains(v)).count() as u128;
    let linked = match p {
        Some(p) => view
            .edges()
            .filter(|e| e.1 == p && e.0 != e.2 && subj_set.contains(&e.0) && obj_set.contains(&e.2))
            .count() as u128,
        None => 0,
    };
    let grid = subjects.len() as u128 * objects.len() as u128;
    let pool = grid - both - linked;
    if pool == 0 {
        return Err(Error::Insufficient(format!(
            "no candidate negative pairs for `{predicate}`"
        )));
    }

    let mut rng = rng(seed);
    let enumerate_all = || -> Vec<Pair> {
        let mut all = Vec::with_capacity(pool as usize);
        for &u in &subjects {
            for &v in &objects {
                if is_valid(u, v) {
                    all.push((u, v));
                }
            }
        }
        all
    };
    if pool <= n as u128 {
        if pool < n as u128 {
            log::warn!("requested {n} negatives for `{predicate}` but only {pool} exist; using all");
        }
        return Ok(enumerate_all());
    }
    if pool <= 4 * n as u128 {
        let all = enumerate_all();
        let picked = sample(&mut rng, all.len(), n);
        return Ok(picked.into_iter().map(|i| all[i]).collect());
    }
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = subjects[rng.gen_range(0..subjects.len())];
        let v = objects[rng.gen_range(0..objects.len())];
        if is_valid(u, v) && seen.insert((u, v)) {
            out.push((u, v));
        }
    }
    Ok(out)
}

/// How false statements of a test case are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegativeStrategy {
    /// Pair true subjects with other true objects.
    RandomMatch,
    /// Caller-supplied hard negatives, e.g. the largest cities of each state.
    ConfounderList(Vec<Pair>),
}

/// Number of false statements that puts `positives` at `ratio` true.
pub fn negatives_for_ratio(positives: usize, ratio: f64) -> usize {
    (positives as f64 * (1.0 - ratio) / ratio).round() as usize
}

/// Labeled statements at the requested true fraction: positives first, then
/// negatives.
pub fn build_testcase(
    predicate: &str,
    positives: &[Pair],
    strategy: &NegativeStrategy,
    ratio: f64,
    seed: u64,
) -> Result<Vec<Statement>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("ratio {ratio} is outside (0, 1)")));
    }
    if positives.is_empty() {
        return Err(Error::Insufficient("test case needs at least one true pair".into()));
    }
    let need = negatives_for_ratio(positives.len(), ratio);
    let truth: HashSet<Pair> = positives.iter().copied().collect();
    let mut rng = rng(seed);
    let negatives: Vec<Pair> = match strategy {
        NegativeStrategy::RandomMatch => {
            let mut seen = HashSet::new();
            let mut candidates = Vec::new();
            for (i, &(s, _)) in positives.iter().enumerate() {
                for (j, &(_, o)) in positives.iter().enumerate() {
                    if i != j && s != o && !truth.contains(&(s, o)) && seen.insert((s, o)) {
                        candidates.push((s, o));
                    }
                }
            }
            if candidates.len() < need {
                return Err(Error::Insufficient(format!(
                    "random matching yields {} false pairs, {need} needed for ratio {ratio}",
                    candidates.len()
                )));
            }
            let mut idx = sample(&mut rng, candidates.len(), need).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| candidates[i]).collect()
        }
        NegativeStrategy::ConfounderList(list) => {
            let mut seen = HashSet::new();
            let candidates: Vec<Pair> = list
                .iter()
                .copied()
                .filter(|p| p.0 != p.1 && !truth.contains(p) && seen.insert(*p))
                .collect();
            if candidates.len() < need {
                return Err(Error::Insufficient(format!(
                    "{} confounders available, {need} needed for ratio {ratio}",
                    candidates.len()
                )));
            }
            let mut idx = sample(&mut rng, candidates.len(), need).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| candidates[i]).collect()
        }
    };
    let mut out = Vec::with_capacity(positives.len() + negatives.len());
    for &(s, o) in positives {
        out.push(Statement {
            subject: s,
            predicate: predicate.to_string(),
            object: o,
            label: Some(true),
        });
    }
    for (s, o) in negatives {
        out.push(Statement {
            subject: s,
            predicate: predicate.to_string(),
            object: o,
            label: Some(false),
        });
    }
    Ok(out)
}

/// Subsample a labeled test case to roughly `ratio` true statements, making
/// it as large as the available classes allow. Statement order is kept.
pub fn subsample_to_ratio(statements: &[Statement], ratio: f64, seed: u64) -> Result<Vec<Statement>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("ratio {ratio} is outside (0, 1)")));
    }
    let pos: Vec<usize> = (0..statements.len())
        .filter(|&i| statements[i].label == Some(true))
        .collect();
    let neg: Vec<usize> = (0..statements.len())
        .filter(|&i| statements[i].label == Some(false))
        .collect();
    let total = (pos.len() as f64 / ratio).min(neg.len() as f64 / (1.0 - ratio)).floor();
    let want_pos = ((ratio * total).round() as usize).min(pos.len());
    let want_neg = (total as usize - want_pos).min(neg.len());
    if want_pos == 0 || want_neg == 0 {
        return Err(Error::Insufficient(format!(
            "cannot reach ratio {ratio} with {} true and {} false statements",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = rng(seed);
    let mut keep: Vec<usize> = sample(&mut rng, pos.len(), want_pos)
        .into_iter()
        .map(|i| pos[i])
        .chain(sample(&mut rng, neg.len(), want_neg).into_iter().map(|i| neg[i]))
        .collect();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| statements[i].clone()).collect())
}

/// Writes `subject<TAB>predicate<TAB>object<TAB>{0|1}` lines.
pub fn write_statements(g: &KnowledgeGraph, statements: &[Statement], mut w: impl Write) -> Result<()> {
    for s in statements {
        let label = match s.label {
            Some(true) => "\t1",
            Some(false) => "\t0",
            None => "",
        };
        writeln!(
            w,
            "{}\t{}\t{}{}",
            g.entity_name(s.subject),
            s.predicate,
            g.entity_name(s.object),
            label
        )
        .map_err(|e| Error::io("<statements>", e))?;
    }
    Ok(())
}

/// Reads statement lines; the label column is optional.
pub fn read_statements(g: &KnowledgeGraph, reader: impl BufRead, source_name: &str) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 && f.len() != 4 {
            return Err(parse_err(format!(
                "expected 3 or 4 tab-separated fields, found {}",
                f.len()
            )));
        }
        let label = match f.get(3).copied() {
            None => None,
            Some("1") => Some(true),
            Some("0") => Some(false),
            Some(other) => return Err(parse_err(format!("label must be 0 or 1, got `{other}`"))),
        };
        out.push(Statement {
            subject: g.require_entity(f[0])?,
            predicate: f[1].to_string(),
            object: g.require_entity(f[2])?,
            label,
        });
    }
    Ok(out)
}

pub fn read_statements_file(g: &KnowledgeGraph, path: &Path) -> Result<Vec<Statement>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_statements(g, BufReader::new(f), &path.display().to_string())
}

/// Reads `subject<TAB>object` pair lines.
pub fn read_pairs_file(g: &KnowledgeGraph, path: &Path) -> Result<Vec<Pair>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (s, o) = line.split_once('\t').ok_or_else(|| Error::Parse {
            source_name: path.display().to_string(),
            line: i + 1,
            message: "expected subject<TAB>object".into(),
        })?;
        out.push((g.require_entity(s)?, g.require_entity(o)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn toy() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for i in 0..6 {
            let c = format!("c{i}");
            let s = format!("s{i}");
            if i < 4 {
                b.add_triple(&c, "capitalOf", &s);
            }
            b.add_labels(&c, ["city"]);
            b.add_labels(&s, ["state"]);
        }
        b.add_labels("p0", ["person"]);
        b.add_triple("p0", "capitalOf", "s5");
        b.build()
    }

    #[test]
    fn positives_filter_by_anchor() {
        let g = toy();
        let city = g.label_set(["city"]);
        let state = g.label_set(["state"]);
        let typed = generate_positives(&g, "capitalOf", &city, &state).unwrap();
        assert_eq!(typed.len(), 4);
        let untyped =
            generate_positives(&g, "capitalOf", &OntologyLabelSet::empty(), &OntologyLabelSet::empty()).unwrap();
        assert_eq!(untyped.len(), 5);
    }

    #[test]
    fn unknown_predicate_asks_for_manual_positives() {
        let g = toy();
        let err =
            generate_positives(&g, "mayorOf", &OntologyLabelSet::empty(), &OntologyLabelSet::empty()).unwrap_err();
        assert!(matches!(err, Error::UnseenPredicate(_)));
        assert!(err.to_string().contains("--positives"));
    }

    #[test]
    fn negatives_avoid_edges_and_are_seeded() {
        let g = toy();
        let city = g.label_set(["city"]);
        let state = g.label_set(["state"]);
        let cap = g.predicate("capitalOf").unwrap();
        let a = generate_negatives(&g, "capitalOf", &city, &state, 10, 7).unwrap();
        let b = generate_negatives(&g, "capitalOf", &city, &state, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let uniq: HashSet<_> = a.iter().collect();
        assert_eq!(uniq.len(), 10);
        for &(u, v) in &a {
            assert_eq!(g.view().multiplicity(u, cap, v), 0);
            assert!(g.entity_labels(u).contains(g.label("city").unwrap()));
        }
    }

    #[test]
    fn negatives_clamp_to_pool() {
        let g = toy();
        let city = g.label_set(["city"]);
        let state = g.label_set(["state"]);
        // 6 x 6 grid minus 4 capital edges
        let all = generate_negatives(&g, "capitalOf", &city, &state, 1000, 1).unwrap();
        assert_eq!(all.len(), 32);
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(negatives_for_ratio(10, 0.5), 10);
        assert_eq!(negatives_for_ratio(50, 0.2), 200);
        assert_eq!(negatives_for_ratio(50, 50.0 / 259.0), 209);
    }

    #[test]
    fn random_match_testcase() {
        let g = toy();
        let pos = generate_positives(&g, "capitalOf", &g.label_set(["city"]), &g.label_set(["state"])).unwrap();
        let tc = build_testcase("capitalOf", &pos, &NegativeStrategy::RandomMatch, 0.5, 3).unwrap();
        assert_eq!(tc.iter().filter(|s| s.label == Some(true)).count(), 4);
        assert_eq!(tc.iter().filter(|s| s.label == Some(false)).count(), 4);
        let truth: HashSet<_> = pos.iter().copied().collect();
        assert!(tc
            .iter()
            .filter(|s| s.label == Some(false))
            .all(|s| !truth.contains(&s.pair())));
        assert!(build_testcase("capitalOf", &pos, &NegativeStrategy::RandomMatch, 0.1, 3).is_err());
    }

    #[test]
    fn confounder_testcase_keeps_only_confounders() {
        let g = toy();
        let e = |n: &str| g.entity(n).unwrap();
        let pos = vec![(e("c0"), e("s0")), (e("c1"), e("s1"))];
        let conf = vec![
            (e("c0"), e("s0")),
            (e("c2"), e("s0")),
            (e("c3"), e("s1")),
            (e("c4"), e("s1")),
            (e("c5"), e("s0")),
        ];
        let tc = build_testcase(
            "capitalOf",
            &pos,
            &NegativeStrategy::ConfounderList(conf.clone()),
            0.5,
            1,
        )
        .unwrap();
        assert_eq!(tc.len(), 4);
        for s in tc.iter().filter(|s| s.label == Some(false)) {
            assert!(conf[1..].contains(&s.pair()));
        }
        assert!(build_testcase("capitalOf", &pos, &NegativeStrategy::ConfounderList(conf), 0.2, 1).is_err());
    }

    #[test]
    fn statement_file_round_trip() {
        let g = toy();
        let e = |n: &str| g.entity(n).unwrap();
        let st = vec![
            Statement {
                subject: e("c0"),
                predicate: "capitalOf".into(),
                object: e("s0"),
                label: Some(true),
            },
            Statement {
                subject: e("c1"),
                predicate: "capitalOf".into(),
                object: e("s0"),
                label: Some(false),
            },
        ];
        let mut buf = Vec::new();
        write_statements(&g, &st, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "c0\tcapitalOf\ts0\t1\nc1\tcapitalOf\ts0\t0\n"
        );
        assert_eq!(read_statements(&g, buf.as_slice(), "t").unwrap(), st);
        assert!(matches!(
            read_statements(&g, "zz\tp\ts0\t1\n".as_bytes(), "t"),
            Err(Error::UnknownEntity(_))
        ));
        assert!(read_statements(&g, "c0\tp\ts0\tyes\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn subsample_hits_ratio_within_one() {
        let g = toy();
        let e = |n: &str| g.entity(n).unwrap();
        let mut st = Vec::new();
        for i in 0..30 {
            st.push(Statement {
                subject: e("c0"),
                predicate: "x".into(),
                object: e("s0"),
                label: Some(i < 12),
            });
        }
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let sub = subsample_to_ratio(&st, r, 5).unwrap();
            let t = sub.iter().filter(|s| s.label == Some(true)).count() as f64;
            assert!(
                (t - r * sub.len() as f64).abs() <= 1.0,
                "ratio {r}: {t} of {}",
                sub.len()
            );
        }
    }
}
