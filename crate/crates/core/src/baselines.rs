//! Untyped link-prediction scorers.
//!
//! All of them work on the symmetrized, predicate-blind projection of a
//! [`GraphView`]: parallel edges add to the link weight and to degrees.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EntityId, GraphView};

pub const KATZ_BETA: f64 = 0.05;
pub const KATZ_MAX_LEN: usize = 3;
pub const PROXIMITY_MAX_LEN: usize = 3;
pub const PAGERANK_RESTART: f64 = 0.15;
pub const SIMRANK_DECAY: f64 = 0.8;
pub const SIMRANK_ITERATIONS: usize = 100;
/// Largest graph exact SimRank accepts (dense `n x n` state).
pub const SIMRANK_MAX_NODES: usize = 4000;

/// Adamic/Adar contribution of a common neighbor of degree `degree`:
/// `1 / ln(degree)`, nothing for degree <= 1.
pub fn adamic_adar_term(degree: f64) -> f64 {
    if degree <= 1.0 {
        0.0
    } else {
        1.0 / degree.ln()
    }
}

pub fn adamic_adar(view: &GraphView<'_>, u: EntityId, v: EntityId) -> f64 {
    let a = view.undirected_neighbors(u);
    let b = view.undirected_neighbors(v);
    let (mut i, mut j) = (0, 0);
    let mut score = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                score += adamic_adar_term(view.degree(a[i].0) as f64);
                i += 1;
                j += 1;
            }
        }
    }
    score
}

pub fn preferential_attachment(view: &GraphView<'_>, u: EntityId, v: EntityId) -> f64 {
    view.degree(u) as f64 * view.degree(v) as f64
}

/// `sum_{i=1..k} beta^i * walks_i(u, v)`.
pub fn katz(view: &GraphView<'_>, u: EntityId, v: EntityId, k: usize, beta: f64) -> f64 {
    let mut frontier: HashMap<EntityId, f64> = HashMap::from([(u, 1.0)]);
    let mut score = 0.0;
    let mut weight = 1.0;
    for _ in 0..k {
        let mut next: HashMap<EntityId, f64> = HashMap::new();
        for (&x, &walks) in &frontier {
            for (y, m) in view.undirected_neighbors(x) {
                *next.entry(y).or_default() += walks * m as f64;
            }
        }
        weight *= beta;
        score += weight * next.get(&v).copied().unwrap_or(0.0);
        frontier = next;
    }
    score
}

/// Proximity of one path from the degrees of its interior nodes.
pub fn proximity_from_degrees(interior: &[f64]) -> f64 {
    1.0 / (1.0 + interior.iter().map(|d| d.ln()).sum::<f64>())
}

/// Best `1 / (1 + sum ln deg(interior))` over simple paths of at most `k`
/// hops; 0 when `v` is out of reach.
pub fn semantic_proximity(view: &GraphView<'_>, u: EntityId, v: EntityId, k: usize) -> f64 {
    if u == v {
        return 1.0;
    }
    fn dfs(
        view: &GraphView<'_>,
        x: EntityId,
        v: EntityId,
        left: usize,
        cost: f64,
        on: &mut Vec<EntityId>,
        best: &mut f64,
    ) {
        for (y, _) in view.undirected_neighbors(x) {
            if y == v {
                *best = best.min(cost);
                continue;
            }
            if left <= 1 || on.contains(&y) {
                continue;
            }
            let c = cost + (view.degree(y) as f64).ln();
            if c >= *best {
                continue;
            }
            on.push(y);
            dfs(view, y, v, left - 1, c, on, best);
            on.pop();
        }
    }
    let mut best = f64::INFINITY;
    dfs(view, u, v, k, 0.0, &mut vec![u], &mut best);
    if best.is_finite() {
        1.0 / (1.0 + best)
    } else {
        0.0
    }
}

/// Stationary distribution of a walk that restarts at `source` with
/// probability `restart`; dangling nodes return to `source`.
pub fn pagerank_vector(view: &GraphView<'_>, source: EntityId, restart: f64) -> Vec<f64> {
    let n = view.graph().entity_count();
    let adj: Vec<Vec<(EntityId, u64)>> = (0..n).map(|i| view.undirected_neighbors(EntityId(i as u32))).collect();
    pagerank_on(&adj, source, restart)
}

fn pagerank_on(adj: &[Vec<(EntityId, u64)>], source: EntityId, restart: f64) -> Vec<f64> {
    let n = adj.len();
    let deg: Vec<f64> = adj.iter().map(|r| r.iter().map(|x| x.1 as f64).sum()).collect();
    let mut pi = vec![0.0; n];
    pi[source.index()] = 1.0;
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        let mut back = restart;
        for x in 0..n {
            if pi[x] == 0.0 {
                continue;
            }
            if deg[x] == 0.0 {
                back += (1.0 - restart) * pi[x];
                continue;
            }
            let share = (1.0 - restart) * pi[x] / deg[x];
            for &(y, m) in &adj[x] {
                next[y.index()] += share * m as f64;
            }
        }
        next[source.index()] += back;
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-10 {
            break;
        }
    }
    pi
}

pub fn personalized_pagerank(view: &GraphView<'_>, u: EntityId, v: EntityId, restart: f64) -> f64 {
    pagerank_vector(view, u, restart)[v.index()]
}

/// Exact SimRank on the symmetrized graph with multiplicity-weighted
/// neighbor averages.
#[derive(Debug, Clone)]
pub struct SimRank {
    n: usize,
    s: Vec<f64>,
}

impl SimRank {
    pub fn compute(view: &GraphView<'_>, decay: f64, iterations: usize) -> Result<Self> {
        let n = view.graph().entity_count();
        if n > SIMRANK_MAX_NODES {
            return Err(Error::InvalidArgument(format!(
                "exact SimRank is limited to {SIMRANK_MAX_NODES} entities, graph has {n}"
            )));
        }
        // cols[b] = normalized weights of b's neighbors
        let cols: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|b| {
                let nb = view.undirected_neighbors(EntityId(b as u32));
                let total: f64 = nb.iter().map(|x| x.1 as f64).sum();
                nb.into_iter().map(|(j, m)| (j.index(), m as f64 / total)).collect()
            })
            .collect();
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            s[i * n + i] = 1.0;
        }
        for _ in 0..iterations {
            // t = S W, row-major
            let t: Vec<f64> = (0..n)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let row = &s[a * n..(a + 1) * n];
                    cols.iter()
                        .map(move |col| col.iter().map(|&(j, w)| row[j] * w).sum::<f64>())
                })
                .collect();
            // s' = c W^T t: s'[a][b] = c sum_i W[i][a] t[i][b]
            let next: Vec<f64> = (0..n)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let col = &cols[a];
                    let t = &t;
                    (0..n).map(move |b| {
                        if a == b {
                            1.0
                        } else {
                            decay * col.iter().map(|&(i, w)| w * t[i * n + b]).sum::<f64>()
                        }
                    })
                })
                .collect();
            let delta = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            s = next;
            if delta < 1e-12 {
                break;
            }
        }
        Ok(SimRank { n, s })
    }

    pub fn score(&self, u: EntityId, v: EntityId) -> f64 {
        self.s[u.index() * self.n + v.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    AdamicAdar,
    PreferentialAttachment,
    Katz,
    SemanticProximity,
    PersonalizedPageRank,
    SimRank,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::AdamicAdar,
        Method::PreferentialAttachment,
        Method::Katz,
        Method::SemanticProximity,
        Method::PersonalizedPageRank,
        Method::SimRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::AdamicAdar => "aa",
            Method::PreferentialAttachment => "pa",
            Method::Katz => "katz",
            Method::SemanticProximity => "sp",
            Method::PersonalizedPageRank => "ppr",
            Method::SimRank => "simrank",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Method::AdamicAdar => "Adamic/Adar",
            Method::PreferentialAttachment => "Preferential Attachment",
            Method::Katz => "Katz",
            Method::SemanticProximity => "Semantic Proximity",
            Method::PersonalizedPageRank => "Personalized PageRank",
            Method::SimRank => "SimRank",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Scores every pair with `method`, in parallel; order is preserved.
pub fn score_pairs(view: &GraphView<'_>, method: Method, pairs: &[(EntityId, EntityId)]) -> Result<Vec<f64>> {
    Ok(match method {
        Method::AdamicAdar => pairs.par_iter().map(|&(u, v)| adamic_adar(view, u, v)).collect(),
        Method::PreferentialAttachment => pairs
            .par_iter()
            .map(|&(u, v)| preferential_attachment(view, u, v))
            .collect(),
        Method::Katz => pairs
            .par_iter()
            .map(|&(u, v)| katz(view, u, v, KATZ_MAX_LEN, KATZ_BETA))
            .collect(),
        Method::SemanticProximity => pairs
            .par_iter()
            .map(|&(u, v)| semantic_proximity(view, u, v, PROXIMITY_MAX_LEN))
            .collect(),
        Method::PersonalizedPageRank => {
            let n = view.graph().entity_count();
            let adj: Vec<Vec<(EntityId, u64)>> =
                (0..n).map(|i| view.undirected_neighbors(EntityId(i as u32))).collect();
            let mut sources: Vec<EntityId> = pairs.iter().map(|p| p.0).collect();
            sources.sort_unstable();
            sources.dedup();
            let cache: HashMap<EntityId, Vec<f64>> = sources
                .par_iter()
                .map(|&s| (s, pagerank_on(&adj, s, PAGERANK_RESTART)))
                .collect();
            pairs.iter().map(|&(u, v)| cache[&u][v.index()]).collect()
        }
        Method::SimRank => {
            let sr = SimRank::compute(view, SIMRANK_DECAY, SIMRANK_ITERATIONS)?;
            pairs.iter().map(|&(u, v)| sr.score(u, v)).collect()
        }
    })
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, KnowledgeGraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(triples: &[(&str, &str, &str)]) -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for (s, p, t) in triples {
            b.add_triple(s, p, t);
        }
        b.build()
    }

    fn random_graph(seed: u64, n: usize, m: usize) -> KnowledgeGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_entity(&format!("n{i}"));
        }
        for _ in 0..m {
            let s = rng.gen_range(0..n);
            let t = rng.gen_range(0..n);
            if s != t {
                let p = ["p", "q"][rng.gen_range(0..2)];
                b.add_triple(&format!("n{s}"), p, &format!("n{t}"));
            }
        }
        b.build()
    }

    fn dense_adj(g: &KnowledgeGraph) -> Vec<Vec<f64>> {
        let n = g.entity_count();
        let mut a = vec![vec![0.0; n]; n];
        for (s, _, t, m) in g.view().edges() {
            a[s.index()][t.index()] += m as f64;
            a[t.index()][s.index()] += m as f64;
        }
        a
    }

    #[test]
    fn degree_terms() {
        assert_eq!(adamic_adar_term(std::f64::consts::E), 1.0);
        assert_eq!(proximity_from_degrees(&[std::f64::consts::E]), 0.5);
        assert_eq!(proximity_from_degrees(&[]), 1.0);
        assert_eq!(adamic_adar_term(1.0), 0.0);
    }

    #[test]
    fn small_cases() {
        let g = graph(&[("a", "p", "x"), ("b", "p", "x"), ("c", "p", "d")]);
        let e = |n: &str| g.entity(n).unwrap();
        let v = g.view();
        // x has degree 2
        assert_eq!(adamic_adar(&v, e("a"), e("b")), 1.0 / 2f64.ln());
        assert_eq!(adamic_adar(&v, e("a"), e("c")), 0.0);
        assert_eq!(semantic_proximity(&v, e("a"), e("b"), 3), 1.0 / (1.0 + 2f64.ln()));
        assert_eq!(semantic_proximity(&v, e("a"), e("x"), 3), 1.0);
        assert_eq!(semantic_proximity(&v, e("a"), e("d"), 3), 0.0);
        assert_eq!(katz(&v, e("c"), e("d"), 1, 0.05), 0.05);
        assert!((katz(&v, e("c"), e("d"), 3, 0.05) - (0.05 + 0.05f64.powi(3))).abs() < 1e-15);
        assert_eq!(katz(&v, e("a"), e("d"), 3, 0.05), 0.0);
        assert_eq!(preferential_attachment(&v, e("x"), e("c")), 2.0);
        let lonely = {
            let mut b = GraphBuilder::new();
            b.add_entity("z");
            b.add_triple("a", "p", "b");
            b.build()
        };
        let z = lonely.entity("z").unwrap();
        assert_eq!(
            preferential_attachment(&lonely.view(), z, lonely.entity("a").unwrap()),
            0.0
        );
    }

    #[test]
    fn degrees_three_and_four() {
        let g = graph(&[
            ("u", "p", "a"),
            ("u", "p", "b"),
            ("u", "q", "c"),
            ("v", "p", "a"),
            ("v", "p", "b"),
            ("v", "p", "c"),
            ("v", "p", "d"),
        ]);
        let pa = preferential_attachment(&g.view(), g.entity("u").unwrap(), g.entity("v").unwrap());
        assert_eq!(pa, 12.0);
    }

    #[test]
    fn random_graphs_match_brute_force() {
        for seed in 0..20 {
            let g = random_graph(seed, 8, 14);
            let a = dense_adj(&g);
            let n = a.len();
            let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
            let v = g.view();
            let mut a2 = vec![vec![0.0; n]; n];
            let mut a3 = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        a2[i][j] += a[i][k] * a[k][j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        a3[i][j] += a2[i][k] * a[k][j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let (u, w) = (EntityId(i as u32), EntityId(j as u32));
                    let aa: f64 = (0..n)
                        .filter(|&x| a[i][x] > 0.0 && a[j][x] > 0.0 && deg[x] > 1.0)
                        .map(|x| 1.0 / deg[x].ln())
                        .sum();
                    assert!((adamic_adar(&v, u, w) - aa).abs() < 1e-12);
                    assert_eq!(preferential_attachment(&v, u, w), deg[i] * deg[j]);
                    let kz = 0.05 * a[i][j] + 0.0025 * a2[i][j] + 0.000125 * a3[i][j];
                    assert!((katz(&v, u, w, 3, 0.05) - kz).abs() < 1e-12);
                    if i != j {
                        // every simple path of <= 3 hops
                        let mut best = f64::INFINITY;
                        if a[i][j] > 0.0 {
                            best = 0.0;
                        }
                        for x in (0..n).filter(|&x| x != i && x != j) {
                            if a[i][x] > 0.0 && a[x][j] > 0.0 {
                                best = best.min(deg[x].ln());
                            }
                            for y in (0..n).filter(|&y| y != i && y != j && y != x) {
                                if a[i][x] > 0.0 && a[x][y] > 0.0 && a[y][j] > 0.0 {
                                    best = best.min(deg[x].ln() + deg[y].ln());
                                }
                            }
                        }
                        let sp = if best.is_finite() { 1.0 / (1.0 + best) } else { 0.0 };
                        assert!((semantic_proximity(&v, u, w, 3) - sp).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pagerank_closed_forms() {
        let mut b = GraphBuilder::new();
        b.add_entity("solo");
        let g = b.build();
        let s = g.entity("solo").unwrap();
        assert!((personalized_pagerank(&g.view(), s, s, 0.15) - 1.0).abs() < 1e-12);

        let g = graph(&[("a", "p", "b")]);
        let (a, b) = (g.entity("a").unwrap(), g.entity("b").unwrap());
        // pi_a = d + (1-d) pi_b, pi_b = (1-d) pi_a
        let d = 0.15;
        let pa = d / (1.0 - (1.0 - d) * (1.0 - d));
        let pi = pagerank_vector(&g.view(), a, d);
        assert!((pi[a.index()] - pa).abs() < 1e-9);
        assert!((pi[b.index()] - (1.0 - d) * pa).abs() < 1e-9);

        let g = random_graph(4, 10, 20);
        let pi = pagerank_vector(&g.view(), EntityId(0), 0.15);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn simrank_matches_fixed_point_oracle() {
        let g = random_graph(11, 7, 10);
        let a = dense_adj(&g);
        let n = a.len();
        let nb: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| a[i][j] > 0.0).collect()).collect();
        let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        let mut s = vec![vec![0.0; n]; n];
        for i in 0..n {
            s[i][i] = 1.0;
        }
        for _ in 0..200 {
            let mut t = vec![vec![0.0; n]; n];
            for x in 0..n {
                for y in 0..n {
                    if x == y {
                        t[x][y] = 1.0;
                        continue;
                    }
                    let mut sum = 0.0;
                    for &i in &nb[x] {
                        for &j in &nb[y] {
                            sum += a[i][x] / deg[x] * a[j][y] / deg[y] * s[i][j];
                        }
                    }
                    t[x][y] = 0.8 * sum;
                }
            }
            s = t;
        }
        let sr = SimRank::compute(&g.view(), 0.8, 200).unwrap();
        for x in 0..n {
            for y in 0..n {
                let got = sr.score(EntityId(x as u32), EntityId(y as u32));
                assert!((got - s[x][y]).abs() < 1e-8);
                assert!((got - sr.score(EntityId(y as u32), EntityId(x as u32))).abs() < 1e-12);
                assert!(got >= 0.0);
            }
        }
        let iso = (0..n).find(|&i| nb[i].is_empty());
        if let Some(i) = iso {
            assert_eq!(sr.score(EntityId(i as u32), EntityId(((i + 1) % n) as u32)), 0.0);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("predpath"), None);
    }
}
