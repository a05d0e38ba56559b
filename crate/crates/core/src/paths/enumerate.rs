use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};

use super::PathInstance;
use crate::error::{Error, Result};
use crate::graph::{EntityId, GraphView, Neighbor, OntologyLabelSet, Step};

static FANOUT_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningConfig {
    /// Maximum number of hops per path.
    pub max_len: usize,
    /// Follow at most this many hops out of any node. `None` keeps the
    /// enumeration exhaustive.
    pub fanout_cap: Option<usize>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            max_len: 3,
            fanout_cap: None,
        }
    }
}

impl MiningConfig {
    pub fn with_max_len(max_len: usize) -> Self {
        MiningConfig {
            max_len,
            ..Self::default()
        }
    }
}

/// A path instance together with the number of parallel-edge instances it
/// stands for (the product of hop multiplicities).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeightedPath {
    pub path: PathInstance,
    pub count: u64,
}

/// Next hops from the end of `prefix`, skipping nodes already on it.
pub fn transition(view: &GraphView<'_>, prefix: &PathInstance) -> Vec<Neighbor> {
    let last = prefix.last();
    view.neighbors(last)
        .filter(|n| !prefix.nodes.contains(&n.node))
        .collect()
}

/// Hop distance to `target` on the symmetrized view, for nodes within
/// `radius` hops.
fn distances_to(view: &GraphView<'_>, target: EntityId, radius: usize) -> HashMap<EntityId, u8> {
    let mut dist = HashMap::new();
    dist.insert(target, 0u8);
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v] as usize;
        if d == radius {
            continue;
        }
        for n in view.neighbors(v) {
            dist.entry(n.node).or_insert_with(|| {
                queue.push_back(n.node);
                (d + 1) as u8
            });
        }
    }
    dist
}

struct Dfs<'v, 'g, F> {
    view: &'v GraphView<'g>,
    target: EntityId,
    max_len: usize,
    fanout_cap: Option<usize>,
    dist: HashMap<EntityId, u8>,
    nodes: Vec<EntityId>,
    steps: Vec<Step>,
    capped: usize,
    visit: F,
}

impl<F: FnMut(&[EntityId], &[Step], u64)> Dfs<'_, '_, F> {
    fn run(&mut self, weight: u64) {
        let depth = self.steps.len();
        let here = *self.nodes.last().unwrap();
        let remaining = self.max_len - depth;
        for (followed, n) in self.view.neighbors(here).enumerate() {
            if let Some(cap) = self.fanout_cap {
                if followed == cap {
                    self.capped += 1;
                    break;
                }
            }
            let w = weight * n.multiplicity as u64;
            if n.node == self.target {
                self.nodes.push(n.node);
                self.steps.push(n.step);
                (self.visit)(&self.nodes, &self.steps, w);
                self.nodes.pop();
                self.steps.pop();
                continue;
            }
            if remaining < 2 || self.nodes.contains(&n.node) {
                continue;
            }
            // Prune branches that cannot reach the target in time.
            match self.dist.get(&n.node) {
                Some(&d) if (d as usize) < remaining => {}
                _ => continue,
            }
            self.nodes.push(n.node);
            self.steps.push(n.step);
            self.run(w);
            self.nodes.pop();
            self.steps.pop();
        }
    }
}

/// Calls `visit(nodes, steps, count)` once for every simple path from
/// `source` to `target` of 1..=`max_len` hops. Hops follow edges in either
/// direction; `count` is the number of parallel-edge instances.
pub fn for_each_path(
    view: &GraphView<'_>,
    source: EntityId,
    target: EntityId,
    config: &MiningConfig,
    visit: impl FnMut(&[EntityId], &[Step], u64),
) -> Result<()> {
    if source == target {
        return Err(Error::SameEndpoints(view.graph().entity_name(source).to_string()));
    }
    if config.max_len == 0 {
        return Err(Error::InvalidArgument("maximum path length must be >= 1".into()));
    }
    let dist = distances_to(view, target, config.max_len - 1);
    let mut dfs = Dfs {
        view,
        target,
        max_len: config.max_len,
        fanout_cap: config.fanout_cap,
        dist,
        nodes: vec![source],
        steps: Vec::with_capacity(config.max_len),
        capped: 0,
        visit,
    };
    dfs.run(1);
    if dfs.capped > 0 && !FANOUT_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!(
            "fan-out cap {:?} truncated expansion at {} node(s); path enumeration is no longer exhaustive",
            config.fanout_cap,
            dfs.capped
        );
    }
    Ok(())
}

/// All simple `source ⇝ target` paths as a multiset (instance, count).
pub fn enumerate_paths(
    view: &GraphView<'_>,
    source: EntityId,
    target: EntityId,
    config: &MiningConfig,
) -> Result<Vec<WeightedPath>> {
    let mut out = Vec::new();
    for_each_path(view, source, target, config, |nodes, steps, count| {
        out.push(WeightedPath {
            path: PathInstance {
                nodes: nodes.to_vec(),
                steps: steps.to_vec(),
            },
            count,
        })
    })?;
    Ok(out)
}

/// Path instance counts per step sequence for one entity pair, plus the
/// pair's endpoint labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathProfile {
    pub pair: (EntityId, EntityId),
    pub src_labels: OntologyLabelSet,
    pub dst_labels: OntologyLabelSet,
    pub counts: BTreeMap<Vec<Step>, u64>,
}

impl PathProfile {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn profile_pair(
    view: &GraphView<'_>,
    source: EntityId,
    target: EntityId,
    config: &MiningConfig,
) -> Result<PathProfile> {
    let mut counts: BTreeMap<Vec<Step>, u64> = BTreeMap::new();
    for_each_path(view, source, target, config, |_, steps, c| {
        if let Some(x) = counts.get_mut(steps) {
            *x += c;
        } else {
            counts.insert(steps.to_vec(), c);
        }
    })?;
    Ok(PathProfile {
        pair: (source, target),
        src_labels: view.entity_labels(source).clone(),
        dst_labels: view.entity_labels(target).clone(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, KnowledgeGraph};

    fn graph(triples: &[(&str, &str, &str)]) -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for (s, p, t) in triples {
            b.add_triple(s, p, t);
        }
        b.build()
    }

    #[test]
    fn transition_follows_both_directions() {
        let g = graph(&[("a", "p", "b"), ("b", "q", "a")]);
        let (a, b) = (g.entity("a").unwrap(), g.entity("b").unwrap());
        let (p, q) = (g.predicate("p").unwrap(), g.predicate("q").unwrap());
        let mut next: Vec<_> = transition(&g.view(), &PathInstance::start(a))
            .into_iter()
            .map(|n| (n.step, n.node))
            .collect();
        next.sort();
        assert_eq!(next, vec![(Step::forward(p), b), (Step::inverse(q), b)]);
    }

    #[test]
    fn transition_excludes_visited() {
        let g = graph(&[("a", "p", "b"), ("b", "p", "a")]);
        let (a, b) = (g.entity("a").unwrap(), g.entity("b").unwrap());
        let p = g.predicate("p").unwrap();
        let prefix = PathInstance {
            nodes: vec![a, b],
            steps: vec![Step::forward(p)],
        };
        assert!(transition(&g.view(), &prefix).is_empty());
    }

    #[test]
    fn capital_pattern_is_found() {
        let g = graph(&[
            ("IDOT", "headquarter", "Springfield"),
            ("IDOT", "jurisdiction", "Illinois"),
        ]);
        let s = g.entity("Springfield").unwrap();
        let t = g.entity("Illinois").unwrap();
        let paths = enumerate_paths(&g.view(), s, t, &MiningConfig::with_max_len(2)).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(
            paths[0].path.steps,
            vec![
                Step::inverse(g.predicate("headquarter").unwrap()),
                Step::forward(g.predicate("jurisdiction").unwrap()),
            ]
        );
        assert_eq!(paths[0].path.nodes[1], g.entity("IDOT").unwrap());
    }

    #[test]
    fn disconnected_endpoints_yield_nothing() {
        let g = graph(&[("a", "p", "b"), ("c", "p", "d")]);
        let paths = enumerate_paths(
            &g.view(),
            g.entity("a").unwrap(),
            g.entity("d").unwrap(),
            &MiningConfig::default(),
        )
        .unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn same_endpoints_is_an_error() {
        let g = graph(&[("a", "p", "b")]);
        let a = g.entity("a").unwrap();
        assert!(matches!(
            enumerate_paths(&g.view(), a, a, &MiningConfig::default()),
            Err(Error::SameEndpoints(_))
        ));
    }

    #[test]
    fn parallel_edges_multiply_counts() {
        let g = {
            let mut b = GraphBuilder::new();
            b.add_triple_n("x", "p", "m", 2);
            b.add_triple_n("m", "q", "y", 3);
            b.build()
        };
        let prof = profile_pair(
            &g.view(),
            g.entity("x").unwrap(),
            g.entity("y").unwrap(),
            &MiningConfig::default(),
        )
        .unwrap();
        assert_eq!(prof.total(), 6);
        assert_eq!(prof.counts.len(), 1);
    }

    #[test]
    fn length_limit_is_respected() {
        let g = graph(&[("a", "p", "b"), ("b", "p", "c"), ("c", "p", "d"), ("a", "q", "d")]);
        let (a, d) = (g.entity("a").unwrap(), g.entity("d").unwrap());
        let lens = |k| {
            let mut v: Vec<usize> = enumerate_paths(&g.view(), a, d, &MiningConfig::with_max_len(k))
                .unwrap()
                .iter()
                .map(|p| p.path.len())
                .collect();
            v.sort();
            v
        };
        assert_eq!(lens(1), vec![1]);
        assert_eq!(lens(2), vec![1]);
        assert_eq!(lens(3), vec![1, 3]);
    }

    #[test]
    fn masked_predicate_never_used() {
        let g = graph(&[("s", "capitalOf", "t"), ("s", "p", "m"), ("m", "capitalOf", "t")]);
        let cap = g.predicate("capitalOf").unwrap();
        let view = g.masked_view(cap).unwrap();
        let paths = enumerate_paths(
            &view,
            g.entity("s").unwrap(),
            g.entity("t").unwrap(),
            &MiningConfig::default(),
        )
        .unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn fanout_cap_truncates() {
        let mut b = GraphBuilder::new();
        for i in 0..5 {
            b.add_triple("s", "p", &format!("m{i}"));
            b.add_triple(&format!("m{i}"), "p", "t");
        }
        let g = b.build();
        let (s, t) = (g.entity("s").unwrap(), g.entity("t").unwrap());
        let full = enumerate_paths(&g.view(), s, t, &MiningConfig::default()).unwrap();
        assert_eq!(full.len(), 5);
        let capped = enumerate_paths(
            &g.view(),
            s,
            t,
            &MiningConfig {
                max_len: 3,
                fanout_cap: Some(2),
            },
        )
        .unwrap();
        assert!(capped.len() < full.len());
    }
}
