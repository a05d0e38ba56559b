//! In-memory knowledge graph.
//!
//! Entities, predicates and ontology labels are interned to dense `u32` ids in
//! first-seen order. Edges are stored once per distinct `(subject, predicate,
//! object)` key together with a multiplicity count, in two compressed
//! adjacency tables (outgoing and incoming), each sorted per node by
//! `(predicate, neighbor)`.
//!
//! The graph is immutable once built. Predicate-masked reads go through
//! [`GraphView`], which is a `Copy` handle carrying an optional predicate
//! filter.

mod labels;
mod load;
mod snapshot;

use std::collections::HashMap;
use std::fmt;

pub use labels::{jaccard, OntologyLabelSet};
pub use load::{load_graph, load_graph_files, open_graph, GraphBuilder};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_VERSION};

use crate::error::{Error, Result};

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_id!(
    /// Dense handle of an entity node.
    EntityId
);
dense_id!(
    /// Dense handle of a predicate (edge label).
    PredicateId
);
dense_id!(
    /// Dense handle of an ontology label.
    LabelId
);

/// Traversal direction of an edge relative to its stored orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

/// One hop of a path: a predicate followed with or against its direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub predicate: PredicateId,
    pub direction: Direction,
}

impl Step {
    pub fn forward(predicate: PredicateId) -> Self {
        Step {
            predicate,
            direction: Direction::Forward,
        }
    }

    pub fn inverse(predicate: PredicateId) -> Self {
        Step {
            predicate,
            direction: Direction::Inverse,
        }
    }
}

/// A neighbor reached from some node by one [`Step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Neighbor {
    pub step: Step,
    pub node: EntityId,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct AdjEntry {
    predicate: u32,
    node: u32,
    multiplicity: u32,
}

/// Compressed sparse rows: `entries[offsets[v]..offsets[v + 1]]` is the
/// sorted adjacency of node `v`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Csr {
    offsets: Vec<usize>,
    entries: Vec<AdjEntry>,
}

impl Csr {
    /// `keys` must be sorted by `(node, predicate, neighbor)` with no
    /// duplicate keys.
    fn from_sorted(node_count: usize, keys: impl Iterator<Item = (u32, u32, u32, u32)>) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        let mut entries = Vec::new();
        for (node, predicate, other, multiplicity) in keys {
            offsets[node as usize + 1] += 1;
            entries.push(AdjEntry {
                predicate,
                node: other,
                multiplicity,
            });
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, entries }
    }

    #[inline]
    fn row(&self, v: usize) -> &[AdjEntry] {
        &self.entries[self.offsets[v]..self.offsets[v + 1]]
    }

    fn predicate_range(&self, v: usize, predicate: u32) -> &[AdjEntry] {
        let row = self.row(v);
        let lo = row.partition_point(|e| e.predicate < predicate);
        let hi = row.partition_point(|e| e.predicate <= predicate);
        &row[lo..hi]
    }
}

/// String interner assigning contiguous ids in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub(crate) fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub(crate) fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i as u32).is_some() {
                return Err(Error::Snapshot(format!("duplicate name `{n}` in id table")));
            }
        }
        Ok(Interner { names, index })
    }
}

/// Summary counts in the layout of a dataset statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub entities: usize,
    /// Edges counted with multiplicity.
    pub edges: u64,
    pub distinct_edges: usize,
    pub predicates: usize,
    pub labels: usize,
    pub unlabeled: usize,
    pub multi_labeled: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "|V|\t|E|\t|E distinct|\t|R|\t|O|\t|o|=0\t|o|>1")?;
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.entities,
            self.edges,
            self.distinct_edges,
            self.predicates,
            self.labels,
            self.unlabeled,
            self.multi_labeled
        )
    }
}

/// Directed labeled multigraph with per-entity ontology label sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    entities: Interner,
    predicates: Interner,
    labels: Interner,
    entity_labels: Vec<OntologyLabelSet>,
    out: Csr,
    inc: Csr,
    total_multiplicity: u64,
}

impl KnowledgeGraph {
    /// Builds the adjacency tables from distinct edge keys `(s, p, t) -> m`.
    pub(crate) fn assemble(
        entities: Interner,
        predicates: Interner,
        labels: Interner,
        entity_labels: Vec<OntologyLabelSet>,
        mut edges: Vec<(u32, u32, u32, u32)>,
    ) -> Self {
        let n = entities.len();
        edges.sort_unstable();
        let total_multiplicity = edges.iter().map(|e| e.3 as u64).sum();
        let out = Csr::from_sorted(n, edges.iter().copied());
        let mut reversed: Vec<_> = edges.iter().map(|&(s, p, t, m)| (t, p, s, m)).collect();
        reversed.sort_unstable();
        let inc = Csr::from_sorted(n, reversed.into_iter());
        KnowledgeGraph {
            entities,
            predicates,
            labels,
            entity_labels,
            out,
            inc,
            total_multiplicity,
        }
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct `(s, p, t)` keys.
    pub fn distinct_edge_count(&self) -> usize {
        self.out.entries.len()
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.total_multiplicity
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    /// Like [`entity`](Self::entity) but fails with the offending name.
    pub fn require_entity(&self, name: &str) -> Result<EntityId> {
        self.entity(name).ok_or_else(|| Error::UnknownEntity(name.to_string()))
    }

    pub fn predicate(&self, name: &str) -> Option<PredicateId> {
        self.predicates.get(name).map(PredicateId)
    }

    pub fn label(&self, name: &str) -> Option<LabelId> {
        self.labels.get(name).map(LabelId)
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        self.entities.name(id.0)
    }

    pub fn predicate_name(&self, id: PredicateId) -> &str {
        self.predicates.name(id.0)
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        self.labels.name(id.0)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredicateId> + '_ {
        (0..self.predicates.len() as u32).map(PredicateId)
    }

    /// The ontology label set of `v`; empty when unlabeled.
    pub fn entity_labels(&self, v: EntityId) -> &OntologyLabelSet {
        &self.entity_labels[v.index()]
    }

    /// Resolves label names to a label set, ignoring names the graph has
    /// never seen.
    pub fn label_set<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> OntologyLabelSet {
        OntologyLabelSet::new(names.into_iter().filter_map(|n| self.label(n)))
    }

    pub fn label_names(&self, set: &OntologyLabelSet) -> Vec<&str> {
        set.iter().map(|l| self.label_name(l)).collect()
    }

    /// Unmasked read handle.
    pub fn view(&self) -> GraphView<'_> {
        GraphView {
            graph: self,
            masked: None,
        }
    }

    /// Read handle in which every edge labeled `p` is absent.
    pub fn masked_view(&self, p: PredicateId) -> Result<GraphView<'_>> {
        if p.index() >= self.predicates.len() {
            return Err(Error::UnknownPredicate(format!("#{}", p.0)));
        }
        Ok(GraphView {
            graph: self,
            masked: Some(p),
        })
    }

    /// Masks `p` by name. A name absent from the graph yields the unmasked
    /// view, since there is nothing to hide.
    pub fn view_without(&self, predicate_name: &str) -> GraphView<'_> {
        match self.predicate(predicate_name) {
            Some(p) => GraphView {
                graph: self,
                masked: Some(p),
            },
            None => self.view(),
        }
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.entity_count(),
            edges: self.edge_count(),
            distinct_edges: self.distinct_edge_count(),
            predicates: self.predicate_count(),
            labels: self.label_count(),
            unlabeled: self.entity_labels.iter().filter(|l| l.is_empty()).count(),
            multi_labeled: self.entity_labels.iter().filter(|l| l.len() > 1).count(),
        }
    }

    /// Checks that outgoing and incoming tables describe the same multiset.
    pub fn check_consistency(&self) -> Result<()> {
        let fwd: u64 = self.out.entries.iter().map(|e| e.multiplicity as u64).sum();
        let inv: u64 = self.inc.entries.iter().map(|e| e.multiplicity as u64).sum();
        if fwd != inv || self.out.entries.len() != self.inc.entries.len() {
            return Err(Error::Snapshot(format!(
                "adjacency mismatch: forward {fwd} vs reverse {inv}"
            )));
        }
        for v in 0..self.entity_count() {
            for e in self.out.row(v) {
                let back = self.inc.predicate_range(e.node as usize, e.predicate);
                let found = back
                    .binary_search_by_key(&(v as u32), |b| b.node)
                    .map(|i| back[i].multiplicity);
                if found != Ok(e.multiplicity) {
                    return Err(Error::Snapshot(format!("edge {v}->{} has no mirror", e.node)));
                }
                if e.multiplicity == 0 {
                    return Err(Error::Snapshot("zero multiplicity edge".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn interners(&self) -> (&Interner, &Interner, &Interner) {
        (&self.entities, &self.predicates, &self.labels)
    }

    pub(crate) fn all_entity_labels(&self) -> &[OntologyLabelSet] {
        &self.entity_labels
    }
}

/// Read-only, optionally predicate-masked handle onto a [`KnowledgeGraph`].
#[derive(Debug, Clone, Copy)]
pub struct GraphView<'g> {
    graph: &'g KnowledgeGraph,
    masked: Option<PredicateId>,
}

impl<'g> GraphView<'g> {
    pub fn graph(&self) -> &'g KnowledgeGraph {
        self.graph
    }

    pub fn masked_predicate(&self) -> Option<PredicateId> {
        self.masked
    }

    #[inline]
    fn visible(&self, predicate: u32) -> bool {
        self.masked.is_none_or(|m| m.0 != predicate)
    }

    /// All `(step, neighbor)` pairs reachable from `v` via predicate `p` in
    /// either direction, forward hops first.
    pub fn closure(&self, v: EntityId, p: PredicateId) -> Vec<Neighbor> {
        if !self.visible(p.0) {
            return Vec::new();
        }
        let fwd = self.graph.out.predicate_range(v.index(), p.0);
        let inv = self.graph.inc.predicate_range(v.index(), p.0);
        let mut out = Vec::with_capacity(fwd.len() + inv.len());
        out.extend(fwd.iter().map(|e| Neighbor {
            step: Step::forward(p),
            node: EntityId(e.node),
            multiplicity: e.multiplicity,
        }));
        out.extend(inv.iter().map(|e| Neighbor {
            step: Step::inverse(p),
            node: EntityId(e.node),
            multiplicity: e.multiplicity,
        }));
        out
    }

    /// Every visible hop out of `v` in both directions: outgoing edges in
    /// `(predicate, neighbor)` order, then incoming edges in the same order.
    pub fn neighbors(&self, v: EntityId) -> impl Iterator<Item = Neighbor> + 'g {
        let masked = self.masked;
        let keep = move |e: &&AdjEntry| masked.is_none_or(|m| m.0 != e.predicate);
        let fwd = self.graph.out.row(v.index()).iter().filter(keep).map(|e| Neighbor {
            step: Step::forward(PredicateId(e.predicate)),
            node: EntityId(e.node),
            multiplicity: e.multiplicity,
        });
        let inv = self.graph.inc.row(v.index()).iter().filter(keep).map(|e| Neighbor {
            step: Step::inverse(PredicateId(e.predicate)),
            node: EntityId(e.node),
            multiplicity: e.multiplicity,
        });
        fwd.chain(inv)
    }

    /// Neighbors of `v` on the symmetrized, predicate-blind projection with
    /// multiplicities summed, sorted by node id.
    pub fn undirected_neighbors(&self, v: EntityId) -> Vec<(EntityId, u64)> {
        let mut acc: Vec<(EntityId, u64)> = self.neighbors(v).map(|n| (n.node, n.multiplicity as u64)).collect();
        acc.sort_unstable_by_key(|&(n, _)| n);
        let mut merged: Vec<(EntityId, u64)> = Vec::with_capacity(acc.len());
        for (n, m) in acc {
            match merged.last_mut() {
                Some((last, total)) if *last == n => *total += m,
                _ => merged.push((n, m)),
            }
        }
        merged
    }

    /// Degree on the symmetrized multigraph (a self-loop counts twice).
    pub fn degree(&self, v: EntityId) -> u64 {
        self.neighbors(v).map(|n| n.multiplicity as u64).sum()
    }

    /// Visible edge keys `(s, p, t, multiplicity)` in subject order.
    pub fn edges(&self) -> impl Iterator<Item = (EntityId, PredicateId, EntityId, u32)> + 'g {
        let g = self.graph;
        let masked = self.masked;
        (0..g.entity_count()).flat_map(move |v| {
            g.out
                .row(v)
                .iter()
                .filter(move |e| masked.is_none_or(|m| m.0 != e.predicate))
                .map(move |e| {
                    (
                        EntityId(v as u32),
                        PredicateId(e.predicate),
                        EntityId(e.node),
                        e.multiplicity,
                    )
                })
        })
    }

    /// Multiplicity of the edge key `(s, p, t)`, 0 when absent or masked.
    pub fn multiplicity(&self, s: EntityId, p: PredicateId, t: EntityId) -> u32 {
        if !self.visible(p.0) {
            return 0;
        }
        let row = self.graph.out.predicate_range(s.index(), p.0);
        row.binary_search_by_key(&t.0, |e| e.node)
            .map(|i| row[i].multiplicity)
            .unwrap_or(0)
    }

    /// True when the hop `from --step--> to` exists in this view.
    pub fn has_step(&self, from: EntityId, step: Step, to: EntityId) -> bool {
        match step.direction {
            Direction::Forward => self.multiplicity(from, step.predicate, to) > 0,
            Direction::Inverse => self.multiplicity(to, step.predicate, from) > 0,
        }
    }

    /// Edge count with multiplicity, visible edges only.
    pub fn edge_count(&self) -> u64 {
        self.edges().map(|e| e.3 as u64).sum()
    }

    pub fn entity_labels(&self, v: EntityId) -> &'g OntologyLabelSet {
        self.graph.entity_labels(v)
    }
}
