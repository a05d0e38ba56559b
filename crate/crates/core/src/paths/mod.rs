//! Path mining: bounded bidirectional DFS between entity pairs, and the
//! reduction of meta paths to anchored predicate paths.

mod anchor;
mod enumerate;

use std::fmt;

pub use anchor::{extract_path_features, merge_anchor_groups, to_anchored, AnchorPolicy, PathFeatures};
pub use enumerate::{
    enumerate_paths, for_each_path, profile_pair, transition, MiningConfig, PathProfile, WeightedPath,
};

use crate::error::{Error, Result};
use crate::graph::{Direction, EntityId, GraphView, KnowledgeGraph, OntologyLabelSet, Step};

/// A concrete simple path `nodes[0] --steps[0]--> nodes[1] ... nodes[L]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathInstance {
    pub nodes: Vec<EntityId>,
    pub steps: Vec<Step>,
}

impl PathInstance {
    pub fn start(node: EntityId) -> Self {
        PathInstance {
            nodes: vec![node],
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> EntityId {
        *self.nodes.last().expect("path instance has at least one node")
    }

    /// True when every hop exists in `view` and no node repeats.
    pub fn is_valid_in(&self, view: &GraphView<'_>) -> bool {
        if self.nodes.len() != self.steps.len() + 1 {
            return false;
        }
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.nodes.len() {
            return false;
        }
        self.steps
            .iter()
            .enumerate()
            .all(|(i, &st)| view.has_step(self.nodes[i], st, self.nodes[i + 1]))
    }

    pub fn display<'a>(&'a self, g: &'a KnowledgeGraph) -> impl fmt::Display + 'a {
        DisplayInstance { path: self, g }
    }
}

struct DisplayInstance<'a> {
    path: &'a PathInstance,
    g: &'a KnowledgeGraph,
}

impl fmt::Display for DisplayInstance<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.g.entity_name(self.path.nodes[0]))?;
        for (i, st) in self.path.steps.iter().enumerate() {
            write!(
                f,
                " -{}-> {}",
                step_text(self.g, *st),
                self.g.entity_name(self.path.nodes[i + 1])
            )?;
        }
        Ok(())
    }
}

/// A typed path: label sets of every visited node plus the step sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaPath {
    pub node_labels: Vec<OntologyLabelSet>,
    pub steps: Vec<Step>,
}

impl MetaPath {
    pub fn from_instance(view: &GraphView<'_>, path: &PathInstance) -> Self {
        MetaPath {
            node_labels: path.nodes.iter().map(|&v| view.entity_labels(v).clone()).collect(),
            steps: path.steps.clone(),
        }
    }
}

/// Step sequence with interior types erased and endpoint label anchors.
///
/// Ordering is lexicographic on the step sequence, then the anchors; this is
/// the canonical feature order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnchoredPredicatePath {
    pub steps: Vec<Step>,
    pub anchor_src: OntologyLabelSet,
    pub anchor_dst: OntologyLabelSet,
}

impl AnchoredPredicatePath {
    /// True when an instance with these steps between endpoints labeled
    /// `src`/`dst` counts toward this path.
    pub fn matches(
        &self,
        steps: &[Step],
        src: &OntologyLabelSet,
        dst: &OntologyLabelSet,
        policy: AnchorPolicy,
    ) -> bool {
        self.steps == steps && policy.compatible(&self.anchor_src, src) && policy.compatible(&self.anchor_dst, dst)
    }

    /// Text form `{label,...} <pred1^-1, pred2, ...> {label,...}`.
    pub fn display<'a>(&'a self, g: &'a KnowledgeGraph) -> impl fmt::Display + 'a {
        DisplayAnchored { path: self, g }
    }

    pub fn to_text(&self, g: &KnowledgeGraph) -> String {
        self.display(g).to_string()
    }

    /// Parses the text form, resolving names against `g`.
    pub fn parse(text: &str, g: &KnowledgeGraph) -> Result<Self> {
        let parsed = PathText::parse(text)?;
        let resolve_labels = |names: &[String]| -> Result<OntologyLabelSet> {
            names
                .iter()
                .map(|n| {
                    g.label(n)
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{n}` in path")))
                })
                .collect::<Result<Vec<_>>>()
                .map(OntologyLabelSet::new)
        };
        let steps = parsed
            .steps
            .iter()
            .map(|(name, dir)| {
                let p = g.predicate(name).ok_or_else(|| Error::UnknownPredicate(name.clone()))?;
                Ok(Step {
                    predicate: p,
                    direction: *dir,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AnchoredPredicatePath {
            steps,
            anchor_src: resolve_labels(&parsed.src)?,
            anchor_dst: resolve_labels(&parsed.dst)?,
        })
    }
}

pub(crate) fn step_text(g: &KnowledgeGraph, st: Step) -> String {
    match st.direction {
        Direction::Forward => g.predicate_name(st.predicate).to_string(),
        Direction::Inverse => format!("{}^-1", g.predicate_name(st.predicate)),
    }
}

pub(crate) fn steps_text(g: &KnowledgeGraph, steps: &[Step]) -> String {
    let parts: Vec<String> = steps.iter().map(|&s| step_text(g, s)).collect();
    format!("<{}>", parts.join(", "))
}

pub(crate) fn labels_text(g: &KnowledgeGraph, set: &OntologyLabelSet) -> String {
    format!("{{{}}}", g.label_names(set).join(","))
}

struct DisplayAnchored<'a> {
    path: &'a AnchoredPredicatePath,
    g: &'a KnowledgeGraph,
}

impl fmt::Display for DisplayAnchored<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            labels_text(self.g, &self.path.anchor_src),
            steps_text(self.g, &self.path.steps),
            labels_text(self.g, &self.path.anchor_dst)
        )
    }
}

/// Name-level parse of the anchored path text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathText {
    pub src: Vec<String>,
    pub steps: Vec<(String, Direction)>,
    pub dst: Vec<String>,
}

impl PathText {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("malformed path `{text}`: {why}"));
        let text = text.trim();
        let rest = text.strip_prefix('{').ok_or_else(|| bad("missing `{`"))?;
        let (src, rest) = rest.split_once('}').ok_or_else(|| bad("missing `}`"))?;
        let rest = rest.trim_start();
        let rest = rest.strip_prefix('<').ok_or_else(|| bad("missing `<`"))?;
        let (steps, rest) = rest.split_once('>').ok_or_else(|| bad("missing `>`"))?;
        let rest = rest.trim_start();
        let rest = rest.strip_prefix('{').ok_or_else(|| bad("missing second `{`"))?;
        let dst = rest.strip_suffix('}').ok_or_else(|| bad("missing final `}`"))?;
        let names = |s: &str| -> Vec<String> {
            s.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(String::from)
                .collect()
        };
        let steps: Vec<(String, Direction)> = names(steps)
            .into_iter()
            .map(|s| match s.strip_suffix("^-1") {
                Some(p) => (p.to_string(), Direction::Inverse),
                None => (s, Direction::Forward),
            })
            .collect();
        if steps.is_empty() {
            return Err(bad("empty step sequence"));
        }
        Ok(PathText {
            src: names(src),
            steps,
            dst: names(dst),
        })
    }
}
