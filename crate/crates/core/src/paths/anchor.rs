use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::{AnchoredPredicatePath, MetaPath, MiningConfig, PathProfile};
use crate::error::{Error, Result};
use crate::graph::{EntityId, GraphView, OntologyLabelSet, Step};
use crate::paths::profile_pair;

/// How endpoint label sets of paths with equal step sequences are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorPolicy {
    /// Merge when each endpoint pair satisfies `J(a, b) >= 1 / |a ∪ b|`,
    /// i.e. shares a label; the merged anchor is the union.
    #[default]
    SharedLabel,
    /// Merge only identical label sets.
    Exact,
}

impl AnchorPolicy {
    pub fn compatible(self, a: &OntologyLabelSet, b: &OntologyLabelSet) -> bool {
        match self {
            AnchorPolicy::SharedLabel => a.endpoint_compatible(b),
            AnchorPolicy::Exact => a == b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnchorPolicy::SharedLabel => "shared-label",
            AnchorPolicy::Exact => "exact",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "shared-label" => Some(AnchorPolicy::SharedLabel),
            "exact" => Some(AnchorPolicy::Exact),
            _ => None,
        }
    }
}

/// Keeps the step sequence and the endpoint label sets; interior node types
/// are dropped.
pub fn to_anchored(meta: &MetaPath) -> AnchoredPredicatePath {
    AnchoredPredicatePath {
        steps: meta.steps.clone(),
        anchor_src: meta.node_labels.first().cloned().unwrap_or_default(),
        anchor_dst: meta.node_labels.last().cloned().unwrap_or_default(),
    }
}

/// Merges anchor pairs until no two groups are compatible on both
/// endpoints. Compatibility only grows under union, so the fixed point does
/// not depend on input order. Output is sorted.
pub fn merge_anchor_groups(
    anchors: impl IntoIterator<Item = (OntologyLabelSet, OntologyLabelSet)>,
    policy: AnchorPolicy,
) -> Vec<(OntologyLabelSet, OntologyLabelSet)> {
    let mut groups: Vec<(OntologyLabelSet, OntologyLabelSet)> =
        anchors.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    if policy == AnchorPolicy::Exact {
        return groups;
    }
    loop {
        let mut merged_any = false;
        let mut i = 0;
        while i < groups.len() {
            let mut j = i + 1;
            while j < groups.len() {
                if policy.compatible(&groups[i].0, &groups[j].0) && policy.compatible(&groups[i].1, &groups[j].1) {
                    let (s, d) = groups.swap_remove(j);
                    groups[i].0 = groups[i].0.union(&s);
                    groups[i].1 = groups[i].1.union(&d);
                    merged_any = true;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !merged_any {
            break;
        }
    }
    groups.sort();
    groups
}

/// Per-pair anchored path counts for a set of entity pairs.
///
/// `columns` is sorted and every column has at least one nonzero count.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFeatures {
    pub columns: Vec<AnchoredPredicatePath>,
    pub pairs: Vec<(EntityId, EntityId)>,
    /// Sparse rows aligned with `pairs`: `(column index, count)`, sorted.
    pub rows: Vec<Vec<(usize, u64)>>,
    pub policy: AnchorPolicy,
    index: HashMap<(EntityId, EntityId), usize>,
}

impl PathFeatures {
    /// Anchors are merged over the endpoint label sets observed in
    /// `profiles` only.
    pub fn from_profiles(profiles: &[PathProfile], policy: AnchorPolicy) -> Self {
        let mut by_steps: BTreeMap<&[Step], BTreeSet<(&OntologyLabelSet, &OntologyLabelSet)>> = BTreeMap::new();
        for prof in profiles {
            for steps in prof.counts.keys() {
                by_steps
                    .entry(steps.as_slice())
                    .or_default()
                    .insert((&prof.src_labels, &prof.dst_labels));
            }
        }
        let mut columns = Vec::new();
        let mut col_of_steps: HashMap<&[Step], std::ops::Range<usize>> = HashMap::new();
        for (steps, anchors) in &by_steps {
            let groups = merge_anchor_groups(anchors.iter().map(|(s, d)| ((*s).clone(), (*d).clone())), policy);
            let start = columns.len();
            for (src, dst) in groups {
                columns.push(AnchoredPredicatePath {
                    steps: steps.to_vec(),
                    anchor_src: src,
                    anchor_dst: dst,
                });
            }
            col_of_steps.insert(steps, start..columns.len());
        }
        let mut rows = Vec::with_capacity(profiles.len());
        for prof in profiles {
            let mut row: Vec<(usize, u64)> = Vec::with_capacity(prof.counts.len());
            for (steps, &count) in &prof.counts {
                let range = col_of_steps[steps.as_slice()].clone();
                let col = range
                    .clone()
                    .find(|&c| {
                        policy.compatible(&columns[c].anchor_src, &prof.src_labels)
                            && policy.compatible(&columns[c].anchor_dst, &prof.dst_labels)
                    })
                    .expect("every observed anchor belongs to a merged group");
                row.push((col, count));
            }
            row.sort_unstable();
            rows.push(row);
        }
        let pairs: Vec<_> = profiles.iter().map(|p| p.pair).collect();
        let index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        PathFeatures {
            columns,
            pairs,
            rows,
            policy,
            index,
        }
    }

    pub fn row_of(&self, pair: (EntityId, EntityId)) -> Option<&[(usize, u64)]> {
        self.index.get(&pair).map(|&i| self.rows[i].as_slice())
    }

    pub fn count(&self, pair: (EntityId, EntityId), column: usize) -> u64 {
        self.row_of(pair)
            .and_then(|row| row.binary_search_by_key(&column, |x| x.0).ok().map(|i| row[i].1))
            .unwrap_or(0)
    }
}

/// Mines every pair in parallel, then merges anchors into a shared feature
/// universe. Results do not depend on the thread count.
pub fn extract_path_features(
    view: &GraphView<'_>,
    pairs: &[(EntityId, EntityId)],
    config: &MiningConfig,
    policy: AnchorPolicy,
) -> Result<PathFeatures> {
    if pairs.is_empty() {
        return Err(Error::Insufficient("no entity pairs to mine".into()));
    }
    let profiles = pairs
        .par_iter()
        .map(|&(s, t)| profile_pair(view, s, t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathFeatures::from_profiles(&profiles, policy))
}
