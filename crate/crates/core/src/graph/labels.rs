use std::fmt;

use super::LabelId;

/// Sorted, duplicate-free set of ontology labels. May be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OntologyLabelSet(Vec<LabelId>);

impl OntologyLabelSet {
    pub fn new(labels: impl IntoIterator<Item = LabelId>) -> Self {
        let mut v: Vec<LabelId> = labels.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        OntologyLabelSet(v)
    }

    pub fn empty() -> Self {
        OntologyLabelSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, l: LabelId) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[LabelId] {
        &self.0
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn union_len(&self, other: &Self) -> usize {
        self.0.len() + other.0.len() - self.intersection_len(other)
    }

    pub fn union(&self, other: &Self) -> Self {
        OntologyLabelSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.intersection_len(other) > 0
    }

    /// Endpoint merge rule: `J(a, b) >= 1 / |a ∪ b|`, evaluated exactly on
    /// integers. Two empty sets are compatible (`J(∅, ∅) = 1`).
    pub fn endpoint_compatible(&self, other: &Self) -> bool {
        let union = self.union_len(other);
        if union == 0 {
            return true;
        }
        // inter / union >= 1 / union
        self.intersection_len(other) * union >= union
    }
}

impl fmt::Display for OntologyLabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "#{}", l.0)?;
        }
        write!(f, "}}")
    }
}

/// `|a ∩ b| / |a ∪ b|`, with `J(∅, ∅) = 1`.
pub fn jaccard(a: &OntologyLabelSet, b: &OntologyLabelSet) -> f64 {
    let union = a.union_len(b);
    if union == 0 {
        return 1.0;
    }
    a.intersection_len(b) as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(ids: &[u32]) -> OntologyLabelSet {
        OntologyLabelSet::new(ids.iter().map(|&i| LabelId(i)))
    }

    #[test]
    fn identity_is_one() {
        let x = set(&[3, 1, 2]);
        assert_eq!(jaccard(&x, &x), 1.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
    }

    #[test]
    fn city_vs_settlement_sets() {
        // {city, settlement, populated place} vs {settlement, populated place}
        let boston = set(&[0, 1, 2]);
        let sacramento = set(&[1, 2]);
        assert_eq!(jaccard(&boston, &sacramento), 2.0 / 3.0);
        assert!(boston.endpoint_compatible(&sacramento));
        // threshold 1/|A∪B| = 1/3 <= 2/3
        assert!(jaccard(&boston, &sacramento) >= 1.0 / boston.union_len(&sacramento) as f64);
    }

    #[test]
    fn disjoint_sets_are_incompatible() {
        assert!(!set(&[0]).endpoint_compatible(&set(&[1])));
        assert!(!set(&[]).endpoint_compatible(&set(&[1])));
        assert_eq!(jaccard(&set(&[0]), &set(&[1])), 0.0);
    }

    #[test]
    fn construction_dedups_and_sorts() {
        assert_eq!(set(&[5, 1, 5, 3]).as_slice(), &[LabelId(1), LabelId(3), LabelId(5)]);
    }

    proptest! {
        #[test]
        fn jaccard_symmetric_and_bounded(a in proptest::collection::vec(0u32..12, 0..8),
                                         b in proptest::collection::vec(0u32..12, 0..8)) {
            let (a, b) = (set(&a), set(&b));
            let j = jaccard(&a, &b);
            prop_assert_eq!(j, jaccard(&b, &a));
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(a.endpoint_compatible(&b), a.intersects(&b) || (a.is_empty() && b.is_empty()));
        }
    }
}
