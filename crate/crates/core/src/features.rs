//! Training matrix, information-gain importance and feature selection.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph};
use crate::paths::{AnchoredPredicatePath, PathFeatures};

/// Dense `n x m` path-count matrix, rows are positives then negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// Row-major counts.
    pub x: Vec<u64>,
    pub y: Vec<bool>,
    pub columns: Vec<AnchoredPredicatePath>,
    pub row_pairs: Vec<(EntityId, EntityId)>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.x[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        let m = self.cols();
        &self.x[row * m..(row + 1) * m]
    }

    pub fn column(&self, col: usize) -> Vec<u64> {
        (0..self.rows()).map(|i| self.get(i, col)).collect()
    }

    /// Sum of column `col` over rows labeled false.
    pub fn negative_support(&self, col: usize) -> u64 {
        (0..self.rows()).filter(|&i| !self.y[i]).map(|i| self.get(i, col)).sum()
    }

    /// Keeps `cols` (indices into the current columns) in the given order.
    pub fn project(&self, cols: &[usize]) -> FeatureMatrix {
        let mut x = Vec::with_capacity(self.rows() * cols.len());
        for i in 0..self.rows() {
            let row = self.row(i);
            x.extend(cols.iter().map(|&c| row[c]));
        }
        FeatureMatrix {
            x,
            y: self.y.clone(),
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            row_pairs: self.row_pairs.clone(),
        }
    }

    /// CSV with one header cell per path, one row per pair and a trailing
    /// `label` column.
    pub fn write_csv(&self, g: &KnowledgeGraph, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        let mut header = vec!["subject".to_string(), "object".to_string()];
        header.extend(self.columns.iter().map(|c| c.to_text(g)));
        header.push("label".into());
        out.write_record(&header).map_err(csv_err)?;
        for i in 0..self.rows() {
            let (s, t) = self.row_pairs[i];
            let mut rec = vec![g.entity_name(s).to_string(), g.entity_name(t).to_string()];
            rec.extend(self.row(i).iter().map(u64::to_string));
            rec.push(if self.y[i] { "1" } else { "0" }.into());
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Lays out the counts of `features` for `positives` then `negatives`,
/// dropping columns that are zero on every row. Pairs missing from
/// `features` get an all-zero row.
pub fn build_matrix(
    features: &PathFeatures,
    positives: &[(EntityId, EntityId)],
    negatives: &[(EntityId, EntityId)],
) -> Result<FeatureMatrix> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Degenerate(format!(
            "training needs both classes ({} positive, {} negative pairs)",
            positives.len(),
            negatives.len()
        )));
    }
    let pairs: Vec<_> = positives.iter().chain(negatives).copied().collect();
    let y: Vec<bool> = (0..pairs.len()).map(|i| i < positives.len()).collect();
    let mut used = vec![false; features.columns.len()];
    for &p in &pairs {
        for &(c, n) in features.row_of(p).unwrap_or(&[]) {
            if n > 0 {
                used[c] = true;
            }
        }
    }
    let keep: Vec<usize> = (0..used.len()).filter(|&c| used[c]).collect();
    let mut new_index = vec![usize::MAX; used.len()];
    for (j, &c) in keep.iter().enumerate() {
        new_index[c] = j;
    }
    let m = keep.len();
    let mut x = vec![0u64; pairs.len() * m];
    for (i, &p) in pairs.iter().enumerate() {
        for &(c, n) in features.row_of(p).unwrap_or(&[]) {
            if n > 0 {
                x[i * m + new_index[c]] = n;
            }
        }
    }
    Ok(FeatureMatrix {
        x,
        y,
        columns: keep.iter().map(|&c| features.columns[c].clone()).collect(),
        row_pairs: pairs,
    })
}

/// Mutual information `I(X; y)` in bits, each distinct count value being
/// one outcome.
pub fn information_gain(column: &[u64], y: &[bool]) -> Result<f64> {
    if column.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "column has {} rows, labels have {}",
            column.len(),
            y.len()
        )));
    }
    if column.len() < 2 {
        return Err(Error::Degenerate("information gain needs at least two rows".into()));
    }
    let n_pos = y.iter().filter(|&&b| b).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::Degenerate("labels are constant".into()));
    }
    let mut joint: BTreeMap<u64, [usize; 2]> = BTreeMap::new();
    for (&x, &c) in column.iter().zip(y) {
        joint.entry(x).or_default()[c as usize] += 1;
    }
    let n = y.len() as f64;
    let class = [(y.len() - n_pos) as f64, n_pos as f64];
    let mut mi = 0.0;
    for counts in joint.values() {
        let nx = (counts[0] + counts[1]) as f64;
        for c in 0..2 {
            if counts[c] > 0 {
                let nxc = counts[c] as f64;
                mi += nxc / n * ((nxc * n) / (nx * class[c])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Information gain of every column.
pub fn importance(f: &FeatureMatrix) -> Result<Vec<f64>> {
    (0..f.cols())
        .into_par_iter()
        .map(|j| information_gain(&f.column(j), &f.y))
        .collect()
}

/// Feature-selection threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPolicy {
    /// The `k` most important columns with nonzero importance; ties go to
    /// the earlier column.
    TopK(usize),
    /// Columns with importance `>= delta`.
    Threshold(f64),
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::TopK(100)
    }
}

impl DeltaPolicy {
    /// Indices of surviving columns in column order.
    pub fn select(self, w: &[f64]) -> Result<Vec<usize>> {
        let keep: Vec<usize> = match self {
            DeltaPolicy::Threshold(delta) => (0..w.len()).filter(|&j| w[j] >= delta).collect(),
            DeltaPolicy::TopK(k) => {
                let mut order: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
                order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
                order.truncate(k);
                order.sort_unstable();
                order
            }
        };
        if keep.is_empty() {
            return Err(Error::EmptySelection {
                threshold: self.induced_threshold(w),
            });
        }
        Ok(keep)
    }

    /// The importance of the weakest surviving column (for `TopK`), or the
    /// threshold itself.
    pub fn induced_threshold(self, w: &[f64]) -> f64 {
        match self {
            DeltaPolicy::Threshold(d) => d,
            DeltaPolicy::TopK(k) => {
                let mut sorted: Vec<f64> = w.iter().copied().filter(|&x| x > 0.0).collect();
                sorted.sort_by(|a, b| b.total_cmp(a));
                match sorted.get(k.min(sorted.len()).wrapping_sub(1)) {
                    Some(&x) => x,
                    None => f64::MIN_POSITIVE,
                }
            }
        }
    }

    pub fn to_text(self) -> String {
        match self {
            DeltaPolicy::TopK(k) => format!("top:{k}"),
            DeltaPolicy::Threshold(d) => format!("min:{d}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad delta policy `{s}` (use top:K or min:X)"));
        if let Some(k) = s.strip_prefix("top:") {
            let k: usize = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            Ok(DeltaPolicy::TopK(k))
        } else if let Some(d) = s.strip_prefix("min:") {
            Ok(DeltaPolicy::Threshold(d.parse().map_err(|_| bad())?))
        } else {
            Err(bad())
        }
    }
}

/// Keeps exactly the columns with `w_j >= delta`, in their original order.
pub fn select_features(f: &FeatureMatrix, w: &[f64], delta: f64) -> Result<FeatureMatrix> {
    if w.len() != f.cols() {
        return Err(Error::InvalidArgument(format!(
            "{} importances for {} columns",
            w.len(),
            f.cols()
        )));
    }
    let keep = DeltaPolicy::Threshold(delta).select(w)?;
    Ok(f.project(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{LabelId, OntologyLabelSet, PredicateId, Step};
    use crate::paths::{AnchorPolicy, PathProfile};
    use proptest::prelude::*;

    fn entropy(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
        counts
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / n as f64;
                -p * p.log2()
            })
            .sum()
    }

    // I(X;Y) = H(X) + H(Y) - H(X,Y)
    fn oracle(x: &[u64], y: &[bool]) -> f64 {
        use std::collections::HashMap;
        let n = x.len();
        let mut hx: HashMap<u64, usize> = HashMap::new();
        let mut hxy: HashMap<(u64, bool), usize> = HashMap::new();
        for (&a, &b) in x.iter().zip(y) {
            *hx.entry(a).or_default() += 1;
            *hxy.entry((a, b)).or_default() += 1;
        }
        let pos = y.iter().filter(|&&b| b).count();
        entropy(hx.values().copied(), n) + entropy([pos, n - pos].into_iter(), n) - entropy(hxy.values().copied(), n)
    }

    #[test]
    fn ig_edge_cases() {
        let y = [true, true, false, false];
        assert_eq!(information_gain(&[1, 1, 0, 0], &y).unwrap(), 1.0);
        assert_eq!(information_gain(&[3, 3, 3, 3], &y).unwrap(), 0.0);
        assert!(information_gain(&[1, 0], &[true, true]).is_err());
        assert!(information_gain(&[1], &[true]).is_err());
    }

    proptest! {
        #[test]
        fn ig_matches_entropy_oracle(rows in proptest::collection::vec((0u64..4, any::<bool>()), 2..40)) {
            let x: Vec<u64> = rows.iter().map(|r| r.0).collect();
            let y: Vec<bool> = rows.iter().map(|r| r.1).collect();
            prop_assume!(y.iter().any(|&b| b) && y.iter().any(|&b| !b));
            let ig = information_gain(&x, &y).unwrap();
            prop_assert!((ig - oracle(&x, &y).max(0.0)).abs() < 1e-12);
            let pos = y.iter().filter(|&&b| b).count();
            let hy = entropy([pos, y.len() - pos].into_iter(), y.len());
            prop_assert!(ig >= 0.0 && ig <= hy + 1e-12);
            let mut xs = x.clone();
            let mut ys = y.clone();
            xs.reverse();
            ys.reverse();
            prop_assert!((information_gain(&xs, &ys).unwrap() - ig).abs() < 1e-12);
        }

        #[test]
        fn selection_is_exact_and_idempotent(w in proptest::collection::vec(0.0f64..1.0, 1..20), q in 0.0f64..1.0) {
            let m = w.len();
            let f = FeatureMatrix {
                x: (0..2 * m as u64).collect(),
                y: vec![true, false],
                columns: (0..m)
                    .map(|j| AnchoredPredicatePath {
                        steps: vec![Step::forward(PredicateId(j as u32))],
                        anchor_src: OntologyLabelSet::empty(),
                        anchor_dst: OntologyLabelSet::empty(),
                    })
                    .collect(),
                row_pairs: vec![(EntityId(0), EntityId(1)), (EntityId(2), EntityId(3))],
            };
            let max = w.iter().cloned().fold(0.0, f64::max);
            let delta = q * max;
            let sel = select_features(&f, &w, delta).unwrap();
            let expect: Vec<_> = (0..m).filter(|&j| w[j] >= delta).map(|j| f.columns[j].clone()).collect();
            prop_assert_eq!(&sel.columns, &expect);
            let w2: Vec<f64> = (0..m).filter(|&j| w[j] >= delta).map(|j| w[j]).collect();
            prop_assert_eq!(select_features(&sel, &w2, delta).unwrap(), sel);
        }
    }

    #[test]
    fn vacuous_and_empty_selection() {
        let w = [0.1, 0.0, 0.7];
        assert_eq!(DeltaPolicy::Threshold(0.0).select(&w).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            DeltaPolicy::Threshold(0.8).select(&w),
            Err(Error::EmptySelection { .. })
        ));
        assert_eq!(DeltaPolicy::TopK(1).select(&w).unwrap(), vec![2]);
        assert_eq!(DeltaPolicy::TopK(5).select(&w).unwrap(), vec![0, 2]);
        assert_eq!(DeltaPolicy::TopK(2).select(&[0.5, 0.5, 0.5]).unwrap(), vec![0, 1]);
        assert_eq!(DeltaPolicy::TopK(2).induced_threshold(&w), 0.1);
        assert_eq!(DeltaPolicy::parse("top:100").unwrap(), DeltaPolicy::TopK(100));
        assert_eq!(DeltaPolicy::parse("min:0.25").unwrap(), DeltaPolicy::Threshold(0.25));
        assert!(DeltaPolicy::parse("top:0").is_err());
    }

    fn profile(id: u32, counts: &[(u32, u64)]) -> PathProfile {
        PathProfile {
            pair: (EntityId(id), EntityId(id + 100)),
            src_labels: OntologyLabelSet::new([LabelId(0)]),
            dst_labels: OntologyLabelSet::new([LabelId(1)]),
            counts: counts
                .iter()
                .map(|&(p, c)| (vec![Step::forward(PredicateId(p))], c))
                .collect(),
        }
    }

    #[test]
    fn matrix_layout_and_zero_columns() {
        let profiles = vec![profile(0, &[(0, 2), (1, 1)]), profile(1, &[]), profile(2, &[(1, 4)])];
        let pf = PathFeatures::from_profiles(&profiles, AnchorPolicy::SharedLabel);
        let pos = [profiles[0].pair];
        let neg = [profiles[1].pair, profiles[2].pair];
        let f = build_matrix(&pf, &pos, &neg).unwrap();
        assert_eq!(f.y, vec![true, false, false]);
        assert_eq!(f.cols(), 2);
        assert_eq!(f.row(0), &[2, 1]);
        assert_eq!(f.row(1), &[0, 0]);
        assert_eq!(f.negative_support(1), 4);
        // only the second column is used by negatives
        let g = build_matrix(&pf, &neg[..1], &neg[1..]).unwrap();
        assert_eq!(g.cols(), 1);
        assert!(build_matrix(&pf, &pos, &[]).is_err());
        let positive_total: u64 = (0..f.cols()).map(|j| f.get(0, j)).sum();
        assert_eq!(positive_total, profiles[0].total());
    }
}
