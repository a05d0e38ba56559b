//! Per-predicate fact-checking model: training, scoring and evaluation.

mod auroc;
mod evaluate;
mod io;
pub mod logistic;

use std::collections::HashMap;

use rayon::prelude::*;

pub use auroc::auroc;
pub use evaluate::{
    cross_validate, labels_of, mine_statements, per_fold_auroc, stratified_folds, EvalConfig, EvalReport,
};
pub use io::{model_graph_path, read_model, read_model_file, write_model, MODEL_HEADER};

use crate::error::{Error, Result};
use crate::features::{build_matrix, importance, DeltaPolicy, FeatureMatrix};
use crate::graph::{EntityId, GraphView, KnowledgeGraph, Step};
use crate::interpret::{prune_to_definition, rank_paths};
use crate::paths::{profile_pair, AnchorPolicy, AnchoredPredicatePath, MiningConfig, PathFeatures, PathProfile};
use crate::sampling::Statement;
use logistic::{fit, sigmoid, FitConfig, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub mining: MiningConfig,
    pub policy: AnchorPolicy,
    pub delta: DeltaPolicy,
    pub theta: f64,
    pub fit: FitConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mining: MiningConfig::default(),
            policy: AnchorPolicy::default(),
            delta: DeltaPolicy::default(),
            theta: 15.0,
            fit: FitConfig::default(),
            seed: 42,
        }
    }
}

/// Fitted logistic weights over standardized counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Logistic {
    pub bias: f64,
    pub weights: Vec<f64>,
    pub standardizer: Standardizer,
}

impl Logistic {
    pub fn linear_score(&self, counts: &[u64]) -> f64 {
        let st = &self.standardizer;
        self.bias
            + counts
                .iter()
                .enumerate()
                .map(|(j, &c)| self.weights[j] * (c as f64 - st.means[j]) / st.scales[j])
                .sum::<f64>()
    }

    pub fn probability(&self, counts: &[u64]) -> f64 {
        sigmoid(self.linear_score(counts))
    }
}

/// Fits the regularized logistic regression on `x`.
pub fn train(x: &FeatureMatrix, config: &FitConfig) -> Result<Logistic> {
    if x.cols() == 0 {
        return Err(Error::Degenerate("feature matrix has no columns".into()));
    }
    let pos = x.y.iter().filter(|&&b| b).count();
    if pos == 0 || pos == x.rows() {
        return Err(Error::Degenerate("training labels need both classes".into()));
    }
    let raw: Vec<f64> = x.x.iter().map(|&c| c as f64).collect();
    let standardizer = Standardizer::fit(&raw, x.rows(), x.cols());
    let mut std_x = Vec::with_capacity(raw.len());
    for i in 0..x.rows() {
        std_x.extend(standardizer.apply(&raw[i * x.cols()..(i + 1) * x.cols()]));
    }
    let fitted = fit(&std_x, &x.y, x.cols(), config)?;
    Ok(Logistic {
        bias: fitted.params[0],
        weights: fitted.params[1..].to_vec(),
        standardizer,
    })
}

/// A trained checker for one predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct FactCheckModel {
    pub predicate: String,
    /// Graph the model was trained on, if known.
    pub graph: Option<String>,
    /// Label file accompanying a TSV graph.
    pub graph_labels: Option<String>,
    pub config: TrainConfig,
    pub columns: Vec<AnchoredPredicatePath>,
    pub logistic: Logistic,
    /// Information gain per column.
    pub importance: Vec<f64>,
    /// Per-column count summed over negative training rows.
    pub neg_support: Vec<u64>,
    /// Column indices of the pruned definition, most important first.
    pub definition: Vec<usize>,
}

impl FactCheckModel {
    /// Counts of every column for one mined pair. A profile entry adds to
    /// each column whose steps match and whose anchors accept the pair's
    /// labels; paths unknown to the model are ignored.
    pub fn counts_for(&self, profile: &PathProfile) -> Vec<u64> {
        let mut by_steps: HashMap<&[Step], Vec<usize>> = HashMap::new();
        for (j, c) in self.columns.iter().enumerate() {
            by_steps.entry(c.steps.as_slice()).or_default().push(j);
        }
        let mut counts = vec![0u64; self.columns.len()];
        for (steps, &n) in &profile.counts {
            if let Some(cols) = by_steps.get(steps.as_slice()) {
                for &j in cols {
                    if self.columns[j].matches(steps, &profile.src_labels, &profile.dst_labels, self.config.policy) {
                        counts[j] += n;
                    }
                }
            }
        }
        counts
    }

    pub fn score_profile(&self, profile: &PathProfile) -> f64 {
        self.logistic.probability(&self.counts_for(profile))
    }

    /// Intercept in raw count space: the score of a pair with no paths is
    /// `sigmoid(raw_intercept())`.
    pub fn raw_intercept(&self) -> f64 {
        self.logistic.linear_score(&vec![0; self.columns.len()])
    }

    /// Graph view the model scores against: the predicate's own edges are
    /// hidden.
    pub fn view<'g>(&self, g: &'g KnowledgeGraph) -> GraphView<'g> {
        g.view_without(&self.predicate)
    }
}

/// Probability that `stmt` holds, mined on the graph without `p` edges.
pub fn score_statement(model: &FactCheckModel, g: &KnowledgeGraph, stmt: &Statement) -> Result<f64> {
    if stmt.predicate != model.predicate {
        return Err(Error::InvalidArgument(format!(
            "model checks `{}`, statement uses `{}`",
            model.predicate, stmt.predicate
        )));
    }
    let profile = profile_pair(&model.view(g), stmt.subject, stmt.object, &model.config.mining)?;
    Ok(model.score_profile(&profile))
}

/// Trains on already mined profiles; `labels[i]` belongs to `profiles[i]`.
pub fn fit_profiles(
    predicate: &str,
    profiles: &[PathProfile],
    labels: &[bool],
    config: &TrainConfig,
) -> Result<FactCheckModel> {
    let features = PathFeatures::from_profiles(profiles, config.policy);
    let pos: Vec<_> = profiles.iter().zip(labels).filter(|x| *x.1).map(|x| x.0.pair).collect();
    let neg: Vec<_> = profiles
        .iter()
        .zip(labels)
        .filter(|x| !*x.1)
        .map(|x| x.0.pair)
        .collect();
    let full = build_matrix(&features, &pos, &neg)?;
    if full.cols() == 0 {
        return Err(Error::Degenerate(format!(
            "no path of length <= {} connects any training pair",
            config.mining.max_len
        )));
    }
    let w = importance(&full)?;
    let keep = config.delta.select(&w)?;
    let x = full.project(&keep);
    let w: Vec<f64> = keep.iter().map(|&j| w[j]).collect();
    let logistic = train(&x, &config.fit)?;
    let definition = prune_to_definition(&rank_paths(&w), &x, config.theta)?;
    Ok(FactCheckModel {
        predicate: predicate.to_string(),
        graph: None,
        graph_labels: None,
        config: *config,
        neg_support: (0..x.cols()).map(|j| x.negative_support(j)).collect(),
        columns: x.columns,
        logistic,
        importance: w,
        definition,
    })
}

/// Mines every pair on `view` and trains.
pub fn fit_pairs(
    view: &GraphView<'_>,
    predicate: &str,
    positives: &[(EntityId, EntityId)],
    negatives: &[(EntityId, EntityId)],
    config: &TrainConfig,
) -> Result<FactCheckModel> {
    let pairs: Vec<_> = positives.iter().chain(negatives).copied().collect();
    let profiles = pairs
        .par_iter()
        .map(|&(s, t)| profile_pair(view, s, t, &config.mining))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = (0..pairs.len()).map(|i| i < positives.len()).collect();
    fit_profiles(predicate, &profiles, &labels, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn mini_world() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for i in 0..6 {
            let (cap, big, st, ag) = (format!("cap{i}"), format!("big{i}"), format!("st{i}"), format!("ag{i}"));
            b.add_triple(&cap, "capitalOf", &st);
            b.add_triple(&ag, "headquarter", &cap);
            b.add_triple(&ag, "jurisdiction", &st);
            b.add_triple(&cap, "isPartOf", &st);
            b.add_triple(&big, "isPartOf", &st);
            b.add_labels(&cap, ["city"]);
            b.add_labels(&big, ["city"]);
            b.add_labels(&st, ["state"]);
        }
        b.build()
    }

    fn trained(g: &KnowledgeGraph) -> FactCheckModel {
        let e = |n: String| g.entity(&n).unwrap();
        let pos: Vec<_> = (0..6).map(|i| (e(format!("cap{i}")), e(format!("st{i}")))).collect();
        let neg: Vec<_> = (0..6).map(|i| (e(format!("big{i}")), e(format!("st{i}")))).collect();
        fit_pairs(
            &g.view_without("capitalOf"),
            "capitalOf",
            &pos,
            &neg,
            &TrainConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn separates_capitals_from_big_cities() {
        let g = mini_world();
        let m = trained(&g);
        let st = |s: &str, o: &str| Statement {
            subject: g.entity(s).unwrap(),
            predicate: "capitalOf".into(),
            object: g.entity(o).unwrap(),
            label: None,
        };
        assert!(score_statement(&m, &g, &st("cap0", "st0")).unwrap() > 0.5);
        assert!(score_statement(&m, &g, &st("big0", "st0")).unwrap() < 0.5);
        let top = &m.columns[m.definition[0]];
        assert_eq!(top.to_text(&g), "{city} <headquarter^-1, jurisdiction> {state}");
        assert!(score_statement(&m, &g, &st("cap0", "cap0")).is_err());
    }

    #[test]
    fn zero_counts_score_the_intercept() {
        let g = mini_world();
        let m = trained(&g);
        let empty = PathProfile {
            pair: (EntityId(0), EntityId(1)),
            src_labels: Default::default(),
            dst_labels: Default::default(),
            counts: Default::default(),
        };
        assert_eq!(m.score_profile(&empty), sigmoid(m.raw_intercept()));
    }
}
