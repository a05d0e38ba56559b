use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{auroc, fit_profiles, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::{GraphView, KnowledgeGraph};
use crate::paths::{profile_pair, MiningConfig, PathProfile};
use crate::sampling::{rng, Statement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            seed: 42,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// AUROC of the pooled held-out scores.
    pub auroc: f64,
    pub per_fold: Vec<f64>,
    /// Held-out probability per statement, in input order.
    pub scores: Vec<f64>,
    pub folds: Vec<usize>,
    pub labels: Vec<bool>,
    /// Feature-generation seconds per statement.
    pub timing: Vec<f64>,
}

impl EvalReport {
    pub fn mean_timing(&self) -> f64 {
        self.timing.iter().sum::<f64>() / self.timing.len().max(1) as f64
    }
}

/// Fold index per statement: each class is shuffled with `seed` and dealt
/// round-robin, so every fold holds both classes.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument("cross validation needs at least 2 folds".into()));
    }
    let mut rng = rng(seed);
    let mut assignment = vec![0; labels.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::Insufficient(format!(
                "{} {} statements for {folds} folds; need at least one per fold",
                idx.len(),
                if class { "true" } else { "false" }
            )));
        }
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

/// Mines every statement pair, timing each one.
pub fn mine_statements(
    view: &GraphView<'_>,
    statements: &[Statement],
    mining: &MiningConfig,
) -> Result<(Vec<PathProfile>, Vec<f64>)> {
    let mined = statements
        .par_iter()
        .map(|st| {
            let start = Instant::now();
            let p = profile_pair(view, st.subject, st.object, mining)?;
            Ok((p, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mined.into_iter().unzip())
}

/// Predicate and truth labels of a labeled single-predicate test case.
pub fn labels_of(statements: &[Statement]) -> Result<(String, Vec<bool>)> {
    let first = statements
        .first()
        .ok_or_else(|| Error::Insufficient("test case is empty".into()))?;
    let mut labels = Vec::with_capacity(statements.len());
    for (i, st) in statements.iter().enumerate() {
        if st.predicate != first.predicate {
            return Err(Error::InvalidArgument(format!(
                "statement {} uses `{}`, expected `{}`",
                i + 1,
                st.predicate,
                first.predicate
            )));
        }
        labels.push(
            st.label
                .ok_or_else(|| Error::InvalidArgument(format!("statement {} has no truth label", i + 1)))?,
        );
    }
    Ok((first.predicate.clone(), labels))
}

/// Stratified k-fold evaluation. Paths are mined once per statement on the
/// graph without the predicate's edges; anchors, importance, selection and
/// weights are refit on each training split only.
pub fn cross_validate(g: &KnowledgeGraph, statements: &[Statement], config: &EvalConfig) -> Result<EvalReport> {
    let (predicate, labels) = labels_of(statements)?;
    let folds = stratified_folds(&labels, config.folds, config.seed)?;
    let view = g.view_without(&predicate);
    let (profiles, timing) = mine_statements(&view, statements, &config.train.mining)?;

    let fold_scores = (0..config.folds)
        .into_par_iter()
        .map(|k| {
            let (train, test): (Vec<usize>, Vec<usize>) = (0..statements.len()).partition(|&i| folds[i] != k);
            let train_profiles: Vec<PathProfile> = train.iter().map(|&i| profiles[i].clone()).collect();
            let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
            let model = fit_profiles(&predicate, &train_profiles, &train_labels, &config.train)?;
            Ok(test
                .into_iter()
                .map(|i| (i, model.score_profile(&profiles[i])))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut scores = vec![0.0; statements.len()];
    for (i, s) in fold_scores.into_iter().flatten() {
        scores[i] = s;
    }
    let per_fold = per_fold_auroc(&scores, &labels, &folds, config.folds)?;
    Ok(EvalReport {
        auroc: auroc(&scores, &labels)?,
        per_fold,
        scores,
        folds,
        labels,
        timing,
    })
}

/// AUROC within each fold `0..k`.
pub fn per_fold_auroc(scores: &[f64], labels: &[bool], folds: &[usize], k: usize) -> Result<Vec<f64>> {
    (0..k)
        .map(|f| {
            let idx: Vec<usize> = (0..scores.len()).filter(|&i| folds[i] == f).collect();
            let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
            let y: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
            auroc(&s, &y)
        })
        .collect()
}
