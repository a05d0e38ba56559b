//! Ranked, pruned path definitions of a predicate and per-statement
//! explanations.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::KnowledgeGraph;
use crate::model::FactCheckModel;
use crate::paths::{enumerate_paths, PathInstance};
use crate::sampling::Statement;

/// Column indices by descending importance; equal importances keep column
/// order.
pub fn rank_paths(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    order
}

/// Drops every ranked column whose count summed over negative rows of `f`
/// reaches `theta`. Survivors keep their rank order.
pub fn prune_to_definition(ranked: &[usize], f: &FeatureMatrix, theta: f64) -> Result<Vec<usize>> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pruning threshold must be > 0, got {theta}"
        )));
    }
    Ok(ranked
        .iter()
        .copied()
        .filter(|&j| (f.negative_support(j) as f64) < theta)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub nodes: Vec<String>,
    pub text: String,
    /// Parallel-edge instances this node sequence stands for.
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainedPath {
    pub rank: usize,
    pub path: String,
    pub importance: f64,
    pub weight: f64,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub probability: f64,
    pub verdict: bool,
    pub definition: Vec<ExplainedPath>,
}

impl Explanation {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("explanation serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = if self.verdict { "TRUE" } else { "FALSE" };
        let _ = writeln!(
            s,
            "{} {} {}: {verdict} (p={:.4})",
            self.subject, self.predicate, self.object, self.probability
        );
        let _ = writeln!(s, "definition ({} paths):", self.definition.len());
        for p in &self.definition {
            let _ = writeln!(s, "  {:>2}. {}  w={:.4}", p.rank, p.path, p.importance);
            if p.evidence.is_empty() {
                let _ = writeln!(s, "      (no evidence)");
            }
            for e in &p.evidence {
                if e.count > 1 {
                    let _ = writeln!(s, "      {}  x{}", e.text, e.count);
                } else {
                    let _ = writeln!(s, "      {}", e.text);
                }
            }
        }
        s
    }
}

/// Human-readable listing of the model's definition.
pub fn definition_report(model: &FactCheckModel, g: &KnowledgeGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "definition of {} ({} of {} paths, theta={}):",
        model.predicate,
        model.definition.len(),
        model.columns.len(),
        model.config.theta
    );
    for (rank, &j) in model.definition.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {:>2}. {}  w={:.4} neg={}",
            rank + 1,
            model.columns[j].to_text(g),
            model.importance[j],
            model.neg_support[j]
        );
    }
    s
}

/// Verdict, the model's definition, and the concrete path instances of each
/// definition path between the statement's endpoints.
pub fn explain(model: &FactCheckModel, g: &KnowledgeGraph, stmt: &Statement) -> Result<Explanation> {
    let probability = crate::model::score_statement(model, g, stmt)?;
    let view = model.view(g);
    let instances = enumerate_paths(&view, stmt.subject, stmt.object, &model.config.mining)?;
    let src = g.entity_labels(stmt.subject);
    let dst = g.entity_labels(stmt.object);
    let definition = model
        .definition
        .iter()
        .enumerate()
        .map(|(rank, &j)| {
            let col = &model.columns[j];
            let evidence = instances
                .iter()
                .filter(|wp| col.matches(&wp.path.steps, src, dst, model.config.policy))
                .map(|wp| evidence(g, &wp.path, wp.count))
                .collect();
            ExplainedPath {
                rank: rank + 1,
                path: col.to_text(g),
                importance: model.importance[j],
                weight: model.logistic.weights[j],
                evidence,
            }
        })
        .collect();
    Ok(Explanation {
        subject: g.entity_name(stmt.subject).to_string(),
        predicate: stmt.predicate.clone(),
        object: g.entity_name(stmt.object).to_string(),
        probability,
        verdict: probability > 0.5,
        definition,
    })
}

fn evidence(g: &KnowledgeGraph, path: &PathInstance, count: u64) -> Evidence {
    Evidence {
        nodes: path.nodes.iter().map(|&v| g.entity_name(v).to_string()).collect(),
        text: path.display(g).to_string(),
        count,
    }
}
