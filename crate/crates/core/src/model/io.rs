//! Text model format.
//!
//! ```text
//! predpath-model v1
//! predicate<TAB>capitalOf
//! graph<TAB>fixture.snap
//! max_len<TAB>3
//! ...
//! bias<TAB>-1.25
//! column<TAB>weight<TAB>mean<TAB>scale<TAB>importance<TAB>neg_support<TAB>{city} <headquarter^-1, jurisdiction> {state}
//! definition<TAB>0,2
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! bits.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use super::logistic::Standardizer;
use super::{FactCheckModel, Logistic, TrainConfig};
use crate::error::{Error, Result};
use crate::features::DeltaPolicy;
use crate::graph::KnowledgeGraph;
use crate::paths::{AnchorPolicy, AnchoredPredicatePath};

pub const MODEL_HEADER: &str = "predpath-model v1";

pub fn write_model(model: &FactCheckModel, g: &KnowledgeGraph, mut w: impl Write) -> Result<()> {
    let mut s = String::new();
    let c = &model.config;
    s.push_str(MODEL_HEADER);
    s.push('\n');
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push('\t');
        s.push_str(&v);
        s.push('\n');
    };
    kv("predicate", model.predicate.clone());
    if let Some(graph) = &model.graph {
        kv("graph", graph.clone());
    }
    if let Some(labels) = &model.graph_labels {
        kv("graph_labels", labels.clone());
    }
    kv("max_len", c.mining.max_len.to_string());
    if let Some(cap) = c.mining.fanout_cap {
        kv("fanout_cap", cap.to_string());
    }
    kv("anchor_policy", c.policy.name().into());
    kv("delta", c.delta.to_text());
    kv("theta", c.theta.to_string());
    kv("lambda", c.fit.lambda.to_string());
    kv("tolerance", c.fit.tolerance.to_string());
    kv("max_iterations", c.fit.max_iterations.to_string());
    kv("seed", c.seed.to_string());
    kv("bias", model.logistic.bias.to_string());
    let st = &model.logistic.standardizer;
    for (j, col) in model.columns.iter().enumerate() {
        kv(
            "column",
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                model.logistic.weights[j],
                st.means[j],
                st.scales[j],
                model.importance[j],
                model.neg_support[j],
                col.to_text(g)
            ),
        );
    }
    let def: Vec<String> = model.definition.iter().map(usize::to_string).collect();
    kv("definition", def.join(","));
    w.write_all(s.as_bytes()).map_err(|e| Error::io("<model>", e))?;
    Ok(())
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::ModelFormat {
        line,
        message: format!("bad value `{v}` for `{key}`"),
    })
}

/// Parses a model, resolving its paths against `g`.
pub fn read_model(r: impl BufRead, g: &KnowledgeGraph) -> Result<FactCheckModel> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| Error::io("<model>", e))?,
        None => String::new(),
    };
    if header.trim_end() != MODEL_HEADER {
        return Err(Error::ModelFormat {
            line: 1,
            message: format!("expected header `{MODEL_HEADER}`"),
        });
    }
    let mut predicate = None;
    let mut graph = None;
    let mut graph_labels = None;
    let mut config = TrainConfig::default();
    let mut bias = None;
    let mut columns = Vec::new();
    let mut weights = Vec::new();
    let mut means = Vec::new();
    let mut scales = Vec::new();
    let mut imp = Vec::new();
    let mut neg = Vec::new();
    let mut definition = None;
    for (i, line) in lines {
        let n = i + 1;
        let line = line.map_err(|e| Error::io("<model>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('\t').ok_or_else(|| Error::ModelFormat {
            line: n,
            message: "expected key<TAB>value".into(),
        })?;
        match key {
            "predicate" => predicate = Some(value.to_string()),
            "graph" => graph = Some(value.to_string()),
            "graph_labels" => graph_labels = Some(value.to_string()),
            "max_len" => config.mining.max_len = num(n, key, value)?,
            "fanout_cap" => config.mining.fanout_cap = Some(num(n, key, value)?),
            "anchor_policy" => {
                config.policy = AnchorPolicy::from_name(value).ok_or_else(|| Error::ModelFormat {
                    line: n,
                    message: format!("unknown anchor policy `{value}`"),
                })?
            }
            "delta" => {
                config.delta = DeltaPolicy::parse(value).map_err(|e| Error::ModelFormat {
                    line: n,
                    message: e.to_string(),
                })?
            }
            "theta" => config.theta = num(n, key, value)?,
            "lambda" => config.fit.lambda = num(n, key, value)?,
            "tolerance" => config.fit.tolerance = num(n, key, value)?,
            "max_iterations" => config.fit.max_iterations = num(n, key, value)?,
            "seed" => config.seed = num(n, key, value)?,
            "bias" => bias = Some(num::<f64>(n, key, value)?),
            "column" => {
                let f: Vec<&str> = value.splitn(6, '\t').collect();
                if f.len() != 6 {
                    return Err(Error::ModelFormat {
                        line: n,
                        message: "column needs weight, mean, scale, importance, support and path".into(),
                    });
                }
                weights.push(num::<f64>(n, "weight", f[0])?);
                means.push(num::<f64>(n, "mean", f[1])?);
                scales.push(num::<f64>(n, "scale", f[2])?);
                imp.push(num::<f64>(n, "importance", f[3])?);
                neg.push(num::<u64>(n, "neg_support", f[4])?);
                columns.push(AnchoredPredicatePath::parse(f[5], g).map_err(|e| Error::ModelFormat {
                    line: n,
                    message: e.to_string(),
                })?);
            }
            "definition" => {
                let idx = value
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| num::<usize>(n, key, s))
                    .collect::<Result<Vec<_>>>()?;
                definition = Some(idx);
            }
            other => {
                return Err(Error::ModelFormat {
                    line: n,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
    }
    let missing = |what: &str| Error::ModelFormat {
        line: 0,
        message: format!("missing `{what}`"),
    };
    if columns.is_empty() {
        return Err(missing("column"));
    }
    let definition = definition.ok_or_else(|| missing("definition"))?;
    if let Some(&bad) = definition.iter().find(|&&j| j >= columns.len()) {
        return Err(Error::ModelFormat {
            line: 0,
            message: format!("definition index {bad} out of range"),
        });
    }
    if weights.iter().chain(&means).chain(&scales).any(|w| !w.is_finite()) {
        return Err(Error::ModelFormat {
            line: 0,
            message: "non-finite weight".into(),
        });
    }
    Ok(FactCheckModel {
        predicate: predicate.ok_or_else(|| missing("predicate"))?,
        graph,
        graph_labels,
        config,
        columns,
        logistic: Logistic {
            bias: bias.ok_or_else(|| missing("bias"))?,
            weights,
            standardizer: Standardizer { means, scales },
        },
        importance: imp,
        neg_support: neg,
        definition,
    })
}

pub fn read_model_file(path: &Path, g: &KnowledgeGraph) -> Result<FactCheckModel> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(f), g)
}

/// Reads only the `graph` and `graph_labels` entries, so callers can locate
/// the graph before parsing paths.
pub fn model_graph_path(path: &Path) -> Result<(Option<String>, Option<String>)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let (mut graph, mut labels) = (None, None);
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(v) = line.strip_prefix("graph\t") {
            graph = Some(v.to_string());
        } else if let Some(v) = line.strip_prefix("graph_labels\t") {
            labels = Some(v.to_string());
        }
    }
    Ok((graph, labels))
}
