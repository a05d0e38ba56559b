//! Command-line front end. Settings resolve as flags, then the `--config`
//! TOML file, then built-in defaults.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::baselines::{score_pairs, Method};
use crate::error::{Error, Result};
use crate::features::DeltaPolicy;
use crate::fixture::write_fixture;
use crate::graph::{load_graph_files, open_graph, write_snapshot, KnowledgeGraph, OntologyLabelSet};
use crate::interpret::{definition_report, explain};
use crate::model::{
    auroc, cross_validate, fit_pairs, labels_of, model_graph_path, per_fold_auroc, read_model_file, score_statement,
    stratified_folds, write_model, EvalConfig, TrainConfig,
};
use crate::paths::AnchorPolicy;
use crate::sampling::{
    generate_negatives, generate_positives, infer_anchors, negatives_for_ratio, read_pairs_file, read_statements_file,
    subsample_to_ratio, Pair, Statement,
};

#[derive(Debug, Parser)]
#[command(
    name = "predpath",
    version,
    about = "Fact checking with discriminative anchored predicate paths"
)]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a TSV edge list and label file, validate, and write a snapshot.
    Ingest {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print graph statistics.
    Stats(GraphArgs),
    /// Train a model for one predicate.
    Train(TrainArgs),
    /// Verdict for one statement.
    Check(StatementArgs),
    /// Verdict plus the definition paths found between the endpoints.
    Explain {
        #[command(flatten)]
        statement: StatementArgs,
        #[arg(long)]
        json: bool,
    },
    /// Cross-validated AUROC of one test case.
    Eval(EvalArgs),
    /// AUROC table: one row per method, one column per test case.
    Baseline(BaselineArgs),
    /// Write the synthetic capital and biomedical worlds.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        states: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Snapshot or TSV edge list.
    #[arg(long)]
    pub graph: PathBuf,
    /// Label file, for TSV edge lists.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

impl GraphArgs {
    fn open(&self) -> Result<KnowledgeGraph> {
        open_graph(&self.graph, self.labels.as_deref())
    }
}

#[derive(Debug, Default, Args)]
pub struct TuningArgs {
    /// Maximum path length.
    #[arg(long)]
    pub k: Option<usize>,
    /// Keep the N most informative paths.
    #[arg(long, value_name = "N", conflicts_with = "delta_min")]
    pub delta_top: Option<usize>,
    /// Keep paths with information gain at least X.
    #[arg(long, value_name = "X")]
    pub delta_min: Option<f64>,
    /// Prune definition paths with this much support among false pairs.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `shared-label` or `exact`.
    #[arg(long)]
    pub anchor_policy: Option<String>,
    /// Follow at most N hops out of any node.
    #[arg(long, value_name = "N")]
    pub fanout_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub predicate: String,
    /// True pairs, `subject<TAB>object`, instead of the predicate's edges.
    #[arg(long, conflicts_with = "testcase")]
    pub positives: Option<PathBuf>,
    /// Labeled statements to train on.
    #[arg(long)]
    pub testcase: Option<PathBuf>,
    /// Comma-separated subject labels.
    #[arg(long)]
    pub anchor_src: Option<String>,
    /// Comma-separated object labels.
    #[arg(long)]
    pub anchor_dst: Option<String>,
    /// Number of sampled false pairs.
    #[arg(long)]
    pub neg: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the definition report here.
    #[arg(long)]
    pub definition: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Args)]
pub struct StatementArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Graph to use instead of the one recorded in the model.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub labels: Option<PathBuf>,
    pub subject: String,
    pub object: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub testcase: PathBuf,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated: predpath, aa, pa, katz, sp, ppr, simrank.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated true-label ratios; the test case is subsampled to each.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Append mean seconds per statement. Wall-clock values vary run to run.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-statement held-out scores.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, required = true)]
    pub testcase: Vec<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub delta_top: Option<usize>,
    pub delta_min: Option<f64>,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub anchor_policy: Option<String>,
    pub fanout_cap: Option<usize>,
    pub folds: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub neg_ratio: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })
    }
}

const DEFAULT_NEG_RATIO: f64 = 0.2;

fn train_config(t: &TuningArgs, file: &FileConfig) -> Result<TrainConfig> {
    let mut c = TrainConfig::default();
    if let Some(k) = t.k.or(file.k) {
        c.mining.max_len = k;
    }
    c.mining.fanout_cap = t.fanout_cap.or(file.fanout_cap);
    c.delta = match (t.delta_top, t.delta_min) {
        (Some(n), _) => DeltaPolicy::TopK(n),
        (None, Some(x)) => DeltaPolicy::Threshold(x),
        (None, None) => match (file.delta_top, file.delta_min) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "config sets both delta_top and delta_min".into(),
                ))
            }
            (Some(n), None) => DeltaPolicy::TopK(n),
            (None, Some(x)) => DeltaPolicy::Threshold(x),
            (None, None) => DeltaPolicy::default(),
        },
    };
    if let DeltaPolicy::TopK(0) = c.delta {
        return Err(Error::InvalidArgument("--delta-top must be at least 1".into()));
    }
    if let Some(theta) = t.theta.or(file.theta) {
        c.theta = theta;
    }
    if c.theta.is_nan() || c.theta <= 0.0 {
        return Err(Error::InvalidArgument(format!("--theta must be > 0, got {}", c.theta)));
    }
    if let Some(lambda) = t.lambda.or(file.lambda) {
        c.fit.lambda = lambda;
    }
    if let Some(seed) = t.seed.or(file.seed) {
        c.seed = seed;
    }
    if let Some(name) = t.anchor_policy.as_ref().or(file.anchor_policy.as_ref()) {
        c.policy = AnchorPolicy::from_name(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown anchor policy `{name}`")))?;
    }
    Ok(c)
}

fn eval_config(t: &TuningArgs, folds: Option<usize>, file: &FileConfig) -> Result<EvalConfig> {
    let train = train_config(t, file)?;
    Ok(EvalConfig {
        folds: folds.or(file.folds).unwrap_or(10),
        seed: train.seed,
        train,
    })
}

/// A scorer in an evaluation: the path model or one baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scorer {
    PredPath,
    Baseline(Method),
}

impl Scorer {
    fn parse(s: &str) -> Result<Self> {
        if s == "predpath" {
            return Ok(Scorer::PredPath);
        }
        Method::from_name(s)
            .map(Scorer::Baseline)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }

    fn name(self) -> &'static str {
        match self {
            Scorer::PredPath => "predpath",
            Scorer::Baseline(m) => m.name(),
        }
    }

    fn title(self) -> &'static str {
        match self {
            Scorer::PredPath => "PredPath",
            Scorer::Baseline(m) => m.title(),
        }
    }
}

fn scorers(flag: Option<&str>, file: &FileConfig, default: &[&str]) -> Result<Vec<Scorer>> {
    let names: Vec<String> = match (flag, &file.methods) {
        (Some(s), _) => s.split(',').map(|x| x.trim().to_string()).collect(),
        (None, Some(v)) => v.clone(),
        (None, None) => default.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::new();
    for n in names.iter().filter(|n| !n.is_empty()) {
        let s = Scorer::parse(n)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    Ok(out)
}

fn all_methods() -> Vec<&'static str> {
    std::iter::once("predpath")
        .chain(Method::ALL.iter().map(|m| m.name()))
        .collect()
}

struct Outcome {
    auroc: f64,
    per_fold: Vec<f64>,
    scores: Vec<f64>,
    folds: Vec<usize>,
    seconds: f64,
}

fn evaluate(g: &KnowledgeGraph, statements: &[Statement], scorer: Scorer, config: &EvalConfig) -> Result<Outcome> {
    match scorer {
        Scorer::PredPath => {
            let r = cross_validate(g, statements, config)?;
            Ok(Outcome {
                auroc: r.auroc,
                seconds: r.mean_timing(),
                per_fold: r.per_fold,
                scores: r.scores,
                folds: r.folds,
            })
        }
        Scorer::Baseline(m) => {
            let (predicate, labels) = labels_of(statements)?;
            let folds = stratified_folds(&labels, config.folds, config.seed)?;
            let view = g.view_without(&predicate);
            let pairs: Vec<Pair> = statements.iter().map(Statement::pair).collect();
            let start = Instant::now();
            let scores = score_pairs(&view, m, &pairs)?;
            let seconds = start.elapsed().as_secs_f64() / pairs.len() as f64;
            Ok(Outcome {
                auroc: auroc(&scores, &labels)?,
                per_fold: per_fold_auroc(&scores, &labels, &folds, config.folds)?,
                scores,
                folds,
                seconds,
            })
        }
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} `{x}`")))
        })
        .collect()
}

fn label_arg(g: &KnowledgeGraph, s: Option<&str>) -> Result<Option<OntologyLabelSet>> {
    let Some(s) = s else { return Ok(None) };
    let names: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if let Some(bad) = names.iter().find(|n| g.label(n).is_none()) {
        return Err(Error::InvalidArgument(format!("unknown label `{bad}`")));
    }
    Ok(Some(g.label_set(names)))
}

fn canonical(p: &Path) -> String {
    fs::canonicalize(p)
        .unwrap_or_else(|_| p.to_path_buf())
        .display()
        .to_string()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv output failed: {e}"))
}

fn write_to(path: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(bytes).map_err(|e| Error::io(p, e))?;
            w.flush().map_err(|e| Error::io(p, e))
        }
        None => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Ingest {
            edges,
            labels,
            out: path,
        } => {
            let g = load_graph_files(&edges, labels.as_deref())?;
            g.check_consistency()?;
            let mut w = create(&path)?;
            write_snapshot(&g, &mut w)?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            say(out, &format!("{}\n", g.stats()))
        }
        Command::Stats(ga) => {
            let g = ga.open()?;
            say(out, &format!("{}\n", g.stats()))
        }
        Command::Train(args) => cmd_train(args, &file, out),
        Command::Check(args) => {
            let (g, model, stmt) = load_for_statement(&args)?;
            let p = score_statement(&model, &g, &stmt)?;
            let verdict = if p > 0.5 { "TRUE" } else { "FALSE" };
            say(out, &format!("{verdict} (p={p:.2})\n"))
        }
        Command::Explain { statement, json } => {
            let (g, model, stmt) = load_for_statement(&statement)?;
            let e = explain(&model, &g, &stmt)?;
            if json {
                say(out, &format!("{}\n", e.to_json()))
            } else {
                say(out, &e.to_text())
            }
        }
        Command::Eval(args) => cmd_eval(args, &file, out),
        Command::Baseline(args) => cmd_baseline(args, &file, out),
        Command::Fixture { out: dir, states, seed } => {
            let files = write_fixture(&dir, states, seed.or(file.seed).unwrap_or(42))?;
            for p in [
                &files.edges,
                &files.labels,
                &files.confounder_testcase,
                &files.random_testcase,
                &files.bio_edges,
                &files.bio_labels,
                &files.bio_testcase,
            ] {
                say(out, &format!("{}\n", p.display()))?;
            }
            Ok(())
        }
    }
}

fn cmd_train(args: TrainArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let config = train_config(&args.tuning, file)?;
    let g = args.graph.open()?;
    let predicate = args.predicate.as_str();
    let src = label_arg(&g, args.anchor_src.as_deref())?;
    let dst = label_arg(&g, args.anchor_dst.as_deref())?;

    let (positives, negatives) = if let Some(tc) = &args.testcase {
        let statements = read_statements_file(&g, tc)?;
        let (name, labels) = labels_of(&statements)?;
        if name != predicate {
            return Err(Error::InvalidArgument(format!(
                "test case is about `{name}`, not `{predicate}`"
            )));
        }
        let split = |want: bool| -> Vec<Pair> {
            statements
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == want)
                .map(|(s, _)| s.pair())
                .collect()
        };
        (split(true), split(false))
    } else {
        let empty = OntologyLabelSet::empty();
        let positives = match &args.positives {
            Some(p) => read_pairs_file(&g, p)?,
            None => generate_positives(
                &g,
                predicate,
                src.as_ref().unwrap_or(&empty),
                dst.as_ref().unwrap_or(&empty),
            )?,
        };
        let (inf_src, inf_dst) = infer_anchors(&g, &positives);
        let n = args
            .neg
            .unwrap_or_else(|| negatives_for_ratio(positives.len(), file.neg_ratio.unwrap_or(DEFAULT_NEG_RATIO)));
        let negatives = generate_negatives(
            &g,
            predicate,
            src.as_ref().unwrap_or(&inf_src),
            dst.as_ref().unwrap_or(&inf_dst),
            n,
            config.seed,
        )?;
        (positives, negatives)
    };
    log::info!(
        "training on {} true and {} false pairs",
        positives.len(),
        negatives.len()
    );

    let view = g.view_without(predicate);
    let mut model = fit_pairs(&view, predicate, &positives, &negatives, &config)?;
    model.graph = Some(canonical(&args.graph.graph));
    model.graph_labels = args.graph.labels.as_deref().map(canonical);

    let mut w = create(&args.out)?;
    write_model(&model, &g, &mut w)?;
    w.flush().map_err(|e| Error::io(&args.out, e))?;
    let report = definition_report(&model, &g);
    if let Some(p) = &args.definition {
        fs::write(p, &report).map_err(|e| Error::io(p, e))?;
    }
    say(out, &report)
}

fn load_for_statement(args: &StatementArgs) -> Result<(KnowledgeGraph, crate::model::FactCheckModel, Statement)> {
    let g = match &args.graph {
        Some(p) => open_graph(p, args.labels.as_deref())?,
        None => {
            let (graph, labels) = model_graph_path(&args.model)?;
            let graph = graph.ok_or_else(|| Error::InvalidArgument("model records no graph; pass --graph".into()))?;
            open_graph(Path::new(&graph), labels.as_deref().map(Path::new))?
        }
    };
    let model = read_model_file(&args.model, &g)?;
    let stmt = Statement {
        subject: g.require_entity(&args.subject)?,
        predicate: model.predicate.clone(),
        object: g.require_entity(&args.object)?,
        label: None,
    };
    Ok((g, model, stmt))
}

fn fold_header(k: usize) -> Vec<String> {
    (1..=k).map(|f| format!("fold_{f}")).collect()
}

fn cmd_eval(args: EvalArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let config = eval_config(&args.tuning, args.folds, file)?;
    let methods = scorers(args.methods.as_deref(), file, &["predpath"])?;
    let g = args.graph.open()?;
    let statements = read_statements_file(&g, &args.testcase)?;
    let runs: Vec<(f64, Vec<Statement>)> = match &args.ratios {
        Some(r) => parse_list::<f64>("ratio", r)?
            .into_iter()
            .map(|ratio| Ok((ratio, subsample_to_ratio(&statements, ratio, config.seed)?)))
            .collect::<Result<_>>()?,
        None => {
            let (_, labels) = labels_of(&statements)?;
            let ratio = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
            vec![(ratio, statements)]
        }
    };

    let mut report = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["ratio".to_string(), "method".into(), "n".into(), "auroc".into()];
    header.extend(fold_header(config.folds));
    if args.timing {
        header.push("mean_seconds".into());
    }
    report.write_record(&header).map_err(csv_error)?;
    let mut per_statement = csv::Writer::from_writer(Vec::new());
    per_statement
        .write_record(["ratio", "method", "subject", "object", "label", "fold", "score"])
        .map_err(csv_error)?;

    for (ratio, stmts) in &runs {
        for &m in &methods {
            let o = evaluate(&g, stmts, m, &config)?;
            let mut row = vec![
                format!("{ratio:.6}"),
                m.name().to_string(),
                stmts.len().to_string(),
                format!("{:.6}", o.auroc),
            ];
            row.extend(o.per_fold.iter().map(|a| format!("{a:.6}")));
            if args.timing {
                row.push(format!("{:.6}", o.seconds));
            }
            report.write_record(&row).map_err(csv_error)?;
            if args.scores.is_some() {
                for (i, st) in stmts.iter().enumerate() {
                    per_statement
                        .write_record([
                            format!("{ratio:.6}"),
                            m.name().to_string(),
                            g.entity_name(st.subject).to_string(),
                            g.entity_name(st.object).to_string(),
                            u8::from(st.label == Some(true)).to_string(),
                            (o.folds[i] + 1).to_string(),
                            format!("{:.9}", o.scores[i]),
                        ])
                        .map_err(csv_error)?;
                }
            }
        }
    }
    if let Some(p) = &args.scores {
        let bytes = per_statement
            .into_inner()
            .map_err(|e| csv_error(e.into_error().into()))?;
        write_to(Some(p), out, &bytes)?;
    }
    let bytes = report.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    write_to(args.out.as_deref(), out, &bytes)
}

fn cmd_baseline(args: BaselineArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let config = eval_config(&args.tuning, args.folds, file)?;
    let methods = scorers(args.methods.as_deref(), file, &all_methods())?;
    let g = args.graph.open()?;
    let cases: Vec<(String, Vec<Statement>)> = args
        .testcase
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((name, read_statements_file(&g, p)?))
        })
        .collect::<Result<_>>()?;

    let mut table = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    header.extend(cases.iter().map(|c| c.0.clone()));
    table.write_record(&header).map_err(csv_error)?;
    for &m in &methods {
        let mut row = vec![m.title().to_string()];
        for (_, stmts) in &cases {
            row.push(format!("{:.6}", evaluate(&g, stmts, m, &config)?.auroc));
        }
        table.write_record(&row).map_err(csv_error)?;
    }
    let bytes = table.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    write_to(args.out.as_deref(), out, &bytes)
}
