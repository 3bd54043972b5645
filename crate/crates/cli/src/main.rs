//! `rulefit` command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rulefit::bench::{self, SynthKind, SynthSpec};
use rulefit::dataset::{load_csv, load_for_variables, read_rows, ColumnKind, CsvSchema, Dataset, Task, Variable};
use rulefit::interpret::{
    excess_statistics, global_term_importance, h_statistics, local_term_importance, null_distribution,
    pd_table, prediction_region, raw_rows, region_importance, requests_of_order, HRequest, HSettings,
    ImportanceReport, InteractionRow, NullStat, PdBudget, Region, TermRef,
};
use rulefit::loss::LossSpec;
use rulefit::pipeline::{fit, RuleFitConfig, TermSet};
use rulefit::sparsefit::Selection;
use rulefit::EnsembleModel;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rulefit::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("preset: {0}")]
    Preset(#[from] toml::de::Error),
}

type Res<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "rulefit", version, about = "Rule ensembles: fit, predict and interpret")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a CSV file and write it as JSON.
    Fit(FitArgs),
    /// Predict rows of a CSV file.
    Predict(PredictArgs),
    /// Term and variable importances.
    Importance(ImportanceArgs),
    /// Partial dependence on one to three variables.
    Pdp(PdpArgs),
    /// Interaction statistics, optionally against a bootstrap null.
    Interactions(InteractionArgs),
    /// Null mean and spread of interaction statistics.
    NullCalibrate(NullArgs),
    /// Generate a simulated dataset.
    GenSynth(SynthArgs),
    /// Evaluate a model on a test file.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TaskArg {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LossArg {
    Squared,
    Huber,
    Ramp,
}

/// Fit settings; every field may also come from a TOML preset, with flags
/// taking precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FitSettings {
    /// Response column.
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated categorical columns.
    #[arg(long, value_delimiter = ',')]
    categorical: Option<Vec<String>>,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Default: squared for regression, ramp for classification.
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    /// Huber robustness quantile.
    #[arg(long)]
    huber_alpha: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    /// Shrinkage.
    #[arg(long)]
    nu: Option<f64>,
    /// Subsample size per tree.
    #[arg(long)]
    eta: Option<usize>,
    /// Mean terminal-node count.
    #[arg(long)]
    lbar: Option<f64>,
    /// Penalty on re-splitting a variable already on the path.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    min_node_rows: Option<usize>,
    /// both | rules | linear
    #[arg(long)]
    terms: Option<TermSet>,
    /// Winsorizing fraction.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n_lambda: Option<usize>,
    #[arg(long)]
    min_ratio: Option<f64>,
    /// Cross-validation folds for penalty selection.
    #[arg(long, conflicts_with = "holdout")]
    cv: Option<usize>,
    /// Holdout fraction for penalty selection.
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

macro_rules! overlay {
    ($a:ident, $b:ident, $($f:ident),*) => {
        FitSettings { $($f: $a.$f.or($b.$f),)* }
    };
}

impl FitSettings {
    fn over(self, preset: FitSettings) -> FitSettings {
        let (a, b) = (self, preset);
        overlay!(
            a, b, target, categorical, task, loss, huber_alpha, trees, nu, eta, lbar, kappa, min_node_rows, terms,
            beta, n_lambda, min_ratio, cv, holdout, tol, max_iter, max_outer, seed
        )
    }

    fn task(&self) -> Task {
        match self.task {
            Some(TaskArg::Classification) => Task::BinaryClassification,
            _ => Task::Regression,
        }
    }

    fn config(&self) -> RuleFitConfig {
        let task = self.task();
        let mut c = RuleFitConfig::default();
        let e = &mut c.ensemble;
        e.loss = match (self.loss, task) {
            (Some(LossArg::Squared), _) | (None, Task::Regression) => LossSpec::squared(),
            (Some(LossArg::Huber), _) => LossSpec::huber(self.huber_alpha.unwrap_or(0.9)),
            (Some(LossArg::Ramp), _) | (None, Task::BinaryClassification) => LossSpec::ramp(),
        };
        e.n_trees = self.trees.unwrap_or(e.n_trees);
        e.nu = self.nu.unwrap_or(e.nu);
        e.eta = self.eta.or(e.eta);
        e.lbar = self.lbar.unwrap_or(e.lbar);
        e.kappa = self.kappa.unwrap_or(e.kappa);
        e.min_node_rows = self.min_node_rows.unwrap_or(e.min_node_rows);
        e.seed = self.seed.unwrap_or(e.seed);
        c.terms = self.terms.unwrap_or(c.terms);
        c.beta = self.beta.unwrap_or(c.beta);
        let f = &mut c.fit;
        f.n_lambda = self.n_lambda.unwrap_or(f.n_lambda);
        f.min_ratio = self.min_ratio.unwrap_or(f.min_ratio);
        f.tol = self.tol.unwrap_or(f.tol);
        f.max_iter = self.max_iter.unwrap_or(f.max_iter);
        f.max_outer = self.max_outer.unwrap_or(f.max_outer);
        if let Some(folds) = self.cv {
            f.selection = Selection::KFold { folds };
        }
        if let Some(fraction) = self.holdout {
            f.selection = Selection::Holdout { fraction };
        }
        c
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// TOML file of default settings.
    #[arg(long)]
    preset: Option<PathBuf>,
    #[command(flatten)]
    settings: FitSettings,
    /// Model JSON output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PredictScale {
    /// Raw model value F(x).
    Score,
    /// F(x), clipped to [-1, 1] for the ramp loss.
    Response,
    /// sign(F(x)).
    Class,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "score")]
    scale: PredictScale,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training CSV, required for --region.
    #[arg(long)]
    data: Option<PathBuf>,
    /// CSV whose first data row is the point of interest.
    #[arg(long, conflicts_with = "region")]
    at: Option<PathBuf>,
    /// top:q or bottom:q of the training predictions.
    #[arg(long)]
    region: Option<Region>,
    /// Variable importances output.
    #[arg(long)]
    out: PathBuf,
    /// Optional term importances output.
    #[arg(long)]
    terms_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct BudgetArgs {
    /// Evaluation-point cap.
    #[arg(long, default_value_t = 500)]
    max_points: usize,
    /// Integration-row cap.
    #[arg(long, default_value_t = 500)]
    max_integration: usize,
    /// Use every row for both roles.
    #[arg(long)]
    exact: bool,
    /// Seed for the point and row subsamples.
    #[arg(long, default_value_t = 0)]
    pd_seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> PdBudget {
        PdBudget {
            max_points: self.max_points,
            max_integration: self.max_integration,
            exact: self.exact,
            seed: self.pd_seed,
        }
    }
}

#[derive(Debug, Args)]
struct PdpArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// One to three comma-separated variable names.
    #[arg(long, value_delimiter = ',', required = true)]
    vars: Vec<String>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct TupleArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    order: u8,
    /// Variables to form tuples from; default: all variables used by the model.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Keep only tuples containing all of these variables.
    #[arg(long, value_delimiter = ',')]
    with: Option<Vec<String>>,
    /// Divide by the total model variance instead of the joint effect's.
    #[arg(long)]
    importance_weighted: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
struct InteractionArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training CSV, including the response when --null-reps > 0.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    tuples: TupleArgs,
    /// Bootstrap refits for the null distribution; 0 skips it.
    #[arg(long, default_value_t = 0)]
    null_reps: usize,
    /// Seed for the bootstrap refits; default: the model's seed.
    #[arg(long)]
    null_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct NullArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    tuples: TupleArgs,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    null_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthArg {
    /// Ten-level inputs with three- and two-way interactions.
    #[value(alias = "discrete")]
    Eq51,
    /// Uniform inputs, Gaussian bumps plus linear terms.
    #[value(alias = "bumps")]
    Eq27,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthArg,
    #[arg(long)]
    n_rows: usize,
    #[arg(long)]
    n_cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target-to-noise standard-deviation ratio.
    #[arg(long, default_value_t = 2.0)]
    snr: f64,
    /// Fixed noise standard deviation, overriding --snr.
    #[arg(long)]
    sigma: Option<f64>,
    /// Square the exponent argument of the x4-x5 term of the ten-level target.
    #[arg(long)]
    squared_exponent: bool,
    #[arg(long)]
    out: PathBuf,
    /// Noise-free target values output.
    #[arg(long)]
    with_truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Metric {
    Aae,
    Target,
    Errrate,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Noise-free target values, one per test row.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "aae")]
    metrics: Vec<Metric>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Write `contents` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, contents: &str) -> Res<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Provenance header for CSV outputs.
fn header(flags: &impl std::fmt::Debug) -> String {
    let argv: Vec<String> = std::env::args().collect();
    format!(
        "# rulefit {}\n# argv: {}\n# flags: {:?}\n",
        env!("CARGO_PKG_VERSION"),
        argv.join(" "),
        flags
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn load_model(path: &Path) -> Res<EnsembleModel> {
    Ok(EnsembleModel::load(path)?)
}

fn var_index(model: &EnsembleModel, name: &str) -> Res<usize> {
    model
        .variables
        .iter()
        .position(|v| v.name == name)
        .map_or_else(|| usage(format!("unknown variable '{name}'")), Ok)
}

fn training_data(model: &EnsembleModel, path: &Path, need_response: bool) -> Res<Dataset> {
    let (data, has_y) = load_for_variables(path, &model.variables, model.target.as_deref(), model.task)?;
    if need_response && !has_y {
        return usage(format!(
            "{} lacks the response column '{}'",
            path.display(),
            model.target.as_deref().unwrap_or("?")
        ));
    }
    Ok(data)
}

fn display_value(var: &Variable, v: f64) -> String {
    match &var.kind {
        ColumnKind::Categorical { levels } if v >= 0.0 => levels
            .get(v as usize)
            .cloned()
            .unwrap_or_else(|| v.to_string()),
        _ => v.to_string(),
    }
}

fn run_fit(a: &FitArgs) -> Res<()> {
    let preset = match &a.preset {
        Some(p) => toml::from_str::<FitSettings>(&std::fs::read_to_string(p)?)?,
        None => FitSettings::default(),
    };
    let s = a.settings.clone().over(preset);
    let Some(target) = s.target.clone() else {
        return usage("--target is required (or set it in the preset)");
    };
    let cfg = s.config();
    cfg.fit.validate()?;
    let schema = CsvSchema {
        target: target.clone(),
        categorical: s.categorical.clone().unwrap_or_default(),
        task: s.task(),
    };
    let data = load_csv(&a.data, &schema)?;
    cfg.ensemble.validate(data.n_rows())?;
    let mut model = fit(&data, &cfg)?.model;
    model.target = Some(target);
    write_atomic(&a.out, &model.to_json()?)?;
    println!(
        "fitted {} terms ({} rules, {} linear) from {} candidates; lambda {:.6}",
        model.n_nonzero,
        model.rules.len(),
        model.linear.len(),
        model.basis_size,
        model.selected_lambda
    );
    Ok(())
}

fn run_predict(a: &PredictArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    let (rows, _) = read_rows(&a.data, &model.variables, None)?;
    let mut out = header(a);
    out.push_str("prediction\n");
    for (i, x) in rows.iter().enumerate() {
        let f = model
            .predict(x)
            .map_err(|e| CliError::Usage(format!("row {}: {e}", i + 1)))?;
        let v = match a.scale {
            PredictScale::Score => f,
            PredictScale::Response => model.response_scale(f),
            PredictScale::Class => rulefit::model::sign_label(f),
        };
        writeln!(out, "{v}").unwrap();
    }
    write_atomic(&a.out, &out)
}

fn term_label(model: &EnsembleModel, t: TermRef) -> (String, f64, String) {
    match t {
        TermRef::Rule(k) => {
            let r = &model.rules[k];
            (r.rule.describe(&model.variables), r.coefficient, r.rule.support.to_string())
        }
        TermRef::Linear(k) => {
            let l = &model.linear[k];
            (
                format!("linear: {}", model.variables[l.term.var].name),
                l.coefficient,
                String::new(),
            )
        }
    }
}

fn run_importance(a: &ImportanceArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    let report: ImportanceReport = if let Some(at) = &a.at {
        let (rows, _) = read_rows(at, &model.variables, None)?;
        let Some(x) = rows.first() else {
            return usage(format!("{} has no data rows", at.display()));
        };
        local_term_importance(&model, x)?
    } else if let Some(region) = a.region {
        let Some(path) = &a.data else {
            return usage("--region needs --data");
        };
        let data = training_data(&model, path, false)?;
        let rows = prediction_region(&model, &data, region)?;
        region_importance(&model, &data, &rows, &region.to_string())?
    } else {
        global_term_importance(&model)
    };
    let mut out = header(a);
    out.push_str("variable,importance,relative\n");
    for v in report.ranked_variables() {
        writeln!(out, "{},{},{}", csv_field(&v.name), v.importance, v.relative).unwrap();
    }
    write_atomic(&a.out, &out)?;
    if let Some(path) = &a.terms_out {
        let mut out = header(a);
        out.push_str("term,coefficient,support,importance,relative\n");
        for t in report.ranked_terms() {
            let (label, coef, support) = term_label(&model, t.term);
            writeln!(out, "{},{coef},{support},{},{}", csv_field(&label), t.importance, t.relative).unwrap();
        }
        write_atomic(path, &out)?;
    }
    Ok(())
}

fn run_pdp(a: &PdpArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    if a.vars.is_empty() || a.vars.len() > 3 {
        return usage("--vars takes one to three variables");
    }
    let vars: Vec<usize> = a.vars.iter().map(|n| var_index(&model, n)).collect::<Res<_>>()?;
    let data = training_data(&model, &a.data, false)?;
    let table = pd_table(&model, &data, &vars, &a.budget.budget())?;
    let mut out = header(a);
    let names: Vec<String> = a.vars.iter().map(|n| csv_field(n)).collect();
    writeln!(out, "{},partial_dependence", names.join(",")).unwrap();
    for (p, v) in table.points.iter().zip(&table.values) {
        let cells: Vec<String> = p
            .iter()
            .zip(&vars)
            .map(|(x, &j)| csv_field(&display_value(&model.variables[j], *x)))
            .collect();
        writeln!(out, "{},{v}", cells.join(",")).unwrap();
    }
    write_atomic(&a.out, &out)
}

fn tuple_requests(model: &EnsembleModel, t: &TupleArgs) -> Res<Vec<HRequest>> {
    let pool: Vec<usize> = match &t.vars {
        Some(names) => names.iter().map(|n| var_index(model, n)).collect::<Res<_>>()?,
        None => model.used_vars(),
    };
    let with: Vec<usize> = match &t.with {
        Some(names) => names.iter().map(|n| var_index(model, n)).collect::<Res<_>>()?,
        None => Vec::new(),
    };
    let mut pool = pool;
    for &w in &with {
        if !pool.contains(&w) {
            pool.push(w);
        }
    }
    pool.sort_unstable();
    pool.dedup();
    let reqs: Vec<HRequest> = requests_of_order(t.order as usize, &pool)?
        .into_iter()
        .filter(|r| with.iter().all(|w| r.vars.contains(w)))
        .collect();
    if reqs.is_empty() {
        return usage("no variable tuples match the request");
    }
    Ok(reqs)
}

fn settings(t: &TupleArgs) -> HSettings {
    HSettings {
        budget: t.budget.budget(),
        importance_weighted: t.importance_weighted,
    }
}

fn tuple_label(model: &EnsembleModel, vars: &[usize]) -> String {
    let names: Vec<&str> = vars.iter().map(|&v| model.variables[v].name.as_str()).collect();
    csv_field(&names.join("*"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_interactions(a: &InteractionArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    let reqs = tuple_requests(&model, &a.tuples)?;
    let data = training_data(&model, &a.data, a.null_reps > 0)?;
    let s = settings(&a.tuples);
    let raw = h_statistics(&model, &data, &reqs, &s)?;
    let rows: Vec<InteractionRow> = if a.null_reps > 0 {
        let seed = a.null_seed.unwrap_or(model.seed);
        let null = null_distribution(&data, &model.config, &reqs, a.null_reps, &s, seed)?;
        let raw: Vec<_> = reqs.iter().cloned().zip(raw).collect();
        let null: Vec<_> = reqs.iter().cloned().zip(null).collect();
        excess_statistics(&raw, &null)?
    } else {
        raw_rows(&reqs, &raw)
    };
    let mut out = header(a);
    out.push_str("tuple,H,null_mean,null_std,excess,reps\n");
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            tuple_label(&model, &r.vars),
            r.h,
            opt(r.null_mean),
            opt(r.null_std),
            opt(r.excess),
            r.reps
        )
        .unwrap();
    }
    write_atomic(&a.out, &out)
}

fn run_null(a: &NullArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    let reqs = tuple_requests(&model, &a.tuples)?;
    let data = training_data(&model, &a.data, true)?;
    let seed = a.null_seed.unwrap_or(model.seed);
    let null: Vec<NullStat> = null_distribution(&data, &model.config, &reqs, a.reps, &settings(&a.tuples), seed)?;
    let mut out = header(a);
    out.push_str("tuple,null_mean,null_std,reps\n");
    for (r, n) in reqs.iter().zip(&null) {
        writeln!(out, "{},{},{},{}", tuple_label(&model, &r.vars), n.mean, n.std, n.reps).unwrap();
    }
    write_atomic(&a.out, &out)
}

fn run_synth(a: &SynthArgs) -> Res<()> {
    let kind = match a.kind {
        SynthArg::Eq51 => SynthKind::DiscreteTarget,
        SynthArg::Eq27 => SynthKind::LinearPlusBumps,
    };
    let mut spec = SynthSpec::new(kind, a.n_rows, a.n_cols, a.seed);
    spec.signal_to_noise = a.snr;
    spec.sigma = a.sigma;
    spec.squared_exponent = a.squared_exponent;
    let sim = bench::generate(&spec)?;
    let data = &sim.data;
    let names: Vec<String> = data.variables().into_iter().map(|v| v.name).collect();
    let mut out = header(a);
    writeln!(out, "{},y", names.join(",")).unwrap();
    for i in 0..data.n_rows() {
        for j in 0..data.n_vars() {
            write!(out, "{},", data.value(i, j)).unwrap();
        }
        writeln!(out, "{}", data.response()[i]).unwrap();
    }
    write_atomic(&a.out, &out)?;
    if let Some(path) = &a.with_truth {
        let mut t = header(a);
        t.push_str("truth\n");
        for v in &sim.truth {
            writeln!(t, "{v}").unwrap();
        }
        write_atomic(path, &t)?;
    }
    println!("generated {} rows, noise sd {}", data.n_rows(), sim.sigma);
    Ok(())
}

fn read_truth(path: &Path) -> Res<Vec<f64>> {
    let vars = [Variable {
        name: "truth".into(),
        kind: ColumnKind::Numeric,
    }];
    let (rows, _) = read_rows(path, &vars, None)?;
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

fn run_eval(a: &EvalArgs) -> Res<()> {
    let model = load_model(&a.model)?;
    let Some(target) = model.target.as_deref() else {
        return usage("the model does not record its response column");
    };
    let (rows, y) = read_rows(&a.test, &model.variables, Some(target))?;
    let Some(y) = y else {
        return usage(format!("{} lacks the response column '{target}'", a.test.display()));
    };
    let f: Vec<f64> = rows.iter().map(|x| model.predict(x)).collect::<Result<_, _>>()?;
    let mut out = header(a);
    out.push_str("metric,value\n");
    for m in &a.metrics {
        let (name, v) = match m {
            Metric::Aae => ("aae", bench::aae(&y, &f)?),
            Metric::Target => {
                let Some(p) = &a.truth else {
                    return usage("the target metric needs --truth");
                };
                let truth = read_truth(p)?;
                if truth.len() != f.len() {
                    return usage(format!("{} truth values for {} test rows", truth.len(), f.len()));
                }
                ("target", bench::target_error(&truth, &f)?)
            }
            Metric::Errrate => ("errrate", bench::error_rate(&y, &f)?),
        };
        println!("{name}\t{v}");
        writeln!(out, "{name},{v}").unwrap();
    }
    if let Some(path) = &a.out {
        write_atomic(path, &out)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Res<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return usage("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Predict(a) => run_predict(a),
        Command::Importance(a) => run_importance(a),
        Command::Pdp(a) => run_pdp(a),
        Command::Interactions(a) => run_interactions(a),
        Command::NullCalibrate(a) => run_null(a),
        Command::GenSynth(a) => run_synth(a),
        Command::Eval(a) => run_eval(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) | CliError::Preset(_) | CliError::Core(rulefit::Error::Config(_)) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
