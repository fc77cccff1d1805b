use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use drnmf_core::data::{
    clamp_positive, init_factors, load_labels, load_matrix, needs_positive_data, save_dense,
    synth_generate, InitMode, Model, ModelKind, SynthSpec,
};
use drnmf_core::eval::{cluster_assign, clustering_accuracy, relative_errors};
use drnmf_core::pareto::{sweep_weights, two_objective_grid};
use drnmf_core::scaling::E_MIN;
use drnmf_core::{
    compute_reference_errors, solve_dr, solve_weighted, Beta, DataMatrix, DenseMatrix, Error,
    FactorPair, ObjectiveSet, SolveTrace, SolverConfig, SparseMatrix,
};
use serde::{Deserialize, Serialize};

use crate::args::{EvalArgs, FactorizeArgs, ParetoArgs, SolveArgs, SynthArgs};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Numeric(m) => ("numeric", m),
        };
        // one line, whatever the message contains
        write!(f, "error[{kind}]: {}", msg.replace(['\n', '\r'], " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) => CliError::Numeric(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// Attaches the offending path to file errors.
fn with_path(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(io) => CliError::Validation(format!("{}: {io}", path.display())),
        Error::Parse { .. } => CliError::Validation(format!("{}: {e}", path.display())),
        other => other.into(),
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

fn parse_betas(values: &[f64]) -> CliResult<Vec<Beta>> {
    if values.is_empty() {
        return invalid("--betas needs at least one value");
    }
    let betas = values.iter().map(|&v| Beta::new(v)).collect::<Result<Vec<_>, _>>()?;
    for (i, b) in betas.iter().enumerate() {
        if betas[..i].contains(b) {
            return invalid(format!("β = {b} is listed twice"));
        }
    }
    Ok(betas)
}

/// Loads the data in the storage the objectives can use.
fn load_data(path: &Path, betas: &[Beta], force_sparse: bool) -> CliResult<DataMatrix> {
    let mut data = load_matrix(path).map_err(with_path(path))?;
    if force_sparse {
        if let DataMatrix::Dense(d) = &data {
            data = DataMatrix::Sparse(SparseMatrix::from_dense(d)?);
        }
    }
    if data.is_sparse() && !betas.iter().all(|b| b.has_sparse_path()) {
        log::warn!(
            "sparse updates exist only for β = 1 and β = 2; densifying {}",
            path.display()
        );
        data = DataMatrix::Dense(data.to_dense());
    }
    if needs_positive_data(betas) {
        if let DataMatrix::Dense(d) = &mut data {
            clamp_positive(d);
        }
    }
    Ok(data)
}

/// Factors as stored on disk by `synth --truth`; saved models share the
/// same fields.
#[derive(Debug, Serialize, Deserialize)]
struct FactorFile {
    rows: usize,
    cols: usize,
    rank: usize,
    w: Vec<f64>,
    h: Vec<f64>,
}

impl FactorFile {
    fn from_pair(fp: &FactorPair) -> Self {
        Self {
            rows: fp.w.rows(),
            cols: fp.h.cols(),
            rank: fp.rank(),
            w: fp.w.as_slice().to_vec(),
            h: fp.h.as_slice().to_vec(),
        }
    }

    fn into_pair(self) -> CliResult<FactorPair> {
        let w = DenseMatrix::from_vec(self.rows, self.rank, self.w)?;
        let h = DenseMatrix::from_vec(self.rank, self.cols, self.h)?;
        Ok(FactorPair::new(w, h)?)
    }
}

fn initial_factors(args: &SolveArgs, data: &DataMatrix) -> CliResult<FactorPair> {
    let init = match args.init.as_str() {
        "random" => init_factors(data, args.rank, InitMode::Random, args.seed)?,
        "svd" => init_factors(data, args.rank, InitMode::Svd, args.seed)?,
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read --init {path}: {e}")))?;
            let file: FactorFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("bad factor file {path}: {e}")))?;
            file.into_pair()?
        }
    };
    if init.rank() != args.rank {
        return invalid(format!(
            "initial factors have rank {}, --rank is {}",
            init.rank(),
            args.rank
        ));
    }
    init.check_target(data.shape())?;
    Ok(init)
}

fn solver_config(args: &SolveArgs) -> CliResult<SolverConfig> {
    let cfg = SolverConfig {
        max_iters: args.iters,
        seed: args.seed,
        log_stride: args.log_every,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn reference_errors(
    args: &SolveArgs,
    data: &DataMatrix,
    init: &FactorPair,
    betas: &[Beta],
    cfg: &SolverConfig,
) -> CliResult<Vec<f64>> {
    if let Some(given) = &args.ref_errors {
        if given.len() != betas.len() {
            return invalid(format!(
                "{} reference errors for {} betas",
                given.len(),
                betas.len()
            ));
        }
        return Ok(given.clone());
    }
    let refs = compute_reference_errors(data, init, betas, cfg)?;
    if refs.any_floored() {
        log::warn!("a reference error fell below {E_MIN} and was raised to it");
    }
    Ok(refs.values)
}

/// Recomputes the normalized columns of a trace for new reference errors.
fn renormalize(trace: &mut SolveTrace, obj: &ObjectiveSet) {
    for row in &mut trace.rows {
        row.normalized = obj.normalize(&row.raw);
        row.weighted = obj.weighted(&row.raw);
        let (argmax, max) = obj.argmax_normalized(&row.raw);
        row.argmax = argmax;
        row.max_normalized = max;
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: String) -> CliResult<()> {
    fs::write(path, text + "\n")
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn trace_path(output: &Path) -> PathBuf {
    output.with_extension("trace.csv")
}

fn write_trace(trace: &SolveTrace, path: &Path, seed: u64) -> CliResult<()> {
    let mut out = create(path)?;
    writeln!(out, "# drnmf trace seed={seed}")?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn save_model(
    kind: ModelKind,
    args: &SolveArgs,
    factors: &FactorPair,
    objectives: &ObjectiveSet,
    trace: &SolveTrace,
    cfg: &SolverConfig,
) -> CliResult<()> {
    let mut model = Model::new(kind, factors, objectives, trace, cfg).with_trace(trace);
    model.input = Some(args.input.display().to_string());
    model.init = args.init.clone();
    model.save(&args.output).map_err(with_path(&args.output))?;
    write_trace(trace, &trace_path(&args.output), args.seed)
}

fn print_errors(betas: &[Beta], trace: &SolveTrace) {
    let last = trace.last();
    for (i, b) in betas.iter().enumerate() {
        println!(
            "beta={b} D={} Dbar={} lambda={}",
            last.raw[i], last.normalized[i], last.lambda[i]
        );
    }
}

pub fn factorize(args: &FactorizeArgs) -> CliResult<()> {
    let solve = &args.solve;
    let betas = parse_betas(&solve.betas)?;
    let data = load_data(&solve.input, &betas, solve.sparse)?;
    let init = initial_factors(solve, &data)?;
    let cfg = solver_config(solve)?;
    let weights = match &args.weights {
        Some(w) if w.len() != betas.len() => {
            return invalid(format!("{} weights for {} betas", w.len(), betas.len()))
        }
        Some(w) => w.clone(),
        None => vec![1.0; betas.len()],
    };

    let (factors, objectives, trace) = if betas.len() == 1 && solve.ref_errors.is_none() {
        // The single-objective solve is its own reference.
        let unit = ObjectiveSet::one_hot(betas.clone(), 0)?;
        let (factors, mut trace) = solve_weighted(&data, &init, &unit, &cfg)?;
        let e = trace.last().raw[0].max(E_MIN);
        let obj = unit.with_ref_errors(vec![e])?;
        renormalize(&mut trace, &obj);
        (factors, obj, trace)
    } else {
        let refs = reference_errors(solve, &data, &init, &betas, &cfg)?;
        let obj = ObjectiveSet::new(betas.clone(), refs, weights)?;
        let (factors, trace) = solve_weighted(&data, &init, &obj, &cfg)?;
        (factors, obj, trace)
    };

    save_model(ModelKind::Weighted, solve, &factors, &objectives, &trace, &cfg)?;
    print_errors(&betas, &trace);
    println!("weighted={}", trace.last().weighted);
    Ok(())
}

pub fn dr(args: &SolveArgs) -> CliResult<()> {
    let betas = parse_betas(&args.betas)?;
    if betas.len() < 2 {
        return invalid(
            "dr needs at least two --betas; for a single objective use `drnmf factorize`",
        );
    }
    let data = load_data(&args.input, &betas, args.sparse)?;
    let init = initial_factors(args, &data)?;
    let cfg = solver_config(args)?;
    let refs = reference_errors(args, &data, &init, &betas, &cfg)?;
    let sol = solve_dr(&data, &init, &betas, &refs, &cfg)?;

    save_model(ModelKind::Robust, args, &sol.factors, &sol.objectives, &sol.trace, &cfg)?;
    print_errors(&betas, &sol.trace);
    let last = sol.trace.last();
    let hi = last.normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = last.normalized.iter().copied().fold(f64::INFINITY, f64::min);
    println!("max_Dbar={hi} gap={}", hi - lo);
    Ok(())
}

fn parse_lambda(text: &str, len: usize) -> CliResult<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad --lambda entry {t:?}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if values.len() != len {
        return invalid(format!("--lambda {text} has {} entries, expected {len}", values.len()));
    }
    Ok(values)
}

pub fn pareto(args: &ParetoArgs) -> CliResult<()> {
    let solve = &args.solve;
    let betas = parse_betas(&solve.betas)?;
    let weights = if args.lambdas.is_empty() {
        if betas.len() != 2 {
            return invalid(format!(
                "the --grid sweep needs exactly two --betas (got {}); pass --lambda lists instead",
                betas.len()
            ));
        }
        two_objective_grid(args.grid)?
    } else {
        args.lambdas
            .iter()
            .map(|t| parse_lambda(t, betas.len()))
            .collect::<CliResult<_>>()?
    };
    let data = load_data(&solve.input, &betas, solve.sparse)?;
    let init = initial_factors(solve, &data)?;
    let cfg = solver_config(solve)?;
    let refs = reference_errors(solve, &data, &init, &betas, &cfg)?;
    let sweep = sweep_weights(&data, &init, &betas, &refs, &weights, &cfg)?;

    let mut out = create(&solve.output)?;
    writeln!(out, "# drnmf pareto seed={} iters={}", solve.seed, solve.iters)?;
    sweep.write_csv(&mut out)?;
    out.flush()?;
    for p in &sweep.points {
        let lam: Vec<String> = p.lambda.iter().map(f64::to_string).collect();
        let dbar: Vec<String> = p.normalized.iter().map(f64::to_string).collect();
        println!(
            "lambda={} Dbar={} dominated={}",
            lam.join(","),
            dbar.join(","),
            p.dominated
        );
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let spec = SynthSpec {
        m: args.rows,
        n: args.cols,
        r: args.rank,
        noise_level: args.noise,
        noise_betas: parse_betas(&args.noise_betas)?,
        seed: args.seed,
    };
    let data = synth_generate(&spec)?;
    let families: Vec<String> = spec.noise_betas.iter().map(|b| b.to_string()).collect();
    let header = vec![
        format!("drnmf synth seed={} noise={}", spec.seed, spec.noise_level),
        format!(
            "rows={} cols={} rank={} noise_betas={}",
            spec.m,
            spec.n,
            spec.r,
            families.join(",")
        ),
    ];
    save_dense(&data.x, &header, &args.output).map_err(with_path(&args.output))?;
    if let Some(path) = &args.truth {
        let truth = FactorPair::new(data.w_true, data.h_true)?;
        let text = serde_json::to_string_pretty(&FactorFile::from_pair(&truth))
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        write_file(path, text)?;
    }
    println!(
        "rows={} cols={} noise_norm={}",
        spec.m,
        spec.n,
        data.noise.frobenius_norm()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    betas: Vec<Beta>,
    /// `100 (D̄_β − 1)` per β.
    relative_error_percent: Vec<f64>,
    accuracy: Option<f64>,
    n_classes: Option<usize>,
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    let model = Model::load(&args.model).map_err(with_path(&args.model))?;
    let factors = model.factors()?;
    let obj = model.objectives()?;

    let relative = match &args.input {
        Some(path) => {
            let data = load_data(path, &model.betas, false)?;
            relative_errors(&data, &factors.w, &factors.h, &obj)?
        }
        None => model.final_normalized.iter().map(|v| v - 1.0).collect(),
    };

    let (accuracy, n_classes) = match &args.labels {
        Some(path) => {
            let labels = load_labels(path).map_err(with_path(path))?;
            if labels.len() != model.rows {
                return invalid(format!(
                    "{} labels for a model with {} rows",
                    labels.len(),
                    model.rows
                ));
            }
            let pred = cluster_assign(&factors.w);
            let acc = clustering_accuracy(&pred, &labels.classes)?;
            (Some(acc), Some(labels.n_classes()))
        }
        None => (None, None),
    };

    let report = EvalReport {
        betas: model.betas.clone(),
        relative_error_percent: relative.iter().map(|v| 100.0 * v).collect(),
        accuracy,
        n_classes,
    };
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
    if let Some(path) = &args.output {
        write_file(path, text.clone())?;
    }
    println!("{text}");
    Ok(())
}
