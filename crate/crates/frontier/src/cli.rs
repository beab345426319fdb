//! Command line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frontier_core::adapt::{build_grid, Diagnostics, PointDiagnostics};
use frontier_core::{adaptive_estimate, estimate_tail, AdaptiveOutput, Loss, Target};
use serde_json::{json, Value};

use crate::config::{Settings, SharedArgs};
use crate::error::AppError;
use crate::io::{fmt_num, fmt_opt, read_dataset, sha256_hex, write_csv, write_json, Dataset};
use crate::manifest::RunManifest;
use crate::simkit::{
    gen_sample, mc_risk, rate_fit, ErrorKind, ErrorModel, RegressionFn, RiskOptions, RiskTarget, Spatial,
};

#[derive(Debug, Parser)]
#[command(
    name = "frontier-adapt",
    version,
    about = "Adaptive frontier estimation with one-sided errors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the adaptive frontier to a CSV file.
    Estimate(EstimateArgs),
    /// Draw a sample from a built-in frontier and error model.
    Simulate(SimulateArgs),
    /// Estimate the local tail parameters at one point.
    Tail(TailArgs),
    /// Monte Carlo risks over several sample sizes and their log-log slope.
    Rates(RatesArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with a `y` column, optionally preceded by an equidistant `x` column.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ErrorName {
    Negexp,
    Neggamma,
    Reflgamma,
    Neguniform,
    Negweibull,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileName {
    Builtin,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Frontier: f1, f2, absdip or const (required unless reading risks).
    #[arg(long = "f", value_parser = parse_f)]
    pub f: Option<RegressionFn>,
    /// Error model (required unless reading risks).
    #[arg(long, value_enum)]
    pub em: Option<ErrorName>,
    /// Rate of the exponential errors [default: 1].
    #[arg(long)]
    pub rate: Option<f64>,
    /// Shape of the gamma / Weibull errors [default: 1].
    #[arg(long)]
    pub shape: Option<f64>,
    /// Let the gamma shape follow a profile in x.
    #[arg(long, value_enum)]
    pub alpha_profile: Option<ProfileName>,
}

fn parse_f(s: &str) -> Result<RegressionFn, String> {
    s.parse().map_err(|e: AppError| e.to_string())
}

impl ModelArgs {
    /// The frontier and the validated error model.
    pub fn model(&self) -> Result<(RegressionFn, ErrorModel), AppError> {
        let (Some(f), Some(em)) = (self.f, self.em) else {
            return Err(AppError::Config("--f and --em are required".into()));
        };
        let rate = self.rate.unwrap_or(1.0);
        let shape = self.shape.unwrap_or(1.0);
        let kind = match em {
            ErrorName::Negexp => ErrorKind::NegExp { rate },
            ErrorName::Neggamma => ErrorKind::NegGamma { shape },
            ErrorName::Reflgamma => ErrorKind::ReflectedGamma { lambda: shape },
            ErrorName::Neguniform => ErrorKind::NegUniform,
            ErrorName::Negweibull => ErrorKind::NegWeibull { shape },
            ErrorName::Zero => ErrorKind::Zero,
        };
        let em = ErrorModel {
            kind,
            spatial: self.alpha_profile.map(|_| Spatial::AlphaProfile),
        };
        em.validate()?;
        Ok((f, em))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Location, in the units of the input `x` column.
    #[arg(long)]
    pub x: f64,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    /// Replicates per sample size.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// `point:X` for squared error at X, or `lq:Q` for the L_q^q risk.
    #[arg(long, default_value = "point:0.5", value_parser = parse_target)]
    pub target: RiskTarget,
    /// Sharpness index for the reported theoretical exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Smoothness for the reported theoretical exponent.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Use the true noise tail for the critical values.
    #[arg(long)]
    pub oracle: bool,
    /// CSV of precomputed risks (`n,risk[,stderr]`); skips the simulation.
    #[arg(long)]
    pub risks_file: Option<PathBuf>,
}

fn parse_target(s: &str) -> Result<RiskTarget, String> {
    let (kind, value) = s.split_once(':').ok_or("expected point:X or lq:Q")?;
    let v: f64 = value.parse().map_err(|_| format!("'{value}' is not a number"))?;
    match kind {
        "point" if (0.0..=1.0).contains(&v) => Ok(RiskTarget::Point { x: v }),
        "lq" if v >= 1.0 => Ok(RiskTarget::Lq { q: v }),
        _ => Err(format!("invalid target '{s}'")),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            if let Some(h) = e.hint() {
                eprintln!("hint: {h}");
            }
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), AppError> {
    let settings = cli.shared.resolve()?;
    let out = cli
        .shared
        .out
        .clone()
        .ok_or_else(|| AppError::Config("--out <DIR> is required".into()))?;
    let body = || match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, &settings, &out),
        Command::Simulate(a) => cmd_simulate(a, &settings, &out),
        Command::Tail(a) => cmd_tail(a, &settings, &out),
        Command::Rates(a) => cmd_rates(a, &settings, &out),
    };
    match settings.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| AppError::Config(format!("cannot start {t} threads: {e}")))?
            .install(body),
        None => body(),
    }
}

fn prepare_out(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(format!("cannot create {}", dir.display()), e))
}

fn point_json(p: &PointDiagnostics) -> Value {
    json!({
        "x": p.x,
        "alpha_hat": p.tail.as_ref().map(|t| t.alpha()),
        "b_hat": p.tail.as_ref().map(|t| t.b_hat),
        "k_alpha": p.tail.as_ref().map(|t| t.k_alpha),
        "k_b": p.tail.as_ref().map(|t| t.k_b),
        "m_used": p.tail.as_ref().map(|t| t.m_used),
        "tail_error": p.tail_error.as_ref().map(|e| e.to_string()),
        "k_hat": p.k_hat,
        "zeta": p.critical.truncated,
        "zeta_raw": p.critical.raw,
        "zeta_clamped": p.critical.clamped,
        "window_sizes": p.window_sizes,
    })
}

fn diagnostics_json(d: &Diagnostics, xs: &[f64]) -> Value {
    let mut v = json!({
        "loss": d.loss,
        "grid": d.grid,
        "counters": d.counters,
        "warnings": d.warnings,
    });
    match &d.global {
        Some(g) => {
            v["global"] = json!({
                "alpha_hat": g.tail.as_ref().map(|t| t.alpha()),
                "b_hat": g.tail.as_ref().map(|t| t.b_hat),
                "k_alpha": g.tail.as_ref().map(|t| t.k_alpha),
                "k_b": g.tail.as_ref().map(|t| t.k_b),
                "m_used": g.tail.as_ref().map(|t| t.m_used),
                "tail_error": g.tail_error.as_ref().map(|e| e.to_string()),
                "k_hat": g.k_hat,
                "zeta": g.critical.truncated,
                "zeta_raw": g.critical.raw,
                "zeta_clamped": g.critical.clamped,
            });
            v["window_sizes"] = d.points.iter().map(|p| json!(p.window_sizes)).collect();
        }
        None => {
            v["points"] = d
                .points
                .iter()
                .zip(xs)
                .map(|(p, &x)| {
                    let mut j = point_json(p);
                    j["x"] = json!(x);
                    j
                })
                .collect();
        }
    }
    v
}

fn fitted_rows(out: &AdaptiveOutput, xs: &[f64]) -> Vec<Vec<String>> {
    out.estimates
        .iter()
        .zip(xs)
        .map(|(e, &x)| {
            vec![
                fmt_num(x),
                fmt_opt(e.value),
                e.k_hat.to_string(),
                fmt_num(e.zeta_at_k_hat),
            ]
        })
        .collect()
}

pub fn cmd_estimate(a: &EstimateArgs, settings: &Settings, out: &Path) -> Result<(), AppError> {
    let started = Instant::now();
    let data = read_dataset(&a.input)?;
    prepare_out(out)?;
    let result = adaptive_estimate(&data.sample, &settings.estimator, &Target::Curve(data.sample.xs()))?;
    write_csv(
        &out.join("fitted.csv"),
        &["x", "f_hat", "k_hat", "zeta_at_khat"],
        &fitted_rows(&result, &data.xs),
    )?;
    write_json(
        &out.join("diagnostics.json"),
        &diagnostics_json(&result.diagnostics, &data.xs),
    )?;
    let mut m = RunManifest::new("estimate", settings);
    m.input_sha256 = Some(data.digest.clone());
    m.outputs = vec!["fitted.csv".into(), "diagnostics.json".into()];
    m.finish(out, started)
}

pub fn cmd_simulate(a: &SimulateArgs, settings: &Settings, out: &Path) -> Result<(), AppError> {
    let started = Instant::now();
    let (f, em) = a.model.model()?;
    let sample = gen_sample(f, &em, a.n, settings.seed)?;
    prepare_out(out)?;
    let rows: Vec<Vec<String>> = sample
        .ys()
        .iter()
        .enumerate()
        .map(|(i, &y)| vec![fmt_num(sample.x(i)), fmt_num(y)])
        .collect();
    write_csv(&out.join("sample.csv"), &["x", "y"], &rows)?;
    let mut m = RunManifest::new("simulate", settings);
    m.outputs = vec!["sample.csv".into()];
    m.finish(out, started)
}

fn tail_json(data: &Dataset, x: f64, settings: &Settings) -> Result<Value, AppError> {
    let u = data.to_unit(x);
    if !(0.0..=1.0).contains(&u) {
        return Err(AppError::Config(format!("--x {x} lies outside the design range")));
    }
    let cfg = &settings.estimator;
    let n = data.sample.n();
    let grid = build_grid(n, cfg.h0_exponent, cfg.rho)?;
    let tail = estimate_tail(&data.sample, u, &grid, cfg)?;
    let f = tail.function();
    let ln_n = (n as f64).ln().max(1.0 + 1e-9);
    let a_grid: Vec<Value> = (0..20)
        .map(|i| {
            let y = (1.0 + (ln_n - 1.0) * i as f64 / 19.0).exp();
            json!({ "y": y, "a_hat": f.eval(y).ok() })
        })
        .collect();
    Ok(json!({
        "x": x,
        "alpha_hat": tail.alpha(),
        "inv_alpha_hat": tail.inv_alpha,
        "b_hat": tail.b_hat,
        "k_alpha": tail.k_alpha,
        "k_b": tail.k_b,
        "m_used": tail.m_used,
        "levels": tail.levels,
        "counters": tail.counters,
        "bandwidths": grid.bandwidths,
        "a_hat_grid": a_grid,
    }))
}

pub fn cmd_tail(a: &TailArgs, settings: &Settings, out: &Path) -> Result<(), AppError> {
    let started = Instant::now();
    let data = read_dataset(&a.input)?;
    let v = tail_json(&data, a.x, settings)?;
    prepare_out(out)?;
    write_json(&out.join("tail.json"), &v)?;
    let mut m = RunManifest::new("tail", settings);
    m.input_sha256 = Some(data.digest.clone());
    m.outputs = vec!["tail.json".into()];
    m.finish(out, started)
}

/// File digest, sample sizes, risks and standard errors.
type RiskTable = (String, Vec<usize>, Vec<f64>, Vec<f64>);

/// `n, risk[, stderr]` rows, header optional.
fn read_risks(path: &Path) -> Result<RiskTable, AppError> {
    let bytes = fs::read(path).map_err(|e| AppError::io(format!("cannot read {}", path.display()), e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(&bytes[..]);
    let (mut ns, mut risks, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let bad = |m: &str| AppError::Parse {
            line,
            message: m.to_owned(),
        };
        if !(2..=3).contains(&rec.len()) {
            return Err(bad("expected n,risk[,stderr]"));
        }
        ns.push(rec[0].parse().map_err(|_| bad("n must be a positive integer"))?);
        risks.push(rec[1].parse().map_err(|_| bad("risk must be a number"))?);
        ses.push(match rec.get(2) {
            Some(s) => s.parse().map_err(|_| bad("stderr must be a number"))?,
            None => 0.0,
        });
    }
    Ok((sha256_hex(&bytes), ns, risks, ses))
}

pub fn cmd_rates(a: &RatesArgs, settings: &Settings, out: &Path) -> Result<(), AppError> {
    let started = Instant::now();
    let mut m = RunManifest::new("rates", settings);
    let mut details = Vec::new();
    let (ns, risks, ses) = match &a.risks_file {
        Some(p) => {
            let (digest, ns, risks, ses) = read_risks(p)?;
            m.input_sha256 = Some(digest);
            (ns, risks, ses)
        }
        None => {
            let (f, em) = a.model.model()?;
            let mut distinct = a.n_list.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 3 {
                return Err(AppError::DegenerateInput(
                    "--n-list needs at least three distinct sizes".into(),
                ));
            }
            let opts = RiskOptions { oracle: a.oracle };
            let (mut ns, mut risks, mut ses) = (Vec::new(), Vec::new(), Vec::new());
            for &n in &a.n_list {
                let r = mc_risk(f, &em, &settings.estimator, n, a.reps, &a.target, settings.seed, opts)?;
                ns.push(n);
                risks.push(r.risk);
                ses.push(r.stderr);
                details.push(r);
            }
            (ns, risks, ses)
        }
    };
    let report = rate_fit(&ns, &risks, &ses)?;
    let theory = match (a.alpha, a.beta) {
        (Some(al), Some(be)) => Some(match a.target {
            RiskTarget::Point { .. } => -2.0 * be / (al * be + 1.0),
            RiskTarget::Lq { q } => -q * be / (al * be + 1.0),
        }),
        _ => None,
    };
    prepare_out(out)?;
    let rows: Vec<Vec<String>> = ns
        .iter()
        .zip(&risks)
        .zip(&ses)
        .map(|((n, r), s)| vec![n.to_string(), fmt_num(*r), fmt_num(*s)])
        .collect();
    write_csv(&out.join("rates.csv"), &["n", "risk", "stderr"], &rows)?;
    let loss = match a.target {
        RiskTarget::Point { .. } => Loss::Pointwise,
        RiskTarget::Lq { q } => Loss::Lq(q),
    };
    write_json(
        &out.join("report.json"),
        &json!({
            "slope": report.slope,
            "slope_ci": [report.slope_ci.0, report.slope_ci.1],
            "intercept": report.intercept,
            "theoretical_exponent": theory,
            "target": a.target,
            "loss": loss,
            "reps": a.reps,
            "oracle": a.oracle,
            "report": report,
            "per_n": details,
        }),
    )?;
    m.outputs = vec!["rates.csv".into(), "report.json".into()];
    m.finish(out, started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_parsing() {
        assert_eq!(parse_target("point:0.5"), Ok(RiskTarget::Point { x: 0.5 }));
        assert_eq!(parse_target("lq:1"), Ok(RiskTarget::Lq { q: 1.0 }));
        assert!(parse_target("lq:0.5").is_err());
        assert!(parse_target("point").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
