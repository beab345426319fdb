//! Simulated frontier data, Monte Carlo risks and log-log rate fits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use frontier_core::{
    adaptive_estimate_with, AdaptOptions, AdaptiveOutput, EstimatorConfig, Loss, Sample, TailFunction, Target,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionFn {
    /// Step function with levels -2, -3, -1.
    F1,
    /// `-2 + 2 cos(2 pi x) + 0.3 sin(19 pi x)`.
    F2,
    /// `-|x - 1/2|`.
    AbsDip,
    /// `-3`.
    Const,
}

impl RegressionFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RegressionFn::F1 => {
                if x < 1.0 / 3.0 {
                    -2.0
                } else if x < 2.0 / 3.0 {
                    -3.0
                } else {
                    -1.0
                }
            }
            RegressionFn::F2 => -2.0 + 2.0 * (2.0 * PI * x).cos() + 0.3 * (19.0 * PI * x).sin(),
            RegressionFn::AbsDip => -(x - 0.5).abs(),
            RegressionFn::Const => -3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegressionFn::F1 => "f1",
            RegressionFn::F2 => "f2",
            RegressionFn::AbsDip => "absdip",
            RegressionFn::Const => "const",
        }
    }
}

impl fmt::Display for RegressionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegressionFn {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self, AppError> {
        builtin_f(s)
    }
}

pub fn builtin_f(name: &str) -> Result<RegressionFn, AppError> {
    match name {
        "f1" => Ok(RegressionFn::F1),
        "f2" => Ok(RegressionFn::F2),
        "absdip" => Ok(RegressionFn::AbsDip),
        "const" => Ok(RegressionFn::Const),
        other => Err(AppError::Config(format!(
            "unknown regression function '{other}' (expected f1, f2, absdip or const)"
        ))),
    }
}

/// Sharpness profile `sin(2 pi x + pi/2) - sqrt(1 - (x-1)^2) + 2` on `[0, 1]`.
pub fn alpha_profile(x: f64) -> Result<f64, AppError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(AppError::Numeric(format!(
            "alpha profile is defined on [0, 1], got {x}"
        )));
    }
    Ok((2.0 * PI * x + PI / 2.0).sin() - (1.0 - (x - 1.0).powi(2)).sqrt() + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorKind {
    /// `-Exp(rate)`.
    NegExp { rate: f64 },
    /// `-Gamma(shape, 1)`.
    NegGamma { shape: f64 },
    /// Reflected gamma density `(-x)^(lambda-1) e^x / Gamma(lambda)` on `x <= 0`.
    ReflectedGamma { lambda: f64 },
    /// `-U[0, 1]`.
    NegUniform,
    /// `-Weibull(shape, scale 1)`.
    NegWeibull { shape: f64 },
    /// No noise.
    Zero,
}

/// Location-dependent shape for the gamma families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spatial {
    AlphaProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    pub spatial: Option<Spatial>,
}

impl ErrorModel {
    pub fn new(kind: ErrorKind) -> Self {
        Self { kind, spatial: None }
    }

    pub fn with_spatial(kind: ErrorKind, spatial: Spatial) -> Self {
        Self {
            kind,
            spatial: Some(spatial),
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(AppError::Config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        match self.kind {
            ErrorKind::NegExp { rate } => positive(rate, "exponential rate")?,
            ErrorKind::NegGamma { shape } | ErrorKind::NegWeibull { shape } => positive(shape, "shape")?,
            ErrorKind::ReflectedGamma { lambda } => positive(lambda, "lambda")?,
            ErrorKind::NegUniform | ErrorKind::Zero => {}
        }
        if self.spatial.is_some() && !matches!(self.kind, ErrorKind::NegGamma { .. } | ErrorKind::ReflectedGamma { .. })
        {
            return Err(AppError::Config(
                "a spatial shape profile needs a gamma error model".into(),
            ));
        }
        Ok(())
    }

    /// Shape in effect at design point `x`.
    fn shape_at(&self, base: f64, x: f64) -> f64 {
        match self.spatial {
            Some(Spatial::AlphaProfile) => alpha_profile(x.clamp(0.0, 1.0)).unwrap_or(base),
            None => base,
        }
    }

    /// One draw at design point `x`; always `<= 0`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: f64) -> f64 {
        let magnitude = match self.kind {
            ErrorKind::NegExp { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            ErrorKind::NegGamma { shape } | ErrorKind::ReflectedGamma { lambda: shape } => {
                Gamma::new(self.shape_at(shape, x), 1.0)
                    .expect("validated shape")
                    .sample(rng)
            }
            ErrorKind::NegUniform => rng.random::<f64>(),
            ErrorKind::NegWeibull { shape } => Weibull::new(1.0, shape).expect("validated shape").sample(rng),
            ErrorKind::Zero => 0.0,
        };
        -magnitude
    }

    /// Sharpness index at `x`, if the noise is nondegenerate.
    pub fn alpha_at(&self, x: f64) -> Option<f64> {
        match self.kind {
            ErrorKind::NegExp { .. } | ErrorKind::NegUniform => Some(1.0),
            ErrorKind::NegGamma { shape } | ErrorKind::ReflectedGamma { lambda: shape } => {
                Some(self.shape_at(shape, x))
            }
            ErrorKind::NegWeibull { shape } => Some(shape),
            ErrorKind::Zero => None,
        }
    }

    /// Known tail `-c y^(-1/alpha)` of the noise at `x`: with
    /// `P(-eps <= t) ~ t^alpha / K` as `t -> 0`, `c = K^(1/alpha)`.
    pub fn oracle_tail(&self, x: f64) -> Option<TailFunction> {
        let (alpha, c) = match self.kind {
            ErrorKind::NegExp { rate } => (1.0, 1.0 / rate),
            ErrorKind::NegUniform => (1.0, 1.0),
            ErrorKind::NegGamma { .. } | ErrorKind::ReflectedGamma { .. } => {
                let a = self.alpha_at(x)?;
                (a, libm::tgamma(a + 1.0).powf(1.0 / a))
            }
            ErrorKind::NegWeibull { shape } => (shape, 1.0),
            ErrorKind::Zero => return None,
        };
        Some(TailFunction::oracle(alpha, 0.0, c))
    }
}

/// `Y_j = f(j/n) + eps_j`, reproducible from `seed`.
pub fn gen_sample(f: RegressionFn, em: &ErrorModel, n: usize, seed: u64) -> Result<Sample, AppError> {
    if n < 2 {
        return Err(AppError::Config(format!("n must be at least 2, got {n}")));
    }
    em.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys = (1..=n)
        .map(|j| {
            let x = j as f64 / n as f64;
            f.eval(x) + em.draw(&mut rng, x)
        })
        .collect();
    Ok(Sample::new(ys)?)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate` for sample size `n`, independent of the
/// order in which replicates run.
pub fn derive_seed(master: u64, replicate: u64, n: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ replicate) ^ n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskTarget {
    /// Squared error at one point.
    Point { x: f64 },
    /// Empirical `||f_hat - f||_q^q` over the design points.
    Lq { q: f64 },
}

impl RiskTarget {
    pub fn loss(&self) -> Loss {
        match *self {
            RiskTarget::Point { .. } => Loss::Pointwise,
            RiskTarget::Lq { q } => Loss::Lq(q),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RiskOptions {
    /// Critical values from the true noise tail instead of the estimated one.
    pub oracle: bool,
}

/// Losses of one Monte Carlo replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateLoss {
    pub adaptive: f64,
    /// Loss of the base estimate at every bandwidth index; `None` where a
    /// fit was missing.
    pub per_k: Vec<Option<f64>>,
    pub k_hat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub n: usize,
    pub risk: f64,
    pub stderr: f64,
    pub reps_used: usize,
    /// Replicates dropped because the adaptive estimate was missing at a
    /// point that enters the loss.
    pub dropped: usize,
    /// Replicates whose pipeline returned an error.
    pub failed: usize,
}

fn curve_loss(values: &[Option<f64>], truth: &[f64], p: f64) -> Option<f64> {
    let mut sum = 0.0;
    for (v, t) in values.iter().zip(truth) {
        sum += (v.as_ref()? - t).abs().powf(p);
    }
    Some(sum / truth.len() as f64)
}

fn replicate_loss(out: &AdaptiveOutput, target: &RiskTarget, truth: &[f64]) -> Option<ReplicateLoss> {
    let p = match *target {
        RiskTarget::Point { .. } => 2.0,
        RiskTarget::Lq { q } => q,
    };
    let adaptive = curve_loss(&out.values(), truth, p)?;
    let per_k = out.base.iter().map(|vals| curve_loss(vals, truth, p)).collect();
    Some(ReplicateLoss {
        adaptive,
        per_k,
        k_hat: out.estimates[0].k_hat,
    })
}

/// Runs the adaptive pipeline on `reps` simulated samples and returns the
/// per-replicate losses in replicate order. Replicates that fail or lack a
/// value at a loss point are `Err`/`None`.
#[allow(clippy::too_many_arguments)]
pub fn mc_losses(
    f: RegressionFn,
    em: &ErrorModel,
    cfg: &EstimatorConfig,
    n: usize,
    reps: usize,
    target: &RiskTarget,
    master_seed: u64,
    opts: RiskOptions,
) -> Result<Vec<Result<Option<ReplicateLoss>, AppError>>, AppError> {
    em.validate()?;
    let cfg = EstimatorConfig {
        loss: target.loss(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let (points, est_target) = match *target {
        RiskTarget::Point { x } => (vec![x], Target::Point(x)),
        RiskTarget::Lq { .. } => {
            let xs: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
            (xs.clone(), Target::Curve(xs))
        }
    };
    let truth: Vec<f64> = points.iter().map(|&x| f.eval(x)).collect();
    let tail_x = match *target {
        RiskTarget::Point { x } => x,
        RiskTarget::Lq { .. } => 0.5,
    };
    let adapt_opts = AdaptOptions {
        oracle_tail: if opts.oracle { em.oracle_tail(tail_x) } else { None },
    };
    if opts.oracle && adapt_opts.oracle_tail.is_none() {
        return Err(AppError::Config(
            "oracle critical values need a noisy error model".into(),
        ));
    }
    Ok((0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = gen_sample(f, em, n, derive_seed(master_seed, r as u64, n as u64))?;
            let out = adaptive_estimate_with(&sample, &cfg, &est_target, &adapt_opts)?;
            Ok(replicate_loss(&out, target, &truth))
        })
        .collect())
}

/// Monte Carlo risk of the adaptive estimator. Fails when more than 5% of
/// the replicates error or are dropped.
#[allow(clippy::too_many_arguments)]
pub fn mc_risk(
    f: RegressionFn,
    em: &ErrorModel,
    cfg: &EstimatorConfig,
    n: usize,
    reps: usize,
    target: &RiskTarget,
    master_seed: u64,
    opts: RiskOptions,
) -> Result<RiskEstimate, AppError> {
    if reps < 2 {
        return Err(AppError::Config(format!("need at least 2 replicates, got {reps}")));
    }
    let results = mc_losses(f, em, cfg, n, reps, target, master_seed, opts)?;
    let mut losses = Vec::with_capacity(reps);
    let mut failed = 0;
    let mut dropped = 0;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(Some(l)) => losses.push(l.adaptive),
            Ok(None) => dropped += 1,
            Err(e) => {
                failed += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if (failed + dropped) * 20 > reps || losses.len() < 2 {
        return Err(first_error.unwrap_or_else(|| {
            AppError::Numeric(format!(
                "{} of {reps} replicates failed or were dropped",
                failed + dropped
            ))
        }));
    }
    let (risk, stderr) = mean_stderr(&losses);
    Ok(RiskEstimate {
        n,
        risk,
        stderr,
        reps_used: losses.len(),
        dropped,
        failed,
    })
}

pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub n_values: Vec<usize>,
    pub risks: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
}

/// Least-squares fit of `log risk` on `log n` with a `slope +- 2 se` band.
pub fn rate_fit(n_values: &[usize], risks: &[f64], stderrs: &[f64]) -> Result<RiskReport, AppError> {
    if n_values.len() != risks.len() || risks.len() != stderrs.len() {
        return Err(AppError::Input("n, risk and stderr lists differ in length".into()));
    }
    let mut distinct = n_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(AppError::DegenerateInput(
            "rate fit needs at least three distinct n".into(),
        ));
    }
    if risks.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(AppError::DegenerateInput("risks must be positive and finite".into()));
    }
    let xs: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = risks.iter().map(|r| r.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (k - 2.0) / sxx).sqrt();
    Ok(RiskReport {
        n_values: n_values.to_vec(),
        risks: risks.to_vec(),
        stderrs: stderrs.to_vec(),
        slope,
        intercept,
        slope_ci: (slope - 2.0 * se, slope + 2.0 * se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        assert_eq!(RegressionFn::F1.eval(0.5), -3.0);
        assert_eq!(RegressionFn::F1.eval(0.1), -2.0);
        assert_eq!(RegressionFn::F1.eval(0.9), -1.0);
        assert!(RegressionFn::F2.eval(0.0).abs() < 1e-15);
        assert_eq!(RegressionFn::AbsDip.eval(0.5), 0.0);
        assert_eq!(RegressionFn::Const.eval(0.3), -3.0);
        assert!(builtin_f("f9").is_err());
    }

    #[test]
    fn alpha_profile_values() {
        // sqrt(1 - (x-1)^2) vanishes at x = 0 and is one at x = 1.
        assert!((alpha_profile(0.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((alpha_profile(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((alpha_profile(0.5).unwrap() - 0.133_974_596_215_561_4).abs() < 1e-12);
        assert!(alpha_profile(1.5).is_err());
    }

    #[test]
    fn uniform_support_and_repeatability() {
        let em = ErrorModel::new(ErrorKind::NegUniform);
        let a = gen_sample(RegressionFn::F2, &em, 500, 3).unwrap();
        let b = gen_sample(RegressionFn::F2, &em, 500, 3).unwrap();
        assert_eq!(a, b);
        for (i, y) in a.ys().iter().enumerate() {
            let e = y - RegressionFn::F2.eval(a.x(i));
            assert!((-1.0..=0.0).contains(&e));
        }
        assert!(gen_sample(RegressionFn::F2, &em, 1, 3).is_err());
    }

    #[test]
    fn exponential_mean() {
        let em = ErrorModel::new(ErrorKind::NegExp { rate: 1.0 });
        let s = gen_sample(RegressionFn::Const, &em, 10_000, 11).unwrap();
        let eps: Vec<f64> = s.ys().iter().map(|y| y + 3.0).collect();
        let (mean, se) = mean_stderr(&eps);
        assert!(eps.iter().all(|e| *e <= 0.0));
        assert!((mean + 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn spatial_profile_needs_gamma() {
        let em = ErrorModel::with_spatial(ErrorKind::NegUniform, Spatial::AlphaProfile);
        assert!(em.validate().is_err());
        let em = ErrorModel::with_spatial(ErrorKind::NegGamma { shape: 1.0 }, Spatial::AlphaProfile);
        assert_eq!(em.alpha_at(1.0), Some(2.0));
    }

    #[test]
    fn oracle_tail_constants() {
        let t = ErrorModel::new(ErrorKind::NegGamma { shape: 2.0 })
            .oracle_tail(0.5)
            .unwrap();
        assert!((t.inv_alpha - 0.5).abs() < 1e-15);
        assert!((t.scale - 2f64.sqrt()).abs() < 1e-12);
        assert!(ErrorModel::new(ErrorKind::Zero).oracle_tail(0.5).is_none());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|r| derive_seed(7, r, 400)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 100);
        assert_ne!(derive_seed(7, 0, 400), derive_seed(7, 0, 800));
    }

    #[test]
    fn rate_fit_exact_power_law() {
        let ns = [200, 400, 800, 1600, 3200, 6400];
        let risks: Vec<f64> = ns.iter().map(|&n| 3.0 / n as f64).collect();
        let r = rate_fit(&ns, &risks, &[0.0; 6]).unwrap();
        assert!((r.slope + 1.0).abs() < 1e-12);
        assert!((r.slope_ci.1 - r.slope_ci.0).abs() < 1e-9);
    }

    #[test]
    fn rate_fit_log_factor() {
        let ns = [200, 400, 800, 1600, 3200, 6400];
        let risks: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-1.5) * (n as f64).ln()).collect();
        let r = rate_fit(&ns, &risks, &[0.0; 6]).unwrap();
        assert!(r.slope > -1.6 && r.slope < -1.3, "slope {}", r.slope);
    }

    #[test]
    fn rate_fit_rejects_degenerate() {
        assert!(matches!(
            rate_fit(&[200, 400], &[1.0, 0.5], &[0.0; 2]),
            Err(AppError::DegenerateInput(_))
        ));
        assert!(matches!(
            rate_fit(&[200, 400, 800], &[1.0, 0.0, 0.5], &[0.0; 3]),
            Err(AppError::DegenerateInput(_))
        ));
    }

    #[test]
    fn noiseless_risk_is_zero() {
        let em = ErrorModel::new(ErrorKind::Zero);
        let cfg = EstimatorConfig::default();
        let r = mc_risk(
            RegressionFn::Const,
            &em,
            &cfg,
            200,
            4,
            &RiskTarget::Point { x: 0.5 },
            1,
            RiskOptions::default(),
        )
        .unwrap();
        assert!(r.risk < 1e-12 && r.stderr >= 0.0);
    }
}
