use alloc::vec;
use alloc::vec::Vec;

use super::{
    build_grid, critical_values_lq, critical_values_pointwise, lepski_select, BandwidthGrid, CriticalValues, CvKind,
    EstimatorConfig, LepskiNorm, Loss,
};
use crate::error::{Error, Result};
use crate::local_poly::{fit_local, min_window};
use crate::sample::Sample;
use crate::tail::{estimate_tail, tail_levels, TailCounters, TailEstimate, TailFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Point(f64),
    Curve(Vec<f64>),
}

impl Target {
    fn points(&self) -> &[f64] {
        match self {
            Target::Point(x) => core::slice::from_ref(x),
            Target::Curve(g) => g,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AdaptOptions {
    /// Replaces the estimated tail by a known one when building critical
    /// values (simulation studies only).
    pub oracle_tail: Option<TailFunction>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointEstimate {
    pub x: f64,
    pub value: Option<f64>,
    pub k_hat: usize,
    pub zeta_at_k_hat: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Counters {
    pub tail: TailCounters,
    /// Tail estimations that failed outright (critical values fell back to 1).
    pub tail_failures: usize,
    /// Critical values whose plug-in argument left the domain.
    pub cv_clamped: usize,
    /// Base fits done at a lower degree because the window was small.
    pub degree_reduced: usize,
    /// Base fits that produced no value.
    pub missing_fits: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointDiagnostics {
    pub x: f64,
    pub tail: Option<TailEstimate>,
    pub tail_error: Option<Error>,
    pub critical: CriticalValues,
    pub k_hat: usize,
    /// Design points per bandwidth index.
    pub window_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GlobalDiagnostics {
    pub tail: Option<TailEstimate>,
    pub tail_error: Option<Error>,
    pub critical: CriticalValues,
    pub k_hat: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Diagnostics {
    pub loss: Loss,
    pub grid: BandwidthGrid,
    /// One entry per target point under pointwise loss; window sizes only
    /// under `L_q` loss.
    pub points: Vec<PointDiagnostics>,
    pub global: Option<GlobalDiagnostics>,
    pub counters: Counters,
    pub warnings: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutput {
    pub estimates: Vec<PointEstimate>,
    /// Base estimates `base[k][i]` for every bandwidth index and target point.
    pub base: Vec<Vec<Option<f64>>>,
    pub diagnostics: Diagnostics,
}

impl AdaptiveOutput {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.value).collect()
    }
}

/// Base estimate at `(x, h)` with degree at most `degree`, lowered as far as
/// the window requires. Returns the value, the window size and whether the
/// degree was lowered.
pub fn base_value(sample: &Sample, x: f64, h: f64, degree: usize) -> (Option<f64>, usize, bool) {
    let available = sample.window(x, h).map_or(0, |w| w.len());
    if available < min_window(0) {
        return (None, available, false);
    }
    let d = degree.min(available - 2);
    match fit_local(sample, x, h, d) {
        Ok(fit) => (Some(fit.value()), available, d < degree),
        Err(_) => (None, available, d < degree),
    }
}

struct BaseColumn {
    values: Vec<Option<f64>>,
    window_sizes: Vec<usize>,
}

fn base_column(sample: &Sample, x: f64, grid: &BandwidthGrid, degree: usize, counters: &mut Counters) -> BaseColumn {
    let mut values = Vec::with_capacity(grid.k_max + 1);
    let mut window_sizes = Vec::with_capacity(grid.k_max + 1);
    for k in 0..=grid.k_max {
        let (v, size, reduced) = base_value(sample, x, grid.h(k), degree);
        counters.degree_reduced += reduced as usize;
        counters.missing_fits += v.is_none() as usize;
        values.push(v);
        window_sizes.push(size);
    }
    BaseColumn { values, window_sizes }
}

pub fn adaptive_estimate(sample: &Sample, cfg: &EstimatorConfig, target: &Target) -> Result<AdaptiveOutput> {
    adaptive_estimate_with(sample, cfg, target, &AdaptOptions::default())
}

/// Full adaptive pipeline: tail estimation, critical values, base fits on the
/// whole bandwidth grid and Lepski selection.
///
/// Only configuration errors are fatal; failed tail estimates fall back to
/// fully truncated critical values and failed fits show up as missing
/// values, both counted in the diagnostics.
pub fn adaptive_estimate_with(
    sample: &Sample,
    cfg: &EstimatorConfig,
    target: &Target,
    opts: &AdaptOptions,
) -> Result<AdaptiveOutput> {
    cfg.validate()?;
    let points = target.points();
    if points.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidConfig("estimation points must lie in [0, 1]"));
    }
    let grid = build_grid(sample.n(), cfg.h0_exponent, cfg.rho)?;
    let mut warnings = Vec::new();
    if cfg.h0_exponent >= 0.5 {
        warnings.push("h0_exponent >= 0.5 exceeds the usual admissible range for alpha = beta = 1");
    }
    let mut counters = Counters::default();
    let columns: Vec<BaseColumn> = points
        .iter()
        .map(|&x| base_column(sample, x, &grid, cfg.beta_star, &mut counters))
        .collect();
    let base: Vec<Vec<Option<f64>>> = (0..=grid.k_max)
        .map(|k| columns.iter().map(|c| c.values[k]).collect())
        .collect();

    let output = match cfg.loss {
        Loss::Pointwise => {
            let mut estimates = Vec::with_capacity(points.len());
            let mut diag_points = Vec::with_capacity(points.len());
            for (&x, column) in points.iter().zip(&columns) {
                let (tail, tail_error, critical) = pointwise_critical(sample, x, &grid, cfg, opts, &mut counters)?;
                let per_k: Vec<Vec<Option<f64>>> = column.values.iter().map(|v| vec![*v]).collect();
                let k_hat = lepski_select(&per_k, &critical.truncated, LepskiNorm::PointwiseAt);
                estimates.push(PointEstimate {
                    x,
                    value: column.values[k_hat],
                    k_hat,
                    zeta_at_k_hat: critical.truncated[k_hat],
                });
                diag_points.push(PointDiagnostics {
                    x,
                    tail,
                    tail_error,
                    critical,
                    k_hat,
                    window_sizes: column.window_sizes.clone(),
                });
            }
            AdaptiveOutput {
                estimates,
                base,
                diagnostics: Diagnostics {
                    loss: cfg.loss,
                    grid,
                    points: diag_points,
                    global: None,
                    counters,
                    warnings,
                },
            }
        }
        Loss::Lq(q) => {
            let (tail, tail_error, critical) = lq_critical(sample, q, &grid, cfg, opts, &mut counters)?;
            let k_hat = lepski_select(&base, &critical.truncated, LepskiNorm::EmpiricalLq(q));
            let zeta = critical.truncated[k_hat];
            let estimates = points
                .iter()
                .enumerate()
                .map(|(i, &x)| PointEstimate {
                    x,
                    value: base[k_hat][i],
                    k_hat,
                    zeta_at_k_hat: zeta,
                })
                .collect();
            let diag_points = points
                .iter()
                .zip(&columns)
                .map(|(&x, c)| PointDiagnostics {
                    x,
                    tail: None,
                    tail_error: None,
                    critical: CriticalValues {
                        raw: Vec::new(),
                        truncated: Vec::new(),
                        clamped: Vec::new(),
                        kind: CvKind::Lq(q),
                    },
                    k_hat,
                    window_sizes: c.window_sizes.clone(),
                })
                .collect();
            AdaptiveOutput {
                estimates,
                base,
                diagnostics: Diagnostics {
                    loss: cfg.loss,
                    grid,
                    points: diag_points,
                    global: Some(GlobalDiagnostics {
                        tail,
                        tail_error,
                        critical,
                        k_hat,
                    }),
                    counters,
                    warnings,
                },
            }
        }
    };
    Ok(output)
}

type CriticalParts = (Option<TailEstimate>, Option<Error>, CriticalValues);

fn pointwise_critical(
    sample: &Sample,
    x: f64,
    grid: &BandwidthGrid,
    cfg: &EstimatorConfig,
    opts: &AdaptOptions,
    counters: &mut Counters,
) -> Result<CriticalParts> {
    if let Some(oracle) = &opts.oracle_tail {
        let cv = critical_values_pointwise(grid, oracle, cfg)?;
        counters.cv_clamped += cv.clamp_count();
        return Ok((None, None, cv));
    }
    match estimate_tail(sample, x, grid, cfg) {
        Ok(tail) => {
            counters.tail += tail.counters;
            let cv = critical_values_pointwise(grid, &tail.function(), cfg)?;
            counters.cv_clamped += cv.clamp_count();
            Ok((Some(tail), None, cv))
        }
        Err(e) => {
            counters.tail_failures += 1;
            Ok((
                None,
                Some(e),
                CriticalValues::fully_truncated(grid.k_max, CvKind::Pointwise),
            ))
        }
    }
}

/// Tail for the `L_q` critical values: statistics of the largest-bandwidth
/// window centred at `x = 1/2`.
pub(crate) fn lq_tail(sample: &Sample, grid: &BandwidthGrid, cfg: &EstimatorConfig) -> Result<TailEstimate> {
    let (levels, counters) = tail_levels(sample, 0.5, grid, cfg);
    let k = grid.k_max;
    let pick =
        |f: fn(&crate::tail::TailLevel) -> Option<f64>| (0..=k).rev().find_map(|i| f(&levels[i]).map(|v| (i, v)));
    let (k_alpha, inv_alpha) =
        pick(|l| l.inv_alpha).ok_or(Error::DegenerateWindow("no tail window produced an estimate"))?;
    let (k_b, b_hat) = pick(|l| l.b_hat)
        .filter(|(i, _)| *i <= k_alpha)
        .ok_or(Error::DegenerateWindow("no tail window produced a b estimate"))?;
    Ok(TailEstimate {
        inv_alpha,
        b_hat,
        k_alpha,
        k_b,
        m_used: levels[k_alpha].m,
        levels,
        counters,
    })
}

fn lq_critical(
    sample: &Sample,
    q: f64,
    grid: &BandwidthGrid,
    cfg: &EstimatorConfig,
    opts: &AdaptOptions,
    counters: &mut Counters,
) -> Result<CriticalParts> {
    if let Some(oracle) = &opts.oracle_tail {
        let cv = critical_values_lq(grid, oracle, q, cfg)?;
        counters.cv_clamped += cv.clamp_count();
        return Ok((None, None, cv));
    }
    match lq_tail(sample, grid, cfg) {
        Ok(tail) => {
            counters.tail += tail.counters;
            let cv = critical_values_lq(grid, &tail.function(), q, cfg)?;
            counters.cv_clamped += cv.clamp_count();
            Ok((Some(tail), None, cv))
        }
        Err(e) => {
            counters.tail_failures += 1;
            Ok((
                None,
                Some(e),
                CriticalValues::fully_truncated(grid.k_max, CvKind::Lq(q)),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_sample(n: usize, f: impl Fn(f64) -> f64) -> Sample {
        Sample::new((1..=n).map(|j| f(j as f64 / n as f64)).collect()).unwrap()
    }

    #[test]
    fn noiseless_polynomial_pointwise() {
        let f = |x: f64| 0.5 - x + 2.0 * x * x;
        let s = poly_sample(200, f);
        let cfg = EstimatorConfig::default();
        let grid: Vec<f64> = (20..=180).step_by(20).map(|j| j as f64 / 200.0).collect();
        let out = adaptive_estimate(&s, &cfg, &Target::Curve(grid.clone())).unwrap();
        for (e, x) in out.estimates.iter().zip(&grid) {
            assert!((e.value.unwrap() - f(*x)).abs() < 1e-6);
            assert!(e.k_hat <= out.diagnostics.grid.k_max);
        }
    }

    #[test]
    fn noiseless_polynomial_lq() {
        let f = |x: f64| -1.0 + 0.3 * x;
        let s = poly_sample(150, f);
        let cfg = EstimatorConfig {
            loss: Loss::Lq(1.0),
            beta_star: 1,
            ..Default::default()
        };
        let out = adaptive_estimate(&s, &cfg, &Target::Curve(s.xs())).unwrap();
        for e in &out.estimates {
            assert!((e.value.unwrap() - f(e.x)).abs() < 1e-6);
        }
        assert!(out.diagnostics.global.is_some());
    }

    #[test]
    fn constant_data_falls_back_to_full_truncation() {
        let s = Sample::new(vec![-3.0; 100]).unwrap();
        let out = adaptive_estimate(&s, &EstimatorConfig::default(), &Target::Point(0.5)).unwrap();
        assert_eq!(out.estimates[0].value, Some(-3.0));
        assert_eq!(out.diagnostics.counters.tail_failures, 1);
        assert!(out.diagnostics.points[0].tail_error.is_some());
    }

    #[test]
    fn invalid_config_is_fatal() {
        let s = Sample::new(vec![0.0; 10]).unwrap();
        let cfg = EstimatorConfig {
            rho: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            adaptive_estimate(&s, &cfg, &Target::Point(0.5)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(adaptive_estimate(&s, &EstimatorConfig::default(), &Target::Point(1.5)).is_err());
    }
}
