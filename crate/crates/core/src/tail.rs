//! Location invariant estimation of the error tail.
//!
//! The error quantile function is modelled as
//! `U(y) ~ -c y^(-1/alpha) (log y)^b`. Since only `Y = f + eps` is observed,
//! every statistic here is built from gaps `Y_(i) - Y_(1)` between upper order
//! statistics and the window maximum, which removes any common shift.
//!
//! - `1/alpha` comes from the negative Hill estimator
//!   `(1/m) sum_{i=2}^{m-1} log(|Y_(m) - Y_(1)| / |Y_(i) - Y_(1)|)`.
//! - `b` comes from the gaps normalised by `(n/i)^(-1/alpha) - n^(-1/alpha)`
//!   and divided by `m log log n`. The constant `c` is absorbed into `b`.
//!
//! Both are computed on the nested windows `|x_i - x| <= h_k` of a
//! [`BandwidthGrid`] and the window index is picked by a Lepski-type rule.

use alloc::vec::Vec;

use crate::adapt::{BandwidthGrid, EstimatorConfig};
use crate::error::{Error, Result};
use crate::sample::Sample;

/// Window responses sorted in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatistics {
    desc: Vec<f64>,
    jittered: bool,
}

impl OrderStatistics {
    /// Sorts `window_ys` in decreasing order. Tied values are separated by a
    /// deterministic perturbation of `1e-12` times the window range; a window
    /// of identical values is degenerate.
    pub fn new(window_ys: &[f64]) -> Result<Self> {
        if window_ys.len() < 3 {
            return Err(Error::DegenerateWindow("fewer than three responses in the window"));
        }
        let mut desc = window_ys.to_vec();
        desc.sort_by(|a, b| b.total_cmp(a));
        let tied = desc.windows(2).any(|w| w[0] == w[1]);
        if !tied {
            return Ok(Self { desc, jittered: false });
        }
        let range = desc[0] - desc[desc.len() - 1];
        if !(range > 0.0) {
            return Err(Error::DegenerateWindow(
                "all responses in the window are equal; enlarge the window or check the input",
            ));
        }
        let len = window_ys.len() as f64;
        let mut desc: Vec<f64> = window_ys
            .iter()
            .enumerate()
            .map(|(i, y)| y + 1e-12 * range * (i + 1) as f64 / len)
            .collect();
        desc.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { desc, jittered: true })
    }

    pub fn len(&self) -> usize {
        self.desc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desc.is_empty()
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// `i`-th largest response, one based.
    pub fn get(&self, i: usize) -> f64 {
        self.desc[i - 1]
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m < 3 || m > self.len() {
            return Err(Error::InvalidInput("m must satisfy 3 <= m <= window size"));
        }
        Ok(())
    }

    /// Negative Hill estimate of `1/alpha` from the `m` largest responses.
    pub fn inv_alpha(&self, m: usize) -> Result<f64> {
        self.check_m(m)?;
        let top = self.get(1);
        let span = (self.get(m) - top).abs();
        let mut sum = 0.0;
        for i in 2..m {
            let gap = (self.get(i) - top).abs();
            if gap == 0.0 {
                return Err(Error::DegenerateWindow("tie with the window maximum"));
            }
            sum += libm::log(span / gap);
        }
        let v = sum / m as f64;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateWindow("upper order statistics coincide"));
        }
        Ok(v)
    }

    /// Estimate of the logarithmic exponent `b` given `1/alpha`.
    ///
    /// Gaps and normalisers enter by magnitude: `|Y_(i) - Y_(1)|` is matched
    /// with `(n/i)^(-1/alpha) - n^(-1/alpha) > 0`.
    pub fn b_hat(&self, m: usize, inv_alpha: f64) -> Result<f64> {
        self.check_m(m)?;
        if !(inv_alpha > 0.0 && inv_alpha.is_finite()) {
            return Err(Error::InvalidInput("inv_alpha must be positive"));
        }
        let n_bar = self.len() as f64;
        let ln_n = libm::log(n_bar);
        let lln = libm::log(ln_n);
        if !(lln > 0.0) {
            return Err(Error::DegenerateWindow("window too small for log log normalisation"));
        }
        let top = self.get(1);
        let mut sum = 0.0;
        for i in 2..m {
            let gap = (self.get(i) - top).abs();
            if gap == 0.0 {
                return Err(Error::DegenerateWindow("tie with the window maximum"));
            }
            // log((n/i)^(-g) - n^(-g)) = -g ln n + log(i^g - 1)
            let log_norm = -inv_alpha * ln_n + libm::log(libm::expm1(inv_alpha * libm::log(i as f64)));
            sum += libm::log(gap) - log_norm;
        }
        let v = sum / (m as f64 * lln);
        if !v.is_finite() {
            return Err(Error::DegenerateWindow("non-finite b estimate"));
        }
        Ok(v)
    }
}

/// `1/alpha` from the `m` largest values of `window_ys`.
pub fn neg_hill_inv_alpha(window_ys: &[f64], m: usize) -> Result<f64> {
    OrderStatistics::new(window_ys)?.inv_alpha(m)
}

/// `b` from the `m` largest values of `window_ys`, whose length is the
/// window size `n_bar`.
pub fn estimate_b(window_ys: &[f64], m: usize, inv_alpha: f64) -> Result<f64> {
    OrderStatistics::new(window_ys)?.b_hat(m, inv_alpha)
}

/// Number of order statistics used on a window of `n_bar` points:
/// `max(3, round(2 n_bar^m_exponent))`, never more than `n_bar`.
pub fn order_count(n_bar: usize, m_exponent: f64) -> usize {
    let m = libm::round(2.0 * libm::pow(n_bar as f64, m_exponent)) as usize;
    m.max(3).min(n_bar)
}

/// Plug-in tail function `A(y) = -scale (log y)^b y^(-1/alpha)`, defined for
/// `y >= e`. Estimated tails have `scale = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailFunction {
    pub inv_alpha: f64,
    pub b_hat: f64,
    pub scale: f64,
}

impl TailFunction {
    pub fn new(inv_alpha: f64, b_hat: f64) -> Self {
        Self {
            inv_alpha,
            b_hat,
            scale: 1.0,
        }
    }

    /// Known-truth tail `-c y^(-1/alpha) (log y)^b`.
    pub fn oracle(alpha: f64, b: f64, c: f64) -> Self {
        Self {
            inv_alpha: 1.0 / alpha,
            b_hat: b,
            scale: c,
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        a_hat(self, y)
    }
}

pub fn a_hat(tf: &TailFunction, y: f64) -> Result<f64> {
    if !(y >= core::f64::consts::E) {
        return Err(Error::DomainError(y));
    }
    let ln_y = libm::log(y);
    Ok(-tf.scale * libm::exp(tf.b_hat * libm::log(ln_y) - tf.inv_alpha * ln_y))
}

/// [`a_hat`] continued below `e` by its power-law part `-scale y^(-1/alpha)`,
/// which agrees with it at `y = e`. Defined for `y > 0`.
pub fn a_hat_continued(tf: &TailFunction, y: f64) -> Result<f64> {
    if y >= core::f64::consts::E {
        return a_hat(tf, y);
    }
    if !(y > 0.0) {
        return Err(Error::DomainError(y));
    }
    Ok(-tf.scale * libm::exp(-tf.inv_alpha * libm::log(y)))
}

/// Per-window tail statistics at one bandwidth index.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailLevel {
    pub k: usize,
    pub n_bar: usize,
    pub m: usize,
    pub inv_alpha: Option<f64>,
    pub b_hat: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailCounters {
    /// Windows whose ties were broken by jitter.
    pub jittered: usize,
    /// Estimates of `1/alpha` clipped to the cap.
    pub capped: usize,
    /// Bandwidth indices skipped as degenerate.
    pub skipped: usize,
}

impl core::ops::AddAssign for TailCounters {
    fn add_assign(&mut self, o: Self) {
        self.jittered += o.jittered;
        self.capped += o.capped;
        self.skipped += o.skipped;
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailEstimate {
    pub inv_alpha: f64,
    pub b_hat: f64,
    pub k_alpha: usize,
    pub k_b: usize,
    /// Order statistics behind the selected `1/alpha`.
    pub m_used: usize,
    pub levels: Vec<TailLevel>,
    pub counters: TailCounters,
}

impl TailEstimate {
    pub fn alpha(&self) -> f64 {
        1.0 / self.inv_alpha
    }

    pub fn function(&self) -> TailFunction {
        TailFunction::new(self.inv_alpha, self.b_hat)
    }
}

/// Tail statistics on the windows `h_0..=h_K` around `x`.
pub fn tail_levels(
    sample: &Sample,
    x: f64,
    grid: &BandwidthGrid,
    cfg: &EstimatorConfig,
) -> (Vec<TailLevel>, TailCounters) {
    let mut counters = TailCounters::default();
    let levels = (0..=grid.k_max)
        .map(|k| {
            let window = sample.window(x, grid.h(k));
            let ys = window.map_or(&[][..], |w| &sample.ys()[w.lo..=w.hi]);
            let n_bar = ys.len();
            let m = order_count(n_bar, cfg.m_exponent);
            let mut level = TailLevel {
                k,
                n_bar,
                m,
                inv_alpha: None,
                b_hat: None,
            };
            let stats = match OrderStatistics::new(ys) {
                Ok(s) => s,
                Err(_) => {
                    counters.skipped += 1;
                    return level;
                }
            };
            if stats.jittered() {
                counters.jittered += 1;
            }
            let inv_alpha = match stats.inv_alpha(m) {
                Ok(v) if cfg.bias_correction => v * m as f64 / (m - 2) as f64,
                Ok(v) => v,
                Err(_) => {
                    counters.skipped += 1;
                    return level;
                }
            };
            let inv_alpha = if inv_alpha > cfg.inv_alpha_cap {
                counters.capped += 1;
                cfg.inv_alpha_cap
            } else {
                inv_alpha
            };
            level.inv_alpha = Some(inv_alpha);
            level.b_hat = stats.b_hat(m, inv_alpha).ok();
            level
        })
        .collect();
    (levels, counters)
}

/// First `k < scan_end` at which some `l <= k` has
/// `|values[k+1] - values[l]| > threshold(k)`; pairs with a missing value
/// never count as a violation.
pub fn first_violation(values: &[Option<f64>], scan_end: usize, threshold: impl Fn(usize) -> f64) -> Option<usize> {
    (0..scan_end.min(values.len().saturating_sub(1))).find(|&k| {
        let Some(next) = values[k + 1] else {
            return false;
        };
        let t = threshold(k);
        values[..=k].iter().flatten().any(|&v| (next - v).abs() > t)
    })
}

/// Value at index `k`, falling back to the nearest lower, then higher, index
/// that has one.
fn value_near(values: &[Option<f64>], k: usize) -> Option<(usize, f64)> {
    (0..=k)
        .rev()
        .chain(k + 1..values.len())
        .find_map(|i| values[i].map(|v| (i, v)))
}

/// Lepski choice of the tail window for `1/alpha`; threshold
/// `rho^(-k) / log n`.
pub fn select_k_alpha(levels: &[TailLevel], grid: &BandwidthGrid) -> Result<(usize, f64)> {
    let values: Vec<Option<f64>> = levels.iter().map(|l| l.inv_alpha).collect();
    let ln_n = grid.log_n();
    let k = first_violation(&values, grid.k_max, |k| libm::pow(grid.rho, -(k as f64)) / ln_n).unwrap_or(grid.k_max);
    value_near(&values, k)
        .map(|(_, v)| (k, v))
        .ok_or(Error::DegenerateWindow("no tail window produced an estimate"))
}

/// Lepski choice of the tail window for `b`, scanning only up to `k_alpha`;
/// threshold `rho^(-k) / log log n`.
pub fn select_k_b(levels: &[TailLevel], grid: &BandwidthGrid, k_alpha: usize) -> Result<(usize, f64)> {
    let values: Vec<Option<f64>> = levels.iter().map(|l| l.b_hat).collect();
    let lln = libm::log(grid.log_n());
    if !(lln > 0.0) {
        return Err(Error::DegenerateWindow("sample too small for log log normalisation"));
    }
    let k = first_violation(&values, k_alpha, |k| libm::pow(grid.rho, -(k as f64)) / lln).unwrap_or(k_alpha);
    value_near(&values, k)
        .map(|(_, v)| (k, v))
        .ok_or(Error::DegenerateWindow("no tail window produced a b estimate"))
}

/// Full local tail estimate at `x`.
pub fn estimate_tail(sample: &Sample, x: f64, grid: &BandwidthGrid, cfg: &EstimatorConfig) -> Result<TailEstimate> {
    let (levels, counters) = tail_levels(sample, x, grid, cfg);
    let (k_alpha, inv_alpha) = select_k_alpha(&levels, grid)?;
    let (k_b, b_hat) = select_k_b(&levels, grid, k_alpha)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::build_grid;
    use alloc::vec;

    fn ys() -> Vec<f64> {
        // Deterministic, tie-free, one-sided.
        (1..=60)
            .map(|i| -libm::pow(((i * 37) % 61) as f64 / 61.0, 1.3))
            .collect()
    }

    #[test]
    fn neg_hill_location_and_scale_invariant() {
        let y = ys();
        let base = neg_hill_inv_alpha(&y, 20).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v + 100.0).collect();
        let scaled: Vec<f64> = y.iter().map(|v| 5.0 * v).collect();
        assert!((neg_hill_inv_alpha(&shifted, 20).unwrap() - base).abs() < 1e-12);
        assert!((neg_hill_inv_alpha(&scaled, 20).unwrap() - base).abs() < 1e-12);
        assert!(base > 0.0);
    }

    #[test]
    fn neg_hill_matches_direct_formula() {
        let y = vec![0.0, -0.1, -0.3, -0.35, -0.9, -2.0];
        // m = 4: (1/4) [ln(0.35/0.1) + ln(0.35/0.3)]
        let expected = 0.25 * (libm::log(3.5) + libm::log(0.35 / 0.3));
        assert!((neg_hill_inv_alpha(&y, 4).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn b_hat_location_invariant() {
        let y = ys();
        let base = estimate_b(&y, 20, 0.8).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v - 42.0).collect();
        assert!((estimate_b(&shifted, 20, 0.8).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn constant_window_is_degenerate() {
        assert!(matches!(
            neg_hill_inv_alpha(&[1.0; 10], 5),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn ties_are_jittered() {
        let y = vec![0.0, 0.0, -1.0, -2.0, -2.0, -3.0];
        let stats = OrderStatistics::new(&y).unwrap();
        assert!(stats.jittered());
        assert!(stats.inv_alpha(5).unwrap() > 0.0);
    }

    #[test]
    fn a_hat_values() {
        let a = |ia: f64, b: f64, y: f64| a_hat(&TailFunction::new(ia, b), y).unwrap();
        assert!((a(1.0, 0.0, 100.0) + 0.01).abs() < 1e-15);
        assert!((a(0.5, 0.0, 10000.0) + 0.01).abs() < 1e-15);
        let e2 = core::f64::consts::E * core::f64::consts::E;
        assert!((a(1.0, 1.0, e2) + 2.0 / e2).abs() < 1e-14);
        assert!((a(1.0, 1.0, e2) + 0.270_670_566_473_225_4).abs() < 1e-12);
        assert!(matches!(
            a_hat(&TailFunction::new(1.0, 0.0), 2.0),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn first_violation_cases() {
        let same = vec![Some(0.5); 6];
        assert_eq!(first_violation(&same, 5, |_| 0.01), None);
        let jump = vec![Some(0.5), Some(0.9), Some(0.9), Some(0.9)];
        assert_eq!(first_violation(&jump, 3, |_| 0.1), Some(0));
        // Violation against l = 0 only appears once the drift accumulates.
        let drift = vec![Some(0.0), Some(0.06), Some(0.12), Some(0.18)];
        assert_eq!(first_violation(&drift, 3, |_| 0.1), Some(1));
        // Missing values never trigger.
        let gap = vec![Some(0.0), None, Some(0.05)];
        assert_eq!(first_violation(&gap, 2, |_| 0.1), None);
    }

    #[test]
    fn selectors_on_constant_levels() {
        let grid = build_grid(1000, 0.3, 2.0).unwrap();
        let levels: Vec<TailLevel> = (0..=grid.k_max)
            .map(|k| TailLevel {
                k,
                n_bar: 10,
                m: 5,
                inv_alpha: Some(0.7),
                b_hat: Some(0.1),
            })
            .collect();
        let (ka, ia) = select_k_alpha(&levels, &grid).unwrap();
        assert_eq!((ka, ia), (grid.k_max, 0.7));
        let (kb, b) = select_k_b(&levels, &grid, ka).unwrap();
        assert_eq!((kb, b), (ka, 0.1));

        let mut jumpy = levels.clone();
        jumpy[1].inv_alpha = Some(0.7 + 1.5 / grid.log_n());
        jumpy[1].b_hat = Some(0.1 + 1.5 / libm::log(grid.log_n()));
        assert_eq!(select_k_alpha(&jumpy, &grid).unwrap().0, 0);
        assert_eq!(select_k_b(&jumpy, &grid, grid.k_max).unwrap().0, 0);
    }

    #[test]
    fn order_count_rule() {
        assert_eq!(order_count(1000, 2.0 / 3.0), 200);
        assert_eq!(order_count(5, 2.0 / 3.0), 5);
        assert_eq!(order_count(2, 2.0 / 3.0), 2);
        assert_eq!(order_count(3, 0.01), 3);
    }
}
