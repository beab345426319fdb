//! Critical values for the Lepski comparison.
//!
//! Pointwise: `zeta_k = 4 c |A(alpha n h_k / (4 J log n))|`.
//! `L_q`: `zeta_k = sqrt(5) c |IU_n(n h_k / (6 J), q)|` with
//!
//! ```text
//! IU_n(s, q) = ( int_{n^(-2/alpha)}^{sqrt n} d/dy[(-A(s/y))^q] e^(-y) dy )^(1/q).
//! ```
//!
//! The plug-in tail `A` carries a `(log y)^b` factor and is only defined for
//! `y >= e`; see [`SmallArgument`] for the two ways of handling smaller
//! arguments.
//!
//! In both cases `zeta_K = 0`, and the values used for selection are
//! truncated at one and made nonincreasing by a running minimum.

use alloc::vec::Vec;

use super::{BandwidthGrid, EstimatorConfig, SmallArgument};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::tail::{a_hat, a_hat_continued, TailFunction};

const E2: f64 = core::f64::consts::E * core::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CvKind {
    Pointwise,
    Lq(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CriticalValues {
    /// `zeta_k`, `k = 0..=K`; clamped entries hold 1.
    pub raw: Vec<f64>,
    /// `min(zeta_k, 1)` made nonincreasing, with `truncated[K] = 0`.
    pub truncated: Vec<f64>,
    /// Entries whose formula could not be evaluated and were set to 1.
    pub clamped: Vec<bool>,
    pub kind: CvKind,
}

impl CriticalValues {
    /// Truncates and monotonises `raw` (length `K+1`). `raw[K]` is forced
    /// to zero.
    pub fn from_raw(mut raw: Vec<f64>, clamped: Vec<bool>, kind: CvKind) -> Self {
        if let Some(last) = raw.last_mut() {
            *last = 0.0;
        }
        let mut running = 1.0_f64;
        let mut truncated: Vec<f64> = raw
            .iter()
            .map(|&z| {
                let t = if z.is_nan() { 1.0 } else { z.abs().min(1.0) };
                running = running.min(t);
                running
            })
            .collect();
        if let Some(last) = truncated.last_mut() {
            *last = 0.0;
        }
        Self {
            raw,
            truncated,
            clamped,
            kind,
        }
    }

    /// All thresholds at their maximum: 1 for `k < K`, 0 at `K`.
    pub fn fully_truncated(k_max: usize, kind: CvKind) -> Self {
        let raw = alloc::vec![1.0; k_max + 1];
        let clamped = alloc::vec![true; k_max + 1];
        Self::from_raw(raw, clamped, kind)
    }

    pub fn k_max(&self) -> usize {
        self.truncated.len() - 1
    }

    pub fn clamp_count(&self) -> usize {
        self.clamped.iter().filter(|c| **c).count()
    }
}

pub fn critical_values_pointwise(
    grid: &BandwidthGrid,
    tail: &TailFunction,
    cfg: &EstimatorConfig,
) -> Result<CriticalValues> {
    cfg.validate()?;
    let n = grid.n as f64;
    let alpha = 1.0 / tail.inv_alpha;
    let denom = 4.0 * cfg.j() as f64 * grid.log_n();
    let mut raw = Vec::with_capacity(grid.k_max + 1);
    let mut clamped = Vec::with_capacity(grid.k_max + 1);
    for k in 0..grid.k_max {
        let y = alpha * n * grid.h(k) / denom;
        let a = match cfg.small_argument {
            SmallArgument::PowerLaw => a_hat_continued(tail, y),
            SmallArgument::Saturate => a_hat(tail, y),
        };
        match a {
            Ok(a) => {
                raw.push(4.0 * cfg.c_beta * a.abs());
                clamped.push(false);
            }
            Err(_) => {
                raw.push(1.0);
                clamped.push(true);
            }
        }
    }
    raw.push(0.0);
    clamped.push(false);
    Ok(CriticalValues::from_raw(raw, clamped, CvKind::Pointwise))
}

/// `IU_n(s, q)` for the tail `tail` and sample size `n`, with the tail
/// continued below `e` as a power law.
pub fn iu_n(s: f64, q: f64, tail: &TailFunction, n: usize, tol: f64) -> Result<f64> {
    iu_n_with(s, q, tail, n, tol, SmallArgument::PowerLaw)
}

/// `IU_n(s, q)` over `y` in `[n^(-2/alpha), sqrt n]`, evaluated in
/// `t = log y` to relative tolerance `tol`.
///
/// Where `s/y < e` the tail is either continued as a power law or, with
/// [`SmallArgument::Saturate`], the range is clipped to `s/y >= e^2`; an
/// empty clipped range is a `DomainError`.
pub fn iu_n_with(s: f64, q: f64, tail: &TailFunction, n: usize, tol: f64, small: SmallArgument) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput("s must be positive"));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidConfig("q must be at least 1"));
    }
    let n = n as f64;
    let gamma = tail.inv_alpha;
    let b = tail.b_hat;
    let lo = libm::exp(-2.0 * gamma * libm::log(n));
    let top = libm::sqrt(n);
    let ln_s = libm::log(s);
    let qg = q * gamma;
    let qb = q * b;
    let scale_q = libm::pow(tail.scale, q);
    // y d/dy[(log u)^(qb) u^(-q/alpha)] e^(-y) with u = s/y, in t = log y.
    let logarithmic = |t: f64| {
        let y = libm::exp(t);
        let l = ln_s - t;
        let main = libm::exp((qb - 1.0) * libm::log(l) + qg * (t - ln_s) - y);
        scale_q * main * (qg * l - qb)
    };
    // Same for the continuation u^(-q/alpha).
    let power = |t: f64| scale_q * qg * libm::exp(qg * (t - ln_s) - libm::exp(t));
    let (split, hi) = match small {
        SmallArgument::PowerLaw => (s / core::f64::consts::E, top),
        SmallArgument::Saturate => {
            let hi = top.min(s / E2);
            if !(hi > lo) {
                return Err(Error::DomainError(s));
            }
            (hi, hi)
        }
    };
    let mut value = 0.0;
    if split > lo {
        let b_end = split.min(hi);
        value += integrate(logarithmic, libm::log(lo), libm::log(b_end), 0.0, tol, 2000)?.value;
    }
    if split < hi {
        let a_start = split.max(lo);
        value += integrate(power, libm::log(a_start), libm::log(hi), 0.0, tol, 2000)?.value;
    }
    Ok(libm::copysign(libm::pow(value.abs(), 1.0 / q), value))
}

pub fn critical_values_lq(
    grid: &BandwidthGrid,
    tail: &TailFunction,
    q: f64,
    cfg: &EstimatorConfig,
) -> Result<CriticalValues> {
    cfg.validate()?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidConfig("q must be at least 1"));
    }
    let n = grid.n as f64;
    let denom = 6.0 * cfg.j() as f64;
    let mut raw = Vec::with_capacity(grid.k_max + 1);
    let mut clamped = Vec::with_capacity(grid.k_max + 1);
    for k in 0..grid.k_max {
        let s = n * grid.h(k) / denom;
        match iu_n_with(s, q, tail, grid.n, cfg.quadrature_tol, cfg.small_argument) {
            Ok(v) => {
                raw.push(libm::sqrt(5.0) * cfg.c_beta * v.abs());
                clamped.push(false);
            }
            Err(Error::DomainError(_)) => {
                raw.push(1.0);
                clamped.push(true);
            }
            Err(e) => return Err(e),
        }
    }
    raw.push(0.0);
    clamped.push(false);
    Ok(CriticalValues::from_raw(raw, clamped, CvKind::Lq(q)))
}
