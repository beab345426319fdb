use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Geometric bandwidths `h_k = h_0 rho^k`, `k = 0..=K+1`, with
/// `h_0 = n^(h0_exponent - 1)` and `K = floor(log_rho(n^(1 - h0_exponent)))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BandwidthGrid {
    pub n: usize,
    pub h0: f64,
    pub rho: f64,
    /// `K`; the Lepski scan runs over `k = 0..=K`.
    pub k_max: usize,
    pub bandwidths: Vec<f64>,
}

impl BandwidthGrid {
    pub fn h(&self, k: usize) -> f64 {
        self.bandwidths[k]
    }

    pub fn log_n(&self) -> f64 {
        libm::log(self.n as f64)
    }
}

pub fn build_grid(n: usize, h0_exponent: f64, rho: f64) -> Result<BandwidthGrid> {
    if n < 2 {
        return Err(Error::InvalidConfig("sample size must be at least 2"));
    }
    if !(h0_exponent > 0.0 && h0_exponent < 1.0) {
        return Err(Error::InvalidConfig("h0_exponent must lie in (0, 1)"));
    }
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::InvalidConfig("rho must be finite and greater than 1"));
    }
    let ln_n = libm::log(n as f64);
    let h0 = libm::exp((h0_exponent - 1.0) * ln_n);
    // The slack keeps rho = n^(1 - h0_exponent) at K = 1 despite rounding.
    let k_max = libm::floor((1.0 - h0_exponent) * ln_n / libm::log(rho) + 1e-9) as usize;
    let bandwidths = (0..=k_max + 1).map(|k| h0 * libm::pow(rho, k as f64)).collect();
    Ok(BandwidthGrid {
        n,
        h0,
        rho,
        k_max,
        bandwidths,
    })
}
