use crate::error::{Error, Result};

/// Loss under which the bandwidth is adapted.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Loss {
    /// Bandwidth chosen separately at every estimation point.
    Pointwise,
    /// One bandwidth for the whole curve, chosen under the empirical `L_q` norm.
    Lq(f64),
}

/// How critical values treat tail arguments below `e`, where the
/// logarithmic factor of the plug-in tail is not defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SmallArgument {
    /// Continue the tail as `-y^(-1/alpha)` below `e` (continuous at `e`).
    #[default]
    PowerLaw,
    /// Set the pointwise critical value to 1 and clip the `L_q` integral to
    /// arguments of at least `e^2`.
    Saturate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EstimatorConfig {
    /// Degree of the local polynomials.
    pub beta_star: usize,
    /// `h_0 = n^(h0_exponent - 1)`.
    pub h0_exponent: f64,
    /// Bandwidth growth factor.
    pub rho: f64,
    /// Order statistics used per tail window: `m = 2 * n_bar^m_exponent`.
    pub m_exponent: f64,
    /// Multiplier of the critical values.
    pub c_beta: f64,
    /// Divisor of the effective local sample size inside the critical values.
    pub j_beta: usize,
    pub loss: Loss,
    /// Relative tolerance for the `L_q` critical value integrals.
    pub quadrature_tol: f64,
    pub small_argument: SmallArgument,
    pub seed: u64,
    /// Upper bound on `1/alpha`.
    pub inv_alpha_cap: f64,
    /// Multiply each negative Hill estimate by `m/(m-2)`.
    pub bias_correction: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            beta_star: 2,
            h0_exponent: 0.4,
            rho: 2.0,
            m_exponent: 2.0 / 3.0,
            c_beta: 0.07,
            j_beta: 1,
            loss: Loss::Pointwise,
            quadrature_tol: 1e-8,
            small_argument: SmallArgument::PowerLaw,
            seed: 0,
            inv_alpha_cap: 10.0,
            bias_correction: false,
        }
    }
}

impl EstimatorConfig {
    pub fn j(&self) -> usize {
        self.j_beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0_exponent > 0.0 && self.h0_exponent < 1.0) {
            return Err(Error::InvalidConfig("h0_exponent must lie in (0, 1)"));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig("rho must be finite and greater than 1"));
        }
        if !(self.m_exponent > 0.0 && self.m_exponent < 1.0) {
            return Err(Error::InvalidConfig("m_exponent must lie in (0, 1)"));
        }
        if !(self.c_beta > 0.0 && self.c_beta.is_finite()) {
            return Err(Error::InvalidConfig("c_beta must be positive"));
        }
        if self.j() == 0 {
            return Err(Error::InvalidConfig("j_beta must be at least 1"));
        }
        if let Loss::Lq(q) = self.loss {
            if !(q >= 1.0 && q.is_finite()) {
                return Err(Error::InvalidConfig("q must be at least 1"));
            }
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(Error::InvalidConfig("quadrature_tol must be positive"));
        }
        if !(self.inv_alpha_cap > 0.0) {
            return Err(Error::InvalidConfig("inv_alpha_cap must be positive"));
        }
        Ok(())
    }
}
