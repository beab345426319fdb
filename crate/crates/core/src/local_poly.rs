//! Local polynomial envelope fit.
//!
//! At a center `x` with bandwidth `h` the fit chooses a polynomial `p` of
//! degree `d` with `p(x_i) >= Y_i` for every design point in the window and
//! minimal `sum_i p(x_i)` over that window. The estimate of `f(x)` is
//! `p(x)`, i.e. the constant coefficient.
//!
//! Near the ends of `[0, 1]` the window is the (asymmetric) intersection of
//! `[x - h, x + h]` with the design. The LP is posed in the rescaled
//! coordinate `t = (x_i - x) / h` and the coefficients are mapped back.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::sample::{Sample, WindowRange};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub center: f64,
    pub bandwidth: f64,
    pub degree: usize,
    /// `b_0..=b_degree` in powers of `(x - center)`.
    pub coeffs: Vec<f64>,
    pub window: WindowRange,
    pub window_size: usize,
    /// `sum_i p(x_i)` over the window.
    pub objective: f64,
    pub lp_iterations: usize,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, b| acc * t + b)
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }
}

/// Minimum number of design points a window must hold for a degree `d` fit.
pub fn min_window(degree: usize) -> usize {
    degree + 2
}

pub fn fit_local(sample: &Sample, x: f64, h: f64, degree: usize) -> Result<PolyFit> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput("estimation point must lie in [0, 1]"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig("bandwidth must be positive and finite"));
    }
    let required = min_window(degree);
    let window = sample.window(x, h);
    let available = window.map_or(0, |w| w.len());
    let window = match window {
        Some(w) if available >= required => w,
        _ => {
            return Err(Error::WindowTooSmall {
                center: x,
                bandwidth: h,
                available,
                required,
            })
        }
    };

    let p = degree + 1;
    let ys = sample.ys();
    let mut matrix = Vec::with_capacity(window.len() * p);
    let mut objective = alloc::vec![0.0; p];
    let mut rhs = Vec::with_capacity(window.len());
    for i in window.indices() {
        let t = (sample.x(i) - x) / h;
        let mut pow = 1.0;
        for c in objective.iter_mut() {
            matrix.push(pow);
            *c += pow;
            pow *= t;
        }
        rhs.push(ys[i]);
    }
    let lp = LinearProgram::from_row_major(objective, matrix, rhs)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        // The all-ones dual point is feasible and raising b_0 satisfies every
        // constraint, so anything but an optimum is a numerical failure.
        return Err(Error::NumericalBreakdown("envelope LP did not reach an optimum"));
    }
    let mut scale = 1.0;
    let coeffs = sol
        .variables
        .iter()
        .map(|b| {
            let c = b / scale;
            scale *= h;
            c
        })
        .collect();
    Ok(PolyFit {
        center: x,
        bandwidth: h,
        degree,
        coeffs,
        window,
        window_size: window.len(),
        objective: sol.objective_value,
        lp_iterations: sol.iterations,
    })
}

/// `f~(x)`: constant coefficient of [`fit_local`].
pub fn estimate_at(sample: &Sample, x: f64, h: f64, degree: usize) -> Result<f64> {
    fit_local(sample, x, h, degree).map(|fit| fit.value())
}

/// Evaluates [`estimate_at`] on every grid point. Points whose window is too
/// small or whose LP breaks down come back as `None`.
pub fn estimate_curve(sample: &Sample, grid: &[f64], h: f64, degree: usize) -> Result<Vec<Option<f64>>> {
    grid.iter()
        .map(|&x| match estimate_at(sample, x, h, degree) {
            Ok(v) => Ok(Some(v)),
            Err(Error::WindowTooSmall { .. } | Error::NumericalBreakdown(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}
