//! Dense simplex solver for small linear programs in free variables.
//!
//! Problems have the form
//!
//! ```text
//! minimize    c . b
//! subject to  A b >= r,   b free
//! ```
//!
//! with few variables (the polynomial degree plus one) and possibly many
//! constraints (one per design point in the window). The solver works on the
//! dual `max r . lambda  s.t.  A^T lambda = c, lambda >= 0`, which is already
//! in standard form, so the basis stays `(d+1) x (d+1)` no matter how many
//! constraints the primal carries. The primal point is recovered from the
//! simplex multipliers of the optimal dual basis; it is a vertex of the
//! primal feasible set defined by the constraints whose duals are basic.
//!
//! Pivoting follows Bland's rule throughout (lowest index entering variable,
//! lowest index leaving variable on ratio ties), so the pivot sequence and the
//! returned vertex are a deterministic function of the input. When the
//! primal optimum is not unique the returned vertex is whichever one this
//! pivot sequence reaches.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Entries of a basis column smaller than this are treated as zero; a basis
/// whose elimination pivots fall below it is reported as a breakdown.
pub const PIVOT_TOL: f64 = 1e-12;
/// Constraint violation allowed on an optimal point, relative to row scale.
pub const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;

/// `minimize objective . b  s.t.  constraint_matrix * b >= constraint_rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    /// Row-major `m x (d+1)`.
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// Builds a program from the objective, the constraint rows and their
    /// right-hand sides. Every row must have the objective's length.
    pub fn new(objective: Vec<f64>, rows: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self> {
        let p = objective.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput(
                "constraint row length differs from objective length",
            ));
        }
        let matrix = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_row_major(objective, matrix, rhs)
    }

    /// Same as [`LinearProgram::new`] with the constraint matrix already
    /// flattened row by row.
    pub fn from_row_major(objective: Vec<f64>, matrix: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let p = objective.len();
        let m = rhs.len();
        if p == 0 {
            return Err(Error::InvalidInput("linear program needs at least one variable"));
        }
        if m == 0 {
            return Err(Error::InvalidInput("linear program needs at least one constraint"));
        }
        if matrix.len() != m * p {
            return Err(Error::InvalidInput("constraint matrix has the wrong shape"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&objective) || !finite(&matrix) || !finite(&rhs) {
            return Err(Error::InvalidInput("linear program entries must be finite"));
        }
        Ok(Self { objective, matrix, rhs })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_vars();
        &self.matrix[i * p..(i + 1) * p]
    }

    /// `A_i . b - r_i` for every constraint.
    pub fn slacks(&self, b: &[f64]) -> Vec<f64> {
        (0..self.n_constraints())
            .map(|i| dot(self.row(i), b) - self.rhs[i])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LpStatus {
    Optimal,
    /// Objective unbounded below (the dual has no feasible point).
    Unbounded,
    /// No `b` satisfies the constraints (the dual is unbounded).
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Primal point; meaningful only when `status` is `Optimal`.
    pub variables: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    /// Simplex pivots over both phases.
    pub iterations: usize,
}

/// Solves `lp` to optimality.
///
/// Returns `Err(NumericalBreakdown)` if a basis becomes numerically singular,
/// the iteration limit is hit, or the recovered point violates a constraint
/// by more than [`FEAS_TOL`].
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    DualSimplex::new(lp).run()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard-form dual: columns `0..m` are the constraint multipliers,
/// columns `m..m+p` phase-one artificials.
struct DualSimplex<'a> {
    lp: &'a LinearProgram,
    p: usize,
    m: usize,
    /// Row signs making the right-hand side nonnegative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

impl<'a> DualSimplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let p = lp.n_vars();
        let m = lp.n_constraints();
        let sign: Vec<f64> = lp.objective.iter().map(|&c| if c < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs = lp.objective.iter().zip(&sign).map(|(c, s)| c * s).collect();
        let basis: Vec<usize> = (m..m + p).collect();
        let mut in_basis = vec![false; m + p];
        for &j in &basis {
            in_basis[j] = true;
        }
        Self {
            lp,
            p,
            m,
            sign,
            rhs,
            basis,
            in_basis,
            iterations: 0,
            max_iterations: 50 * (m + p) + 1000,
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.m {
            for (k, o) in out.iter_mut().enumerate() {
                *o = self.sign[k] * self.lp.matrix[j * self.p + k];
            }
        } else {
            out.fill(0.0);
            out[j - self.m] = 1.0;
        }
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.m {
            let row = self.lp.row(j);
            (0..self.p).map(|k| self.sign[k] * row[k] * y[k]).sum()
        } else {
            y[j - self.m]
        }
    }

    fn cost(&self, phase: Phase, j: usize) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.m {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j < self.m {
                    -self.lp.rhs[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn factor(&self) -> Result<Lu> {
        let p = self.p;
        let mut b = vec![0.0; p * p];
        let mut col = vec![0.0; p];
        for (c, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for r in 0..p {
                b[r * p + c] = col[r];
            }
        }
        Lu::factor(b, p)
    }

    fn run(mut self) -> Result<LpSolution> {
        let phase_one = self.iterate(Phase::One)?;
        debug_assert!(matches!(phase_one, PhaseEnd::Optimal));
        let lu = self.factor()?;
        let xb = lu.solve(&self.rhs);
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&xb)
            .filter(|(&j, _)| j >= self.m)
            .map(|(_, x)| x.max(0.0))
            .sum();
        let scale = self.rhs.iter().fold(1.0_f64, |a, &c| a.max(c));
        if infeasibility > FEAS_TOL * scale {
            // Dual infeasible: some direction decreases the primal objective
            // without bound (the primal is assumed feasible).
            return Ok(self.finish(LpStatus::Unbounded, None));
        }
        self.drive_out_artificials()?;
        match self.iterate(Phase::Two)? {
            PhaseEnd::Unbounded => Ok(self.finish(LpStatus::Infeasible, None)),
            PhaseEnd::Optimal => {
                let lu = self.factor()?;
                let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(Phase::Two, j)).collect();
                let y = lu.solve_transpose(&cb);
                let b: Vec<f64> = (0..self.p).map(|k| -self.sign[k] * y[k]).collect();
                self.check_feasible(&b)?;
                Ok(self.finish(LpStatus::Optimal, Some(b)))
            }
        }
    }

    fn finish(&self, status: LpStatus, b: Option<Vec<f64>>) -> LpSolution {
        let variables = b.unwrap_or_else(|| vec![0.0; self.p]);
        let objective_value = match status {
            LpStatus::Optimal => dot(&self.lp.objective, &variables),
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Infeasible => f64::INFINITY,
        };
        LpSolution {
            variables,
            objective_value,
            status,
            iterations: self.iterations,
        }
    }

    fn check_feasible(&self, b: &[f64]) -> Result<()> {
        for i in 0..self.m {
            let row = self.lp.row(i);
            let norm = libm::sqrt(row.iter().map(|a| a * a).sum::<f64>()).max(1.0);
            let r = self.lp.rhs[i];
            let slack = dot(row, b) - r;
            if slack < -FEAS_TOL * norm * r.abs().max(1.0) {
                return Err(Error::NumericalBreakdown("optimal point violates a constraint"));
            }
        }
        Ok(())
    }

    /// Replaces artificials left at level zero after phase one by real
    /// columns. An artificial that cannot leave marks a redundant equality
    /// and stays at zero for good.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let mut col = vec![0.0; self.p];
        for pos in 0..self.p {
            if self.basis[pos] < self.m {
                continue;
            }
            let lu = self.factor()?;
            let mut unit = vec![0.0; self.p];
            unit[pos] = 1.0;
            let z = lu.solve_transpose(&unit);
            let candidate = (0..self.m).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                self.column(j, &mut col);
                dot(&z, &col).abs() > 1e-9
            });
            if let Some(j) = candidate {
                self.in_basis[self.basis[pos]] = false;
                self.basis[pos] = j;
                self.in_basis[j] = true;
                self.iterations += 1;
            }
        }
        Ok(())
    }

    fn iterate(&mut self, phase: Phase) -> Result<PhaseEnd> {
        let n_cols = match phase {
            Phase::One => self.m + self.p,
            Phase::Two => self.m,
        };
        let opt_tol = match phase {
            Phase::One => OPT_TOL,
            Phase::Two => OPT_TOL * self.lp.rhs.iter().fold(1.0_f64, |a, &r| a.max(r.abs())),
        };
        let mut col = vec![0.0; self.p];
        loop {
            if self.iterations > self.max_iterations {
                return Err(Error::NumericalBreakdown("simplex iteration limit reached"));
            }
            let lu = self.factor()?;
            let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(phase, j)).collect();
            let y = lu.solve_transpose(&cb);

            let entering =
                (0..n_cols).find(|&j| !self.in_basis[j] && self.cost(phase, j) - self.column_dot(j, &y) < -opt_tol);
            let Some(entering) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let xb = lu.solve(&self.rhs);
            self.column(entering, &mut col);
            let u = lu.solve(&col);
            let mut leave: Option<(usize, f64)> = None;
            for (i, (&ui, &xi)) in u.iter().zip(&xb).enumerate() {
                if ui <= PIVOT_TOL {
                    continue;
                }
                let ratio = xi.max(0.0) / ui;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        if ratio < best_ratio && !tie || tie && self.basis[i] < self.basis[best] {
                            Some((i, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((pos, _)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.in_basis[self.basis[pos]] = false;
            self.basis[pos] = entering;
            self.in_basis[entering] = true;
            self.iterations += 1;
        }
    }
}

/// LU factorisation with partial pivoting of a small dense square matrix.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, max) =
                (k..n)
                    .map(|r| (r, a[r * n + k].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if max < PIVOT_TOL * scale {
                return Err(Error::NumericalBreakdown("singular simplex basis"));
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / d;
                a[r * n + k] = f;
                for c in k + 1..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    /// Solves `A x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r * n + c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r * n + c] * x[c];
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }

    /// Solves `A^T y = c`.
    fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        // A = P^T L U, so A^T y = U^T L^T P y = c.
        let mut z = c.to_vec();
        for r in 0..n {
            for k in 0..r {
                z[r] -= self.lu[k * n + r] * z[k];
            }
            z[r] /= self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            for k in r + 1..n {
                z[r] -= self.lu[k * n + r] * z[k];
            }
        }
        let mut y = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lp(c: Vec<f64>, rows: &[Vec<f64>], r: Vec<f64>) -> LinearProgram {
        LinearProgram::new(c, rows, r).unwrap()
    }

    #[test]
    fn single_variable_envelope() {
        let sol = solve_lp(&lp(vec![1.0], &[vec![1.0], vec![1.0]], vec![1.0, 2.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.variables[0] - 2.0).abs() < 1e-12);
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_cone_apex() {
        let sol = solve_lp(&lp(vec![2.0, 0.0], &[vec![1.0, -1.0], vec![1.0, 1.0]], vec![0.0, 0.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective_value.abs() < 1e-12);
        assert!(sol.variables.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn unbounded_below() {
        // minimize b0 subject to b0 >= b1 only: b1 -> -inf drags b0 along.
        let sol = solve_lp(&lp(vec![1.0, 0.0], &[vec![1.0, -1.0]], vec![0.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // b0 >= 1 and -b0 >= 0.
        let sol = solve_lp(&lp(vec![1.0], &[vec![1.0], vec![-1.0]], vec![1.0, 0.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn zero_objective_is_optimal() {
        let sol = solve_lp(&lp(vec![0.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
        assert!(lp(vec![0.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0])
            .slacks(&sol.variables)
            .iter()
            .all(|s| *s >= -1e-12));
    }

    #[test]
    fn malformed_input_rejected() {
        assert!(LinearProgram::new(vec![1.0], &[vec![1.0, 2.0]], vec![0.0]).is_err());
        assert!(LinearProgram::new(vec![1.0], &[], vec![]).is_err());
        assert!(LinearProgram::new(vec![f64::NAN], &[vec![1.0]], vec![0.0]).is_err());
    }

    #[test]
    fn deterministic_on_degenerate_input() {
        // Many collinear active constraints: heavy dual degeneracy.
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![1.0, i as f64 / 39.0 - 0.5]).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| 0.3 + 2.0 * r[1]).collect();
        let c = vec![40.0, 0.0];
        let problem = lp(c, &rows, rhs);
        let a = solve_lp(&problem).unwrap();
        let b = solve_lp(&problem).unwrap();
        assert_eq!(a, b);
        assert!((a.variables[0] - 0.3).abs() < 1e-12);
        assert!((a.variables[1] - 2.0).abs() < 1e-10);
    }
}
