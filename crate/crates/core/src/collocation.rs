//! Collocation at Greville abscissae and its Newton solution.
//!
//! For a spline `u_h = sum_k l_k N_k` the unknowns `l_k` are fixed by the
//! boundary conditions (rows `0` and `B - 1`) and by the equation
//! `D^alpha_RC u_h(eta_p) = f(eta_p, u_h(eta_p))` at the interior Greville
//! points `eta_1 .. eta_{B-2}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bspline::SplineBasis;
use crate::error::{Error, Result};
use crate::fracops::{BasisCaputo, FractionalOrder};

/// Function of `x`.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Function of `(x, u)`.
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `a u^(i)(0) + b u^(i)(L) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub order: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BoundaryCondition {
    pub fn new(order: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        if order > 1 {
            return Err(Error::InvalidParameter(format!(
                "boundary condition order must be 0 or 1, got {order}"
            )));
        }
        if a + b == 0.0 {
            return Err(Error::DegenerateBoundary { order });
        }
        Ok(Self { order, a, b, c })
    }

    /// Residual of the condition for the given endpoint values of `u^(i)`.
    pub fn residual(&self, at_zero: f64, at_length: f64) -> f64 {
        self.a * at_zero + self.b * at_length - self.c
    }
}

/// `D^alpha_RC u = f(x, u)` on `[0, L]` with one boundary condition of each
/// order.
#[derive(Clone)]
pub struct ProblemSpec {
    alpha: FractionalOrder,
    length: f64,
    f: SourceFn,
    df_du: Option<SourceFn>,
    bc: [BoundaryCondition; 2],
    exact: Option<ScalarFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("length", &self.length)
            .field("bc", &self.bc)
            .field("df_du", &self.df_du.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// `bc` may be given in any order but must hold exactly one condition of
    /// each order.
    pub fn new(
        alpha: FractionalOrder,
        length: f64,
        f: SourceFn,
        bc: [BoundaryCondition; 2],
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        let bc = match (bc[0].order, bc[1].order) {
            (0, 1) => bc,
            (1, 0) => [bc[1], bc[0]],
            _ => {
                return Err(Error::InvalidParameter(
                    "need one boundary condition of order 0 and one of order 1".into(),
                ))
            }
        };
        for c in &bc {
            if c.a + c.b == 0.0 {
                return Err(Error::DegenerateBoundary { order: c.order });
            }
        }
        Ok(Self {
            alpha,
            length,
            f,
            df_du: None,
            bc,
            exact: None,
        })
    }

    pub fn with_df_du(mut self, df_du: SourceFn) -> Self {
        self.df_du = Some(df_du);
        self
    }

    pub fn with_exact(mut self, exact: ScalarFn) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Boundary condition of order `i`.
    pub fn bc(&self, order: usize) -> &BoundaryCondition {
        &self.bc[order]
    }

    pub fn f(&self, x: f64, u: f64) -> f64 {
        (self.f)(x, u)
    }

    /// `df/du`, analytic when supplied and by central differences otherwise.
    pub fn df_du(&self, x: f64, u: f64) -> f64 {
        match &self.df_du {
            Some(d) => d(x, u),
            None => {
                let step = 1e-6 * u.abs().max(1.0);
                ((self.f)(x, u + step) - (self.f)(x, u - step)) / (2.0 * step)
            }
        }
    }

    pub fn has_df_du(&self) -> bool {
        self.df_du.is_some()
    }

    pub fn exact(&self) -> Option<&ScalarFn> {
        self.exact.as_ref()
    }

    pub fn source(&self) -> &SourceFn {
        &self.f
    }
}

/// A spline `sum_k l_k N_k` together with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSolution {
    basis: SplineBasis,
    coefficients: Vec<f64>,
}

impl SplineSolution {
    pub fn new(basis: SplineBasis, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.count() {
            return Err(Error::DimensionMismatch {
                expected: basis.count(),
                got: coefficients.len(),
            });
        }
        Ok(Self { basis, coefficients })
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.basis.combine(&self.coefficients, 0, x)
    }

    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        self.basis.combine(&self.coefficients, order, x)
    }

    /// Maximum of `|u_h - exact|` over `grid_size + 1` uniform points.
    pub fn error_inf_norm<F: Fn(f64) -> f64>(&self, exact: F, grid_size: usize) -> Result<f64> {
        if grid_size < 2 {
            return Err(Error::InvalidParameter(format!("grid size must be at least 2, got {grid_size}")));
        }
        let len = self.basis.length();
        let mut worst = 0.0f64;
        for i in 0..=grid_size {
            let x = if i == grid_size { len } else { len * i as f64 / grid_size as f64 };
            worst = worst.max((self.eval(x)? - exact(x)).abs());
        }
        Ok(worst)
    }
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Linear solves performed, including the initial frozen-source solve.
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
    /// 1-norm condition number of the last Jacobian.
    pub jacobian_condition_estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            max_halvings: 10,
        }
    }
}

pub const DEFAULT_GRID_SIZE: usize = 1000;

/// Problem-independent parts of the collocation system for one basis.
#[derive(Debug, Clone)]
pub struct CollocationSystem {
    basis: SplineBasis,
    problem: ProblemSpec,
    points: Vec<f64>,
    // row p: D^alpha_RC N_k(eta_p) for interior rows, boundary operator otherwise
    operator: DMatrix<f64>,
    // row p: N_k(eta_p)
    values: DMatrix<f64>,
}

impl CollocationSystem {
    pub fn new(problem: &ProblemSpec, basis: &SplineBasis) -> Result<Self> {
        if (basis.length() - problem.length()).abs() > 1e-12 * problem.length() {
            return Err(Error::InvalidParameter(format!(
                "basis interval length {} differs from problem length {}",
                basis.length(),
                problem.length()
            )));
        }
        let count = basis.count();
        let caputo = BasisCaputo::new(basis, problem.alpha())?;
        let points = basis.greville().to_vec();
        let len = basis.length();
        let mut operator = DMatrix::zeros(count, count);
        let mut values = DMatrix::zeros(count, count);
        for k in 0..count {
            for (row, order) in [(0, 0), (count - 1, 1)] {
                let c = problem.bc(order);
                operator[(row, k)] = c.a * basis.eval_derivative(k, order, 0.0)?
                    + c.b * basis.eval_derivative(k, order, len)?;
            }
            for p in 1..count - 1 {
                operator[(p, k)] = caputo.riesz(k, points[p])?;
                values[(p, k)] = basis.eval(k, points[p])?;
            }
        }
        Ok(Self {
            basis: basis.clone(),
            problem: problem.clone(),
            points,
            operator,
            values,
        })
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// Greville abscissae; rows `1..B-1` collocate at the interior ones.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: coeffs.len(),
            });
        }
        Ok(())
    }

    fn interior_values(&self, coeffs: &[f64]) -> DVector<f64> {
        &self.values * DVector::from_column_slice(coeffs)
    }

    pub fn residual(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs)?;
        let count = self.size();
        let u = self.interior_values(coeffs);
        let mut r = &self.operator * DVector::from_column_slice(coeffs);
        r[0] -= self.problem.bc(0).c;
        r[count - 1] -= self.problem.bc(1).c;
        for p in 1..count - 1 {
            r[p] -= self.problem.f(self.points[p], u[p]);
        }
        Ok(r.as_slice().to_vec())
    }

    pub fn jacobian(&self, coeffs: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(coeffs)?;
        let u = self.interior_values(coeffs);
        let mut jac = self.operator.clone();
        for p in 1..self.size() - 1 {
            let d = self.problem.df_du(self.points[p], u[p]);
            if d != 0.0 {
                for k in 0..self.size() {
                    jac[(p, k)] -= d * self.values[(p, k)];
                }
            }
        }
        Ok(jac)
    }

    /// Coefficients from one linear solve with `f` frozen at `u = 0`.
    pub fn initial_guess(&self) -> Result<Vec<f64>> {
        let count = self.size();
        let mut rhs = DVector::zeros(count);
        rhs[0] = self.problem.bc(0).c;
        rhs[count - 1] = self.problem.bc(1).c;
        for p in 1..count - 1 {
            rhs[p] = self.problem.f(self.points[p], 0.0);
        }
        let sol = self
            .operator
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian { iteration: 0 })?;
        Ok(sol.as_slice().to_vec())
    }

    /// Damped Newton iteration from `guess`. `already` counts solves spent
    /// before this call.
    fn newton(&self, guess: Vec<f64>, opts: &NewtonOptions, already: usize) -> Result<(SplineSolution, SolveReport)> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("Newton tolerance must be positive, got {}", opts.tol)));
        }
        let mut coeffs = guess;
        let mut r = self.residual(&coeffs)?;
        let mut norm = inf_norm(&r);
        let mut iterations = already;
        let mut cond = None;
        let mut converged = norm <= opts.tol;
        while !converged && iterations < opts.max_iter {
            let jac = self.jacobian(&coeffs)?;
            cond = condition_estimate(&jac);
            let lu = jac.lu();
            let step = lu
                .solve(&-DVector::from_column_slice(&r))
                .ok_or(Error::SingularJacobian { iteration: iterations })?;
            iterations += 1;
            let mut t = 1.0;
            let mut halvings = 0;
            let (trial, trial_r, trial_norm) = loop {
                let trial: Vec<f64> = coeffs.iter().zip(step.iter()).map(|(c, s)| c + t * s).collect();
                let tr = self.residual(&trial)?;
                let tn = inf_norm(&tr);
                if tn < norm || halvings == opts.max_halvings {
                    break (trial, tr, tn);
                }
                t *= 0.5;
                halvings += 1;
            };
            if !(trial_norm < norm) {
                // no descent along the Newton direction: rounding floor reached
                break;
            }
            coeffs = trial;
            r = trial_r;
            norm = trial_norm;
            converged = norm <= opts.tol;
        }
        let report = SolveReport {
            iterations,
            final_residual_norm: norm,
            converged,
            jacobian_condition_estimate: cond,
        };
        Ok((SplineSolution::new(self.basis.clone(), coeffs)?, report))
    }

    /// Frozen-source initial guess followed by damped Newton.
    pub fn solve(&self, opts: &NewtonOptions) -> Result<(SplineSolution, SolveReport)> {
        let guess = self.initial_guess()?;
        self.newton(guess, opts, 1)
    }

    /// Damped Newton from an arbitrary starting vector.
    pub fn solve_from(&self, guess: &[f64], opts: &NewtonOptions) -> Result<(SplineSolution, SolveReport)> {
        self.check_len(guess)?;
        self.newton(guess.to_vec(), opts, 0)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn condition_estimate(m: &DMatrix<f64>) -> Option<f64> {
    let one_norm = |a: &DMatrix<f64>| {
        a.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    m.clone().try_inverse().map(|inv| one_norm(m) * one_norm(&inv))
}

/// Residual of the collocation system at `coeffs`.
pub fn assemble_residual(problem: &ProblemSpec, basis: &SplineBasis, coeffs: &[f64]) -> Result<Vec<f64>> {
    CollocationSystem::new(problem, basis)?.residual(coeffs)
}

/// Jacobian of [`assemble_residual`] with respect to the coefficients.
pub fn assemble_jacobian(problem: &ProblemSpec, basis: &SplineBasis, coeffs: &[f64]) -> Result<DMatrix<f64>> {
    CollocationSystem::new(problem, basis)?.jacobian(coeffs)
}

pub fn solve(problem: &ProblemSpec, basis: &SplineBasis, opts: &NewtonOptions) -> Result<(SplineSolution, SolveReport)> {
    CollocationSystem::new(problem, basis)?.solve(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn constant_problem(alpha: f64) -> ProblemSpec {
        ProblemSpec::new(
            FractionalOrder::new(alpha).unwrap(),
            1.0,
            Arc::new(|_, _| 0.0),
            [
                BoundaryCondition::new(0, 1.0, 1.0, 1.0).unwrap(),
                BoundaryCondition::new(1, 1.0, 1.0, 0.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn boundary_condition_validation() {
        assert!(matches!(
            BoundaryCondition::new(1, 1.0, -1.0, 0.0),
            Err(Error::DegenerateBoundary { order: 1 })
        ));
        assert!(BoundaryCondition::new(2, 1.0, 1.0, 0.0).is_err());
        let a = BoundaryCondition::new(0, 1.0, 1.0, 0.0).unwrap();
        assert!(ProblemSpec::new(FractionalOrder::new(1.5).unwrap(), 1.0, Arc::new(|_, _| 0.0), [a, a]).is_err());
    }

    #[test]
    fn constant_coefficients_have_zero_residual() {
        let p = constant_problem(1.5);
        let b = SplineBasis::new(3, 0.125, 1.0).unwrap();
        let r = assemble_residual(&p, &b, &vec![0.5; b.count()]).unwrap();
        assert_eq!(r.len(), b.count());
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
        assert!(assemble_residual(&p, &b, &[0.5; 3]).is_err());
    }

    #[test]
    fn constant_problem_solves_in_one_step() {
        let p = constant_problem(1.3);
        let b = SplineBasis::new(2, 0.25, 1.0).unwrap();
        let (sol, rep) = solve(&p, &b, &NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for x in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(sol.eval(x).unwrap(), 0.5, epsilon = 1e-13);
        }
        assert!(rep.jacobian_condition_estimate.is_none());
    }

    #[test]
    fn boundary_rows() {
        let p = constant_problem(1.7);
        let b = SplineBasis::new(2, 0.125, 1.0).unwrap();
        let j = assemble_jacobian(&p, &b, &vec![0.0; b.count()]).unwrap();
        let last = b.count() - 1;
        for k in 0..b.count() {
            let want = if k == 0 || k == last { 1.0 } else { 0.0 };
            assert_eq!(j[(0, k)], want);
        }
        // N_0'(0) = -2/h, N_1'(0) = 2/h for the quadratic basis
        assert_relative_eq!(j[(last, 0)], -16.0, max_relative = 1e-13);
        assert_relative_eq!(j[(last, 1)], 16.0, max_relative = 1e-13);
    }

    #[test]
    fn solution_evaluation() {
        let b = SplineBasis::new(3, 0.25, 1.0).unwrap();
        let s = SplineSolution::new(b.clone(), b.greville().to_vec()).unwrap();
        assert_relative_eq!(s.eval(0.37).unwrap(), 0.37, max_relative = 1e-13);
        assert_relative_eq!(s.derivative(1, 0.81).unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(s.error_inf_norm(|x| s.eval(x).unwrap(), 50).unwrap(), 0.0);
        assert!(s.error_inf_norm(|x| x, 1).is_err());
        let mut c = vec![2.0; b.count()];
        c[0] = -1.0;
        let s = SplineSolution::new(b.clone(), c).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), -1.0);
        assert!(SplineSolution::new(b, vec![1.0]).is_err());
    }

    #[test]
    fn finite_difference_fallback() {
        let p = ProblemSpec::new(
            FractionalOrder::new(1.5).unwrap(),
            1.0,
            Arc::new(|x, u: f64| u.powi(3) + x),
            [
                BoundaryCondition::new(0, 1.0, 0.0, 0.0).unwrap(),
                BoundaryCondition::new(1, 0.0, 1.0, 0.0).unwrap(),
            ],
        )
        .unwrap();
        assert!(!p.has_df_du());
        assert_relative_eq!(p.df_du(0.2, 2.0), 12.0, max_relative = 1e-8);
    }
}
