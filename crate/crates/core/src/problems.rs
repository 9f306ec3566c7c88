//! Benchmark problems with known solutions.
//!
//! Example 1: `D^alpha_RC u = u^2 + g1(x)`, exact `u = x^2.5`.
//! Example 2: `D^alpha_RC u = sin(pi u / 4) + g2(x)`, exact `u = sin(pi x / 4)`.
//! Both live on `[0, 1]`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use crate::collocation::{BoundaryCondition, ProblemSpec, ScalarFn};
use crate::error::{Error, Result};
use crate::fracops::{caputo_integrator, FractionalOrder, KernelIntegrator};
use crate::specfun::{gamma, hyp1f2, hyp2f1, rgamma};

/// Example 2 frequency.
pub const OMEGA: f64 = FRAC_PI_4;

/// Distance from `alpha = 1.5` inside which the closed form for `g1` is not
/// used.
pub const G1_SINGULAR_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    ClosedForm,
    QuadratureFallback,
}

/// A problem whose exact solution is known and whose source term was built
/// from it.
#[derive(Clone)]
pub struct ManufacturedProblem {
    spec: ProblemSpec,
    source_mode: SourceMode,
    omega: Option<f64>,
    exact_second: ScalarFn,
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("spec", &self.spec)
            .field("source_mode", &self.source_mode)
            .field("omega", &self.omega)
            .finish()
    }
}

impl ManufacturedProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn source_mode(&self) -> SourceMode {
        self.source_mode
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    pub fn exact(&self, x: f64) -> f64 {
        (self.spec.exact().expect("manufactured problems carry their solution"))(x)
    }

    pub fn exact_second(&self, x: f64) -> f64 {
        (self.exact_second)(x)
    }
}

/// `D^alpha_RC u(x)` by quadrature, from the second derivative of `u`.
/// At `x = 0` (resp. `x = L`) only the right (resp. left) term survives.
pub fn rc_derivative_quadrature<G: Fn(f64) -> f64>(
    u_second: G,
    alpha: FractionalOrder,
    length: f64,
    x: f64,
    integrator: &KernelIntegrator,
) -> Result<f64> {
    if !(x >= 0.0 && x <= length) {
        return Err(Error::OutOfInterval { x, length });
    }
    if (integrator.exponent() - (1.0 - alpha.value())).abs() > 1e-14 {
        return Err(Error::RuleMismatch {
            rule_right: integrator.exponent(),
            rule_left: 0.0,
            right: 1.0 - alpha.value(),
            left: 0.0,
        });
    }
    let left = integrator.to_point(&u_second, 0.0, x, &[], true);
    let right = integrator.from_point(&u_second, x, length, &[], true);
    Ok(0.5 * (left + right) * rgamma(alpha.m_tilde()))
}

/// Closed-form source of example 1 on `[0, 1]`. Fails at `alpha = 1.5`,
/// where the hypergeometric lower parameter vanishes.
pub fn g1_closed_form(alpha: FractionalOrder, x: f64) -> Result<f64> {
    const L: f64 = 1.0;
    let a = alpha.value();
    if !(0.0..=L).contains(&x) {
        return Err(Error::OutOfInterval { x, length: L });
    }
    let lead = 0.5 * (gamma(3.5)? * rgamma(3.5 - a) - 3.75 / (2.0 * PI.sqrt()) * gamma(a - 2.5)?);
    let hyp = hyp2f1(a - 2.5, a - 1.0, a - 1.5, x / L).map_err(|e| e.context(format!("g1 at alpha = {a}")))?;
    let tail = 0.5 * 3.75 * rgamma(2.0 - a) * L.powf(2.5 - a) / (a - 2.5) * hyp;
    Ok(-x.powi(5) + lead * x.powf(2.5 - a) - tail)
}

/// Example 1 source by quadrature: `D^alpha_RC x^2.5 - x^5`.
pub fn g1_quadrature(alpha: FractionalOrder, x: f64, integrator: &KernelIntegrator) -> Result<f64> {
    Ok(rc_derivative_quadrature(|s| 3.75 * s.sqrt(), alpha, 1.0, x, integrator)? - x.powi(5))
}

/// Closed-form source of example 2 on `[0, 1]`.
pub fn g2_closed_form(alpha: FractionalOrder, x: f64) -> Result<f64> {
    const L: f64 = 1.0;
    let a = alpha.value();
    if !(0.0..=L).contains(&x) {
        return Err(Error::OutOfInterval { x, length: L });
    }
    let w = OMEGA;
    let ctx = |e: Error| e.context(format!("g2 at alpha = {a}"));
    let zl = -0.25 * w * w * x * x;
    let zr = -0.25 * w * w * (L - x) * (L - x);
    let g11 = w * x.powf(3.0 - a) * hyp1f2(1.0, 2.0 - a / 2.0, 2.5 - a / 2.0, zl).map_err(ctx)? / ((a - 3.0) * (a - 2.0));
    let r = (L - x).powf(2.0 - a);
    let g21 = r * w * (x - L) * (w * x).cos() * hyp1f2(1.5 - a / 2.0, 1.5, 2.5 - a / 2.0, zr).map_err(ctx)? / (a - 3.0)
        - r * (w * x).sin() * hyp1f2(1.0 - a / 2.0, 0.5, 2.0 - a / 2.0, zr).map_err(ctx)? / (a - 2.0);
    let u = (w * x).sin();
    Ok(-(FRAC_PI_4 * u).sin() - w * w * rgamma(2.0 - a) / 2.0 * (g11 + g21))
}

/// Example 2 source by quadrature.
pub fn g2_quadrature(alpha: FractionalOrder, x: f64, integrator: &KernelIntegrator) -> Result<f64> {
    let w = OMEGA;
    let d = rc_derivative_quadrature(|s| -w * w * (w * s).sin(), alpha, 1.0, x, integrator)?;
    Ok(d - (FRAC_PI_4 * (w * x).sin()).sin())
}

/// Example 1, choosing the quadrature source near `alpha = 1.5`.
pub fn example1(alpha: FractionalOrder) -> Result<ManufacturedProblem> {
    let mode = if (alpha.value() - 1.5).abs() < G1_SINGULAR_BAND {
        SourceMode::QuadratureFallback
    } else {
        SourceMode::ClosedForm
    };
    example1_with_mode(alpha, mode)
}

pub fn example1_with_mode(alpha: FractionalOrder, mode: SourceMode) -> Result<ManufacturedProblem> {
    let g: ScalarFn = match mode {
        SourceMode::ClosedForm => {
            g1_closed_form(alpha, 0.5)?;
            Arc::new(move |x| g1_closed_form(alpha, x).unwrap_or(f64::NAN))
        }
        SourceMode::QuadratureFallback => {
            let ki = caputo_integrator(alpha)?;
            Arc::new(move |x| g1_quadrature(alpha, x, &ki).unwrap_or(f64::NAN))
        }
    };
    let spec = ProblemSpec::new(
        alpha,
        1.0,
        Arc::new(move |x, u| u * u + g(x)),
        [
            BoundaryCondition::new(0, 1.0, 1.0, 1.0)?,
            BoundaryCondition::new(1, 1.0, 1.0, 2.5)?,
        ],
    )?
    .with_df_du(Arc::new(|_, u| 2.0 * u))
    .with_exact(Arc::new(|x: f64| x * x * x.sqrt()));
    Ok(ManufacturedProblem {
        spec,
        source_mode: mode,
        omega: None,
        exact_second: Arc::new(|x: f64| 3.75 * x.sqrt()),
    })
}

pub fn example2(alpha: FractionalOrder) -> Result<ManufacturedProblem> {
    example2_with_mode(alpha, SourceMode::ClosedForm)
}

pub fn example2_with_mode(alpha: FractionalOrder, mode: SourceMode) -> Result<ManufacturedProblem> {
    let g: ScalarFn = match mode {
        SourceMode::ClosedForm => {
            g2_closed_form(alpha, 0.5)?;
            Arc::new(move |x| g2_closed_form(alpha, x).unwrap_or(f64::NAN))
        }
        SourceMode::QuadratureFallback => {
            let ki = caputo_integrator(alpha)?;
            Arc::new(move |x| g2_quadrature(alpha, x, &ki).unwrap_or(f64::NAN))
        }
    };
    let w = OMEGA;
    let half_root = SQRT_2 / 2.0;
    let spec = ProblemSpec::new(
        alpha,
        1.0,
        Arc::new(move |x, u| (FRAC_PI_4 * u).sin() + g(x)),
        [
            BoundaryCondition::new(0, 1.0, 1.0, half_root)?,
            BoundaryCondition::new(1, 1.0, 1.0, FRAC_PI_4 * (1.0 + half_root))?,
        ],
    )?
    .with_df_du(Arc::new(|_, u| FRAC_PI_4 * (FRAC_PI_4 * u).cos()))
    .with_exact(Arc::new(move |x: f64| (w * x).sin()));
    Ok(ManufacturedProblem {
        spec,
        source_mode: mode,
        omega: Some(w),
        exact_second: Arc::new(move |x: f64| -w * w * (w * x).sin()),
    })
}

/// `D^alpha_RC u = lambda u + g(x)` with exact `u = x^2.5` and the boundary
/// conditions of example 1. Small `lambda` keeps the fixed-point map
/// contractive.
pub fn manufactured_linear(alpha: FractionalOrder, lambda: f64) -> Result<ManufacturedProblem> {
    let base = example1(alpha)?;
    let src = base.spec().source().clone();
    // the example 1 source at u = 0 is g1(x)
    let g = move |x: f64| src(x, 0.0) + x.powi(5) - lambda * x * x * x.sqrt();
    let spec = ProblemSpec::new(
        alpha,
        1.0,
        Arc::new(move |x, u| lambda * u + g(x)),
        [*base.spec().bc(0), *base.spec().bc(1)],
    )?
    .with_df_du(Arc::new(move |_, _| lambda))
    .with_exact(Arc::new(|x: f64| x * x * x.sqrt()));
    Ok(ManufacturedProblem {
        spec,
        source_mode: base.source_mode,
        omega: None,
        exact_second: base.exact_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::caputo_left_power;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn closed_forms_match_reference_values() {
        // high-precision references
        assert_relative_eq!(g1_closed_form(order(1.25), 0.5).unwrap(), 1.605_034_788_081_619_8, max_relative = 1e-11);
        assert_relative_eq!(g2_closed_form(order(1.75), 0.3).unwrap(), -0.333_525_341_967_942_27, max_relative = 1e-11);
        assert!(g1_closed_form(order(1.5), 0.5).is_err());
    }

    #[test]
    fn quadrature_of_zero_and_squares() {
        let a = order(1.4);
        let ki = caputo_integrator(a).unwrap();
        assert_eq!(rc_derivative_quadrature(|_| 0.0, a, 1.0, 0.3, &ki).unwrap(), 0.0);
        for x in [0.0, 0.2, 0.7, 1.0] {
            let q = rc_derivative_quadrature(|_| 2.0, a, 1.0, x, &ki).unwrap();
            let want = 0.5 * (caputo_left_power(2.0, a, x).unwrap() + caputo_left_power(2.0, a, 1.0 - x).unwrap());
            assert_relative_eq!(q, want, max_relative = 1e-12);
        }
        assert!(rc_derivative_quadrature(|_| 0.0, a, 1.0, 1.2, &ki).is_err());
        let wrong = caputo_integrator(order(1.6)).unwrap();
        assert!(rc_derivative_quadrature(|_| 0.0, a, 1.0, 0.3, &wrong).is_err());
    }

    #[test]
    fn exact_solutions_satisfy_boundary_conditions() {
        for p in [example1(order(1.25)).unwrap(), example2(order(1.25)).unwrap()] {
            let s = p.spec();
            let u = s.exact().unwrap();
            let du = |x: f64| (u(x + 1e-7) - u(x - 1e-7)) / 2e-7;
            assert_abs_diff_eq!(s.bc(0).residual(u(0.0), u(1.0)), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.bc(1).residual(du(1e-7), du(1.0 - 1e-7)), 0.0, epsilon = 1e-5);
        }
        assert_eq!(example1(order(1.3)).unwrap().exact(1.0), 1.0);
        assert_eq!(example2(order(1.3)).unwrap().exact(0.0), 0.0);
    }

    #[test]
    fn fallback_mode_selection() {
        assert_eq!(example1(order(1.5)).unwrap().source_mode(), SourceMode::QuadratureFallback);
        assert_eq!(example1(order(1.5 + 1e-3)).unwrap().source_mode(), SourceMode::ClosedForm);
        assert_eq!(example2(order(1.5)).unwrap().omega(), Some(OMEGA));
        let a = order(1.5);
        let p = example1(a).unwrap();
        let x: f64 = 0.5;
        assert_relative_eq!(
            p.spec().f(x, x.powf(2.5)),
            rc_derivative_quadrature(|s| p.exact_second(s), a, 1.0, x, &caputo_integrator(a).unwrap()).unwrap(),
            max_relative = 1e-12
        );
    }
}
