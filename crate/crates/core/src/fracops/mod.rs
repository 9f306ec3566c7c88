//! Fractional operators of order `1 < alpha < 2`.
//!
//! Caputo derivatives of spline basis functions are evaluated in closed form:
//! `N_j''` is a finite sum of truncated powers `d (x - t)_+^k`, and the
//! Riemann-Liouville integral of order `2 - alpha` maps each of those to
//! `d Gamma(k + 1) / Gamma(k + 3 - alpha) (x - t)_+^(k + 2 - alpha)`.
//! The right derivative follows from the left one by the central symmetry of
//! the basis. Quadrature versions live alongside as independent checks.

pub mod quadrature;

use crate::bspline::{SplineBasis, TruncatedPowerExpansion};
use crate::error::{Error, Result};
use crate::specfun::{caputo_power_coefficient, gamma, rgamma};

pub use quadrature::{KernelIntegrator, QuadratureKind, QuadratureRule};

/// Fractional order `alpha` in `(1, 2)`; `m = 2` and `m_tilde = 2 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 1.0 && alpha < 2.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Integer order of the classical derivative inside the Caputo integral.
    pub fn m(self) -> usize {
        2
    }

    /// Order `2 - alpha` of the Riemann-Liouville integral.
    pub fn m_tilde(self) -> f64 {
        2.0 - self.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FracTerm {
    breakpoint: f64,
    exponent: f64,
    coeff: f64,
}

fn fractionalize(exp: &TruncatedPowerExpansion, alpha: FractionalOrder) -> Vec<FracTerm> {
    let mt = alpha.m_tilde();
    exp.terms()
        .iter()
        .filter(|t| t.coeff != 0.0)
        .map(|t| {
            let k = t.power as f64;
            // Gamma(k + 1) / Gamma(k + 3 - alpha) with k an integer
            let g = (1..=t.power).map(f64::from).product::<f64>() * rgamma(k + 1.0 + mt);
            FracTerm {
                breakpoint: t.breakpoint,
                exponent: k + mt,
                coeff: t.coeff * g,
            }
        })
        .collect()
}

fn eval_frac(terms: &[FracTerm], x: f64) -> f64 {
    terms
        .iter()
        .map(|t| {
            let d = x - t.breakpoint;
            if d > 0.0 {
                t.coeff * d.powf(t.exponent)
            } else {
                0.0
            }
        })
        .sum()
}

/// Closed-form Caputo derivatives for every function of a basis at a fixed
/// order. Build once, evaluate many times.
#[derive(Debug, Clone)]
pub struct BasisCaputo {
    basis: SplineBasis,
    alpha: FractionalOrder,
    terms: Vec<Vec<FracTerm>>,
}

impl BasisCaputo {
    pub fn new(basis: &SplineBasis, alpha: FractionalOrder) -> Result<Self> {
        let terms = (0..basis.count())
            .map(|j| basis.second_derivative_expansion(j).map(|e| fractionalize(&e, alpha)))
            .collect::<Result<_>>()?;
        Ok(Self {
            basis: basis.clone(),
            alpha,
            terms,
        })
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    fn check(&self, j: usize, x: f64) -> Result<()> {
        let count = self.basis.count();
        if j >= count {
            return Err(Error::IndexOutOfRange { index: j, count });
        }
        let len = self.basis.length();
        if !(x >= 0.0 && x <= len) {
            return Err(Error::OutOfInterval { x, length: len });
        }
        Ok(())
    }

    /// `D^alpha_{0,x} N_j(x)`.
    pub fn left(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j, x)?;
        Ok(eval_frac(&self.terms[j], x))
    }

    /// `D^alpha_{x,L} N_j(x) = D^alpha_{0,L-x} N_{B-1-j}(L - x)`.
    pub fn right(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j, x)?;
        let len = self.basis.length();
        self.left(self.basis.mirror(j), len - x)
    }

    /// Riesz-Caputo derivative `(D_left + D_right) / 2`.
    pub fn riesz(&self, j: usize, x: f64) -> Result<f64> {
        Ok(0.5 * (self.left(j, x)? + self.right(j, x)?))
    }

    /// Riesz-Caputo derivative of the spline `sum_k coeffs[k] N_k` at `x`.
    pub fn riesz_combination(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if coeffs.len() != self.basis.count() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.count(),
                got: coeffs.len(),
            });
        }
        let mut acc = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            acc += c * self.riesz(k, x)?;
        }
        Ok(acc)
    }
}

/// `D^alpha_{0,x} N_j(x)` for a single basis function.
pub fn caputo_left_basis(basis: &SplineBasis, j: usize, alpha: FractionalOrder, x: f64) -> Result<f64> {
    let exp = basis.second_derivative_expansion(j)?;
    let len = basis.length();
    if !(x >= 0.0 && x <= len) {
        return Err(Error::OutOfInterval { x, length: len });
    }
    Ok(eval_frac(&fractionalize(&exp, alpha), x))
}

/// `D^alpha_{x,L} N_j(x)`, evaluated through the mirrored left derivative.
pub fn caputo_right_basis(basis: &SplineBasis, j: usize, alpha: FractionalOrder, x: f64) -> Result<f64> {
    if j >= basis.count() {
        return Err(Error::IndexOutOfRange {
            index: j,
            count: basis.count(),
        });
    }
    caputo_left_basis(basis, basis.mirror(j), alpha, basis.length() - x)
}

/// Riesz-Caputo derivative `(D^alpha_{0,x} + D^alpha_{x,L}) N_j(x) / 2`.
pub fn riesz_caputo_basis(basis: &SplineBasis, j: usize, alpha: FractionalOrder, x: f64) -> Result<f64> {
    Ok(0.5 * (caputo_left_basis(basis, j, alpha, x)? + caputo_right_basis(basis, j, alpha, x)?))
}

/// `D^alpha_{0,x} x^nu` for `nu > 1` or `nu` in `{0, 1}`.
pub fn caputo_left_power(nu: f64, alpha: FractionalOrder, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("power derivative needs x >= 0, got {x}")));
    }
    let c = caputo_power_coefficient(nu, alpha)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(c * x.powf(nu - alpha.value()))
}

/// Left Riemann-Liouville integral `(1/Gamma(mu)) int_0^x f(xi) (x - xi)^(mu-1) dxi`.
/// `rule` must come from [`QuadratureRule::for_rl_left`] with the same `mu`.
/// `mu = 0` is the identity.
pub fn rl_integral_left<F: FnMut(f64) -> f64>(mut f: F, mu: f64, x: f64, rule: &QuadratureRule) -> Result<f64> {
    if mu == 0.0 {
        return Ok(f(x));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("integral order mu = {mu} must be positive")));
    }
    rule.require_exponents(mu - 1.0, 0.0)?;
    if x < 0.0 {
        return Err(Error::Domain(format!("left integral needs x >= 0, got {x}")));
    }
    Ok(rule.integrate(0.0, x, f) / gamma(mu)?)
}

/// Right Riemann-Liouville integral `(1/Gamma(mu)) int_x^L f(xi) (xi - x)^(mu-1) dxi`.
/// `rule` must come from [`QuadratureRule::for_rl_right`].
pub fn rl_integral_right<F: FnMut(f64) -> f64>(
    mut f: F,
    mu: f64,
    x: f64,
    length: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if mu == 0.0 {
        return Ok(f(x));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("integral order mu = {mu} must be positive")));
    }
    rule.require_exponents(0.0, mu - 1.0)?;
    if x > length {
        return Err(Error::Domain(format!("right integral needs x <= L, got {x}")));
    }
    Ok(rule.integrate(x, length, f) / gamma(mu)?)
}

/// Both sides of `I^alpha_{0,x} D^alpha_{0,x} u = u - u(0) - u'(0) x` for
/// `u = x^nu`, `nu > 1`, with the left side from the Beta integral.
pub fn composition_check_left(nu: f64, alpha: FractionalOrder, x: f64) -> Result<(f64, f64)> {
    if !(nu > 1.0) {
        return Err(Error::Domain(format!("composition check needs nu > 1, got {nu}")));
    }
    if x <= 0.0 {
        return Err(Error::Domain(format!("composition check needs x > 0, got {x}")));
    }
    // D^alpha x^nu = c x^(nu - alpha); I^alpha x^p = Gamma(p+1)/Gamma(p+1+alpha) x^(p+alpha)
    let c = caputo_power_coefficient(nu, alpha)?;
    let p = nu - alpha.value();
    let lhs = c * gamma(p + 1.0)? * rgamma(p + 1.0 + alpha.value()) * x.powf(p + alpha.value());
    Ok((lhs, x.powf(nu)))
}

/// Mirror of [`composition_check_left`] for `u = (L - x)^nu` and the right
/// operators.
pub fn composition_check_right(nu: f64, alpha: FractionalOrder, x: f64, length: f64) -> Result<(f64, f64)> {
    if !(x < length) {
        return Err(Error::Domain(format!("composition check needs x < L, got {x}")));
    }
    composition_check_left(nu, alpha, length - x)
}

/// Quadrature evaluation of `D^alpha_{0,x} u` from `u''`, for cross-checks.
/// `breaks` lists points in `(0, x)` where `u''` is not smooth.
pub fn caputo_left_quadrature<G: FnMut(f64) -> f64>(
    u_second: G,
    alpha: FractionalOrder,
    x: f64,
    breaks: &[f64],
    integrator: &KernelIntegrator,
    singular_ends: bool,
) -> Result<f64> {
    check_kernel(integrator, alpha)?;
    Ok(integrator.to_point(u_second, 0.0, x, breaks, singular_ends) * rgamma(alpha.m_tilde()))
}

/// Quadrature evaluation of `D^alpha_{x,L} u` from `u''`.
pub fn caputo_right_quadrature<G: FnMut(f64) -> f64>(
    u_second: G,
    alpha: FractionalOrder,
    x: f64,
    length: f64,
    breaks: &[f64],
    integrator: &KernelIntegrator,
    singular_ends: bool,
) -> Result<f64> {
    check_kernel(integrator, alpha)?;
    Ok(integrator.from_point(u_second, x, length, breaks, singular_ends) * rgamma(alpha.m_tilde()))
}

fn check_kernel(integrator: &KernelIntegrator, alpha: FractionalOrder) -> Result<()> {
    let want = 1.0 - alpha.value();
    if (integrator.exponent() - want).abs() > 1e-14 {
        return Err(Error::RuleMismatch {
            rule_right: integrator.exponent(),
            rule_left: 0.0,
            right: want,
            left: 0.0,
        });
    }
    Ok(())
}

/// Caputo kernel integrator for order `alpha` with the default node count.
pub fn caputo_integrator(alpha: FractionalOrder) -> Result<KernelIntegrator> {
    KernelIntegrator::new(1.0 - alpha.value(), 64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn fractional_order_bounds() {
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(2.0).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        let a = order(1.25);
        assert_eq!(a.m(), 2);
        assert_relative_eq!(a.m_tilde(), 0.75);
    }

    #[test]
    fn caputo_vanishes_at_left_end() {
        let b = SplineBasis::new(3, 0.125, 1.0).unwrap();
        for j in 0..b.count() {
            assert_eq!(caputo_left_basis(&b, j, order(1.4), 0.0).unwrap(), 0.0);
            assert_eq!(caputo_right_basis(&b, j, order(1.4), 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadratic_interpolant_of_x_squared() {
        // x^2 is in the quadratic spline space; interpolate at Greville points.
        let b = SplineBasis::new(2, 0.25, 1.0).unwrap();
        let g = b.greville();
        let m = nalgebra::DMatrix::from_fn(b.count(), b.count(), |p, k| b.eval(k, g[p]).unwrap());
        let rhs = nalgebra::DVector::from_iterator(b.count(), g.iter().map(|x| x * x));
        let coef = m.lu().solve(&rhs).unwrap();
        let a = order(1.5);
        let bc = BasisCaputo::new(&b, a).unwrap();
        let got: f64 = (0..b.count()).map(|k| coef[k] * bc.left(k, 0.5).unwrap()).sum();
        assert_relative_eq!(got, 1.595_769_121_605_730_7, max_relative = 1e-12);
    }

    #[test]
    fn power_derivative_examples() {
        assert_relative_eq!(
            caputo_left_power(2.5, order(1.25), 1.0).unwrap(),
            2.933_223_202_340_771_4,
            max_relative = 1e-13
        );
        assert_eq!(caputo_left_power(1.0, order(1.7), 0.3).unwrap(), 0.0);
        assert_relative_eq!(
            caputo_left_power(2.0, order(1.5), 0.25).unwrap(),
            1.128_379_167_095_512_6,
            max_relative = 1e-13
        );
        assert!(caputo_left_power(0.5, order(1.5), 0.25).is_err());
    }

    #[test]
    fn power_coefficient_approaches_second_derivative() {
        let a = order(1.999);
        for nu in [2.0, 2.5, 3.0] {
            let frac = caputo_left_power(nu, a, 1.0).unwrap();
            let classical = nu * (nu - 1.0);
            assert!((frac - classical).abs() <= 0.01 * classical, "nu = {nu}: {frac} vs {classical}");
        }
    }

    #[test]
    fn rl_integral_examples() {
        let r1 = QuadratureRule::for_rl_left(1.0, 8).unwrap();
        assert_relative_eq!(rl_integral_left(|_| 1.0, 1.0, 0.8, &r1).unwrap(), 0.8, max_relative = 1e-14);
        assert_eq!(rl_integral_left(|x| x * x, 0.0, 0.3, &r1).unwrap(), 0.09);
        assert!(rl_integral_left(|x| x, -0.5, 0.3, &r1).is_err());
        assert!(rl_integral_left(|x| x, 0.5, 0.3, &r1).is_err());
        for mu in [0.3, 0.7, 1.5] {
            let rl = QuadratureRule::for_rl_left(mu, 16).unwrap();
            let rr = QuadratureRule::for_rl_right(mu, 16).unwrap();
            for k in 0..4 {
                let x: f64 = 0.65;
                let kf = k as f64;
                let want = gamma(kf + 1.0).unwrap() / gamma(kf + 1.0 + mu).unwrap() * x.powf(kf + mu);
                let got = rl_integral_left(|t| t.powi(k), mu, x, &rl).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-11);
                // right integral of (L - t)^k at L - x
                let got = rl_integral_right(|t| (1.0 - t).powi(k), mu, 1.0 - x, 1.0, &rr).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn composition_examples() {
        let (l, r) = composition_check_left(2.0, order(1.5), 0.7).unwrap();
        assert_relative_eq!(l, 0.49, max_relative = 1e-13);
        assert_relative_eq!(r, 0.49, max_relative = 1e-15);
        let (l, r) = composition_check_left(2.5, order(1.25), 1.0).unwrap();
        assert_relative_eq!(l, 1.0, max_relative = 1e-13);
        assert_eq!(r, 1.0);
        assert!(composition_check_left(1.0, order(1.5), 0.5).is_err());
    }

    #[test]
    fn riesz_symmetry_under_reflection() {
        let b = SplineBasis::new(3, 0.125, 1.0).unwrap();
        let bc = BasisCaputo::new(&b, order(1.35)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let j = rng.gen_range(0..b.count());
            let x = rng.gen_range(0.0..=1.0);
            assert_eq!(bc.right(j, x).unwrap(), bc.left(b.mirror(j), 1.0 - x).unwrap());
            assert_abs_diff_eq!(
                bc.riesz(j, x).unwrap(),
                bc.riesz(b.mirror(j), 1.0 - x).unwrap(),
                epsilon = 1e-12
            );
            assert_eq!(bc.left(j, x).unwrap(), caputo_left_basis(&b, j, order(1.35), x).unwrap());
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, h) in [(2, 0.125), (3, 0.25)] {
            let b = SplineBasis::new(n, h, 1.0).unwrap();
            for _ in 0..10 {
                let a = order(rng.gen_range(1.05..1.95));
                let ki = caputo_integrator(a).unwrap();
                let j = rng.gen_range(0..b.count());
                let x: f64 = rng.gen_range(0.0..1.0);
                let breaks: Vec<f64> = b.knots().iter().copied().filter(|&t| t > 0.0 && t < x).collect();
                let q = caputo_left_quadrature(|t| b.eval_derivative(j, 2, t).unwrap(), a, x, &breaks, &ki, false)
                    .unwrap();
                let c = caputo_left_basis(&b, j, a, x).unwrap();
                assert_abs_diff_eq!(c, q, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn annihilates_constants_and_linears() {
        let b = SplineBasis::new(2, 0.125, 1.0).unwrap();
        let bc = BasisCaputo::new(&b, order(1.6)).unwrap();
        let ones = vec![1.0; b.count()];
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_abs_diff_eq!(bc.riesz_combination(&ones, x).unwrap(), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(bc.riesz_combination(b.greville(), x).unwrap(), 0.0, epsilon = 1e-10);
        }
    }
}
