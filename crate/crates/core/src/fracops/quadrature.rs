//! Gauss-Jacobi and Gauss-Legendre rules, plus a graded integrator for
//! power-law kernels with an endpoint singularity.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussJacobi,
    GaussLegendre,
}

/// Gauss rule on `[-1, 1]` for the weight `(1 - y)^a (1 + y)^b`.
///
/// `a` is the exponent at the right endpoint and `b` the exponent at the
/// left endpoint; Gauss-Legendre is `a = b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    right_exp: f64,
    left_exp: f64,
}

/// Jacobi polynomial `P_n^{(a,b)}(y)` and its derivative.
fn jacobi_with_derivative(n: usize, a: f64, b: f64, y: f64) -> (f64, f64) {
    let eval = |n: usize, a: f64, b: f64| -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut p0 = 1.0;
        let mut p1 = 0.5 * (a - b + (a + b + 2.0) * y);
        for k in 1..n {
            let k = k as f64;
            let s = 2.0 * k + a + b;
            let c1 = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
            let c2 = (s + 1.0) * (a * a - b * b);
            let c3 = s * (s + 1.0) * (s + 2.0);
            let c4 = 2.0 * (k + a) * (k + b) * (s + 2.0);
            let p2 = ((c2 + c3 * y) * p1 - c4 * p0) / c1;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let p = eval(n, a, b);
    let dp = if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + a + b + 1.0) * eval(n - 1, a + 1.0, b + 1.0)
    };
    (p, dp)
}

impl QuadratureRule {
    /// `n`-point Gauss-Jacobi rule. Nodes start from the Golub-Welsch
    /// eigenvalues and are polished by Newton steps on `P_n^{(a,b)}`.
    pub fn gauss_jacobi(n: usize, right_exp: f64, left_exp: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
        }
        if !(right_exp > -1.0 && left_exp > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi exponents must exceed -1, got ({right_exp}, {left_exp})"
            )));
        }
        let (a, b) = (right_exp, left_exp);
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            jm[(k, k)] = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            if k + 1 < n {
                let k1 = kf + 1.0;
                let s1 = 2.0 * k1 + a + b;
                let beta2 = if k == 0 {
                    4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
                } else {
                    4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))
                };
                let off = beta2.sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

        let nf = n as f64;
        let log_const = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
            - ln_gamma(nf + a + b + 1.0)
            - ln_gamma(nf + 1.0);
        let mut weights = Vec::with_capacity(n);
        for y in nodes.iter_mut() {
            for _ in 0..8 {
                let (p, dp) = jacobi_with_derivative(n, a, b, *y);
                let dy = p / dp;
                *y -= dy;
                if dy.abs() <= 1e-16 * (1.0 + y.abs()) {
                    break;
                }
            }
            let (_, dp) = jacobi_with_derivative(n, a, b, *y);
            weights.push((log_const - ((1.0 - *y * *y) * dp * dp).ln()).exp());
        }
        // the log-gamma constant loses digits for large n; pin the zeroth moment
        let moment = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
            .exp();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w *= moment / total;
        }
        let kind = if a == 0.0 && b == 0.0 {
            QuadratureKind::GaussLegendre
        } else {
            QuadratureKind::GaussJacobi
        };
        Ok(Self {
            kind,
            nodes,
            weights,
            right_exp: a,
            left_exp: b,
        })
    }

    pub fn gauss_legendre(n: usize) -> Result<Self> {
        Self::gauss_jacobi(n, 0.0, 0.0)
    }

    /// Rule for the left Riemann-Liouville integral of order `mu`: weight
    /// `(x - xi)^(mu - 1)` at the right end of `[0, x]`.
    pub fn for_rl_left(mu: f64, n: usize) -> Result<Self> {
        Self::gauss_jacobi(n, mu - 1.0, 0.0)
    }

    /// Rule for the right Riemann-Liouville integral of order `mu`.
    pub fn for_rl_right(mu: f64, n: usize) -> Result<Self> {
        Self::gauss_jacobi(n, 0.0, mu - 1.0)
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// (right-end exponent, left-end exponent).
    pub fn exponents(&self) -> (f64, f64) {
        (self.right_exp, self.left_exp)
    }

    pub(crate) fn require_exponents(&self, right: f64, left: f64) -> Result<()> {
        if (self.right_exp - right).abs() > 1e-14 || (self.left_exp - left).abs() > 1e-14 {
            return Err(Error::RuleMismatch {
                rule_right: self.right_exp,
                rule_left: self.left_exp,
                right,
                left,
            });
        }
        Ok(())
    }

    /// `int_lo^hi (hi - x)^a (x - lo)^b f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        if half == 0.0 {
            return 0.0;
        }
        let scale = half.powf(self.right_exp + self.left_exp + 1.0);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * f(lo + half * (1.0 + y)))
            .sum();
        sum * scale
    }
}

/// Integrates `g(xi) (x - xi)^e` over `[a, x]` (or `g(xi) (xi - x)^e` over
/// `[x, b]`) when `g` is smooth between given breakpoints.
///
/// Sub-intervals that end at the singular point use Gauss-Jacobi with the
/// exact exponent; every other piece uses Gauss-Legendre on a geometric
/// subdivision refined towards the nearby singularity, so the nearly singular
/// kernel stays resolved.
#[derive(Debug, Clone)]
pub struct KernelIntegrator {
    exponent: f64,
    jacobi: QuadratureRule,
    legendre: QuadratureRule,
}

const GRADING_LEVELS: usize = 52;

impl KernelIntegrator {
    pub fn new(exponent: f64, nodes: usize) -> Result<Self> {
        Ok(Self {
            exponent,
            jacobi: QuadratureRule::gauss_jacobi(nodes, exponent, 0.0)?,
            legendre: QuadratureRule::gauss_legendre(nodes.clamp(8, 24))?,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `int_a^x g(xi) (x - xi)^e dxi`. `breaks` are points in `(a, x)` where
    /// `g` loses smoothness. With `singular_ends` set, pieces are also graded
    /// towards `a` and `x`, for `g` with weak singularities there.
    pub fn to_point<G: FnMut(f64) -> f64>(
        &self,
        mut g: G,
        a: f64,
        x: f64,
        breaks: &[f64],
        singular_ends: bool,
    ) -> f64 {
        if x <= a {
            return 0.0;
        }
        let mut pts = Vec::with_capacity(breaks.len() + 2);
        pts.push(a);
        pts.extend(breaks.iter().copied().filter(|&t| t > a && t < x));
        pts.push(x);
        pts.dedup();
        let e = self.exponent;
        let mut total = 0.0;
        let last = pts.len() - 2;
        for (i, w) in pts.windows(2).enumerate() {
            let (s0, s1) = (w[0], w[1]);
            let left_levels = if singular_ends && i == 0 { GRADING_LEVELS } else { 0 };
            let right_levels = if s1 == x {
                if singular_ends && i == last {
                    GRADING_LEVELS
                } else {
                    0
                }
            } else {
                let ratio = (s1 - s0) / (x - s1);
                if ratio > 1.0 {
                    (ratio.log2().ceil() as usize).min(GRADING_LEVELS)
                } else {
                    0
                }
            };
            let cap = level_cap(s0, s1);
            for (lo, hi) in graded_pieces(s0, s1, left_levels.min(cap), right_levels.min(cap)) {
                if hi == x {
                    total += self.jacobi.integrate(lo, hi, &mut g);
                } else {
                    // distance to x from the near end keeps tiny pieces accurate
                    let (half, gap) = (0.5 * (hi - lo), x - hi);
                    let mut acc = 0.0;
                    for (y, w) in self.legendre.nodes().iter().zip(self.legendre.weights()) {
                        let d = gap + half * (1.0 - y);
                        acc += w * g(lo + half * (1.0 + y)) * d.powf(e);
                    }
                    total += half * acc;
                }
            }
        }
        total
    }

    /// `int_x^b g(xi) (xi - x)^e dxi`, the mirror image of [`Self::to_point`].
    pub fn from_point<G: FnMut(f64) -> f64>(
        &self,
        mut g: G,
        x: f64,
        b: f64,
        breaks: &[f64],
        singular_ends: bool,
    ) -> f64 {
        let mirrored: Vec<f64> = breaks.iter().rev().map(|t| -t).collect();
        self.to_point(|eta| g(-eta), -b, -x, &mirrored, singular_ends)
    }
}

/// Deepest grading level whose pieces stay well above rounding at this scale.
pub(crate) fn level_cap(s0: f64, s1: f64) -> usize {
    let scale = s0.abs().max(s1.abs()).max(f64::MIN_POSITIVE);
    let rel = (s1 - s0) / scale;
    ((rel / 1e-13).log2().floor().max(0.0) as usize).min(GRADING_LEVELS)
}

/// Splits `[s0, s1]` at its midpoint and grades each half geometrically
/// towards its outer end with the given number of levels.
pub(crate) fn graded_pieces(s0: f64, s1: f64, left_levels: usize, right_levels: usize) -> Vec<(f64, f64)> {
    if left_levels == 0 && right_levels == 0 {
        return vec![(s0, s1)];
    }
    let mid = 0.5 * (s0 + s1);
    let half = mid - s0;
    let mut out = Vec::with_capacity(left_levels + right_levels + 2);
    // left half, from s0 outwards
    if left_levels == 0 {
        out.push((s0, mid));
    } else {
        let mut edge = s0 + half * 0.5f64.powi(left_levels as i32);
        out.push((s0, edge));
        for k in (0..left_levels).rev() {
            let next = if k == 0 { mid } else { s0 + half * 0.5f64.powi(k as i32) };
            out.push((edge, next));
            edge = next;
        }
    }
    if right_levels == 0 {
        out.push((mid, s1));
    } else {
        let mut edge = mid;
        for k in 1..=right_levels {
            let next = s1 - half * 0.5f64.powi(k as i32);
            out.push((edge, next));
            edge = next;
        }
        out.push((edge, s1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use approx::assert_relative_eq;

    fn beta(p: f64, q: f64) -> f64 {
        gamma(p).unwrap() * gamma(q).unwrap() / gamma(p + q).unwrap()
    }

    #[test]
    fn legendre_small_rule() {
        let r = QuadratureRule::gauss_legendre(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes()[0], -x, max_relative = 1e-15);
        assert_relative_eq!(r.nodes()[1], x, max_relative = 1e-15);
        assert_relative_eq!(r.weights()[0], 1.0, max_relative = 1e-14);
        assert_eq!(r.kind(), QuadratureKind::GaussLegendre);
    }

    #[test]
    fn jacobi_exact_on_monomials() {
        // int_0^1 (1-x)^a x^b x^k dx = B(k + b + 1, a + 1)
        for &(a, b) in &[(0.0, 0.0), (-0.5, 0.0), (0.5, -0.25), (-0.95, -0.4), (0.75, 0.0), (-0.125, -0.875)] {
            for n in [5usize, 16, 64] {
                let r = QuadratureRule::gauss_jacobi(n, a, b).unwrap();
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.nodes().iter().all(|&y| y > -1.0 && y < 1.0));
                for k in 0..(2 * n).min(40) {
                    let got = r.integrate(0.0, 1.0, |x| x.powi(k as i32));
                    let want = beta(k as f64 + b + 1.0, a + 1.0);
                    assert_relative_eq!(got, want, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn exponent_validation() {
        assert!(QuadratureRule::gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(QuadratureRule::gauss_jacobi(0, 0.0, 0.0).is_err());
        let r = QuadratureRule::for_rl_left(0.7, 8).unwrap();
        assert!(r.require_exponents(-0.3, 0.0).is_ok());
        assert!(r.require_exponents(0.0, -0.3).is_err());
    }

    #[test]
    fn graded_pieces_tile_interval() {
        for (l, r) in [(0, 0), (3, 0), (0, 4), (5, 7)] {
            let p = graded_pieces(0.2, 1.0, l, r);
            assert_eq!(p.first().unwrap().0, 0.2);
            assert_eq!(p.last().unwrap().1, 1.0);
            for w in p.windows(2) {
                assert_eq!(w[0].1, w[1].0);
                assert!(w[0].0 < w[0].1);
            }
        }
    }

    #[test]
    fn kernel_integrator_with_breaks_and_sqrt_end() {
        // int_0^x sqrt(xi) (x - xi)^e dxi = B(1.5, e + 1) x^(e + 1.5)
        let e = -0.6;
        let ki = KernelIntegrator::new(e, 32).unwrap();
        let x = 0.7;
        let got = ki.to_point(f64::sqrt, 0.0, x, &[0.1, 0.3, 0.69], true);
        let want = beta(1.5, e + 1.0) * x.powf(e + 1.5);
        assert_relative_eq!(got, want, max_relative = 1e-11);
        // mirrored
        let got = ki.from_point(|t| (1.0 - t).sqrt(), 1.0 - x, 1.0, &[0.5], true);
        assert_relative_eq!(got, want, max_relative = 1e-11);
        // piecewise integrand: |xi - 0.4| with a break
        let got = ki.to_point(|t| (t - 0.4).abs(), 0.0, 1.0, &[0.4], false);
        let want_left = {
            // int_0^0.4 (0.4 - t)(1 - t)^e + int_0.4^1 (t - 0.4)(1 - t)^e
            let r = QuadratureRule::gauss_jacobi(40, e, 0.0).unwrap();
            r.integrate(0.4, 1.0, |t| t - 0.4)
                + QuadratureRule::gauss_legendre(40).unwrap().integrate(0.0, 0.4, |t| (0.4 - t) * (1.0 - t).powf(e))
        };
        assert_relative_eq!(got, want_left, max_relative = 1e-12);
    }
}
