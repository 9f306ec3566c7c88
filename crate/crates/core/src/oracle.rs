//! Integral-equation formulation of the boundary value problem, used as an
//! independent check on collocation.
//!
//! The operator
//!
//! ```text
//! T(u)(x) = A/(alpha-1) int_0^x f(s,u(s)) (x-s)^(alpha-1) ds
//!         + B/(alpha-1) int_0^x h'(t) ((L-t)/t)^((2-alpha)/2) (x-t)^(alpha-1) dt
//!         + C1 x + C0
//! ```
//!
//! with `h(t) = int_0^t (t-r)^(1-alpha) F(r) dr` and
//! `F(r) = int_r^L ((L-s)/s)^(-(2-alpha)/2) f(s,u(s)) (s-r)^(alpha-2) ds`
//! is evaluated by graded Gauss-Jacobi quadrature. Functions of `x` are
//! tabulated on Chebyshev points and interpolated barycentrically.
//!
//! `h(t) = t^beta H(t)` with `beta = 2 - alpha` and a smooth `H`, so the
//! tabulation is done for `H` and `h'` is rebuilt as
//! `beta t^(beta-1) H + t^beta H'`.

use std::f64::consts::PI;

use crate::collocation::ProblemSpec;
use crate::error::{Error, Result};
use crate::fracops::quadrature::{graded_pieces, level_cap, QuadratureRule};
use crate::fracops::FractionalOrder;

/// Chebyshev points of the first kind mapped into `(0, L)`, increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    length: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn new(points: usize, length: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 points, got {points}")));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        let n = points as f64;
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for k in 0..points {
            let theta = (2.0 * k as f64 + 1.0) * PI / (2.0 * n);
            nodes.push(0.5 * length * (1.0 - theta.cos()));
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            weights.push(sign * theta.sin());
        }
        Ok(Self { length, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Value at `x` of the polynomial through `(nodes, values)`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xk, &wk), &vk) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xk;
            if d == 0.0 {
                return vk;
            }
            let t = wk / d;
            num += t * vk;
            den += t;
        }
        num / den
    }

    /// Values at the nodes of the derivative of the interpolant.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (self.weights[j] / self.weights[i]) / (self.nodes[i] - self.nodes[j]);
                    acc += d * values[j];
                    diag -= d;
                }
            }
            out[i] = acc + diag * values[i];
        }
        out
    }
}

/// Samples of a function on a [`ChebyshevGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: ChebyshevGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: ChebyshevGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn sample<F: Fn(f64) -> f64>(grid: ChebyshevGrid, f: F) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    /// Maximum nodal difference.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `int_lo^hi (x - lo)^ea (hi - x)^eb f(x) dx`. The interval is split at its
/// midpoint and each half is graded geometrically towards its end by the
/// requested number of levels, so that `f` may be non-smooth at, or close
/// beyond, either end.
#[derive(Debug, Clone)]
struct WeightedRule {
    ea: f64,
    eb: f64,
    at_lo: QuadratureRule,
    at_hi: QuadratureRule,
    both: QuadratureRule,
    plain: QuadratureRule,
    max_levels: usize,
}

impl WeightedRule {
    fn new(ea: f64, eb: f64, nodes: usize, max_levels: usize) -> Result<Self> {
        Ok(Self {
            ea,
            eb,
            at_lo: QuadratureRule::gauss_jacobi(nodes, 0.0, ea)?,
            at_hi: QuadratureRule::gauss_jacobi(nodes, eb, 0.0)?,
            both: QuadratureRule::gauss_jacobi(nodes, eb, ea)?,
            plain: QuadratureRule::gauss_legendre(nodes)?,
            max_levels,
        })
    }

    /// Levels needed at an end whose nearest non-smooth point of `f` lies
    /// `gap` beyond it (`gap = 0` means at the end itself).
    fn levels_for(&self, gap: f64, width: f64) -> usize {
        if gap <= 0.0 {
            return self.max_levels;
        }
        let ratio = 0.5 * width / gap;
        if ratio <= 1.0 {
            0
        } else {
            (ratio.log2().ceil() as usize).min(self.max_levels)
        }
    }

    /// `lo_gap` and `hi_gap` are the distances from the ends to the nearest
    /// non-smooth point of `f` outside the interval; `None` for none.
    fn integrate<F: FnMut(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        lo_gap: Option<f64>,
        hi_gap: Option<f64>,
        mut f: F,
    ) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let width = hi - lo;
        let cap = level_cap(lo, hi);
        let ll = lo_gap.map_or(0, |g| self.levels_for(g, width)).min(cap);
        let hl = hi_gap.map_or(0, |g| self.levels_for(g, width)).min(cap);
        if ll == 0 && hl == 0 {
            return self.both.integrate(lo, hi, f);
        }
        let pieces = graded_pieces(lo, hi, ll, hl);
        let last = pieces.len() - 1;
        let mut total = 0.0;
        for (i, &(a, b)) in pieces.iter().enumerate() {
            let half = 0.5 * (b - a);
            let (rule, scale) = if i == 0 {
                (&self.at_lo, half.powf(1.0 + self.ea))
            } else if i == last {
                (&self.at_hi, half.powf(1.0 + self.eb))
            } else {
                (&self.plain, half)
            };
            let mut acc = 0.0;
            for (y, w) in rule.nodes().iter().zip(rule.weights()) {
                let x = a + half * (1.0 + y);
                let mut v = w * f(x);
                if i != 0 {
                    v *= ((a - lo) + half * (1.0 + y)).powf(self.ea);
                }
                if i != last {
                    v *= ((hi - b) + half * (1.0 - y)).powf(self.eb);
                }
                acc += v;
            }
            total += scale * acc;
        }
        total
    }
}

/// Tabulated `H = h / t^beta` and its derivative.
#[derive(Debug, Clone)]
pub struct HTable {
    grid: ChebyshevGrid,
    beta: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HTable {
    pub fn h(&self, t: f64) -> f64 {
        t.powf(self.beta) * self.grid.interpolate(&self.values, t)
    }

    pub fn h_prime(&self, t: f64) -> f64 {
        let hh = self.grid.interpolate(&self.values, t);
        let dh = self.grid.interpolate(&self.slopes, t);
        self.beta * t.powf(self.beta - 1.0) * hh + t.powf(self.beta) * dh
    }

    /// `t^(1 - beta) h'(t) = beta H + t H'`, smooth up to `t = 0`.
    fn scaled_h_prime(&self, t: f64) -> f64 {
        self.beta * self.grid.interpolate(&self.values, t) + t * self.grid.interpolate(&self.slopes, t)
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Points of the grid carrying `u`.
    pub grid_points: usize,
    /// Points of the grid carrying `H`.
    pub h_points: usize,
    /// Gauss nodes per quadrature piece.
    pub nodes: usize,
    /// Geometric grading levels towards each end of an integral.
    pub levels: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            grid_points: 32,
            h_points: 48,
            nodes: 10,
            levels: 12,
        }
    }
}

/// The constants of the representation and the quadrature rules it needs.
#[derive(Debug, Clone)]
pub struct IntegralRepresentation {
    problem: ProblemSpec,
    alpha: f64,
    a_coef: f64,
    b_coef: f64,
    grid: ChebyshevGrid,
    h_grid: ChebyshevGrid,
    rule_f: WeightedRule,
    rule_h: WeightedRule,
    rule_p1: WeightedRule,
    rule_p2: WeightedRule,
    rule_q1: WeightedRule,
    rule_q2: WeightedRule,
    rule_i2: WeightedRule,
    rule_j2: WeightedRule,
}

/// `A = -tan(alpha pi / 2) / pi` and `B = 2 sin^2(alpha pi / 2) / pi^2`.
pub fn representation_coefficients(alpha: FractionalOrder) -> (f64, f64) {
    let half = alpha.value() * PI / 2.0;
    (-half.tan() / PI, 2.0 * half.sin().powi(2) / (PI * PI))
}

impl IntegralRepresentation {
    pub fn new(problem: &ProblemSpec, opts: &OracleOptions) -> Result<Self> {
        if opts.h_points < 16 {
            return Err(Error::InvalidParameter(format!(
                "h grid needs at least 16 points, got {}",
                opts.h_points
            )));
        }
        let alpha = problem.alpha().value();
        let beta = 2.0 - alpha;
        let (a_coef, b_coef) = representation_coefficients(problem.alpha());
        let len = problem.length();
        let (n, lv) = (opts.nodes, opts.levels);
        Ok(Self {
            problem: problem.clone(),
            alpha,
            a_coef,
            b_coef,
            grid: ChebyshevGrid::new(opts.grid_points, len)?,
            h_grid: ChebyshevGrid::new(opts.h_points, len)?,
            rule_f: WeightedRule::new(-beta, -beta / 2.0, n, lv)?,
            rule_h: WeightedRule::new(0.0, beta - 1.0, n, lv)?,
            rule_p1: WeightedRule::new(0.0, alpha - 1.0, n, lv)?,
            rule_p2: WeightedRule::new(beta / 2.0 - 1.0, alpha - 1.0, n, lv)?,
            rule_q1: WeightedRule::new(0.0, alpha - 2.0, n, lv)?,
            rule_q2: WeightedRule::new(beta / 2.0 - 1.0, alpha - 2.0, n, lv)?,
            rule_i2: WeightedRule::new(beta / 2.0 - 1.0, alpha / 2.0, n, lv)?,
            rule_j2: WeightedRule::new(beta / 2.0 - 1.0, -beta / 2.0, n, lv)?,
        })
    }

    pub fn a(&self) -> f64 {
        self.a_coef
    }

    pub fn b(&self) -> f64 {
        self.b_coef
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    fn beta(&self) -> f64 {
        2.0 - self.alpha
    }

    fn length(&self) -> f64 {
        self.problem.length()
    }

    /// `F(r)` for the source `g(s) = f(s, u(s))`.
    pub fn compute_f<G: Fn(f64) -> f64>(&self, r: f64, g: G) -> Result<f64> {
        let len = self.length();
        if !(r > 0.0 && r < len) {
            return Err(Error::Domain(format!("F needs 0 < r < L, got r = {r}")));
        }
        Ok(self.f_unchecked(r, &g))
    }

    fn f_unchecked<G: Fn(f64) -> f64>(&self, r: f64, g: &G) -> f64 {
        let half_beta = self.beta() / 2.0;
        self.rule_f.integrate(r, self.length(), Some(r), None, |s| s.powf(half_beta) * g(s))
    }

    /// Tabulates `H(t) = int_0^1 (1-v)^(beta-1) F(t v) dv` on the h grid.
    pub fn tabulate_h<G: Fn(f64) -> f64>(&self, g: G) -> HTable {
        let values: Vec<f64> = self
            .h_grid
            .nodes()
            .iter()
            .map(|&t| self.rule_h.integrate(0.0, 1.0, Some(0.0), None, |v| self.f_unchecked(t * v, &g)))
            .collect();
        let slopes = self.h_grid.differentiate(&values);
        HTable {
            grid: self.h_grid.clone(),
            beta: self.beta(),
            values,
            slopes,
        }
    }

    /// `h'(tau)` for the source of `u`.
    pub fn compute_h_prime(&self, tau: f64, u: &GridFunction) -> Result<f64> {
        let len = self.length();
        if !(tau > 0.0 && tau < len) {
            return Err(Error::Domain(format!("h' needs 0 < tau < L, got {tau}")));
        }
        let table = self.tabulate_h(self.source(u));
        Ok(table.h_prime(tau))
    }

    fn source<'a>(&'a self, u: &'a GridFunction) -> impl Fn(f64) -> f64 + 'a {
        move |s| self.problem.f(s, u.eval(s))
    }

    /// `T(u)` with its constants.
    pub fn apply<'a>(&'a self, u: &'a GridFunction) -> Result<TImage<'a>> {
        if u.grid().length() != self.length() {
            return Err(Error::InvalidParameter("grid interval differs from problem interval".into()));
        }
        let len = self.length();
        let g = self.source(u);
        let table = self.tabulate_h(&g);
        let i1 = self.rule_p1.integrate(0.0, len, Some(0.0), None, &g);
        let i2 = self.rule_i2.integrate(0.0, len, None, None, |t| table.scaled_h_prime(t));
        let j1 = self.rule_q1.integrate(0.0, len, Some(0.0), None, &g);
        let j2 = self.rule_j2.integrate(0.0, len, None, None, |t| table.scaled_h_prime(t));
        let (a, b) = (self.a_coef, self.b_coef);
        let (b0, b1) = (self.problem.bc(0), self.problem.bc(1));
        let c1 = (b1.c - b1.b * (a * j1 + b * j2)) / (b1.a + b1.b);
        let k = self.alpha - 1.0;
        let c0 = (b0.c - b0.b * (a / k * i1 + b / k * i2) - b0.b * len * c1) / (b0.a + b0.b);
        let image = TImage {
            rep: self,
            u,
            table,
            i1,
            i2,
            j1,
            j2,
            c0,
            c1,
        };
        for v in [i1, i2, j1, j2, c0, c1] {
            if !v.is_finite() {
                return Err(Error::NonConvergence {
                    what: "integral representation quadrature",
                    iterations: 0,
                });
            }
        }
        Ok(image)
    }

    /// `T(u)` sampled on the working grid.
    pub fn apply_t(&self, u: &GridFunction) -> Result<GridFunction> {
        let img = self.apply(u)?;
        let values = self.grid.nodes().iter().map(|&x| img.value(x)).collect();
        GridFunction::new(self.grid.clone(), values)
    }

    /// Fixed-point iteration `u <- T(u)` from `u = 0`.
    pub fn picard_solve(&self, tol: f64, max_iter: usize) -> Result<PicardResult> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("Picard tolerance must be positive, got {tol}")));
        }
        let mut u = GridFunction::sample(self.grid.clone(), |_| 0.0);
        let mut distances = Vec::new();
        for _ in 0..=max_iter {
            let next = self.apply_t(&u)?;
            let d = next.distance(&u);
            distances.push(d);
            u = next;
            if d <= tol {
                // the last application only confirmed the fixed point
                return Ok(PicardResult {
                    solution: u,
                    iterations: distances.len() - 1,
                    distances,
                });
            }
        }
        Err(Error::NonConvergence {
            what: "Picard iteration",
            iterations: max_iter,
        })
    }
}

/// Result of a Picard solve.
#[derive(Debug, Clone)]
pub struct PicardResult {
    pub solution: GridFunction,
    /// Applications of `T` that moved the iterate by more than the tolerance.
    pub iterations: usize,
    /// Successive-iterate distances, one per application of `T`.
    pub distances: Vec<f64>,
}

/// `T(u)` as a function of `x`, with its boundary constants.
#[derive(Debug, Clone)]
pub struct TImage<'a> {
    rep: &'a IntegralRepresentation,
    u: &'a GridFunction,
    table: HTable,
    pub i1: f64,
    pub i2: f64,
    pub j1: f64,
    pub j2: f64,
    pub c0: f64,
    pub c1: f64,
}

impl TImage<'_> {
    pub fn h_table(&self) -> &HTable {
        &self.table
    }

    /// `T(u)(x)` for `x` in `[0, L]`.
    pub fn value(&self, x: f64) -> f64 {
        let rep = self.rep;
        let len = rep.length();
        let k = rep.alpha - 1.0;
        let (a, b) = (rep.a_coef, rep.b_coef);
        let (p1, p2) = if x >= len {
            (self.i1, self.i2)
        } else if x <= 0.0 {
            (0.0, 0.0)
        } else {
            let g = rep.source(self.u);
            let hb = rep.beta() / 2.0;
            (
                rep.rule_p1.integrate(0.0, x, Some(0.0), None, &g),
                rep.rule_p2
                    .integrate(0.0, x, None, Some(len - x), |t| (len - t).powf(hb) * self.table.scaled_h_prime(t)),
            )
        };
        a / k * p1 + b / k * p2 + self.c1 * x.clamp(0.0, len) + self.c0
    }

    /// Derivative of `T(u)` obtained by differentiating under the integrals.
    pub fn derivative(&self, x: f64) -> f64 {
        let rep = self.rep;
        let len = rep.length();
        let (a, b) = (rep.a_coef, rep.b_coef);
        let (q1, q2) = if x >= len {
            (self.j1, self.j2)
        } else if x <= 0.0 {
            (0.0, 0.0)
        } else {
            let g = rep.source(self.u);
            let hb = rep.beta() / 2.0;
            (
                rep.rule_q1.integrate(0.0, x, Some(0.0), None, &g),
                rep.rule_q2
                    .integrate(0.0, x, None, Some(len - x), |t| (len - t).powf(hb) * self.table.scaled_h_prime(t)),
            )
        };
        a * q1 + b * q2 + self.c1
    }

    /// Residuals of both boundary conditions for `T(u)`.
    pub fn boundary_residuals(&self) -> [f64; 2] {
        let len = self.rep.length();
        let p = &self.rep.problem;
        [
            p.bc(0).residual(self.value(0.0), self.value(len)),
            p.bc(1).residual(self.derivative(0.0), self.derivative(len)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::BoundaryCondition;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::sync::Arc;

    fn problem(f: crate::collocation::SourceFn, alpha: f64) -> ProblemSpec {
        ProblemSpec::new(
            FractionalOrder::new(alpha).unwrap(),
            1.0,
            f,
            [
                BoundaryCondition::new(0, 1.0, 1.0, 1.0).unwrap(),
                BoundaryCondition::new(1, 1.0, 1.0, 0.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chebyshev_interpolation_and_derivative() {
        let g = ChebyshevGrid::new(20, 2.0).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < 2.0);
        let f = GridFunction::sample(g.clone(), |x| (1.3 * x).sin());
        for x in [0.0, 0.37, 1.5, 2.0] {
            assert_abs_diff_eq!(f.eval(x), (1.3 * x).sin(), epsilon = 1e-12);
        }
        let d = g.differentiate(f.values());
        for (x, v) in g.nodes().iter().zip(&d) {
            assert_abs_diff_eq!(*v, 1.3 * (1.3 * x).cos(), epsilon = 1e-9);
        }
        assert!(ChebyshevGrid::new(1, 1.0).is_err());
    }

    #[test]
    fn weighted_rule_against_beta_integrals() {
        // int_0^1 x^ea (1-x)^eb x^2 dx = B(ea + 3, eb + 1)
        use crate::specfun::gamma;
        let beta = |p: f64, q: f64| gamma(p).unwrap() * gamma(q).unwrap() / gamma(p + q).unwrap();
        for (ea, eb) in [(0.0, 0.0), (-0.3, 0.4), (-0.8, -0.6)] {
            for gap in [None, Some(0.0), Some(0.01)] {
                let r = WeightedRule::new(ea, eb, 12, 8).unwrap();
                assert_relative_eq!(
                    r.integrate(0.0, 1.0, gap, gap, |x| x * x),
                    beta(ea + 3.0, eb + 1.0),
                    max_relative = 1e-12
                );
            }
        }
        let r = WeightedRule::new(0.0, -0.5, 12, 8).unwrap();
        // int_0^1 sqrt(x) (1-x)^-0.5 dx = pi / 2
        assert_relative_eq!(r.integrate(0.0, 1.0, Some(0.0), None, f64::sqrt), PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn coefficient_identities() {
        for a in [1.1, 1.25, 1.5, 1.75, 1.95] {
            let (_, b) = representation_coefficients(FractionalOrder::new(a).unwrap());
            let alt = (1.0 - (a * PI).cos()) / (PI * PI);
            assert_abs_diff_eq!(b, alt, epsilon = 1e-14);
        }
        let (a, _) = representation_coefficients(FractionalOrder::new(1.5).unwrap());
        assert_relative_eq!(a, 1.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn zero_source_gives_affine_image() {
        let p = problem(Arc::new(|_, _| 0.0), 1.4);
        let rep = IntegralRepresentation::new(&p, &OracleOptions::default()).unwrap();
        let u = GridFunction::sample(rep.grid().clone(), |x| x.exp());
        let t = rep.apply_t(&u).unwrap();
        assert!(t.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
        let res = rep.picard_solve(1e-12, 5).unwrap();
        assert_eq!(res.iterations, 1);
        let img = rep.apply(&u).unwrap();
        assert_eq!(img.h_table().h(0.4), 0.0);
        assert!(rep.compute_f(0.0, |_| 1.0).is_err());
        assert_eq!(rep.compute_f(0.3, |_| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn f_matches_refined_quadrature() {
        let p = problem(Arc::new(|_, _| 1.0), 1.3);
        let coarse = IntegralRepresentation::new(&p, &OracleOptions::default()).unwrap();
        let fine = IntegralRepresentation::new(
            &p,
            &OracleOptions {
                nodes: 40,
                levels: 30,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        for r in [0.01, 0.2, 0.5, 0.93] {
            let a = coarse.compute_f(r, |_| 1.0).unwrap();
            let b = fine.compute_f(r, |_| 1.0).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-7);
        }
    }

    #[test]
    fn h_is_nonnegative_for_unit_source() {
        let p = problem(Arc::new(|_, _| 1.0), 1.6);
        let rep = IntegralRepresentation::new(&p, &OracleOptions::default()).unwrap();
        let table = rep.tabulate_h(|_| 1.0);
        assert_eq!(table.h(0.0), 0.0);
        for &t in table.grid().nodes() {
            assert!(table.h(t) >= 0.0);
        }
        let small = OracleOptions {
            h_points: 10,
            ..OracleOptions::default()
        };
        assert!(IntegralRepresentation::new(&p, &small).is_err());
    }

    #[test]
    fn h_prime_self_convergence() {
        let p = crate::problems::example2(FractionalOrder::new(1.5).unwrap()).unwrap();
        let coarse = IntegralRepresentation::new(p.spec(), &OracleOptions::default()).unwrap();
        let fine = IntegralRepresentation::new(
            p.spec(),
            &OracleOptions {
                h_points: 96,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        let g = |s: f64| p.spec().f(s, p.exact(s));
        let (a, b) = (coarse.tabulate_h(g), fine.tabulate_h(g));
        // H has algebraic end singularities; the interior converges fastest
        for t in [0.1, 0.3, 0.5, 0.7] {
            assert_relative_eq!(a.h_prime(t), b.h_prime(t), max_relative = 3e-4);
        }
    }

    #[test]
    fn boundary_conditions_hold_for_any_input() {
        let p = ProblemSpec::new(
            FractionalOrder::new(1.7).unwrap(),
            1.0,
            Arc::new(|x, u: f64| u.sin() + x),
            [
                BoundaryCondition::new(0, 2.0, 1.0, 0.3).unwrap(),
                BoundaryCondition::new(1, 1.0, 3.0, -1.0).unwrap(),
            ],
        )
        .unwrap();
        let rep = IntegralRepresentation::new(&p, &OracleOptions::default()).unwrap();
        let u = GridFunction::sample(rep.grid().clone(), |x| 1.0 + x * x);
        let img = rep.apply(&u).unwrap();
        for r in img.boundary_residuals() {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        }
    }
}
