//! Clamped B-spline bases on `[0, L]` with uniform interior knots.
//!
//! The endpoint knots have multiplicity `n + 1` and the interior knots
//! `h, 2h, ..., L - h` are simple, which gives `L/h + n` basis functions that
//! form a partition of unity, satisfy `N_j(0) = delta_{j0}` and
//! `N_{B-1-j}(L) = delta_{j0}`, and are centrally symmetric under
//! `x -> L - x`.
//!
//! Evaluation is right-continuous at interior knots and takes the left limit at
//! `x = L`.

use crate::error::{Error, Result};

/// Clamped knot sequence with uniform interior spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    step: f64,
    length: f64,
    intervals: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, step: f64, length: f64) -> Result<Self> {
        if !(2..=3).contains(&degree) {
            return Err(Error::InvalidDegree(degree));
        }
        if !(step > 0.0 && length > 0.0 && step.is_finite() && length.is_finite()) {
            return Err(Error::InvalidStep {
                h: step,
                length,
                min: degree,
            });
        }
        let ratio = length / step;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > 1e-9 * ratio.max(1.0) || (intervals as usize) < degree {
            return Err(Error::InvalidStep {
                h: step,
                length,
                min: degree,
            });
        }
        let intervals = intervals as usize;
        let mut knots = Vec::with_capacity(intervals + 2 * degree + 1);
        knots.extend(std::iter::repeat_n(0.0, degree + 1));
        knots.extend((1..intervals).map(|i| length * i as f64 / intervals as f64));
        knots.extend(std::iter::repeat_n(length, degree + 1));
        Ok(Self {
            degree,
            step: length / intervals as f64,
            length,
            intervals,
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of knot intervals `L / h`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Multiplicity of the knot value at position `i`.
    fn multiplicity_at(&self, i: usize) -> usize {
        let t = self.knots[i];
        self.knots.iter().filter(|&&k| k == t).count()
    }
}

/// One term `coeff * (x - breakpoint)_+^power` of a truncated-power sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPowerTerm {
    pub breakpoint: f64,
    pub power: u32,
    pub coeff: f64,
}

impl TruncatedPowerTerm {
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.breakpoint {
            return 0.0;
        }
        if self.power == 0 {
            self.coeff
        } else {
            self.coeff * (x - self.breakpoint).powi(self.power as i32)
        }
    }
}

/// Second derivative of a basis function written as a sum of truncated
/// powers. Terms at `t = 0` carry the Taylor coefficients of the first
/// polynomial piece; every other term is a derivative jump at a knot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruncatedPowerExpansion {
    terms: Vec<TruncatedPowerTerm>,
}

impl TruncatedPowerExpansion {
    pub fn terms(&self) -> &[TruncatedPowerTerm] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Combines several expansions with weights, merging equal
    /// (breakpoint, power) pairs.
    pub fn linear_combination<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a TruncatedPowerExpansion)>,
    {
        let mut terms: Vec<TruncatedPowerTerm> = Vec::new();
        for (w, e) in parts {
            for t in &e.terms {
                match terms
                    .iter_mut()
                    .find(|s| s.breakpoint == t.breakpoint && s.power == t.power)
                {
                    Some(s) => s.coeff += w * t.coeff,
                    None => terms.push(TruncatedPowerTerm {
                        coeff: w * t.coeff,
                        ..*t
                    }),
                }
            }
        }
        Self { terms }
    }
}

/// Clamped B-spline basis with its Greville abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    knots: KnotVector,
    count: usize,
    greville: Vec<f64>,
}

impl SplineBasis {
    /// Builds the degree-`degree` basis on `[0, length]` with step `step`.
    /// Requires `length / step` to be an integer no smaller than the degree.
    pub fn new(degree: usize, step: f64, length: f64) -> Result<Self> {
        let knots = KnotVector::new(degree, step, length)?;
        let count = knots.len() - degree - 1;
        let t = knots.as_slice();
        let greville = (0..count)
            .map(|p| t[p + 1..=p + degree].iter().sum::<f64>() / degree as f64)
            .collect();
        Ok(Self {
            knots,
            count,
            greville,
        })
    }

    pub fn degree(&self) -> usize {
        self.knots.degree
    }

    pub fn step(&self) -> f64 {
        self.knots.step
    }

    pub fn length(&self) -> f64 {
        self.knots.length
    }

    /// Number of basis functions `B`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knots
    }

    pub fn knots(&self) -> &[f64] {
        self.knots.as_slice()
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> &[f64] {
        &self.greville
    }

    /// Index of the mirrored basis function `B - 1 - j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.count - 1 - j
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.count {
            return Err(Error::IndexOutOfRange {
                index: j,
                count: self.count,
            });
        }
        Ok(())
    }

    fn check_point(&self, x: f64) -> Result<()> {
        let len = self.length();
        if !(x >= 0.0 && x <= len) {
            return Err(Error::OutOfInterval { x, length: len });
        }
        Ok(())
    }

    /// Knot span `mu` with `t_mu <= x < t_{mu+1}`; `x = L` maps to the last
    /// non-empty span.
    pub fn find_span(&self, x: f64) -> usize {
        let n = self.degree();
        let t = self.knots();
        let last = self.count - 1;
        if x >= t[last + 1] {
            return last;
        }
        if x <= t[n] {
            return n;
        }
        // largest mu in [n, last] with t[mu] <= x
        let (mut lo, mut hi) = (n, last + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Derivatives of order `0..=order` of the `n + 1` functions that are
    /// nonzero on span `span`, evaluated at `x` using that span's polynomial
    /// pieces. Entry `[k][r]` is the k-th derivative of `N_{span - n + r}`.
    pub fn span_derivatives(&self, span: usize, x: f64, order: usize) -> Vec<Vec<f64>> {
        let p = self.degree();
        let t = self.knots();
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let nd = order.min(p);
        let mut ders = vec![vec![0.0; p + 1]; order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=nd {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Values of all basis functions nonzero at `x`, as (first index, values).
    pub fn nonzero(&self, x: f64) -> (usize, Vec<f64>) {
        let span = self.find_span(x);
        let mut ders = self.span_derivatives(span, x, 0);
        (span - self.degree(), ders.swap_remove(0))
    }

    /// `N_j(x)` by the Cox-de Boor recurrence.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        self.eval_derivative(j, 0, x)
    }

    /// Derivative of order `order` (0, 1 or 2) of `N_j` at `x`; one-sided at
    /// the endpoints.
    pub fn eval_derivative(&self, j: usize, order: usize, x: f64) -> Result<f64> {
        self.check_index(j)?;
        self.check_point(x)?;
        if order > 2 || order > self.degree() {
            return Err(Error::InvalidParameter(format!(
                "derivative order {order} not supported for degree {}",
                self.degree()
            )));
        }
        let n = self.degree();
        let span = self.find_span(x);
        if j + n < span || j > span {
            return Ok(0.0);
        }
        let ders = self.span_derivatives(span, x, order);
        Ok(ders[order][j + n - span])
    }

    /// Spline value `sum_k coeffs[k] N_k^{(order)}(x)`.
    pub fn combine(&self, coeffs: &[f64], order: usize, x: f64) -> Result<f64> {
        if coeffs.len() != self.count {
            return Err(Error::DimensionMismatch {
                expected: self.count,
                got: coeffs.len(),
            });
        }
        self.check_point(x)?;
        let n = self.degree();
        let span = self.find_span(x);
        let ders = self.span_derivatives(span, x, order);
        Ok(ders[order]
            .iter()
            .enumerate()
            .map(|(r, v)| v * coeffs[span - n + r])
            .sum())
    }

    /// Second derivative of `N_j` expanded as `sum_i d_i (x - t_i)_+^k_i`,
    /// valid on `(0, L)`.
    pub fn second_derivative_expansion(&self, j: usize) -> Result<TruncatedPowerExpansion> {
        self.check_index(j)?;
        let n = self.degree();
        let t = self.knots();
        let last = self.count - 1;
        let top = n - 2;
        // k-th derivative of N_j'' on span mu evaluated at x, or 0 off-support.
        let piece = |mu: usize, x: f64| -> Vec<f64> {
            if mu < n || mu > last || j + n < mu || j > mu {
                return vec![0.0; top + 1];
            }
            let ders = self.span_derivatives(mu, x, n);
            (0..=top).map(|k| ders[k + 2][j + n - mu]).collect()
        };
        let mut terms = Vec::new();
        let lo = j.max(n);
        let hi = (j + n + 1).min(last + 1);
        for mu in lo..=hi {
            let tau = t[mu];
            if tau >= self.length() {
                break;
            }
            if mu > lo && t[mu - 1] == tau {
                continue;
            }
            let right = piece(mu, tau);
            if tau == 0.0 {
                let mut fact = 1.0;
                for (k, v) in right.iter().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    terms.push(TruncatedPowerTerm {
                        breakpoint: 0.0,
                        power: k as u32,
                        coeff: v / fact,
                    });
                }
                continue;
            }
            let left = piece(mu - 1, tau);
            let mult = self.knots.multiplicity_at(mu);
            let mut fact = 1.0;
            for k in 0..=top {
                if k > 0 {
                    fact *= k as f64;
                }
                // N is C^{n - mult} at the knot, so lower jumps vanish exactly.
                if k + 2 + mult <= n {
                    continue;
                }
                let jump = (right[k] - left[k]) / fact;
                terms.push(TruncatedPowerTerm {
                    breakpoint: tau,
                    power: k as u32,
                    coeff: jump,
                });
            }
        }
        Ok(TruncatedPowerExpansion { terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn configs() -> Vec<SplineBasis> {
        let mut out = Vec::new();
        for n in [2, 3] {
            for h in [0.5, 0.25, 0.125, 1.0 / 32.0] {
                if let Ok(b) = SplineBasis::new(n, h, 1.0) {
                    out.push(b);
                }
            }
            out.push(SplineBasis::new(n, 0.5, 2.0).unwrap());
        }
        out
    }

    #[test]
    fn make_basis_quadratic_half_step() {
        let b = SplineBasis::new(2, 0.5, 1.0).unwrap();
        assert_eq!(b.knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(b.count(), 4);
        assert_eq!(b.greville(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(b.knot_vector().len(), 2 + 2 * 2 + 1);
    }

    #[test]
    fn make_basis_rejects_bad_input() {
        assert!(matches!(SplineBasis::new(2, 1.0, 1.0), Err(Error::InvalidStep { .. })));
        assert!(matches!(SplineBasis::new(3, 0.3, 1.0), Err(Error::InvalidStep { .. })));
        assert!(matches!(SplineBasis::new(4, 0.125, 1.0), Err(Error::InvalidDegree(4))));
        assert!(matches!(SplineBasis::new(1, 0.125, 1.0), Err(Error::InvalidDegree(1))));
    }

    #[test]
    fn make_basis_cubic_eighth() {
        let b = SplineBasis::new(3, 0.125, 1.0).unwrap();
        assert_eq!(b.count(), 11);
        assert_eq!(b.greville()[0], 0.0);
        assert_eq!(b.greville()[10], 1.0);
        assert!(b.greville().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn endpoint_values() {
        let b = SplineBasis::new(2, 0.5, 1.0).unwrap();
        assert_eq!(b.eval(0, 0.0).unwrap(), 1.0);
        assert_eq!(b.eval(1, 0.0).unwrap(), 0.0);
        assert_eq!(b.eval(3, 1.0).unwrap(), 1.0);
        assert!(b.eval(4, 0.5).is_err());
        assert!(b.eval(0, 1.5).is_err());
    }

    #[test]
    fn first_derivative_at_left_end() {
        let b = SplineBasis::new(2, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(b.eval_derivative(0, 1, 0.0).unwrap(), -4.0, epsilon = 1e-13);
        let fd = (b.eval(0, 2e-6).unwrap() - b.eval(0, 0.0).unwrap()) / 2e-6;
        assert_abs_diff_eq!(fd, -4.0, epsilon = 1e-4);
        let s: f64 = (0..4).map(|j| b.eval_derivative(j, 1, 0.3).unwrap()).sum();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let b = SplineBasis::new(3, 0.25, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eps = 1e-4;
        let mut checked = 0;
        while checked < 100 {
            let x: f64 = rng.gen_range(eps..1.0 - eps);
            // keep the stencil inside one knot interval
            let span = b.find_span(x);
            if x - eps < b.knots()[span] || x + eps >= b.knots()[span + 1] {
                continue;
            }
            let j = rng.gen_range(0..b.count());
            let fd = (b.eval(j, x + eps).unwrap() - 2.0 * b.eval(j, x).unwrap() + b.eval(j, x - eps).unwrap())
                / (eps * eps);
            assert_abs_diff_eq!(b.eval_derivative(j, 2, x).unwrap(), fd, epsilon = 1e-6 * 16.0f64.max(fd.abs()));
            checked += 1;
        }
    }

    #[test]
    fn partition_of_unity_and_endpoint_deltas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for b in configs() {
            let len = b.length();
            for _ in 0..1000 {
                let x = rng.gen_range(0.0..=len);
                let s: f64 = (0..b.count()).map(|j| b.eval(j, x).unwrap()).sum();
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
            }
            for j in 0..b.count() {
                let d = if j == 0 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b.eval(j, 0.0).unwrap(), d, epsilon = 1e-14);
                assert_abs_diff_eq!(b.eval(b.mirror(j), len).unwrap(), d, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn central_symmetry_and_linear_reproduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for b in configs() {
            let len = b.length();
            for _ in 0..500 {
                let x = rng.gen_range(0.0..=len);
                let j = rng.gen_range(0..b.count());
                assert_abs_diff_eq!(
                    b.eval(j, x).unwrap(),
                    b.eval(b.mirror(j), len - x).unwrap(),
                    epsilon = 1e-12
                );
                let lin = b.combine(b.greville(), 0, x).unwrap();
                assert_abs_diff_eq!(lin, x, epsilon = 1e-12);
            }
            let g = b.greville();
            for p in 0..g.len() {
                assert_abs_diff_eq!(g[p] + g[g.len() - 1 - p], len, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn expansion_matches_second_derivative_at_midpoints() {
        for b in configs() {
            let t = b.knots().to_vec();
            for j in 0..b.count() {
                let e = b.second_derivative_expansion(j).unwrap();
                let scale = b.step().powi(-(b.degree() as i32)).max(1.0);
                for w in t.windows(2) {
                    if w[1] > w[0] {
                        for frac in [0.25, 0.5, 0.8] {
                            let x = w[0] + frac * (w[1] - w[0]);
                            let want = b.eval_derivative(j, 2, x).unwrap();
                            assert_abs_diff_eq!(e.eval(x), want, epsilon = 1e-12 * scale);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_sums_to_zero_and_vanishes_past_support() {
        for b in configs() {
            let exps: Vec<_> = (0..b.count())
                .map(|j| b.second_derivative_expansion(j).unwrap())
                .collect();
            let total = TruncatedPowerExpansion::linear_combination(exps.iter().map(|e| (1.0, e)));
            let scale = b.step().powi(-(b.degree() as i32));
            for term in total.terms() {
                assert_abs_diff_eq!(term.coeff, 0.0, epsilon = 1e-11 * scale);
            }
            if b.degree() == 3 {
                for j in b.degree()..b.count() - b.degree() {
                    let end = b.knots()[j + 4];
                    if end < b.length() {
                        let x = 0.5 * (end + b.length());
                        assert_abs_diff_eq!(exps[j].eval(x), 0.0, epsilon = 1e-12 * scale);
                        let sum: f64 = exps[j].terms().iter().map(|t| t.coeff).sum();
                        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-12 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_expansion_is_jump_list() {
        let b = SplineBasis::new(2, 0.5, 1.0).unwrap();
        let e = b.second_derivative_expansion(1).unwrap();
        for t in e.terms() {
            assert_eq!(t.power, 0);
        }
        let x1 = 0.25;
        let x2 = 0.75;
        assert_abs_diff_eq!(e.eval(x1), b.eval_derivative(1, 2, x1).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.eval(x2), b.eval_derivative(1, 2, x2).unwrap(), epsilon = 1e-12);
    }
}
