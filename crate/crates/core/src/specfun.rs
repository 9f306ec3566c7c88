//! Scalar special functions: Euler gamma, the Gauss hypergeometric function
//! `2F1`, the generalized hypergeometric function `1F2`, and the power-law
//! Caputo coefficient built on top of them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fracops::FractionalOrder;

// Godfrey's Lanczos coefficients, g = 607/128.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Tolerance and term cap for the hypergeometric power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "series rel_tol must lie in (0, 1e-3), got {rel_tol}"
            )));
        }
        if max_terms < 50 {
            return Err(Error::InvalidParameter(format!(
                "series max_terms must be at least 50, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 500,
        }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// Lanczos sum for `Gamma(x)` with `x >= 0.5`.
fn gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // Split the power so large arguments do not overflow before exp(-t) kicks in.
    let p = t.powf((z + 0.5) / 2.0);
    (2.0 * PI).sqrt() * p * (p * (-t).exp()) * acc
}

/// Euler gamma function. Negative non-integer arguments use the reflection
/// formula `Gamma(x) Gamma(1 - x) = pi / sin(pi x)`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidParameter("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole { function: "gamma", at: x });
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * gamma_lanczos(1.0 - x)))
    } else {
        Ok(gamma_lanczos(x))
    }
}

/// `1 / Gamma(x)`, which is entire: returns 0 at the poles of gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        sin_pi(x) * gamma_lanczos(1.0 - x) / PI
    } else {
        1.0 / gamma_lanczos(x)
    }
}

/// Natural log of `Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        return (PI / sin_pi(x)).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Sums a hypergeometric-type series whose term ratio is `ratio(k)`
/// (term_{k+1} = term_k * ratio(k)). Stops once two consecutive terms fall
/// below `rel_tol * |sum|`. `ratio` returns `None` when the series hits a
/// pole in a lower parameter without having terminated.
fn sum_series<R>(name: &'static str, ctl: &SeriesControl, mut ratio: R) -> Result<f64>
where
    R: FnMut(usize, f64) -> Result<Option<f64>>,
{
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut small = 0;
    for k in 0..ctl.max_terms {
        match ratio(k, term)? {
            Some(r) => term *= r,
            None => return Ok(sum),
        }
        sum += term;
        if term.abs() <= ctl.rel_tol * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: name,
        iterations: ctl.max_terms,
    })
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    sum_series("hyp2f1 series", ctl, |k, term| {
        let k = k as f64;
        let num = (a + k) * (b + k);
        if num == 0.0 || term == 0.0 {
            return Ok(None);
        }
        let den = (c + k) * (k + 1.0);
        if den == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "2F1 lower parameter c = {c} is a non-positive integer and the series does not terminate"
            )));
        }
        Ok(Some(num / den * z))
    })
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `z` in `[0, 1]`,
/// with the default [`SeriesControl`].
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with(a, b, c, z, &SeriesControl::default())
}

/// `2F1(a, b; c; z)` on `[0, 1]`. Direct power series for `z <= 1/2` or
/// terminating series; otherwise the `z -> 1 - z` connection formula, which
/// needs `c - a - b` non-integer. At `z = 1` this reduces to Gauss's sum and
/// requires `c - a - b > 0`.
pub fn hyp2f1_with(a: f64, b: f64, c: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1 argument z = {z} outside [0, 1]")));
    }
    if z == 0.0 {
        // Still reject a pole in c for a non-terminating series.
        if is_nonpositive_integer(c) && !terminates_before(a, b, c) {
            return Err(Error::InvalidParameter(format!(
                "2F1 lower parameter c = {c} is a non-positive integer"
            )));
        }
        return Ok(1.0);
    }
    let terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    if z <= 0.5 || (terminating && z < 1.0) {
        return hyp2f1_series(a, b, c, z, ctl);
    }
    if is_nonpositive_integer(c) && !terminates_before(a, b, c) {
        return Err(Error::InvalidParameter(format!(
            "2F1 lower parameter c = {c} is a non-positive integer"
        )));
    }
    let s = c - a - b;
    if (s - s.round()).abs() < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "2F1 connection formula needs c - a - b non-integer, got {s}"
        )));
    }
    let w = 1.0 - z;
    let gc = gamma(c)?;
    let first = gc * gamma(s)? * rgamma(c - a) * rgamma(c - b);
    let first_series = if first == 0.0 {
        0.0
    } else {
        hyp2f1_series(a, b, a + b - c + 1.0, w, ctl)?
    };
    let second = if w == 0.0 {
        if s < 0.0 {
            return Err(Error::Domain(format!(
                "2F1 diverges at z = 1 when c - a - b = {s} < 0"
            )));
        }
        0.0
    } else {
        let coeff = gc * gamma(-s)? * rgamma(a) * rgamma(b);
        if coeff == 0.0 {
            0.0
        } else {
            coeff * w.powf(s) * hyp2f1_series(c - a, c - b, s + 1.0, w, ctl)?
        }
    };
    Ok(first * first_series + second)
}

/// True when `(a)_k (b)_k` vanishes before `(c)_k` does.
fn terminates_before(a: f64, b: f64, c: f64) -> bool {
    let kc = -c;
    [a, b]
        .iter()
        .any(|&p| is_nonpositive_integer(p) && -p < kc)
}

/// `1F2(a; b1, b2; z)` with the default [`SeriesControl`].
pub fn hyp1f2(a: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    hyp1f2_with(a, b1, b2, z, &SeriesControl::default())
}

/// `1F2(a; b1, b2; z)` by direct power series (entire in `z`).
pub fn hyp1f2_with(a: f64, b1: f64, b2: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    for b in [b1, b2] {
        if is_nonpositive_integer(b) {
            return Err(Error::InvalidParameter(format!(
                "1F2 lower parameter {b} is a non-positive integer"
            )));
        }
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    sum_series("hyp1f2 series", ctl, |k, term| {
        let k = k as f64;
        let num = a + k;
        if num == 0.0 || term == 0.0 {
            return Ok(None);
        }
        Ok(Some(num / ((b1 + k) * (b2 + k) * (k + 1.0)) * z))
    })
}

/// Coefficient `c` in `D^alpha_{0,x} x^nu = c * x^(nu - alpha)` for the left
/// Caputo derivative of order `1 < alpha < 2`. Constants and linear functions
/// are annihilated, so `nu` in `{0, 1}` gives 0.
pub fn caputo_power_coefficient(nu: f64, alpha: FractionalOrder) -> Result<f64> {
    if nu == 0.0 || nu == 1.0 {
        return Ok(0.0);
    }
    if !(nu > 1.0) {
        return Err(Error::Domain(format!(
            "power exponent nu = {nu} must be 0, 1 or greater than 1"
        )));
    }
    Ok(gamma(nu + 1.0)? * rgamma(nu + 1.0 - alpha.value()))
}
