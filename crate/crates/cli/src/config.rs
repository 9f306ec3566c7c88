//! JSON configuration for `rcfrac solve`.
//!
//! ```json
//! {
//!   "alpha": 1.75,
//!   "length": 1.0,
//!   "degree": 2,
//!   "h": "1/32",
//!   "rhs": { "example": 1 },
//!   "bc": [
//!     { "order": 0, "a": 1, "b": 1, "c": 1 },
//!     { "order": 1, "a": 1, "b": 1, "c": 2.5 }
//!   ],
//!   "exact": "x^2.5",
//!   "samples": 101,
//!   "newton_tol": 1e-12,
//!   "max_iter": 50
//! }
//! ```
//!
//! `rhs` is either `{"example": 1}` / `{"example": 2}` or an expression in
//! `x` and `u`. With an example, `bc`, `exact` and `length` default to the
//! example's own and may be omitted.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub alpha: f64,
    pub length: Option<f64>,
    pub degree: usize,
    pub h: String,
    pub rhs: Rhs,
    pub bc: Option<Vec<BcConfig>>,
    pub exact: Option<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Rhs {
    Example { example: u8 },
    Expression(String),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub order: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn default_samples() -> usize {
    101
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    50
}

/// Parses `"1/32"`, `"0.125"` or `"1 / 8"`.
pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let parts: Vec<&str> = s.split('/').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("invalid number '{t}' in '{s}'"));
    let v = match parts.as_slice() {
        [a] => num(a)?,
        [a, b] => num(a)? / num(b)?,
        _ => return Err(format!("invalid fraction '{s}'")),
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a positive number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction("1/32").unwrap(), 0.03125);
        assert_eq!(parse_fraction(" 1 / 8 ").unwrap(), 0.125);
        assert_eq!(parse_fraction("0.25").unwrap(), 0.25);
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("a/2").is_err());
        assert!(parse_fraction("1/2/3").is_err());
        assert!(parse_fraction("-1/2").is_err());
    }

    #[test]
    fn config_variants() {
        let c: SolveConfig = serde_json::from_str(r#"{"alpha":1.5,"degree":2,"h":"1/8","rhs":{"example":2}}"#).unwrap();
        assert!(matches!(c.rhs, Rhs::Example { example: 2 }));
        assert_eq!(c.samples, 101);
        let c: SolveConfig = serde_json::from_str(
            r#"{"alpha":1.5,"degree":3,"h":"0.25","rhs":"u^2","bc":[{"order":0,"a":1,"b":0,"c":0}]}"#,
        )
        .unwrap();
        assert!(matches!(c.rhs, Rhs::Expression(ref s) if s == "u^2"));
        assert!(serde_json::from_str::<SolveConfig>(r#"{"alpha":1.5,"degree":2,"h":"1/8","rhs":"0","typo":1}"#).is_err());
    }
}
