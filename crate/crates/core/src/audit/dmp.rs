//! Nodal maximum/minimum principle verdicts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmpVariant {
    /// `max u <= max{0, max g}`
    WeakMax,
    /// `max u = max g`
    StrictMax,
    /// `min u >= min{0, min g}`
    WeakMin,
    /// `min u = min g`
    StrictMin,
    /// `min u >= 0`
    Nonneg,
    /// `max u <= 0`
    Nonpos,
}

impl DmpVariant {
    pub const ALL: [DmpVariant; 6] = [
        Self::WeakMax,
        Self::StrictMax,
        Self::WeakMin,
        Self::StrictMin,
        Self::Nonneg,
        Self::Nonpos,
    ];

    pub fn is_strict(self) -> bool {
        matches!(self, Self::StrictMax | Self::StrictMin)
    }

    fn name(self) -> &'static str {
        match self {
            Self::WeakMax => "weak-max",
            Self::StrictMax => "strict-max",
            Self::WeakMin => "weak-min",
            Self::StrictMin => "strict-min",
            Self::Nonneg => "nonneg",
            Self::Nonpos => "nonpos",
        }
    }
}

impl std::fmt::Display for DmpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DmpVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown DMP variant '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DmpError {
    #[error("field has {values} values but {boundary} boundary values were given")]
    ShapeMismatch { values: usize, boundary: usize },
    #[error("no boundary values given")]
    NoBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmpCheck {
    pub variant: DmpVariant,
    /// Extreme nodal value of `u` that the variant constrains.
    pub observed: f64,
    /// Bound the extreme is compared against.
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    /// Node attaining `observed` when the check fails.
    pub witness: Option<usize>,
}

/// Compares nodal extremes of `u` with the boundary values `g`, which must be
/// the trailing `g.len()` entries of the node ordering.
///
/// The slack is `1e-10 (1 + max|g|)`.
pub fn check_dmp<T: Real>(u: &[T], g: &[T], variant: DmpVariant) -> Result<DmpCheck, DmpError> {
    if g.is_empty() {
        return Err(DmpError::NoBoundary);
    }
    if g.len() > u.len() {
        return Err(DmpError::ShapeMismatch {
            values: u.len(),
            boundary: g.len(),
        });
    }
    let g: Vec<f64> = g.iter().map(|v| v.as_f64()).collect();
    let g_max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g_min = g.iter().copied().fold(f64::INFINITY, f64::min);
    let g_abs = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-10 * (1.0 + g_abs);

    let (arg_max, u_max) = extreme(u, |a, b| a > b);
    let (arg_min, u_min) = extreme(u, |a, b| a < b);
    let (observed, bound, witness, pass) = match variant {
        DmpVariant::WeakMax => {
            let bound = g_max.max(0.0);
            (u_max, bound, arg_max, u_max <= bound + slack)
        }
        DmpVariant::StrictMax => (u_max, g_max, arg_max, (u_max - g_max).abs() <= slack),
        DmpVariant::WeakMin => {
            let bound = g_min.min(0.0);
            (u_min, bound, arg_min, u_min >= bound - slack)
        }
        DmpVariant::StrictMin => (u_min, g_min, arg_min, (u_min - g_min).abs() <= slack),
        DmpVariant::Nonneg => (u_min, 0.0, arg_min, u_min >= -slack),
        DmpVariant::Nonpos => (u_max, 0.0, arg_max, u_max <= slack),
    };
    Ok(DmpCheck {
        variant,
        observed,
        bound,
        slack,
        pass,
        witness: (!pass).then_some(witness),
    })
}

fn extreme<T: Real>(u: &[T], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, u.first().map_or(f64::NAN, |v| v.as_f64()));
    for (i, v) in u.iter().enumerate().skip(1) {
        let v = v.as_f64();
        if better(v, best.1) || v.is_nan() {
            best = (i, v);
        }
    }
    best
}
