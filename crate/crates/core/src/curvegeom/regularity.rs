//! Hölder exponent estimates from sampled curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::hexfloat;
use crate::linearization::least_squares;

/// Fits with a smaller exponent or a larger log-residual are flagged.
pub const FLAG_MIN_ALPHA: f64 = 0.05;
pub const FLAG_MAX_RESIDUAL: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    #[serde(with = "hexfloat::as_hex")]
    pub separation: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityProbe {
    pub scale_pairs: Vec<ScalePair>,
    #[serde(with = "hexfloat::as_hex")]
    pub alpha: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub fit_residual: f64,
    pub flagged: bool,
}

/// Largest `|f(t + d/M) − f(t)|` over the grid.
pub fn max_displacement(curve: &SampledCurve, d: usize) -> f64 {
    let p = curve.points();
    let m = p.len();
    (0..m)
        .into_par_iter()
        .map(|i| (p[(i + d) % m] - p[i]).norm())
        .reduce(|| 0.0, f64::max)
}

/// Log-log slope of the maximal displacement against parameter separation
/// over the dyadic scales `min_sep·2^k` plus `max_sep` itself.
pub fn holder_exponent(
    curve: &SampledCurve,
    min_sep: f64,
    max_sep: f64,
) -> Result<RegularityProbe> {
    let m = curve.len();
    if !(min_sep > 0.0 && max_sep / min_sep >= 100.0) {
        return Err(Error::InsufficientScales(format!(
            "separations [{min_sep}, {max_sep}] span less than two decades"
        )));
    }
    if min_sep < 4.0 / m as f64 {
        return Err(Error::InsufficientScales(format!(
            "min separation {min_sep} is below 4/M = {}",
            4.0 / m as f64
        )));
    }
    let mut steps: Vec<usize> = std::iter::successors(Some(min_sep), |s| Some(s * 2.0))
        .take_while(|&s| s <= max_sep)
        .chain(std::iter::once(max_sep))
        .map(|s| (s * m as f64).round() as usize)
        .filter(|&d| d >= 1 && d <= m / 2)
        .collect();
    steps.dedup();
    let span = match (steps.first(), steps.last()) {
        (Some(&lo), Some(&hi)) => hi as f64 / lo as f64,
        _ => 0.0,
    };
    if steps.len() < 3 || span < 100.0 {
        return Err(Error::InsufficientScales(format!(
            "{} usable scales spanning a factor {span} on a grid of {m}",
            steps.len()
        )));
    }
    let scale_pairs: Vec<ScalePair> = steps
        .iter()
        .map(|&d| ScalePair {
            separation: d as f64 / m as f64,
            displacement: max_displacement(curve, d),
        })
        .collect();
    let logs: Vec<(f64, f64)> = scale_pairs
        .iter()
        .map(|s| (s.separation.ln(), s.displacement.ln()))
        .collect();
    let (alpha, _, fit_residual) = least_squares(&logs);
    Ok(RegularityProbe {
        flagged: !(alpha >= FLAG_MIN_ALPHA && fit_residual <= FLAG_MAX_RESIDUAL),
        scale_pairs,
        alpha,
        fit_residual,
    })
}
