//! Quasicircle constants under small perturbations of a parameterized curve.
//!
//! If `f` traces a `K`-quasicircle, `|g − f| < η` everywhere and pairs of
//! parameters at distance below `ε` cannot pinch, then `g` traces a
//! `K'`-quasicircle with `K' = K(μ + 2η)/(μ − 2η)`, where `μ` is the least
//! distance `|f(t) − f(t')|` over `d(t, t') ≥ ε`.

use serde::{Deserialize, Serialize};

use super::distance::sup_norm_distance;
use super::pinch::{quasicircle_constant, DEFAULT_PAIR_BUDGET};
use crate::curve::SampledCurve;
use crate::error::Result;
use crate::hexfloat;

/// Slack allowed between the measured constant of `g` and `K'`.
pub const STABILITY_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C1Check {
    pub holds: bool,
    /// `+∞` when `η ≥ μ/2` or no separation scale exists.
    #[serde(with = "hexfloat::as_hex")]
    pub k_prime: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub eta: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub mu: f64,
    /// Index separation playing the role of `ε`.
    pub epsilon_steps: Option<usize>,
    #[serde(with = "hexfloat::as_hex")]
    pub measured_k: f64,
}

fn min_displacement(f: &SampledCurve, d: usize) -> f64 {
    let p = f.points();
    let m = p.len();
    (0..m)
        .map(|i| (p[(i + d) % m] - p[i]).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Compares the quasicircle constant of `g` with the bound derived from `f`.
pub fn check_c1_stability(f: &SampledCurve, g: &SampledCurve, k: f64) -> Result<C1Check> {
    let eta = sup_norm_distance(f, g)?;
    let m = f.len();
    let measured_k = quasicircle_constant(g, DEFAULT_PAIR_BUDGET)?.k;
    let epsilon_steps = (1..=m / 2).find(|&d| min_displacement(f, d) > 8.0 * eta);
    let mu = match epsilon_steps {
        Some(d) => (d..=m / 2)
            .map(|s| min_displacement(f, s))
            .fold(f64::INFINITY, f64::min),
        None => 0.0,
    };
    let k_prime = if epsilon_steps.is_some() && eta < mu / 2.0 {
        k * (mu + 2.0 * eta) / (mu - 2.0 * eta)
    } else {
        f64::INFINITY
    };
    Ok(C1Check {
        holds: k_prime.is_finite() && measured_k <= k_prime + STABILITY_TOLERANCE,
        k_prime,
        eta,
        mu,
        epsilon_steps,
        measured_k,
    })
}
