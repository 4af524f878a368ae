//! Searches for nearby bounded-type rotation numbers whose invariant curves
//! pinch while staying uniformly close to the unperturbed curve.
//!
//! Each candidate `θ_n = [0; a_1, ..., a_cut, T, 1, 1, ...]` gets its own
//! series. Radii `r_k = r_1·1.02^k` (`k ≥ 1`) are scanned upwards until the
//! sampled curve `φ_{θ_n}(r_k 𝕌)` reaches a quasicircle constant of at least
//! `K + pinch_margin`, the series tail becomes too large, or `r_2` is reached.
//! The first hit is compared sample by sample with `φ_θ(r_k 𝕌)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvegeom::{
    quasicircle_constant, sup_norm_distance, PinchingReport, DEFAULT_PAIR_BUDGET,
};
use crate::error::{Error, Result};
use crate::hexfloat;
use crate::linearization::{
    critical_point_distance, linearize, sample_curve, LinearizationSeries, LinearizeOptions,
    DEFAULT_TAIL_TOLERANCE,
};
use crate::rotation::{bounded_type_approximant, RotationNumber};

/// Ratio between consecutive radii of the scan.
pub const RADIUS_STEP: f64 = 1.02;
/// Relative miss above which a radius target counts as unreachable.
pub const UNREACHABLE_MISS: f64 = 0.2;

fn default_margin() -> f64 {
    1.0
}

fn default_budget() -> usize {
    DEFAULT_PAIR_BUDGET
}

fn default_tail_tolerance() -> f64 {
    DEFAULT_TAIL_TOLERANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theta: RotationNumber,
    #[serde(with = "hexfloat::as_hex")]
    pub r1: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub r2: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub k: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub epsilon: f64,
    /// Inclusive range of truncation depths.
    pub cut_range: (usize, usize),
    pub tail_entries: Vec<u64>,
    pub series_n: usize,
    pub samples_m: usize,
    /// Added to `K` to form the scan threshold.
    #[serde(with = "hexfloat::as_hex", default = "default_margin")]
    pub pinch_margin: f64,
    #[serde(default = "default_budget")]
    pub pair_budget: usize,
    #[serde(with = "hexfloat::as_hex", default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
    #[serde(default)]
    pub precision_bits: Option<u32>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.r1 > 0.0 && self.r1 < self.r2) {
            return bad(format!(
                "need 0 < r1 < r2, got r1 = {}, r2 = {}",
                self.r1, self.r2
            ));
        }
        if !(self.k > 1.0) {
            return bad(format!("pinch threshold K must exceed 1, got {}", self.k));
        }
        // ε = 0 is accepted: it is the vacuous budget under which nothing is found
        if !(self.epsilon >= 0.0) {
            return bad(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            ));
        }
        if !(self.pinch_margin >= 0.0) {
            return bad(format!(
                "pinch margin must be non-negative, got {}",
                self.pinch_margin
            ));
        }
        if self.cut_range.0 == 0 {
            return bad("cuts start at 1".into());
        }
        Ok(())
    }

    fn options(&self) -> LinearizeOptions {
        LinearizeOptions {
            precision_bits: self.precision_bits,
            fit_window: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundStatus {
    Found,
    NotFound,
    PrecisionLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub cut: usize,
    pub tail_entry: u64,
    pub theta_n: RotationNumber,
    #[serde(with = "hexfloat::as_hex")]
    pub theta_distance: f64,
    /// First scanned radius reaching the threshold, else the radius with the
    /// largest constant seen.
    #[serde(with = "hexfloat::option_as_hex")]
    pub r_prime: Option<f64>,
    #[serde(with = "hexfloat::option_as_hex")]
    pub radius_estimate: Option<f64>,
    #[serde(with = "hexfloat::as_hex")]
    pub max_pinch: f64,
    pub witness: Option<PinchingReport>,
    #[serde(with = "hexfloat::option_as_hex")]
    pub sup_drift: Option<f64>,
    pub radii_scanned: usize,
    pub threshold_met: bool,
    pub status: RoundStatus,
    pub note: Option<String>,
    /// Found rounds only; `None` when the outer circle could not be sampled.
    pub critical_approach: Option<CriticalApproach>,
}

/// Distances from the invariant curves at two radii to the critical point.
/// The boundary of a bounded-type disk should come closer at the outer one;
/// a failure is a warning, not an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalApproach {
    #[serde(with = "hexfloat::as_hex")]
    pub inner: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub outer: f64,
    pub reaches_out: bool,
}

/// Fractions of the radius estimate used by [`CriticalApproach`].
pub const CRITICAL_INNER: f64 = 0.5;
pub const CRITICAL_OUTER: f64 = 0.99;

fn critical_approach(
    series: &LinearizationSeries,
    samples: usize,
    tolerance: f64,
) -> Result<Option<CriticalApproach>> {
    let est = series.radius_estimate();
    let at = |fraction: f64| -> Result<Option<f64>> {
        match sample_curve(series, fraction * est, samples, tolerance) {
            Ok(c) => Ok(Some(critical_point_distance(&c, series.lambda_f64()))),
            Err(Error::TailTooLarge { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let (Some(inner), Some(outer)) = (at(CRITICAL_INNER)?, at(CRITICAL_OUTER)?) else {
        return Ok(None);
    };
    Ok(Some(CriticalApproach {
        inner,
        outer,
        reaches_out: outer < inner,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTrace {
    pub config: ExperimentConfig,
    #[serde(with = "hexfloat::as_hex")]
    pub theta_radius: f64,
    pub rounds: Vec<RoundRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rounds: usize,
    pub found: usize,
    pub not_found: usize,
    pub precision_limit: usize,
    /// Index into `rounds` of the first found round.
    pub first_found: Option<usize>,
    #[serde(with = "hexfloat::as_hex")]
    pub best_pinch: f64,
}

impl ExperimentTrace {
    pub fn found(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds
            .iter()
            .filter(|r| r.status == RoundStatus::Found)
    }

    pub fn summary(&self) -> ExperimentSummary {
        let count = |s| self.rounds.iter().filter(|r| r.status == s).count();
        ExperimentSummary {
            rounds: self.rounds.len(),
            found: count(RoundStatus::Found),
            not_found: count(RoundStatus::NotFound),
            precision_limit: count(RoundStatus::PrecisionLimit),
            first_found: self
                .rounds
                .iter()
                .position(|r| r.status == RoundStatus::Found),
            best_pinch: self.rounds.iter().map(|r| r.max_pinch).fold(0.0, f64::max),
        }
    }

    /// One JSON object per round.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Vec<RoundRecord>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }
}

struct Reference<'a> {
    series: &'a LinearizationSeries,
    samples: usize,
    tolerance: f64,
}

fn run_round(
    config: &ExperimentConfig,
    reference: &Reference,
    cut: usize,
    tail: u64,
) -> Result<RoundRecord> {
    let theta_n = bounded_type_approximant(&config.theta, cut, tail)?;
    let theta_distance = theta_n.distance(&config.theta);
    let mut record = RoundRecord {
        cut,
        tail_entry: tail,
        theta_n: theta_n.clone(),
        theta_distance,
        r_prime: None,
        radius_estimate: None,
        max_pinch: 0.0,
        witness: None,
        sup_drift: None,
        radii_scanned: 0,
        threshold_met: false,
        status: RoundStatus::NotFound,
        note: None,
        critical_approach: None,
    };
    let series = match linearize(&theta_n, config.series_n, &config.options()) {
        Ok(s) => s,
        Err(Error::PrecisionExhausted(msg)) => {
            record.status = RoundStatus::PrecisionLimit;
            record.note = Some(msg);
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    let estimate = series.radius_estimate();
    record.radius_estimate = Some(estimate);

    let threshold = config.k + config.pinch_margin;
    let mut hit = None;
    let mut r = config.r1;
    loop {
        r *= RADIUS_STEP;
        if !(r < config.r2 && r < estimate) {
            break;
        }
        let curve = match sample_curve(&series, r, config.samples_m, config.tail_tolerance) {
            Ok(c) => c,
            Err(Error::TailTooLarge { .. }) => {
                record.note = Some(format!("series tail too large beyond r = {r:e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        record.radii_scanned += 1;
        let q = quasicircle_constant(&curve, config.pair_budget)?;
        if q.k > record.max_pinch || record.witness.is_none() {
            record.max_pinch = q.k;
            record.witness = Some(q.witness.clone());
            record.r_prime = Some(r);
        }
        if q.k >= threshold {
            record.max_pinch = q.k;
            record.witness = Some(q.witness);
            record.r_prime = Some(r);
            hit = Some(curve);
            break;
        }
    }
    let Some(curve) = hit else {
        return Ok(record);
    };
    record.threshold_met = true;
    let r = record.r_prime.expect("set with the hit");
    match sample_curve(reference.series, r, reference.samples, reference.tolerance) {
        Ok(unperturbed) => {
            let drift = sup_norm_distance(&curve, &unperturbed)?;
            record.sup_drift = Some(drift);
            if drift < config.epsilon
                && theta_distance < config.epsilon
                && record.max_pinch > config.k
            {
                record.status = RoundStatus::Found;
                record.critical_approach =
                    critical_approach(&series, config.samples_m, config.tail_tolerance)?;
                match &record.critical_approach {
                    Some(c) if !c.reaches_out => {
                        record.note =
                            Some("warning: curve does not approach the critical point".into())
                    }
                    None => {
                        record.note =
                            Some("warning: critical approach not evaluated (tail too large)".into())
                    }
                    _ => {}
                }
            }
        }
        Err(Error::TailTooLarge { bound, .. }) => {
            record.note = Some(format!(
                "unperturbed series tail {bound:e} too large at r = {r:e}"
            ));
        }
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Runs one round per `(cut, tail)` candidate, in configuration order.
pub fn run_perturbation(config: &ExperimentConfig) -> Result<ExperimentTrace> {
    config.validate()?;
    let (lo, hi) = config.cut_range;
    if config.tail_entries.is_empty() || lo > hi {
        return Err(Error::NoCandidates);
    }
    let base = linearize(&config.theta, config.series_n, &config.options())?;
    if !(config.r2 < base.radius_estimate()) {
        return Err(Error::InvalidArgument(format!(
            "r2 = {} must lie below the radius estimate {} of θ",
            config.r2,
            base.radius_estimate()
        )));
    }
    let reference = Reference {
        series: &base,
        samples: config.samples_m,
        tolerance: config.tail_tolerance,
    };
    let candidates: Vec<(usize, u64)> = (lo..=hi)
        .flat_map(|cut| config.tail_entries.iter().map(move |&t| (cut, t)))
        .collect();
    let rounds = candidates
        .par_iter()
        .map(|&(cut, tail)| run_round(config, &reference, cut, tail))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentTrace {
        config: config.clone(),
        theta_radius: base.radius_estimate(),
        rounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusTarget {
    pub best: RotationNumber,
    pub tail_entry: u64,
    #[serde(with = "hexfloat::as_hex")]
    pub achieved_r: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub target_r: f64,
    /// Every grid entry with its radius estimate, in grid order.
    pub scanned: Vec<(u64, String)>,
    pub unreachable: bool,
}

/// Picks the tail entry whose approximant's radius estimate is closest to
/// `target_r`; ties go to the smaller entry.
pub fn radius_targeted_search(
    theta: &RotationNumber,
    target_r: f64,
    cut: usize,
    tail_grid: &[u64],
    series_n: usize,
    opts: &LinearizeOptions,
) -> Result<RadiusTarget> {
    if tail_grid.is_empty() {
        return Err(Error::NoCandidates);
    }
    if !(target_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target radius must be positive, got {target_r}"
        )));
    }
    let estimates = tail_grid
        .par_iter()
        .map(|&t| {
            let candidate = bounded_type_approximant(theta, cut, t)?;
            let series = linearize(&candidate, series_n, opts)?;
            Ok((t, candidate, series.radius_estimate()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, e) in estimates.iter().enumerate() {
        let (miss, best_miss) = ((e.2 - target_r).abs(), (estimates[best].2 - target_r).abs());
        if miss < best_miss || (miss == best_miss && e.0 < estimates[best].0) {
            best = k;
        }
    }
    let (tail_entry, candidate, achieved_r) = estimates[best].clone();
    Ok(RadiusTarget {
        best: candidate,
        tail_entry,
        achieved_r,
        target_r,
        scanned: estimates
            .iter()
            .map(|e| (e.0, hexfloat::format(e.2)))
            .collect(),
        unreachable: (achieved_r - target_r).abs() > UNREACHABLE_MISS * target_r,
    })
}
