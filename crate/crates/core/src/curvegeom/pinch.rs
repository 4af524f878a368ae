//! Pinchings of sampled Jordan curves.
//!
//! For samples `x = p_i`, `y = p_j` the curve splits into the forward arc
//! `U = p_i, p_{i+1}, ..., p_j` and `V = p_j, ..., p_i` (indices mod M,
//! endpoints included), and `pinch = min(diam U, diam V) / |x − y|`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hull;
use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::hexfloat;

/// Arcs up to this many points get an exhaustive diameter; longer arcs go
/// through their convex hull.
pub const BRUTE_FORCE_ARC: usize = 4096;
/// All pairs are scanned when `M² ≤ pair_budget`.
pub const DEFAULT_PAIR_BUDGET: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchingReport {
    pub i: usize,
    pub j: usize,
    #[serde(with = "hexfloat::as_hex")]
    pub dist: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub diam_u: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub diam_v: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub pinch: f64,
}

impl PinchingReport {
    fn new(i: usize, j: usize, dist: f64, diam_u: f64, diam_v: f64) -> Self {
        PinchingReport {
            i,
            j,
            dist,
            diam_u,
            diam_v,
            pinch: diam_u.min(diam_v) / dist,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    AllPairs,
    /// Pairs `(i, i + 2^k)` only; the constant is then a lower bound.
    DyadicSubsample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasicircleEstimate {
    #[serde(with = "hexfloat::as_hex")]
    pub k: f64,
    pub witness: PinchingReport,
    pub mode: PairMode,
    pub lower_bound: bool,
    pub pairs_evaluated: u64,
}

fn arc(points: &[Complex64], from: usize, steps: usize) -> Vec<Complex64> {
    let m = points.len();
    (0..=steps).map(|s| points[(from + s) % m]).collect()
}

fn arc_diameter(points: &[Complex64]) -> f64 {
    if points.len() <= BRUTE_FORCE_ARC {
        hull::brute_force_diameter(points)
    } else {
        hull::calipers_diameter(points)
    }
}

/// Pinching of the pair `(i, j)`.
pub fn pinch(curve: &SampledCurve, i: usize, j: usize) -> Result<PinchingReport> {
    let m = curve.len();
    let (i, j) = (i % m, j % m);
    if i == j {
        return Err(Error::CoincidentPoints { i, j });
    }
    let p = curve.points();
    let dist = (p[i] - p[j]).norm();
    if dist == 0.0 {
        return Err(Error::CoincidentPoints { i, j });
    }
    let steps = (j + m - i) % m;
    let diam_u = arc_diameter(&arc(p, i, steps));
    let diam_v = arc_diameter(&arc(p, j, m - steps));
    Ok(PinchingReport::new(i, j, dist, diam_u, diam_v))
}

/// Arc diameters `D_L[s] = diam{p_s, ..., p_{s+L}}` built row by row from
/// `D_L[s] = max(D_{L-1}[s], D_{L-1}[s+1], |p_s − p_{s+L}|)`; only the
/// requested lengths are kept.
fn arc_diameter_rows(
    points: &[Complex64],
    keep: impl Fn(usize) -> bool,
) -> BTreeMap<usize, Vec<f64>> {
    let m = points.len();
    let mut kept = BTreeMap::new();
    let mut row = vec![0.0f64; m];
    for len in 1..m {
        let prev = row;
        row = (0..m)
            .into_par_iter()
            .map(|s| {
                let chord = (points[s] - points[(s + len) % m]).norm();
                prev[s].max(prev[(s + 1) % m]).max(chord)
            })
            .collect();
        if keep(len) {
            kept.insert(len, row.clone());
        }
    }
    kept
}

struct PairScan {
    /// For each `i`, the partner with the largest pinch.
    best: Vec<PinchingReport>,
    mode: PairMode,
    pairs_evaluated: u64,
}

fn scan_pairs(curve: &SampledCurve, pair_budget: usize) -> Result<PairScan> {
    let p = curve.points();
    let m = p.len();
    let all_pairs = (m as u128) * (m as u128) <= pair_budget as u128;
    let partner_steps: Vec<usize> = if all_pairs {
        (1..m).collect()
    } else {
        // both orientations of every dyadic separation
        let mut steps: Vec<usize> = std::iter::successors(Some(1usize), |s| s.checked_mul(2))
            .take_while(|&s| s < m)
            .flat_map(|s| [s, m - s])
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    };
    let rows = if all_pairs {
        arc_diameter_rows(p, |_| true)
    } else {
        arc_diameter_rows(p, |len| partner_steps.binary_search(&len).is_ok())
    };
    let best: Vec<Result<PinchingReport>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut top: Option<PinchingReport> = None;
            for &steps in &partner_steps {
                let j = (i + steps) % m;
                let dist = (p[i] - p[j]).norm();
                if dist == 0.0 {
                    return Err(Error::CoincidentPoints {
                        i: i.min(j),
                        j: i.max(j),
                    });
                }
                let report =
                    PinchingReport::new(i, j, dist, rows[&steps][i], rows[&(m - steps)][j]);
                if top.as_ref().is_none_or(|t| report.pinch > t.pinch) {
                    top = Some(report);
                }
            }
            Ok(top.expect("at least one partner"))
        })
        .collect();
    Ok(PairScan {
        best: best.into_iter().collect::<Result<_>>()?,
        mode: if all_pairs {
            PairMode::AllPairs
        } else {
            PairMode::DyadicSubsample
        },
        pairs_evaluated: (m * partner_steps.len()) as u64,
    })
}

/// Largest pinching over all pairs when `M² ≤ pair_budget`, otherwise over
/// the pairs at dyadic index separations.
pub fn quasicircle_constant(
    curve: &SampledCurve,
    pair_budget: usize,
) -> Result<QuasicircleEstimate> {
    let scan = scan_pairs(curve, pair_budget)?;
    let mut witness = scan.best[0].clone();
    for r in &scan.best[1..] {
        if r.pinch > witness.pinch {
            witness = r.clone();
        }
    }
    Ok(QuasicircleEstimate {
        k: witness.pinch,
        witness,
        mode: scan.mode,
        lower_bound: scan.mode == PairMode::DyadicSubsample,
        pairs_evaluated: scan.pairs_evaluated,
    })
}

/// For every sample `i`, the partner `j` maximizing the pinch.
pub fn pinch_profile(
    curve: &SampledCurve,
    pair_budget: usize,
) -> Result<(Vec<PinchingReport>, PairMode)> {
    let scan = scan_pairs(curve, pair_budget)?;
    Ok((scan.best, scan.mode))
}

/// Writes `i,j,t_i,t_j,dist,diam_u,diam_v,pinch` rows, reals in hex.
pub fn write_profile_csv<W: Write>(rows: &[PinchingReport], samples: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "t_i", "t_j", "dist", "diam_u", "diam_v", "pinch"])?;
    let t = |k: usize| hexfloat::format(k as f64 / samples as f64);
    for r in rows {
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            t(r.i),
            t(r.j),
            hexfloat::format(r.dist),
            hexfloat::format(r.diam_u),
            hexfloat::format(r.diam_v),
            hexfloat::format(r.pinch),
        ])?;
    }
    w.flush()?;
    Ok(())
}
