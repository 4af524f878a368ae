use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegel_core::curve::synthetic;
use siegel_core::curvegeom::{
    check_c1_stability, hausdorff_distance, holder_exponent, quasicircle_constant,
    DEFAULT_PAIR_BUDGET,
};
use siegel_core::SampledCurve;

/// Exponent of the Koch polyline from its self-similar scales `4^k` alone,
/// scanning every pair at each scale.
fn koch_reference_exponent(curve: &SampledCurve) -> f64 {
    let p = curve.points();
    let m = p.len();
    let logs: Vec<(f64, f64)> = (1..=5)
        .map(|k| {
            let d = 4usize.pow(k);
            let mut best = 0.0f64;
            for i in 0..m {
                for j in [(i + d) % m, (i + m - d) % m] {
                    best = best.max((p[i] - p[j]).norm());
                }
            }
            ((d as f64 / m as f64).ln(), best.ln())
        })
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn koch_exponent_matches_reference_scan() {
    let koch = synthetic::koch_snowflake(6).unwrap();
    let reference = koch_reference_exponent(&koch);
    assert!(
        (reference - 3f64.ln() / 4f64.ln()).abs() < 0.05,
        "{reference}"
    );
    let probe = holder_exponent(&koch, 4.0 / koch.len() as f64, 0.1).unwrap();
    assert!(
        (probe.alpha - reference).abs() < 0.05,
        "{} vs {reference}",
        probe.alpha
    );
}

#[test]
fn smallest_scale_ratio_is_positive() {
    let circle = synthetic::circle(2048, 1.0, Complex64::new(0.0, 0.0)).unwrap();
    let koch = synthetic::koch_snowflake(5).unwrap();
    for c in [circle, koch] {
        let probe = holder_exponent(&c, 4.0 / c.len() as f64, 0.5).unwrap();
        let s = &probe.scale_pairs[0];
        assert!(s.displacement / s.separation > 0.0);
    }
}

#[test]
fn ellipse_family_converges_to_circle() {
    let unit = synthetic::circle(1024, 1.0, Complex64::new(0.0, 0.0)).unwrap();
    let mut last = f64::INFINITY;
    for n in [2, 4, 8, 16, 32] {
        let e = synthetic::ellipse(1024, 1.0 + 1.0 / n as f64, 1.0).unwrap();
        let d = hausdorff_distance(&e, &unit);
        assert!(d < last);
        assert!(quasicircle_constant(&e, DEFAULT_PAIR_BUDGET).unwrap().k < 2.0);
        last = d;
    }
}

/// Unit circle pushed radially by a smooth periodic bump.
fn bump(f: &SampledCurve, amp: f64, center: f64, width: f64) -> SampledCurve {
    f.map_indexed(|k, p| {
        let t = k as f64 / f.len() as f64;
        let phase = TAU * (t - center);
        p * (1.0 + amp * ((phase.cos() - 1.0) / (width * width)).exp())
    })
}

trait MapIndexed {
    fn map_indexed(&self, g: impl Fn(usize, Complex64) -> Complex64) -> SampledCurve;
}

impl MapIndexed for SampledCurve {
    fn map_indexed(&self, g: impl Fn(usize, Complex64) -> Complex64) -> SampledCurve {
        let pts = self
            .points()
            .iter()
            .enumerate()
            .map(|(k, &p)| g(k, p))
            .collect();
        SampledCurve::new(pts, self.source().clone()).unwrap()
    }
}

#[test]
fn random_bumps_respect_the_bound() {
    let f = synthetic::circle(512, 1.0, Complex64::new(0.0, 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let amp = rng.gen_range(0.001..0.02);
        let g = bump(&f, amp, rng.gen(), rng.gen_range(0.3..1.0));
        let check = check_c1_stability(&f, &g, 1.0).unwrap();
        assert!(check.eta < check.mu / 4.0);
        assert!(check.holds, "{check:?}");
    }
}
