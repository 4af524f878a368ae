use rayon::prelude::*;

use crate::curve::SampledCurve;
use crate::error::{Error, Result};

fn directed(a: &SampledCurve, b: &SampledCurve) -> f64 {
    a.points()
        .par_iter()
        .map(|p| {
            b.points()
                .iter()
                .map(|q| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between the two sample sets.
pub fn hausdorff_distance(a: &SampledCurve, b: &SampledCurve) -> f64 {
    directed(a, b).max(directed(b, a))
}

/// `max_k |a_k − b_k|` over a shared parameter grid.
pub fn sup_norm_distance(a: &SampledCurve, b: &SampledCurve) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::synthetic;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn circle(m: usize, r: f64, cx: f64) -> SampledCurve {
        synthetic::circle(m, r, Complex64::new(cx, 0.0)).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        assert!(
            (hausdorff_distance(&circle(1024, 1.0, 0.0), &circle(1024, 2.0, 0.0)) - 1.0).abs()
                < 1e-3
        );
        assert_eq!(
            hausdorff_distance(&circle(256, 1.0, 0.0), &circle(256, 1.0, 0.0)),
            0.0
        );
        assert!(
            (hausdorff_distance(&circle(1024, 1.0, 0.0), &circle(1024, 1.0, 3.0)) - 3.0).abs()
                < 2e-3
        );
    }

    #[test]
    fn hausdorff_ignores_rigid_motions() {
        let a = synthetic::ellipse(300, 2.0, 1.0).unwrap();
        let b = circle(300, 1.0, 0.5);
        let g = Complex64::from_polar(1.0, 0.7);
        let shift = Complex64::new(-2.0, 4.0);
        let a2 = a.map(|p| g * p + shift).unwrap();
        let b2 = b.map(|p| g * p + shift).unwrap();
        let d1 = hausdorff_distance(&a, &b);
        let d2 = hausdorff_distance(&a2, &b2);
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        let a = circle(512, 1.5, 0.0);
        assert_eq!(sup_norm_distance(&a, &a).unwrap(), 0.0);
        let v = Complex64::new(0.3, -0.4);
        let moved = a.map(|p| p + v).unwrap();
        assert!((sup_norm_distance(&a, &moved).unwrap() - 0.5).abs() < 1e-12);
        let step = Complex64::from_polar(1.0, 2.0 * PI / 512.0);
        let rotated = a.map(|p| p * step).unwrap();
        let chord = 2.0 * (PI / 512.0).sin() * 1.5;
        assert!((sup_norm_distance(&a, &rotated).unwrap() - chord).abs() < 1e-12);
        assert!(matches!(
            sup_norm_distance(&a, &circle(256, 1.0, 0.0)),
            Err(Error::GridMismatch {
                left: 512,
                right: 256
            })
        ));
    }

    #[test]
    fn ellipses_approach_the_circle() {
        let unit = circle(1024, 1.0, 0.0);
        let d: Vec<f64> = [2, 4, 8, 16, 32]
            .iter()
            .map(|&n| {
                hausdorff_distance(
                    &synthetic::ellipse(1024, 1.0 + 1.0 / n as f64, 1.0).unwrap(),
                    &unit,
                )
            })
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }
}
