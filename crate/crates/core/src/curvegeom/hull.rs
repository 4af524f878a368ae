//! Convex hulls and point-set diameters.

use num_complex::Complex64;

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, collinear
/// points dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Largest pairwise distance by exhaustive comparison.
pub fn brute_force_diameter(points: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for (a, &p) in points.iter().enumerate() {
        for &q in &points[a + 1..] {
            best = best.max((p - q).norm());
        }
    }
    best
}

/// Diameter of a point set via rotating calipers on its convex hull.
pub fn calipers_diameter(points: &[Complex64]) -> f64 {
    let hull = convex_hull(points);
    let n = hull.len();
    if n <= 3 {
        return brute_force_diameter(&hull);
    }
    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        while cross(a, b, hull[(j + 1) % n]).abs() > cross(a, b, hull[j]).abs() {
            j = (j + 1) % n;
        }
        best = best.max((a - hull[j]).norm()).max((b - hull[j]).norm());
    }
    best
}
