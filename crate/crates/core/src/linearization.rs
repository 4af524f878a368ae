//! Linearizing power series of `P_θ(z) = λz + z²`, `λ = e^{2πiθ}`.
//!
//! The linearizing map `φ(z) = Σ_{n≥1} b_n zⁿ` with `φ'(0) = 1` solves
//! `φ(λz) = P_θ(φ(z)) = λφ(z) + φ(z)²`. Comparing the coefficients of `zⁿ`
//! on both sides gives `b_n λⁿ = λ b_n + Σ_{j=1}^{n-1} b_j b_{n-j}`, i.e.
//!
//! ```text
//! b_1 = 1,    b_n (λⁿ − λ) = Σ_{j=1}^{n-1} b_j b_{n-j}    (n ≥ 2).
//! ```
//!
//! With this normalization the radius of convergence of the series is the
//! conformal radius of the Siegel disk, which is estimated from the decay
//! rate of `|b_n|`.
//!
//! The small divisors are evaluated without cancellation: writing
//! `m = n − 1` and `β = π·frac(mθ)`, `λⁿ − λ = λ(e^{2iβ} − 1)` and
//! `1/(e^{2iβ} − 1) = −(1 + i·cot β)/2`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::bigcomplex::BigComplex;
use crate::curve::{CurveSource, SampledCurve};
use crate::error::{Error, Result};
use crate::hexfloat;
use crate::rotation::RotationNumber;

/// Bits added on top of `log2(1/min divisor)` when the precision is chosen
/// automatically.
pub const GUARD_BITS: u32 = 64;
/// An explicitly requested precision must exceed `log2(1/min divisor)` by at
/// least this many bits.
pub const MARGIN_BITS: u32 = 16;
/// Default bound on `|b_N| r^N / (1 − r/r̂)` when sampling curves.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
/// Minimum number of coefficients in an explicit radius fit window.
pub const MIN_FIT_POINTS: usize = 50;

const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct LinearizeOptions {
    /// Working precision; `None` selects `max(θ bits, log2(1/min divisor) + GUARD_BITS)`.
    pub precision_bits: Option<u32>,
    /// Coefficient window for the radius fit; `None` is the upper half `[N/2, N]`.
    pub fit_window: Option<(usize, usize)>,
}

/// Least-squares fit of `ln|b_n| ≈ intercept + slope·n`; radius `= e^{-slope}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    #[serde(with = "hexfloat::as_hex")]
    pub radius: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub slope: f64,
    #[serde(with = "hexfloat::as_hex")]
    pub intercept: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    #[serde(with = "hexfloat::as_hex")]
    pub rms_residual: f64,
    pub window: (usize, usize),
    pub points_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// max over the grid of `|φ(λz) − λφ(z) − φ(z)²|`
    #[serde(with = "hexfloat::as_hex")]
    pub max_residual: f64,
    /// `|b_N| r^N / (1 − r/r̂)`
    #[serde(with = "hexfloat::as_hex")]
    pub tail_bound: f64,
}

/// Truncated linearizing series `b_1, ..., b_N`.
#[derive(Clone, Debug)]
pub struct LinearizationSeries {
    theta: RotationNumber,
    lambda: BigComplex,
    coeffs: Vec<BigComplex>,
    log2_abs: Vec<f64>,
    precision_bits: u32,
    min_divisor: f64,
    radius: RadiusFit,
}

struct Divisors {
    /// `β_m = π·frac(mθ)` for `m = 1..N-1`, at the working precision.
    betas: Vec<Float>,
    min_divisor: f64,
}

/// Magnitudes `|λ^{m+1} − λ| = 2|sin β_m|` in double precision, and the
/// fractional parts needed to rebuild the exact divisors.
fn divisor_scan(theta: &RotationNumber, n: usize) -> Result<(Vec<Float>, f64)> {
    let prec = theta.precision_bits() + 64;
    let mut fracs = Vec::with_capacity(n.saturating_sub(1));
    let mut min_div = f64::INFINITY;
    for m in 1..n {
        let frac = Float::with_val(prec, theta.value() * m as u64).fract();
        if frac.is_zero() {
            return Err(Error::RationalAngle(format!(
                "λ^{} = λ: {m}θ is an integer",
                m + 1
            )));
        }
        let dist = Float::with_val(53, (1u32 - frac.clone()).min(&frac)).to_f64();
        let mag = 2.0 * (std::f64::consts::PI * dist).sin();
        min_div = min_div.min(mag);
        fracs.push(frac);
    }
    Ok((fracs, min_div))
}

fn choose_precision(
    theta: &RotationNumber,
    n: usize,
    opts: &LinearizeOptions,
) -> Result<(u32, Divisors)> {
    let (fracs, min_divisor) = divisor_scan(theta, n)?;
    let needed = if min_divisor.is_finite() {
        (1.0 / min_divisor).log2().max(0.0)
    } else {
        0.0
    };
    let bits = match opts.precision_bits {
        Some(b) => b,
        None => theta
            .precision_bits()
            .max(needed.ceil() as u32 + GUARD_BITS),
    };
    if (bits as f64) < needed + MARGIN_BITS as f64 {
        return Err(Error::PrecisionExhausted(format!(
            "{bits} bits cannot resolve the smallest divisor {min_divisor:e}; need more than {:.0}",
            needed + MARGIN_BITS as f64
        )));
    }
    // uncertainty of θ propagates to each divisor through 2π·m·δθ
    let theta_ulp = match theta.value().get_exp() {
        Some(e) => 2f64.powi(e - theta.precision_bits() as i32),
        None => 0.0,
    };
    let divisor_err = TAU * n as f64 * theta_ulp;
    if min_divisor <= divisor_err * 2f64.powi(MARGIN_BITS as i32) {
        return Err(Error::PrecisionExhausted(format!(
            "θ carries {} bits; smallest divisor {min_divisor:e} is within its uncertainty {divisor_err:e}",
            theta.precision_bits()
        )));
    }
    let pi = Float::with_val(bits + 16, Constant::Pi);
    let betas = fracs
        .into_iter()
        .map(|f| Float::with_val(bits + 16, &pi * &f))
        .collect();
    Ok((bits, Divisors { betas, min_divisor }))
}

fn lambda_of(theta: &RotationNumber, bits: u32) -> BigComplex {
    let two_pi = Float::with_val(bits + 16, Constant::Pi) * 2u32;
    let angle = Float::with_val(bits + 16, &two_pi * theta.value());
    let (s, c) = angle.sin_cos(Float::new(bits + 16));
    BigComplex {
        re: Float::with_val(bits, c),
        im: Float::with_val(bits, s),
    }
}

/// `1/(λ^{m+1} − λ) = −conj(λ)(1 + i cot β_m)/2`.
fn inverse_divisor(lambda_conj: &BigComplex, beta: &Float, bits: u32) -> BigComplex {
    let cot = Float::with_val(bits, beta.cot_ref());
    let half_neg = BigComplex {
        re: Float::with_val(bits, -0.5),
        im: Float::with_val(bits, -cot / 2u32),
    };
    lambda_conj.mul(&half_neg)
}

/// `Σ_{j=1}^{n-1} b_j b_{n-j}` over `coeffs[k] = b_{k+1}`, in fixed chunks so
/// the rounding is independent of the thread count.
fn convolution(coeffs: &[BigComplex], n: usize, bits: u32) -> BigComplex {
    let half = (n - 1) / 2;
    let partial = |lo: usize, hi: usize| {
        let mut acc = BigComplex::zero(bits);
        let mut scratch = Float::new(bits);
        for j in lo..hi {
            acc.add_product(&coeffs[j - 1], &coeffs[n - j - 1], &mut scratch);
        }
        acc
    };
    let mut acc = if half > CHUNK {
        let chunks: Vec<(usize, usize)> = (1..=half)
            .step_by(CHUNK)
            .map(|lo| (lo, (lo + CHUNK).min(half + 1)))
            .collect();
        let parts: Vec<BigComplex> = chunks.par_iter().map(|&(lo, hi)| partial(lo, hi)).collect();
        let mut total = BigComplex::zero(bits);
        for p in &parts {
            total.add_assign(p);
        }
        total
    } else {
        partial(1, half + 1)
    };
    acc.scale_u32(2);
    if n.is_multiple_of(2) {
        let mid = &coeffs[n / 2 - 1];
        let mut scratch = Float::new(bits);
        acc.add_product(mid, mid, &mut scratch);
    }
    acc
}

/// Builds `b_1..b_N` for an irrational θ.
pub fn linearize(
    theta: &RotationNumber,
    n: usize,
    opts: &LinearizeOptions,
) -> Result<LinearizationSeries> {
    if theta.is_rational() {
        return Err(Error::RationalAngle(format!(
            "θ has terminating expansion {:?}",
            theta.cf().entries()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "series length must be at least 2".into(),
        ));
    }
    let (bits, divisors) = choose_precision(theta, n, opts)?;
    let lambda = lambda_of(theta, bits);
    let lambda_conj = BigComplex {
        re: lambda.re.clone(),
        im: Float::with_val(bits, -&lambda.im),
    };

    let mut coeffs: Vec<BigComplex> = Vec::with_capacity(n);
    coeffs.push(BigComplex::one(bits));
    for k in 2..=n {
        let sum = convolution(&coeffs, k, bits);
        let inv = inverse_divisor(&lambda_conj, &divisors.betas[k - 2], bits);
        coeffs.push(sum.mul(&inv));
    }
    let log2_abs = coeffs.iter().map(BigComplex::log2_abs).collect();
    let window = opts.fit_window.unwrap_or((default_window_start(n), n));
    let mut series = LinearizationSeries {
        theta: theta.clone(),
        lambda,
        coeffs,
        log2_abs,
        precision_bits: bits,
        min_divisor: divisors.min_divisor,
        radius: RadiusFit {
            radius: f64::NAN,
            slope: f64::NAN,
            intercept: f64::NAN,
            rms_residual: f64::NAN,
            window,
            points_used: 0,
        },
    };
    series.radius = fit_radius(&series, window, 2)?;
    Ok(series)
}

fn default_window_start(n: usize) -> usize {
    (n / 2).max(1)
}

impl LinearizationSeries {
    pub fn theta(&self) -> &RotationNumber {
        &self.theta
    }

    pub fn lambda(&self) -> &BigComplex {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> Complex64 {
        self.lambda.to_complex64()
    }

    /// Number of coefficients `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `b_n` for `1 ≤ n ≤ N`.
    pub fn coefficient(&self, n: usize) -> &BigComplex {
        &self.coeffs[n - 1]
    }

    pub fn coefficients(&self) -> &[BigComplex] {
        &self.coeffs
    }

    /// `log2 |b_n|`.
    pub fn log2_abs(&self, n: usize) -> f64 {
        self.log2_abs[n - 1]
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// `min_{2≤n≤N} |λⁿ − λ|`
    pub fn min_divisor(&self) -> f64 {
        self.min_divisor
    }

    pub fn radius_estimate(&self) -> f64 {
        self.radius.radius
    }

    pub fn radius_fit(&self) -> &RadiusFit {
        &self.radius
    }

    /// `|b_N| r^N / (1 − r/r̂)`, infinite once `r ≥ r̂`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        let est = self.radius_estimate();
        if !(r < est) {
            return f64::INFINITY;
        }
        let n = self.len();
        let log2_term = self.log2_abs[n - 1] + n as f64 * r.log2();
        log2_term.exp2() / (1.0 - r / est)
    }

    /// `a_n = b_n rⁿ` rounded to double precision.
    pub fn scaled_coefficients(&self, r: f64) -> Vec<Complex64> {
        let r = Float::with_val(64, r);
        let mut power = Float::with_val(64, 1);
        self.coeffs
            .iter()
            .map(|b| {
                power *= &r;
                Complex64::new(
                    Float::with_val(64, &b.re * &power).to_f64(),
                    Float::with_val(64, &b.im * &power).to_f64(),
                )
            })
            .collect()
    }

    /// Relative gap between each stored `b_n` and the same coefficient
    /// recomputed from the stored `b_1..b_{n-1}` at twice the precision;
    /// returns the maximum over `2 ≤ n ≤ N`.
    pub fn max_recurrence_deviation(&self) -> f64 {
        let bits = 2 * self.precision_bits;
        let n = self.len();
        let (_, divisors) = choose_precision(
            &self.theta,
            n,
            &LinearizeOptions {
                precision_bits: Some(bits),
                fit_window: None,
            },
        )
        .expect("precision already validated at construction");
        let lambda = lambda_of(&self.theta, bits);
        let lambda_conj = BigComplex {
            re: lambda.re.clone(),
            im: Float::with_val(bits, -&lambda.im),
        };
        let promoted: Vec<BigComplex> = self.coeffs.iter().map(|c| c.with_prec(bits)).collect();
        let mut worst = 0.0f64;
        for k in 2..=n {
            let sum = convolution(&promoted, k, bits);
            let inv = inverse_divisor(&lambda_conj, &divisors.betas[k - 2], bits);
            let exact = sum.mul(&inv);
            let diff = BigComplex {
                re: Float::with_val(bits, &exact.re - &promoted[k - 1].re),
                im: Float::with_val(bits, &exact.im - &promoted[k - 1].im),
            };
            let rel = Float::with_val(64, diff.abs(64) / exact.abs(64)).to_f64();
            worst = worst.max(rel);
        }
        worst
    }

    pub fn to_checkpoint(&self) -> SeriesCheckpoint {
        SeriesCheckpoint {
            theta: self.theta.clone(),
            precision_bits: self.precision_bits,
            min_divisor: self.min_divisor,
            fit_window: self.radius.window,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| [hexfloat::big_to_hex(&c.re), hexfloat::big_to_hex(&c.im)])
                .collect(),
        }
    }

    pub fn from_checkpoint(cp: &SeriesCheckpoint) -> Result<Self> {
        let bits = cp.precision_bits;
        let coeffs = cp
            .coeffs
            .iter()
            .map(|[re, im]| {
                Ok(BigComplex {
                    re: hexfloat::big_from_hex(re, bits)?,
                    im: hexfloat::big_from_hex(im, bits)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() || coeffs[0] != BigComplex::one(bits) {
            return Err(Error::Parse("checkpoint must start with b_1 = 1".into()));
        }
        let log2_abs = coeffs.iter().map(BigComplex::log2_abs).collect();
        let mut series = LinearizationSeries {
            theta: cp.theta.clone(),
            lambda: lambda_of(&cp.theta, bits),
            coeffs,
            log2_abs,
            precision_bits: bits,
            min_divisor: cp.min_divisor,
            radius: RadiusFit {
                radius: f64::NAN,
                slope: f64::NAN,
                intercept: f64::NAN,
                rms_residual: f64::NAN,
                window: cp.fit_window,
                points_used: 0,
            },
        };
        series.radius = fit_radius(&series, cp.fit_window, 2)?;
        Ok(series)
    }
}

/// Portable series snapshot: every number as a hexadecimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheckpoint {
    pub theta: RotationNumber,
    pub precision_bits: u32,
    #[serde(with = "hexfloat::as_hex")]
    pub min_divisor: f64,
    pub fit_window: (usize, usize),
    pub coeffs: Vec<[String; 2]>,
}

fn fit_radius(
    series: &LinearizationSeries,
    window: (usize, usize),
    min_points: usize,
) -> Result<RadiusFit> {
    let (lo, hi) = window;
    if lo < 1 || lo > hi || hi > series.len() {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo}, {hi}] outside [1, {}]",
            series.len()
        )));
    }
    let samples: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|n| {
            let l = series.log2_abs(n);
            l.is_finite()
                .then_some((n as f64, l * std::f64::consts::LN_2))
        })
        .collect();
    if samples.len() < min_points.max(2) {
        return Err(Error::DegenerateFit(format!(
            "{} usable coefficients in [{lo}, {hi}]",
            samples.len()
        )));
    }
    let (slope, intercept, rms) = least_squares(&samples);
    let radius = (-slope).exp();
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "slope {slope} gives no radius"
        )));
    }
    if radius >= 4.0 {
        return Err(Error::RadiusOutOfRange(radius));
    }
    Ok(RadiusFit {
        radius,
        slope,
        intercept,
        rms_residual: rms,
        window,
        points_used: samples.len(),
    })
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a, rms residual)`.
pub(crate) fn least_squares(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = samples
        .iter()
        .map(|s| (s.1 - intercept - slope * s.0).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Hadamard-style radius estimate over an explicit window inside `[N/2, N]`.
pub fn estimate_radius(series: &LinearizationSeries, window: (usize, usize)) -> Result<RadiusFit> {
    let n = series.len();
    let (lo, hi) = window;
    if lo < n / 2 || hi > n || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo}, {hi}] must lie in [{}, {n}]",
            n / 2
        )));
    }
    if hi - lo + 1 < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo}, {hi}] holds fewer than {MIN_FIT_POINTS} coefficients"
        )));
    }
    fit_radius(series, window, 2)
}

/// Horner evaluation of `Σ a_n wⁿ` (no constant term).
fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().rev() {
        acc = acc * w + a;
    }
    acc * w
}

fn unit_grid(m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
}

/// Functional-equation residual `max_k |φ(λz_k) − λφ(z_k) − φ(z_k)²|` on
/// `z_k = r e^{2πik/M}`, with φ the truncated series.
pub fn residual(series: &LinearizationSeries, r: f64, m: usize) -> Result<ResidualReport> {
    if !(r > 0.0) || m < SampledCurve::MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "residual needs r > 0 and M ≥ {}, got r = {r}, M = {m}",
            SampledCurve::MIN_SAMPLES
        )));
    }
    if !(r < series.radius_estimate()) {
        return Err(Error::InvalidArgument(format!(
            "r = {r} is not below the radius estimate {}",
            series.radius_estimate()
        )));
    }
    let a = series.scaled_coefficients(r);
    let lambda = series.lambda_f64();
    let max_residual = unit_grid(m)
        .map(|w| {
            let phi = horner(&a, w);
            let phi_rot = horner(&a, lambda * w);
            (phi_rot - lambda * phi - phi * phi).norm()
        })
        .fold(0.0, f64::max);
    Ok(ResidualReport {
        max_residual,
        tail_bound: series.tail_bound(r),
    })
}

/// Samples `φ(r e^{2πik/M})` for `k = 0..M`.
pub fn sample_curve(
    series: &LinearizationSeries,
    r: f64,
    m: usize,
    tail_tolerance: f64,
) -> Result<SampledCurve> {
    if !(r > 0.0) || m < SampledCurve::MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "sampling needs r > 0 and M ≥ {}, got r = {r}, M = {m}",
            SampledCurve::MIN_SAMPLES
        )));
    }
    let bound = series.tail_bound(r);
    if !(bound < tail_tolerance) {
        return Err(Error::TailTooLarge {
            radius: r,
            bound,
            tolerance: tail_tolerance,
        });
    }
    let a = series.scaled_coefficients(r);
    let points = unit_grid(m).map(|w| horner(&a, w)).collect();
    SampledCurve::new(
        points,
        CurveSource::Series {
            theta: series.theta.clone(),
            radius: r,
            series_len: series.len(),
        },
    )
}

/// Distance from the samples to the critical point `−λ/2` of `P_θ`.
pub fn critical_point_distance(curve: &SampledCurve, lambda: Complex64) -> f64 {
    let critical = -lambda / 2.0;
    curve
        .points()
        .iter()
        .map(|p| (p - critical).norm())
        .fold(f64::INFINITY, f64::min)
}
