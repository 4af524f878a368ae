//! Continued fractions, Bruno partial sums and bounded-type approximants of
//! rotation numbers θ ∈ (0, 1).
//!
//! Every rotation number carries its value as an MPFR float with an explicit
//! mantissa width. Expansions only report entries that are determined by that
//! width: the expansion runs on the exact interval `[x - ulp, x + ulp]` and
//! stops as soon as the two ends disagree.

use std::cmp::Ordering;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexfloat;

pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Simple continued fraction `[0; a1, a2, ...]` of a number in (0, 1).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ContinuedFraction {
    entries: Vec<u64>,
    terminated: bool,
}

impl ContinuedFraction {
    pub fn new(entries: Vec<u64>, terminated: bool) -> Result<Self> {
        if entries.contains(&0) {
            return Err(Error::InvalidArgument(
                "continued-fraction entries must be positive".into(),
            ));
        }
        Ok(ContinuedFraction {
            entries,
            terminated,
        })
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// True when the expansion ended because the input is rational at its
    /// working precision.
    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry(&self) -> Option<u64> {
        self.entries.iter().copied().max()
    }

    /// Denominators `q_0, q_1, ..., q_d` with `q_0 = 1`, `q_1 = a_1`.
    pub fn denominators(&self) -> Vec<Integer> {
        let mut qs = Vec::with_capacity(self.entries.len() + 1);
        let mut prev = Integer::new();
        let mut cur = Integer::from(1);
        qs.push(cur.clone());
        for &a in &self.entries {
            let next = Integer::from(&cur * a) + &prev;
            prev = std::mem::replace(&mut cur, next);
            qs.push(cur.clone());
        }
        qs
    }

    /// The last convergent `p_d / q_d` (zero for an empty expansion).
    pub fn to_rational(&self) -> Rational {
        match convergents(self).pop() {
            Some((p, q)) => Rational::from((p, q)),
            None => Rational::new(),
        }
    }
}

/// Expands `x` into at most `depth` continued-fraction entries.
///
/// Returns fewer than `depth` entries only when the input is rational at its
/// working precision, in which case the result is flagged `terminated`.
pub fn cf_expand(x: &Float, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let (entries, stop) = expand_interval(x, depth)?;
    match stop {
        Stop::Exhausted => Err(Error::PrecisionExhausted(format!(
            "{}-bit input determines only {} of {} continued-fraction entries",
            x.prec(),
            entries.len(),
            depth
        ))),
        Stop::Depth => ContinuedFraction::new(entries, false),
        Stop::Terminated => ContinuedFraction::new(entries, true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Depth,
    Terminated,
    Exhausted,
}

/// Euclidean algorithm run on both ends of the uncertainty interval of `x`.
fn expand_interval(x: &Float, depth: usize) -> Result<(Vec<u64>, Stop)> {
    if !(x.is_finite() && *x > 0 && *x < 1) {
        return Err(Error::InvalidArgument(format!(
            "expansion needs 0 < x < 1, got {}",
            x.to_f64()
        )));
    }
    let prec = x.prec();
    let exp = x.get_exp().expect("nonzero finite value");
    let ulp = pow2_rational(exp - prec as i32);
    let center = x.to_rational().expect("finite value");
    let mut lo = Rational::from(&center - &ulp);
    let mut hi = Rational::from(&center + &ulp);
    if lo <= 0 || hi >= 1 {
        return Ok((Vec::new(), Stop::Exhausted));
    }
    // Below this width an interval that straddles an integer is read as an
    // exact rational rather than as an undetermined entry.
    let rational_width = pow2_rational(-((prec / 2) as i32));

    let mut entries = Vec::new();
    while entries.len() < depth {
        if lo == 0 {
            let stop = if hi < rational_width {
                Stop::Terminated
            } else {
                Stop::Exhausted
            };
            return Ok((entries, stop));
        }
        let y_lo = Rational::from(hi.recip_ref());
        let y_hi = Rational::from(lo.recip_ref());
        let a = Rational::from(y_lo.floor_ref()).into_numer_denom().0;
        let b = Rational::from(y_hi.floor_ref()).into_numer_denom().0;
        if a == b {
            entries.push(entry_to_u64(&a)?);
            lo = y_lo - &a;
            hi = y_hi - &a;
            continue;
        }
        let width = Rational::from(&y_hi - &y_lo);
        if b == Integer::from(&a + 1u32) && width < rational_width {
            entries.push(entry_to_u64(&b)?);
            return Ok((entries, Stop::Terminated));
        }
        return Ok((entries, Stop::Exhausted));
    }
    Ok((entries, Stop::Depth))
}

fn pow2_rational(e: i32) -> Rational {
    if e >= 0 {
        Rational::from(Integer::from(1) << e as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-e) as u32))
    }
}

fn entry_to_u64(a: &Integer) -> Result<u64> {
    a.to_u64().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "continued-fraction entry {a} does not fit in 64 bits"
        ))
    })
}

/// Convergents `(p_n, q_n)` for `n = 1..=d`, each in lowest terms.
pub fn convergents(cf: &ContinuedFraction) -> Vec<(Integer, Integer)> {
    let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::new());
    let (mut p, mut q) = (Integer::new(), Integer::from(1));
    let mut out = Vec::with_capacity(cf.len());
    for &a in cf.entries() {
        let p_next = Integer::from(&p * a) + &p_prev;
        let q_next = Integer::from(&q * a) + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Partial Bruno sum `Σ_{n=1..terms} ln(q_{n+1}) / q_n`.
pub fn bruno_sum(cf: &ContinuedFraction, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be at least 1".into()));
    }
    if cf.len() < terms + 1 {
        return Err(Error::InsufficientDepth {
            needed: terms + 1,
            available: cf.len(),
        });
    }
    let qs = cf.denominators();
    Ok((1..=terms)
        .map(|n| ln_integer(&qs[n + 1]) / integer_to_f64(&qs[n]))
        .sum())
}

pub(crate) fn ln_integer(q: &Integer) -> f64 {
    Float::with_val(64, q).ln().to_f64()
}

fn integer_to_f64(q: &Integer) -> f64 {
    Float::with_val(64, q).to_f64()
}

/// A rotation number θ ∈ (0, 1) with its expansion and classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RotationNumberRecord", try_from = "RotationNumberRecord")]
pub struct RotationNumber {
    value: Float,
    cf: ContinuedFraction,
    bruno_sum: Option<f64>,
    type_bound: Option<u64>,
}

impl RotationNumber {
    fn assemble(value: Float, cf: ContinuedFraction) -> Self {
        let type_bound = if cf.is_terminated() {
            None
        } else {
            cf.max_entry()
        };
        let bruno = if cf.is_terminated() || cf.len() < 2 {
            None
        } else {
            bruno_sum(&cf, cf.len() - 1).ok()
        };
        RotationNumber {
            value,
            cf,
            bruno_sum: bruno,
            type_bound,
        }
    }

    /// Wraps a value, expanding it as deep as its precision allows.
    pub fn from_value(value: Float) -> Result<Self> {
        let (entries, stop) = expand_interval(&value, usize::MAX)?;
        if entries.is_empty() {
            return Err(Error::PrecisionExhausted(format!(
                "{}-bit value determines no continued-fraction entry",
                value.prec()
            )));
        }
        let cf = ContinuedFraction::new(entries, stop == Stop::Terminated)?;
        Ok(Self::assemble(value, cf))
    }

    /// The golden mean `(√5 − 1)/2 = [0; 1, 1, 1, ...]`.
    pub fn golden_mean(precision_bits: u32) -> Self {
        Self::periodic_tail(&[], 1, precision_bits).expect("all-ones expansion is valid")
    }

    /// `[0; prefix..., tail, tail, tail, ...]`, with the periodic tail summed
    /// in closed form: `ξ = [tail; tail, ...] = (tail + √(tail² + 4)) / 2`.
    pub fn periodic_tail(prefix: &[u64], tail: u64, precision_bits: u32) -> Result<Self> {
        if tail == 0 || prefix.contains(&0) {
            return Err(Error::InvalidArgument(
                "continued-fraction entries must be positive".into(),
            ));
        }
        if precision_bits < 24 {
            return Err(Error::InvalidArgument(
                "precision must be at least 24 bits".into(),
            ));
        }
        let work = precision_bits + 32;
        let t = Float::with_val(work, tail);
        let disc = Float::with_val(work, &t * &t) + 4u32;
        let mut x = (disc.sqrt() + &t) / 2u32;
        for &a in prefix.iter().rev() {
            x = x.recip() + a;
        }
        let value = Float::with_val(precision_bits, x.recip());

        // Keep the entries whose convergent error 1/q² stays well above the
        // rounding error of the value.
        let mut entries = prefix.to_vec();
        let limit = Integer::from(1) << (precision_bits - 16);
        let mut q_prev = Integer::new();
        let mut q = Integer::from(1);
        for &a in prefix {
            let next = Integer::from(&q * a) + &q_prev;
            q_prev = std::mem::replace(&mut q, next);
        }
        loop {
            let next = Integer::from(&q * tail) + &q_prev;
            if Integer::from(next.square_ref()) >= limit && entries.len() > prefix.len() {
                break;
            }
            entries.push(tail);
            q_prev = std::mem::replace(&mut q, next);
        }
        Ok(Self::assemble(
            value,
            ContinuedFraction::new(entries, false)?,
        ))
    }

    /// Parses a decimal literal such as `0.6180339887` at the given precision.
    pub fn from_decimal(text: &str, precision_bits: u32) -> Result<Self> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::Parse(format!("decimal rotation number {text:?}: {e}")))?;
        let value = Float::with_val(precision_bits, parsed);
        if !(value > 0 && value < 1) {
            return Err(Error::InvalidArgument(format!(
                "rotation number {text} is outside (0, 1)"
            )));
        }
        Self::from_value(value)
    }

    /// The rational `[0; entries...]`.
    pub fn from_finite_cf(entries: &[u64], precision_bits: u32) -> Result<Self> {
        let exact = ContinuedFraction::new(entries.to_vec(), true)?.to_rational();
        let (p, q) = exact.into_numer_denom();
        match (p.to_u64(), q.to_u64()) {
            (Some(p), Some(q)) => Self::rational(p, q, precision_bits),
            _ => Err(Error::InvalidArgument(
                "rational rotation number does not fit 64-bit numerator and denominator".into(),
            )),
        }
    }

    /// The rational `p/q`; flagged as terminated and refused by dynamics.
    pub fn rational(p: u64, q: u64, precision_bits: u32) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidArgument(format!(
                "rational rotation number must satisfy 0 < p/q < 1, got {p}/{q}"
            )));
        }
        let value = Float::with_val(precision_bits, Rational::from((p, q)));
        let mut entries = Vec::new();
        let (mut num, mut den) = (q, p);
        while den != 0 {
            entries.push(num / den);
            let r = num % den;
            num = den;
            den = r;
        }
        Ok(Self::assemble(
            value,
            ContinuedFraction::new(entries, true)?,
        ))
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn precision_bits(&self) -> u32 {
        self.value.prec()
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn bruno_sum(&self) -> Option<f64> {
        self.bruno_sum
    }

    pub fn type_bound(&self) -> Option<u64> {
        self.type_bound
    }

    pub fn is_rational(&self) -> bool {
        self.cf.is_terminated()
    }

    /// |self − other| evaluated at the larger of the two precisions.
    pub fn distance(&self, other: &RotationNumber) -> f64 {
        let prec = self.precision_bits().max(other.precision_bits());
        Float::with_val(prec, &self.value - &other.value)
            .abs()
            .to_f64()
    }
}

/// Truncates θ's expansion after `cut` entries, appends `tail_entry`, then an
/// all-ones tail: `[0; a_1, ..., a_cut, tail_entry, 1, 1, ...]`.
pub fn bounded_type_approximant(
    theta: &RotationNumber,
    cut: usize,
    tail_entry: u64,
) -> Result<RotationNumber> {
    if cut == 0 {
        return Err(Error::InvalidArgument("cut must be at least 1".into()));
    }
    if tail_entry == 0 {
        return Err(Error::InvalidArgument("tail entry must be positive".into()));
    }
    let entries = theta.cf.entries();
    if entries.len() < cut {
        return Err(Error::InsufficientDepth {
            needed: cut,
            available: entries.len(),
        });
    }
    let mut prefix = entries[..cut].to_vec();
    prefix.push(tail_entry);
    RotationNumber::periodic_tail(&prefix, 1, theta.precision_bits())
}

/// JSON layout of a rotation number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationNumberRecord {
    pub value_hex: String,
    pub precision_bits: u32,
    pub cf: Vec<u64>,
    pub type_bound: Option<u64>,
}

impl From<RotationNumber> for RotationNumberRecord {
    fn from(theta: RotationNumber) -> Self {
        RotationNumberRecord {
            value_hex: hexfloat::big_to_hex(&theta.value),
            precision_bits: theta.precision_bits(),
            cf: theta.cf.entries,
            type_bound: theta.type_bound,
        }
    }
}

impl TryFrom<RotationNumberRecord> for RotationNumber {
    type Error = Error;

    fn try_from(record: RotationNumberRecord) -> Result<Self> {
        let value = hexfloat::big_from_hex(&record.value_hex, record.precision_bits)?;
        if !(value > 0 && value < 1) {
            return Err(Error::Parse("rotation number outside (0, 1)".into()));
        }
        // type_bound is null exactly for rational inputs.
        let terminated = record.type_bound.is_none();
        let cf = ContinuedFraction::new(record.cf, terminated)?;
        let theta = RotationNumber::assemble(value, cf);
        if theta.type_bound != record.type_bound {
            return Err(Error::Parse(format!(
                "type_bound {:?} disagrees with expansion maximum {:?}",
                record.type_bound, theta.type_bound
            )));
        }
        Ok(theta)
    }
}

impl PartialOrd for RotationNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_float(bits: u32) -> Float {
        (Float::with_val(bits, 5).sqrt() - 1u32) / 2u32
    }

    #[test]
    fn golden_expands_to_ones() {
        let cf = cf_expand(&golden_float(256), 10).unwrap();
        assert_eq!(cf.entries(), &[1; 10]);
        assert!(!cf.is_terminated());
    }

    #[test]
    fn one_third_terminates() {
        let x = Float::with_val(256, Rational::from((1, 3)));
        let cf = cf_expand(&x, 5).unwrap();
        assert_eq!(cf.entries(), &[3]);
        assert!(cf.is_terminated());
    }

    #[test]
    fn dyadic_rationals_terminate() {
        let x = Float::with_val(64, 0.375);
        let cf = cf_expand(&x, 8).unwrap();
        assert_eq!(cf.entries(), &[2, 1, 2]);
        assert!(cf.is_terminated());
        assert_eq!(cf.to_rational(), Rational::from((3, 8)));
    }

    #[test]
    fn precision_runs_out_on_deep_requests() {
        let err = cf_expand(&golden_float(64), 200).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted(_)));
        // ~log_φ²(2^64) entries are determined
        assert!(cf_expand(&golden_float(64), 40).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(cf_expand(&Float::with_val(64, 1.5), 3).is_err());
        assert!(cf_expand(&Float::with_val(64, 0.0), 3).is_err());
        assert!(cf_expand(&golden_float(64), 0).is_err());
    }

    #[test]
    fn convergents_of_single_entry() {
        let cf = ContinuedFraction::new(vec![3], true).unwrap();
        assert_eq!(convergents(&cf), vec![(Integer::from(1), Integer::from(3))]);
    }

    #[test]
    fn denominators_of_golden_are_fibonacci() {
        let cf = ContinuedFraction::new(vec![1; 6], false).unwrap();
        let qs: Vec<u64> = cf
            .denominators()
            .iter()
            .map(|q| q.to_u64().unwrap())
            .collect();
        assert_eq!(&qs[..6], &[1, 1, 2, 3, 5, 8]);
    }

    #[test]
    fn bruno_sum_needs_depth() {
        let cf = ContinuedFraction::new(vec![3], true).unwrap();
        assert_eq!(
            bruno_sum(&cf, 1),
            Err(Error::InsufficientDepth {
                needed: 2,
                available: 1
            })
        );
    }

    #[test]
    fn rational_constructor() {
        let theta = RotationNumber::rational(2, 7, 128).unwrap();
        assert_eq!(theta.cf().entries(), &[3, 2]);
        assert!(theta.is_rational());
        assert_eq!(theta.type_bound(), None);
        assert!(RotationNumber::rational(3, 3, 64).is_err());
    }

    #[test]
    fn approximant_examples() {
        let golden = RotationNumber::golden_mean(256);
        let same = bounded_type_approximant(&golden, 5, 1).unwrap();
        assert!(same.distance(&golden) < 1e-30);

        let far = bounded_type_approximant(&golden, 5, 1000).unwrap();
        assert_eq!(far.type_bound(), Some(1000));
        assert!(far.distance(&golden) < 1.0 / 64.0);

        let twos = RotationNumber::periodic_tail(&[], 2, 256).unwrap();
        let a = bounded_type_approximant(&twos, 3, 7).unwrap();
        assert_eq!(&a.cf().entries()[..6], &[2, 2, 2, 7, 1, 1]);
        assert_eq!(a.type_bound(), Some(7));

        let short = RotationNumber::rational(1, 3, 64).unwrap();
        assert!(matches!(
            bounded_type_approximant(&short, 2, 1),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn periodic_tail_matches_expansion() {
        let theta = RotationNumber::periodic_tail(&[4, 1, 9], 3, 192).unwrap();
        let expanded = cf_expand(theta.value(), 40).unwrap();
        assert_eq!(expanded.entries(), &theta.cf().entries()[..40]);
    }

    #[test]
    fn json_roundtrip() {
        let theta = RotationNumber::periodic_tail(&[2, 5], 1, 200).unwrap();
        let text = serde_json::to_string(&theta).unwrap();
        let back: RotationNumber = serde_json::from_str(&text).unwrap();
        assert_eq!(back, theta);

        let rational = RotationNumber::rational(1, 3, 64).unwrap();
        let text = serde_json::to_string(&rational).unwrap();
        assert!(text.contains("\"type_bound\":null"));
        let back: RotationNumber = serde_json::from_str(&text).unwrap();
        assert!(back.is_rational());
    }
}
