//! Bit-exact textual encodings for numbers that cross a file boundary.
//!
//! `f64` values use the C99 `%a` layout (`0x1.921fb54442d18p+1`), which
//! `float.fromhex` in Python and `strtod` in C read back exactly.
//! Multi-precision values use MPFR's radix-16 layout (`9.e3779b97f4a7c@-1`,
//! exponent counted in hexadecimal digits) together with an explicit
//! precision in bits.

use rug::Float;

use crate::error::{Error, Result};

/// Formats `x` as a C99 hexadecimal floating-point literal.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    let mut digits = format!("{mantissa:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    let exp_sign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{frac}p{exp_sign}{}", exp.abs())
}

/// Parses a hexadecimal literal produced by [`format`]; plain decimal
/// literals are accepted too so that hand-written inputs keep working.
pub fn parse(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "nan" | "NaN" => return Ok(f64::NAN),
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return s
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    };
    let bad = || Error::Parse(format!("malformed hex float {s:?}"));
    let (digits, exp) = match hex.find(['p', 'P']) {
        Some(pos) => (
            &hex[..pos],
            hex[pos + 1..].parse::<i64>().map_err(|_| bad())?,
        ),
        None => (hex, 0),
    };
    let mut mantissa: u128 = 0;
    let mut shift: i64 = 0;
    let mut seen_point = false;
    let mut any_digit = false;
    for c in digits.chars() {
        if c == '.' {
            if seen_point {
                return Err(bad());
            }
            seen_point = true;
            continue;
        }
        let d = c.to_digit(16).ok_or_else(bad)? as u128;
        any_digit = true;
        if mantissa >> 120 == 0 {
            mantissa = (mantissa << 4) | d;
            if seen_point {
                shift -= 4;
            }
        } else if !seen_point {
            // digits beyond u128 capacity only scale the value
            shift += 4;
        }
    }
    if !any_digit {
        return Err(bad());
    }
    let value = ldexp(mantissa as f64, exp + shift);
    Ok(if negative { -value } else { value })
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        x *= pow2(STEP);
        e -= STEP;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -STEP {
        x *= pow2(-STEP);
        e += STEP;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(e)
}

fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Radix-16 rendering of a multi-precision value; exact for its precision.
pub fn big_to_hex(x: &Float) -> String {
    x.to_string_radix(16, None)
}

/// Parses [`big_to_hex`] output at the given precision.
pub fn big_from_hex(s: &str, precision_bits: u32) -> Result<Float> {
    let parsed = Float::parse_radix(s.trim(), 16)
        .map_err(|e| Error::Parse(format!("hex value {s:?}: {e}")))?;
    Ok(Float::with_val(precision_bits, parsed))
}

/// `#[serde(with = "hexfloat::as_hex")]` for `f64` fields.
pub mod as_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "hexfloat::option_as_hex")]` for `Option<f64>` fields.
pub mod option_as_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&super::format(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| super::parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}
