//! Rotation-number specifications accepted on the command line:
//!
//! * `golden`: the golden mean `(√5 − 1)/2`
//! * `p/q`: a rational, refused by the dynamics commands
//! * `cf:[a1,a2,...]+tail:T`: the given entries followed by `T` repeated forever;
//!   without `+tail:T` the expansion is finite and the number rational
//! * `0.123456@bits`: a decimal literal rounded to `bits` (the default precision
//!   when the suffix is absent)

use siegel_core::{Error, Result, RotationNumber};

fn entries(list: &str) -> Result<Vec<u64>> {
    let inner = list
        .strip_prefix('[')
        .and_then(|l| l.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [a1,a2,...], got {list:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|a| {
            a.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad continued-fraction entry {a:?}")))
        })
        .collect()
}

pub fn parse_theta(text: &str, default_bits: u32) -> Result<RotationNumber> {
    let text = text.trim();
    if text == "golden" {
        return Ok(RotationNumber::golden_mean(default_bits));
    }
    if let Some(rest) = text.strip_prefix("cf:") {
        return match rest.split_once("+tail:") {
            Some((list, tail)) => {
                let tail = tail
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad tail entry {tail:?}")))?;
                RotationNumber::periodic_tail(&entries(list.trim())?, tail, default_bits)
            }
            None => RotationNumber::from_finite_cf(&entries(rest.trim())?, default_bits),
        };
    }
    if let Some((p, q)) = text.split_once('/') {
        let num = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad rational {text:?}")))
        };
        return RotationNumber::rational(num(p)?, num(q)?, default_bits);
    }
    let (digits, bits) = match text.split_once('@') {
        Some((d, b)) => (
            d,
            b.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad precision suffix in {text:?}")))?,
        ),
        None => (text, default_bits),
    };
    if !digits.trim().starts_with("0.") && !digits.trim().starts_with('.') {
        return Err(Error::Parse(format!(
            "unrecognized rotation number {text:?}; expected golden, p/q, cf:[...]+tail:T or 0.xxx@bits"
        )));
    }
    RotationNumber::from_decimal(digits, bits)
}
