use proptest::prelude::*;
use rug::{Float, Integer, Rational};
use siegel_core::rotation::{
    bounded_type_approximant, bruno_sum, cf_expand, convergents, ContinuedFraction,
};
use siegel_core::{Error, RotationNumber};

/// `e` to about 1000 decimal digits from `Σ 1/k!`, as an exact rational.
fn e_rational() -> Rational {
    let mut sum = Rational::from(0);
    let mut term = Rational::from(1);
    for k in 1..500u32 {
        sum += &term;
        term /= k;
    }
    sum
}

/// Euclid on an exact rational.
fn euclid(mut x: Rational, depth: usize) -> Vec<u64> {
    let mut out = Vec::new();
    while out.len() < depth {
        x = x.recip();
        let a = Integer::from(x.floor_ref());
        x -= &a;
        out.push(a.to_u64().unwrap());
    }
    out
}

#[test]
fn e_minus_two_expansion() {
    let exact = e_rational() - 2u32;
    let oracle = euclid(exact.clone(), 6);
    assert_eq!(oracle, [1, 2, 1, 1, 4, 1]);
    let x = Float::with_val(256, &exact);
    let cf = cf_expand(&x, 6).unwrap();
    assert_eq!(cf.entries(), oracle.as_slice());
}

#[test]
fn e_minus_two_denominators() {
    let cf = ContinuedFraction::new(vec![1, 2, 1, 1, 4, 1], false).unwrap();
    let q: Vec<Integer> = cf.denominators().into_iter().take(6).collect();
    assert_eq!(q, [1, 1, 3, 4, 7, 32].map(Integer::from));
    // each convergent is the exact truncated fraction
    for (n, (p, q)) in convergents(&cf).into_iter().enumerate() {
        let prefix = ContinuedFraction::new(cf.entries()[..=n].to_vec(), true).unwrap();
        assert_eq!(Rational::from((p, q)), prefix.to_rational());
    }
}

#[test]
fn golden_bruno_sum_converges() {
    let g = RotationNumber::golden_mean(256);
    let sums: Vec<f64> = (1..80).map(|t| bruno_sum(g.cf(), t).unwrap()).collect();
    let increments: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    // increments[k] is term k + 2, i.e. ln(F_{k+4})/F_{k+3}; term 36 is the first below 1e-6
    assert!(increments.iter().all(|&d| d >= 0.0));
    assert!(increments[33] >= 1e-6 && increments[34] < 1e-6);
    assert!(increments[34..].iter().all(|&d| d < 1e-6));
    // past term 30 consecutive terms shrink by a factor below 0.65
    let s30 = sums[29];
    let first = increments[29];
    let ratio = 0.65;
    assert!(increments[29..45].windows(2).all(|w| w[1] < ratio * w[0]));
    assert!(sums[78] - s30 <= first / (1.0 - ratio));
}

#[test]
fn rational_has_no_bruno_sum() {
    let cf = ContinuedFraction::new(vec![3], true).unwrap();
    assert!(matches!(
        bruno_sum(&cf, 1),
        Err(Error::InsufficientDepth { .. })
    ));
}

#[test]
fn bounded_type_bruno_bound() {
    let silver = RotationNumber::periodic_tail(&[], 2, 256).unwrap();
    let mixed = RotationNumber::periodic_tail(&[1, 2, 1, 2, 2, 1, 1, 2], 1, 256).unwrap();
    for theta in [silver, mixed] {
        let m = theta.type_bound().unwrap();
        assert!(m <= 2);
        let q = theta.cf().denominators();
        let bound: f64 = (1..=20)
            .map(|n| {
                let next = Integer::from(&q[n] * (m + 1)) + &q[n - 1];
                next.to_f64().ln() / q[n].to_f64()
            })
            .sum();
        assert!(bruno_sum(theta.cf(), 20).unwrap() <= bound);
    }
}

#[test]
fn approximants_converge_with_cut() {
    let g = RotationNumber::golden_mean(256);
    for tail in [2u64, 10, 100] {
        let d: Vec<f64> = [5, 10, 20]
            .iter()
            .map(|&cut| {
                bounded_type_approximant(&g, cut, tail)
                    .unwrap()
                    .distance(&g)
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(d[2] < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convergents_bracket_the_value(entries in proptest::collection::vec(1u64..50, 2..12), tail in 1u64..5) {
        let theta = RotationNumber::periodic_tail(&entries, tail, 512).unwrap();
        let exact = theta.value().to_rational().unwrap();
        let conv = convergents(theta.cf());
        for n in 0..conv.len() - 1 {
            let (p, q) = &conv[n];
            let q_next = &conv[n + 1].1;
            let err = (&exact - Rational::from((p.clone(), q.clone()))).abs();
            let bound = Rational::from((Integer::from(1), Integer::from(q * q_next)));
            prop_assert!(err <= bound, "n = {}", n);
        }
    }

    #[test]
    fn bruno_partial_sums_are_monotone(entries in proptest::collection::vec(1u64..1000, 6..20)) {
        let cf = ContinuedFraction::new(entries, false).unwrap();
        let sums: Vec<f64> = (1..cf.len()).map(|t| bruno_sum(&cf, t).unwrap()).collect();
        prop_assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
