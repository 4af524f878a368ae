use siegel_core::curvegeom::DEFAULT_PAIR_BUDGET;
use siegel_core::linearization::{linearize, DEFAULT_TAIL_TOLERANCE};
use siegel_core::perturbation::{
    radius_targeted_search, run_perturbation, ExperimentConfig, ExperimentTrace, RoundStatus,
};
use siegel_core::{LinearizeOptions, RotationNumber};

fn golden_radius(n: usize) -> f64 {
    linearize(
        &RotationNumber::golden_mean(256),
        n,
        &LinearizeOptions::default(),
    )
    .unwrap()
    .radius_estimate()
}

fn config(
    k: f64,
    epsilon: f64,
    cut: (usize, usize),
    tails: Vec<u64>,
    n: usize,
    m: usize,
) -> ExperimentConfig {
    let r = golden_radius(n);
    ExperimentConfig {
        theta: RotationNumber::golden_mean(256),
        r1: 0.3 * r,
        r2: 0.99 * r,
        k,
        epsilon,
        cut_range: cut,
        tail_entries: tails,
        series_n: n,
        samples_m: m,
        pinch_margin: 1.0,
        pair_budget: DEFAULT_PAIR_BUDGET,
        tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        precision_bits: None,
    }
}

fn assert_contract(trace: &ExperimentTrace) {
    let c = &trace.config;
    for round in trace.found() {
        let r = round.r_prime.unwrap();
        assert!(round.theta_distance < c.epsilon);
        assert!(c.r1 < r && r < c.r2);
        assert!(r < round.radius_estimate.unwrap());
        assert!(round.sup_drift.unwrap() < c.epsilon);
        assert!(round.max_pinch > c.k);
    }
}

fn jsonl(trace: &ExperimentTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    trace.write_jsonl(&mut buf).unwrap();
    buf
}

#[test]
fn identity_tail_returns_theta() {
    let r = golden_radius(1000);
    let mut c = config(1.05, 0.1, (5, 5), vec![1], 1000, 256);
    c.r1 = 0.3 * r;
    c.r2 = 0.5 * r;
    let trace = run_perturbation(&c).unwrap();
    let round = &trace.rounds[0];
    assert_eq!(round.theta_n, c.theta);
    assert_eq!(round.theta_distance, 0.0);
    // the unperturbed curve is nearly round this deep inside the disk
    assert!(round.max_pinch < 1.05 + c.pinch_margin);
    assert_eq!(round.status, RoundStatus::NotFound);
}

#[test]
fn large_tail_entry_pinches_and_is_found() {
    let c = config(1.2, 0.5, (2, 2), vec![100], 4000, 512);
    let trace = run_perturbation(&c).unwrap();
    let round = &trace.rounds[0];
    assert!(round.threshold_met, "{round:?}");
    assert_eq!(round.status, RoundStatus::Found);
    assert_contract(&trace);
    let again = run_perturbation(&c).unwrap();
    assert_eq!(jsonl(&trace), jsonl(&again));
}

#[test]
fn zero_budget_finds_nothing() {
    let c = config(1.2, 0.0, (2, 2), vec![1, 100], 4000, 512);
    let trace = run_perturbation(&c).unwrap();
    assert_eq!(trace.found().count(), 0);
    assert!(trace.rounds[1].threshold_met);
}

/// Regression record: truncating after eight entries leaves too little room
/// for the curve to pinch by 2 + 1 below the radius at which the series is
/// still trustworthy.
#[test]
fn deep_cut_budget_is_exhausted() {
    let c = config(2.0, 0.5, (8, 8), vec![10, 100, 1000], 2000, 512);
    let trace = run_perturbation(&c).unwrap();
    assert_eq!(trace.rounds.len(), 3);
    assert!(trace
        .rounds
        .iter()
        .all(|r| r.status == RoundStatus::NotFound));
    assert!(trace.rounds.iter().all(|r| r.max_pinch < 1.5));
    assert_contract(&trace);
}

#[test]
fn radius_target_with_identity_tail() {
    let g = RotationNumber::golden_mean(256);
    let est = golden_radius(1000);
    let hit = radius_targeted_search(&g, est, 5, &[1], 1000, &LinearizeOptions::default()).unwrap();
    assert_eq!(hit.best, g);
    assert_eq!(hit.achieved_r, est);
    assert!(!hit.unreachable);
}

#[test]
fn radius_target_over_tail_grid() {
    let g = RotationNumber::golden_mean(256);
    let target = 0.8 * golden_radius(2000);
    let grid = [2u64, 5, 10, 50, 100, 1000];
    let hit =
        radius_targeted_search(&g, target, 5, &grid, 2000, &LinearizeOptions::default()).unwrap();
    let radii: Vec<f64> = hit
        .scanned
        .iter()
        .map(|(_, r)| siegel_core::hexfloat::parse(r).unwrap())
        .collect();
    assert!(radii.windows(2).all(|w| w[1] < w[0]), "{radii:?}");
    let best_miss = radii
        .iter()
        .map(|r| (r - target).abs())
        .fold(f64::INFINITY, f64::min);
    assert_eq!((hit.achieved_r - target).abs(), best_miss);
    assert!(!hit.unreachable);
}
