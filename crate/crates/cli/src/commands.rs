use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use siegel_core::curve::synthetic;
use siegel_core::curvegeom::{
    check_c1_stability, hausdorff_distance, holder_exponent, pinch_profile, sup_norm_distance,
    write_profile_csv, PairMode, PinchingReport, DEFAULT_PAIR_BUDGET,
};
use siegel_core::hexfloat;
use siegel_core::linearization::{
    critical_point_distance, estimate_radius, linearize, residual, sample_curve, RadiusFit,
    DEFAULT_TAIL_TOLERANCE,
};
use siegel_core::perturbation::{
    radius_targeted_search, run_perturbation, ExperimentConfig, ExperimentSummary, RoundRecord,
};
use siegel_core::rotation::{bruno_sum, cf_expand, convergents};
use siegel_core::{LinearizationSeries, LinearizeOptions, RotationNumber, SampledCurve};

use crate::args::*;
use crate::theta::parse_theta;

/// Prints a line; a closed stdout (for example a pipe into `head`) is not an error.
#[macro_export]
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Exit status when an experiment exhausts its budget without a found round.
pub const EXIT_NOT_FOUND: u8 = 5;

/// Files touched by a command and its outcome.
#[derive(Default)]
pub struct Run {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub precision_bits: u32,
    pub exit: u8,
}

impl Run {
    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn create(&mut self, path: &Path) -> Result<BufWriter<File>> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(BufWriter::new(file))
    }

    fn read_curve(&mut self, path: &Path) -> Result<SampledCurve> {
        self.inputs.push(path.to_path_buf());
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let curve = if path.extension().is_some_and(|e| e == "json") {
            SampledCurve::from_json(&text)?
        } else {
            SampledCurve::read_csv(text.as_bytes())?
        };
        Ok(curve)
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn theta_of(args: &ThetaArgs) -> Result<RotationNumber> {
    Ok(parse_theta(&args.theta, args.theta_bits)?)
}

fn build_series(theta: &RotationNumber, opts: &SeriesOpts) -> Result<LinearizationSeries> {
    let lin = LinearizeOptions {
        precision_bits: opts.precision,
        fit_window: None,
    };
    Ok(linearize(theta, opts.n, &lin)?)
}

#[derive(Serialize)]
struct RadiusReport {
    theta: RotationNumber,
    series_n: usize,
    precision_bits: u32,
    #[serde(with = "hexfloat::as_hex")]
    min_divisor: f64,
    fit: RadiusFit,
}

pub fn radius(a: &RadiusArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    let series = build_series(&theta, &a.series)?;
    let fit = match a.fit_window {
        Some(w) => estimate_radius(&series, w)?,
        None => series.radius_fit().clone(),
    };
    run.precision_bits = series.precision_bits();
    say!(
        "radius estimate {:.12} (window [{}, {}], rms residual {:.3e}, {} bits, min divisor {:.3e})",
        fit.radius,
        fit.window.0,
        fit.window.1,
        fit.rms_residual,
        series.precision_bits(),
        series.min_divisor()
    );
    run.write_json(
        &a.out,
        &RadiusReport {
            theta,
            series_n: series.len(),
            precision_bits: series.precision_bits(),
            min_divisor: series.min_divisor(),
            fit,
        },
    )
}

pub fn series(a: &SeriesArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    let series = build_series(&theta, &a.series)?;
    run.precision_bits = series.precision_bits();
    say!(
        "{} coefficients at {} bits, radius estimate {:.12}",
        series.len(),
        series.precision_bits(),
        series.radius_estimate()
    );
    run.write_json(&a.out, &series.to_checkpoint())
}

pub fn boundary(a: &BoundaryArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    let series = build_series(&theta, &a.series)?;
    run.precision_bits = series.precision_bits();
    let r = a.r_fraction * series.radius_estimate();
    let curve = sample_curve(&series, r, a.m, a.tail_tolerance)?;
    say!(
        "r = {r:.12} ({} of estimate {:.12}), {} samples, critical point distance {:.6e}",
        a.r_fraction,
        series.radius_estimate(),
        curve.len(),
        critical_point_distance(&curve, series.lambda_f64())
    );
    if a.json {
        let text = curve.to_json()? + "\n";
        std::fs::write(&a.out, text).with_context(|| format!("writing {}", a.out.display()))?;
        run.outputs.push(a.out.clone());
    } else {
        curve.write_csv(run.create(&a.out)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ResidualOutput {
    #[serde(with = "hexfloat::as_hex")]
    r: f64,
    samples: usize,
    series_n: usize,
    #[serde(with = "hexfloat::as_hex")]
    max_residual: f64,
    #[serde(with = "hexfloat::as_hex")]
    tail_bound: f64,
}

pub fn residual_cmd(a: &ResidualArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    let series = build_series(&theta, &a.series)?;
    run.precision_bits = series.precision_bits();
    let r = a.r_fraction * series.radius_estimate();
    let report = residual(&series, r, a.m)?;
    say!(
        "max residual {:.3e} on |z| = {r:.12}, tail bound {:.3e}",
        report.max_residual,
        report.tail_bound
    );
    run.write_json(
        &a.out,
        &ResidualOutput {
            r,
            samples: a.m,
            series_n: series.len(),
            max_residual: report.max_residual,
            tail_bound: report.tail_bound,
        },
    )
}

#[derive(Serialize)]
struct CfOutput {
    theta: RotationNumber,
    entries: Vec<u64>,
    terminated: bool,
    /// `(p_n, q_n)` as decimal strings.
    convergents: Vec<(String, String)>,
    #[serde(with = "hexfloat::option_as_hex")]
    bruno_sum: Option<f64>,
}

pub fn cf(a: &CfArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    run.precision_bits = theta.precision_bits();
    let expansion = cf_expand(theta.value(), a.depth)?;
    let bruno = if expansion.len() >= 2 && !expansion.is_terminated() {
        Some(bruno_sum(&expansion, expansion.len() - 1)?)
    } else {
        None
    };
    say!(
        "[0; {}]{}",
        expansion
            .entries()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(", "),
        if expansion.is_terminated() {
            " (rational)"
        } else {
            ""
        }
    );
    run.write_json(
        &a.out,
        &CfOutput {
            theta,
            entries: expansion.entries().to_vec(),
            terminated: expansion.is_terminated(),
            convergents: convergents(&expansion)
                .into_iter()
                .map(|(p, q)| (p.to_string(), q.to_string()))
                .collect(),
            bruno_sum: bruno,
        },
    )
}

pub fn pinch_profile_cmd(a: &PinchProfileArgs, run: &mut Run) -> Result<()> {
    let curve = run.read_curve(&a.curve)?;
    let (rows, mode) = pinch_profile(&curve, a.budget)?;
    let witness = rows
        .iter()
        .fold(None::<&PinchingReport>, |best, r| match best {
            Some(b) if b.pinch >= r.pinch => Some(b),
            _ => Some(r),
        })
        .expect("curves have samples");
    write_profile_csv(&rows, curve.len(), run.create(&a.out)?)?;
    let label = match mode {
        PairMode::AllPairs => "all pairs",
        PairMode::DyadicSubsample => "dyadic subsample, lower bound",
    };
    say!("quasicircle constant {:.9} ({label})", witness.pinch);
    say!("{}", serde_json::to_string(witness)?);
    Ok(())
}

#[derive(Serialize)]
struct DistanceOutput {
    #[serde(with = "hexfloat::as_hex")]
    hausdorff: f64,
    #[serde(with = "hexfloat::option_as_hex")]
    sup_norm: Option<f64>,
}

pub fn distance(a: &DistanceArgs, run: &mut Run) -> Result<()> {
    let (ca, cb) = (run.read_curve(&a.a)?, run.read_curve(&a.b)?);
    let hausdorff = hausdorff_distance(&ca, &cb);
    let sup_norm = match sup_norm_distance(&ca, &cb) {
        Ok(d) => Some(d),
        Err(siegel_core::Error::GridMismatch { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    match sup_norm {
        Some(s) => say!("hausdorff {hausdorff:.9e}, sup norm {s:.9e}"),
        None => say!("hausdorff {hausdorff:.9e}, sup norm undefined (grids differ)"),
    }
    run.write_json(
        &a.out,
        &DistanceOutput {
            hausdorff,
            sup_norm,
        },
    )
}

pub fn holder(a: &HolderArgs, run: &mut Run) -> Result<()> {
    let curve = run.read_curve(&a.curve)?;
    let probe = holder_exponent(&curve, a.min_sep, a.max_sep)?;
    say!(
        "alpha {:.6} (fit residual {:.3e}{})",
        probe.alpha,
        probe.fit_residual,
        if probe.flagged { ", flagged" } else { "" }
    );
    run.write_json(&a.out, &probe)
}

pub fn stability(a: &StabilityArgs, run: &mut Run) -> Result<()> {
    let (f, g) = (run.read_curve(&a.f)?, run.read_curve(&a.g)?);
    let check = check_c1_stability(&f, &g, a.k)?;
    say!(
        "eta {:.6e}, mu {:.6e}, K' {:.9}, measured {:.9}, holds {}",
        check.eta,
        check.mu,
        check.k_prime,
        check.measured_k,
        check.holds
    );
    run.write_json(&a.out, &check)
}

pub fn synth(a: &SynthArgs, run: &mut Run) -> Result<()> {
    let curve = match a.shape {
        Shape::Circle => synthetic::circle(a.m, a.radius, Complex64::new(0.0, 0.0))?,
        Shape::Ellipse => synthetic::ellipse(a.m, a.a, a.b)?,
        Shape::Dumbbell => synthetic::dumbbell(a.m, a.neck)?,
        Shape::Koch => synthetic::koch_snowflake(a.depth)?,
    };
    say!("{} samples", curve.len());
    curve.write_csv(run.create(&a.out)?)?;
    Ok(())
}

pub fn target(a: &TargetArgs, run: &mut Run) -> Result<()> {
    let theta = theta_of(&a.theta)?;
    run.precision_bits = theta.precision_bits();
    let lin = LinearizeOptions {
        precision_bits: a.series.precision,
        fit_window: None,
    };
    let hit = radius_targeted_search(&theta, a.target_r, a.cut, &a.tails, a.series.n, &lin)?;
    say!(
        "tail entry {} reaches r = {:.9} for target {:.9}{}",
        hit.tail_entry,
        hit.achieved_r,
        hit.target_r,
        if hit.unreachable {
            " (target unreachable on this grid)"
        } else {
            ""
        }
    );
    run.write_json(&a.out, &hit)
}

/// Real given either as a JSON number or as a (hexadecimal) string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Real {
    Number(f64),
    Text(String),
}

impl Real {
    fn value(&self) -> Result<f64> {
        Ok(match self {
            Real::Number(x) => *x,
            Real::Text(s) => hexfloat::parse(s)?,
        })
    }
}

/// Experiment description file; every field may also come from flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    theta: Option<String>,
    r1: Option<Real>,
    r2: Option<Real>,
    #[serde(alias = "K")]
    k: Option<Real>,
    epsilon: Option<Real>,
    cut_range: Option<(usize, usize)>,
    tail_entries: Option<Vec<u64>>,
    series_n: Option<usize>,
    samples_m: Option<usize>,
    pinch_margin: Option<Real>,
    pair_budget: Option<usize>,
    tail_tolerance: Option<Real>,
    precision_bits: Option<u32>,
}

fn real_field(flag: Option<f64>, file: &Option<Real>, name: &str) -> Result<Option<f64>> {
    match (flag, file) {
        (Some(x), _) => Ok(Some(x)),
        (None, Some(r)) => r.value().map(Some).with_context(|| format!("field {name}")),
        (None, None) => Ok(None),
    }
}

fn resolve_config(a: &ExperimentArgs, run: &mut Run) -> Result<ExperimentConfig> {
    let file = match &a.config {
        Some(path) => {
            run.inputs.push(path.clone());
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentFile>(&text)
                .map_err(|e| siegel_core::Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => ExperimentFile::default(),
    };
    let missing =
        |name: &str| siegel_core::Error::InvalidArgument(format!("experiment needs {name}"));
    let theta_spec = a
        .theta
        .clone()
        .or(file.theta)
        .ok_or_else(|| missing("theta"))?;
    let required = |flag, field: &Option<Real>, name: &str| -> Result<f64> {
        real_field(flag, field, name)?.ok_or_else(|| missing(name).into())
    };
    Ok(ExperimentConfig {
        theta: parse_theta(&theta_spec, a.theta_bits)?,
        r1: required(a.r1, &file.r1, "r1")?,
        r2: required(a.r2, &file.r2, "r2")?,
        k: required(a.k, &file.k, "K")?,
        epsilon: required(a.epsilon, &file.epsilon, "epsilon")?,
        cut_range: a.cuts.or(file.cut_range).ok_or_else(|| missing("cuts"))?,
        tail_entries: a
            .tails
            .clone()
            .or(file.tail_entries)
            .ok_or_else(|| missing("tails"))?,
        series_n: a.n.or(file.series_n).unwrap_or(2000),
        samples_m: a.m.or(file.samples_m).unwrap_or(512),
        pinch_margin: real_field(a.pinch_margin, &file.pinch_margin, "pinch_margin")?
            .unwrap_or(1.0),
        pair_budget: a
            .pair_budget
            .or(file.pair_budget)
            .unwrap_or(DEFAULT_PAIR_BUDGET),
        tail_tolerance: real_field(a.tail_tolerance, &file.tail_tolerance, "tail_tolerance")?
            .unwrap_or(DEFAULT_TAIL_TOLERANCE),
        precision_bits: a.precision.or(file.precision_bits),
    })
}

#[derive(Serialize)]
struct ChainLine<'a> {
    link: usize,
    #[serde(flatten)]
    round: &'a RoundRecord,
}

#[derive(Serialize)]
struct LinkSummary {
    link: usize,
    config: ExperimentConfig,
    #[serde(with = "hexfloat::as_hex")]
    theta_radius: f64,
    summary: ExperimentSummary,
}

#[derive(Serialize)]
struct ChainSummary {
    links_requested: usize,
    links_found: usize,
    links: Vec<LinkSummary>,
}

pub fn experiment(a: &ExperimentArgs, run: &mut Run) -> Result<()> {
    if a.chain == 0 {
        bail!(siegel_core::Error::InvalidArgument(
            "chain must be at least 1".into()
        ));
    }
    let mut config = resolve_config(a, run)?;
    run.precision_bits = config.theta.precision_bits();
    let base_epsilon = config.epsilon;
    let mut lines = Vec::new();
    let mut links = Vec::new();
    let mut found_links = 0;
    for link in 0..a.chain {
        config.epsilon = base_epsilon / 2f64.powi(link as i32);
        let trace = match run_perturbation(&config) {
            Ok(t) => t,
            // a later link may start from a disk too small for the bracket
            Err(e) if link > 0 => {
                say!("link {link} not run: {e}");
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let summary = trace.summary();
        say!(
            "link {link}: {} rounds, {} found, {} not found, {} precision-limited, best pinch {:.6}",
            summary.rounds, summary.found, summary.not_found, summary.precision_limit, summary.best_pinch
        );
        for round in &trace.rounds {
            lines.push(serde_json::to_string(&ChainLine { link, round })?);
        }
        let next = trace.found().next().map(|r| r.theta_n.clone());
        links.push(LinkSummary {
            link,
            config: config.clone(),
            theta_radius: trace.theta_radius,
            summary,
        });
        match next {
            Some(theta) => {
                found_links += 1;
                config.theta = theta;
            }
            None => break,
        }
    }
    let body = lines.join("\n") + "\n";
    std::fs::write(&a.out, body).with_context(|| format!("writing {}", a.out.display()))?;
    run.outputs.push(a.out.clone());
    run.write_json(
        &sibling(&a.out, ".summary.json"),
        &ChainSummary {
            links_requested: a.chain,
            links_found: found_links,
            links,
        },
    )?;
    if found_links < a.chain {
        say!(
            "search budget exhausted after {found_links} of {} links",
            a.chain
        );
        run.exit = EXIT_NOT_FOUND;
    }
    Ok(())
}
