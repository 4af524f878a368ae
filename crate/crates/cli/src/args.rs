use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use siegel_core::curvegeom::DEFAULT_PAIR_BUDGET;
use siegel_core::linearization::DEFAULT_TAIL_TOLERANCE;
use siegel_core::rotation::DEFAULT_PRECISION_BITS;

/// Accepts decimal and C99 hexadecimal reals.
pub fn real(s: &str) -> Result<f64, String> {
    siegel_core::hexfloat::parse(s).map_err(|e| e.to_string())
}

/// Accepts `lo:hi`.
pub fn index_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad index {t:?}"))
    };
    Ok((num(lo)?, num(hi)?))
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaArgs {
    /// golden | p/q | cf:[a1,a2,...]+tail:T | 0.xxx@bits
    #[arg(long)]
    pub theta: String,
    /// Precision of rotation numbers built from `--theta`.
    #[arg(long, env = "SIEGEL_PRECISION_BITS", default_value_t = DEFAULT_PRECISION_BITS)]
    pub theta_bits: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOpts {
    /// Number of series coefficients.
    #[arg(long = "N", visible_alias = "n", default_value_t = 2000)]
    pub n: usize,
    /// Working precision of the recurrence; chosen from the small divisors when absent.
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[command(flatten)]
    pub series: SeriesOpts,
    /// Coefficient window lo:hi for the radius fit, inside [N/2, N].
    #[arg(long, value_parser = index_range)]
    pub fit_window: Option<(usize, usize)>,
    #[arg(long, default_value = "radius.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[command(flatten)]
    pub series: SeriesOpts,
    #[arg(long, default_value = "series.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[command(flatten)]
    pub series: SeriesOpts,
    /// Sampling radius as a fraction of the radius estimate.
    #[arg(long, value_parser = real, default_value = "0.5")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub r_fraction: f64,
    /// Number of samples.
    #[arg(long = "M", visible_alias = "m", default_value_t = 1024)]
    pub m: usize,
    #[arg(long, value_parser = real, default_value_t = DEFAULT_TAIL_TOLERANCE)]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub tail_tolerance: f64,
    /// Write the curve as JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value = "curve.csv")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[command(flatten)]
    pub series: SeriesOpts,
    #[arg(long, value_parser = real, default_value = "0.5")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub r_fraction: f64,
    #[arg(long = "M", visible_alias = "m", default_value_t = 256)]
    pub m: usize,
    #[arg(long, default_value = "residual.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value = "cf.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchProfileArgs {
    /// Curve file (CSV k,t_k,re,im or curve JSON).
    #[arg(long)]
    pub curve: PathBuf,
    /// All pairs are scanned when M² fits the budget; dyadic pairs otherwise.
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value = "pinch.csv")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value = "distance.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub min_sep: f64,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub max_sep: f64,
    #[arg(long, default_value = "holder.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityArgs {
    /// Reference curve.
    #[arg(long)]
    pub f: PathBuf,
    /// Perturbed curve on the same grid.
    #[arg(long)]
    pub g: PathBuf,
    /// Quasicircle constant of the reference curve.
    #[arg(long = "K", visible_alias = "k", value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub k: f64,
    #[arg(long, default_value = "stability.json")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Circle,
    Ellipse,
    Dumbbell,
    Koch,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    /// Number of samples (the Koch curve uses its own vertex count).
    #[arg(long = "M", visible_alias = "m", default_value_t = 1024)]
    pub m: usize,
    /// Circle radius.
    #[arg(long, value_parser = real, default_value = "1")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub radius: f64,
    /// Ellipse semi-axes.
    #[arg(long, value_parser = real, default_value = "2")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub a: f64,
    #[arg(long, value_parser = real, default_value = "1")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub b: f64,
    /// Dumbbell neck width.
    #[arg(long, value_parser = real, default_value = "0.01")]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub neck: f64,
    /// Koch refinement depth.
    #[arg(long, default_value_t = 5)]
    pub depth: u32,
    #[arg(long, default_value = "curve.csv")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetArgs {
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[command(flatten)]
    pub series: SeriesOpts,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::as_hex")]
    pub target_r: f64,
    #[arg(long)]
    pub cut: usize,
    /// Candidate tail entries, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tails: Vec<u64>,
    #[arg(long, default_value = "target.json")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentArgs {
    /// JSON experiment description; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long, env = "SIEGEL_PRECISION_BITS", default_value_t = DEFAULT_PRECISION_BITS)]
    pub theta_bits: u32,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub r1: Option<f64>,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub r2: Option<f64>,
    #[arg(long = "K", visible_alias = "k", value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub k: Option<f64>,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub epsilon: Option<f64>,
    /// Truncation depths lo:hi.
    #[arg(long, value_parser = index_range)]
    pub cuts: Option<(usize, usize)>,
    /// Tail entries, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tails: Option<Vec<u64>>,
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,
    #[arg(long = "M", visible_alias = "m")]
    pub m: Option<usize>,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub pinch_margin: Option<f64>,
    #[arg(long)]
    pub pair_budget: Option<usize>,
    #[arg(long, value_parser = real)]
    #[serde(with = "siegel_core::hexfloat::option_as_hex", default)]
    pub tail_tolerance: Option<f64>,
    #[arg(long)]
    pub precision: Option<u32>,
    /// Number of chained rounds; round n uses epsilon / 2^n and starts from
    /// the previous round's first found rotation number.
    #[arg(long, default_value_t = 1)]
    pub chain: usize,
    #[arg(long, default_value = "trace.jsonl")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(value_name = "MANIFEST")]
    pub manifest: PathBuf,
    /// Re-run into a scratch directory and compare every output byte for byte.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Estimate the conformal radius of the Siegel disk.
    Radius(RadiusArgs),
    /// Sample the invariant curve at a fraction of the radius.
    Boundary(BoundaryArgs),
    /// Checkpoint the linearizing series.
    Series(SeriesArgs),
    /// Functional-equation residual on a circle.
    Residual(ResidualArgs),
    /// Continued fraction, convergents and Bruno sum.
    Cf(CfArgs),
    /// Largest pinching per sample and the quasicircle constant.
    PinchProfile(PinchProfileArgs),
    /// Hausdorff and sup-norm distances between two curves.
    Distance(DistanceArgs),
    /// Hölder exponent estimate of a curve.
    Holder(HolderArgs),
    /// Quasicircle bound for a perturbed curve.
    Stability(StabilityArgs),
    /// Synthetic curve fixtures.
    Synth(SynthArgs),
    /// Tail entry whose approximant has a radius closest to a target.
    Target(TargetArgs),
    /// Search for pinching bounded-type perturbations.
    Experiment(ExperimentArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

fn absolute(p: &mut PathBuf, cwd: &Path) {
    if p.is_relative() {
        *p = cwd.join(&*p);
    }
}

impl Command {
    pub fn name(&self) -> String {
        serde_json::to_value(self).expect("commands serialize")["command"]
            .as_str()
            .expect("tagged")
            .to_string()
    }

    pub fn config(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("commands serialize")["args"].clone()
    }

    pub fn from_manifest(name: &str, config: &serde_json::Value) -> serde_json::Result<Self> {
        serde_json::from_value(serde_json::json!({ "command": name, "args": config }))
    }

    /// Every file path argument, with the primary output first.
    pub fn paths_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Radius(a) => vec![&mut a.out],
            Command::Boundary(a) => vec![&mut a.out],
            Command::Series(a) => vec![&mut a.out],
            Command::Residual(a) => vec![&mut a.out],
            Command::Cf(a) => vec![&mut a.out],
            Command::PinchProfile(a) => vec![&mut a.out, &mut a.curve],
            Command::Distance(a) => vec![&mut a.out, &mut a.a, &mut a.b],
            Command::Holder(a) => vec![&mut a.out, &mut a.curve],
            Command::Stability(a) => vec![&mut a.out, &mut a.f, &mut a.g],
            Command::Synth(a) => vec![&mut a.out],
            Command::Target(a) => vec![&mut a.out],
            Command::Experiment(a) => {
                let mut v = vec![&mut a.out];
                if let Some(c) = a.config.as_mut() {
                    v.push(c);
                }
                v
            }
            Command::Replay(a) => vec![&mut a.manifest],
        }
    }

    pub fn make_paths_absolute(&mut self, cwd: &Path) {
        for p in self.paths_mut() {
            absolute(p, cwd);
        }
    }

    /// Redirects the primary output; derived outputs follow its name.
    pub fn set_out(&mut self, out: PathBuf) {
        if let Some(p) = self.paths_mut().into_iter().next() {
            *p = out;
        }
    }
}
