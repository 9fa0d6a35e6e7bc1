//! The `phinoise` command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    band_energy_profile, phase_kl, phase_kl_in_band, whiteness_report, whiteness_report_scaled,
};
use crate::balance::{band_energies, BalanceParams};
use crate::error::{Error, Result};
use crate::mask::{mask_for, Cutoff, FrequencyMask};
use crate::npy::{read_npy, write_npy};
use crate::pipeline::{phi_noise_detailed, sample_noise, BalanceMode, ConditioningConfig};
use crate::report::{
    read_json, write_json, ConfigEcho, Energies, Ledger, Report, SweepReport, SweepRun,
    REPORT_VERSION,
};
use crate::synth::{gen_moving_blob, gen_static, StaticPattern, Trajectory};
use crate::tensor::{Domain, LatentTensor, Precision, Shape};
use crate::transform::dft;

#[derive(Debug, Parser)]
#[command(name = "phinoise", version, about = "Phase-conditioned diffusion noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Condition noise on a reference latent and write the result.
    Condition(ConditionArgs),
    /// Report whiteness, band energy and optional phase divergence of a latent.
    Analyze(AnalyzeArgs),
    /// Run a grid of gamma and cutoff values against one noise sample.
    Sweep(SweepArgs),
    /// Write a synthetic reference latent.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    Temporal,
    Spatial,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Temporal => Domain::Temporal,
            DomainArg::Spatial => Domain::Spatial,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PatternArg {
    MovingBlob,
    StaticChecker,
    StaticGradient,
}

fn parse_shape(text: &str) -> std::result::Result<Shape, String> {
    Shape::parse(text).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    /// Reference latent (npy).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Noise latent (npy); sampled from --seed when absent.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Noise shape `t,w,h,d`; must equal the reference shape.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<Shape>,
    /// Conditioning config (JSON); replaces --domain, --k, --ratio and --gamma.
    #[arg(long, conflicts_with_all = ["domain", "k", "ratio", "gamma"])]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "temporal")]
    pub domain: DomainArg,
    /// Temporal cutoff (signed band |f| <= k). Default 3.
    #[arg(long, conflicts_with = "ratio")]
    pub k: Option<usize>,
    /// Spatial masking ratio in (0, 1]. Default 0.05.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Low-band attenuation. Default 30 temporal, 4 spatial.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    /// Output latent (npy).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Energy ledger (JSON) in the fixture layout.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Histogram buckets for phase statistics.
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value_t = 8)]
    pub bands: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "temporal")]
    pub domain: DomainArg,
    /// Masked band to measure, temporal.
    #[arg(long, conflicts_with = "ratio")]
    pub k: Option<usize>,
    /// Masked band to measure, spatial.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value_t = 8)]
    pub bands: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub gammas: Vec<f64>,
    /// Temporal cutoffs.
    #[arg(long, value_delimiter = ',', conflicts_with = "ratios")]
    pub ks: Vec<usize>,
    /// Spatial masking ratios.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Vec<f64>,
    #[arg(long, value_enum, default_value = "temporal")]
    pub domain: DomainArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    #[arg(long)]
    pub outdir: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub bands: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    /// Oscillation period in frames (moving blob).
    #[arg(long, conflicts_with_all = ["dx", "dy"])]
    pub period: Option<f64>,
    /// Oscillation amplitude in pixels.
    #[arg(long, default_value_t = 2.0)]
    pub amplitude: f64,
    /// Horizontal velocity in pixels per frame.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Vertical velocity in pixels per frame.
    #[arg(long)]
    pub dy: Option<f64>,
    /// Blob width in pixels.
    #[arg(long, default_value_t = 2.5)]
    pub sigma: f64,
    /// Clip at the frame border instead of wrapping around.
    #[arg(long)]
    pub no_wrap: bool,
    #[arg(long, value_enum, default_value = "f64")]
    pub precision: PrecisionArg,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Condition(args) => condition(args),
        Command::Analyze(args) => analyze(args),
        Command::Sweep(args) => sweep(args),
        Command::Synth(args) => synth(args),
    }
}

fn cutoff_for(domain: Domain, k: Option<usize>, ratio: Option<f64>) -> Result<Cutoff> {
    let defaults = ConditioningConfig::default_for(domain);
    match (domain, k, ratio) {
        (Domain::Temporal, Some(k), None) => Ok(Cutoff::K(k)),
        (Domain::Spatial, None, Some(r)) => Ok(Cutoff::Ratio(r)),
        (_, None, None) => Ok(defaults.cutoff),
        (Domain::Temporal, _, Some(_)) => Err(Error::InvalidInput(
            "--ratio applies to the spatial domain; use --k".into(),
        )),
        (Domain::Spatial, Some(_), _) => Err(Error::InvalidInput(
            "--k applies to the temporal domain; use --ratio".into(),
        )),
    }
}

/// Loads the noise file or samples it from a seed.
fn obtain_noise(
    noise: Option<&Path>,
    shape: Option<Shape>,
    reference: &LatentTensor,
    seed: Option<u64>,
    precision: Option<Precision>,
) -> Result<(LatentTensor, &'static str)> {
    if let Some(s) = shape {
        if s != reference.shape() {
            return Err(Error::InvalidInput(format!(
                "--shape {s} does not match reference shape {}",
                reference.shape()
            )));
        }
    }
    match noise {
        Some(path) => {
            let z = read_npy(path)?;
            Ok((z, "file"))
        }
        None => {
            let seed = seed.ok_or_else(|| {
                Error::InvalidInput("--seed is required when --noise is not given".into())
            })?;
            let z = sample_noise(reference.shape(), seed, precision.unwrap_or_default())?;
            Ok((z, "sampled"))
        }
    }
}

/// Per-bin balancing scale squared (`1/gamma^2` masked, `beta^2` elsewhere).
fn power_scale(mask: &FrequencyMask, params: &BalanceParams) -> Vec<f64> {
    let low = 1.0 / (params.gamma * params.gamma);
    let high = params.beta * params.beta;
    mask.selected().iter().map(|&s| if s { low } else { high }).collect()
}

fn whiteness_or_none(x: &LatentTensor) -> Result<Option<crate::analysis::WhitenessReport>> {
    if x.data().len() < 64 {
        return Ok(None);
    }
    whiteness_report(x).map(Some)
}

fn conditioned_report(
    echo: ConfigEcho,
    noise: &LatentTensor,
    output: &LatentTensor,
    mask: &FrequencyMask,
    params: &BalanceParams,
    domain: Domain,
    bands: usize,
) -> Result<Report> {
    let whiteness = whiteness_or_none(output)?;
    let whiteness_rescaled = if output.data().len() >= 64 {
        Some(whiteness_report_scaled(output, domain, Some(&power_scale(mask, params)))?)
    } else {
        None
    };
    Ok(Report {
        version: REPORT_VERSION,
        config: echo,
        energies: Energies {
            input: noise.energy(),
            output: Some(output.energy()),
            low: Some(params.e_low),
            high: Some(params.e_high),
        },
        beta: Some(params.beta),
        phase_kl: None,
        phase_kl_band: None,
        whiteness,
        whiteness_rescaled,
        band_profile: band_energy_profile(output, domain, bands)?,
    })
}

fn condition(args: ConditionArgs) -> Result<()> {
    let reference = read_npy(&args.reference)?;
    let (noise, source) = obtain_noise(
        args.noise.as_deref(),
        args.shape,
        &reference,
        args.seed,
        args.precision.map(Into::into),
    )?;
    let precision = args
        .precision
        .map(Into::into)
        .unwrap_or_else(|| noise.precision());
    let config = match &args.config {
        Some(path) => {
            let mut c: ConditioningConfig = read_json(path)?;
            if let Some(p) = args.precision {
                c.precision = p.into();
            }
            if let Some(seed) = args.seed {
                c.seed = seed;
            }
            c
        }
        None => {
            let domain: Domain = args.domain.into();
            let gamma = args
                .gamma
                .unwrap_or(ConditioningConfig::default_for(domain).gamma);
            ConditioningConfig {
                domain,
                cutoff: cutoff_for(domain, args.k, args.ratio)?,
                gamma,
                seed: args.seed.unwrap_or(0),
                precision,
            }
        }
    };
    let out = phi_noise_detailed(&noise, &reference, &config, BalanceMode::Balanced)?;
    write_npy(&out.latent, &args.out)?;

    if let Some(path) = &args.ledger {
        let ledger = Ledger {
            e_total: out.params.e_total,
            e_low: out.params.e_low,
            e_high: out.params.e_high,
            beta: out.params.beta,
        };
        write_json(&ledger, path)?;
    }
    if let Some(path) = &args.report {
        let echo = ConfigEcho {
            command: "condition".into(),
            domain: Some(config.domain),
            cutoff: Some(config.cutoff),
            gamma: Some(config.gamma),
            seed: (source == "sampled").then_some(config.seed),
            precision: Some(config.precision),
            shape: Some(noise.shape()),
            noise_source: Some(source.into()),
            bins: Some(args.bins),
            bands: Some(args.bands),
        };
        let mut report = conditioned_report(
            echo,
            &noise,
            &out.latent,
            &out.mask,
            &out.params,
            config.domain,
            args.bands,
        )?;
        report.phase_kl = Some(phase_kl(&out.latent, &reference, config.domain, args.bins)?);
        report.phase_kl_band =
            Some(phase_kl_in_band(&out.latent, &reference, &out.mask, args.bins)?);
        write_json(&report, path)?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let x = read_npy(&args.input)?;
    let domain: Domain = args.domain.into();
    let mask = match (args.k, args.ratio) {
        (None, None) => None,
        (k, ratio) => Some(mask_for(domain, x.shape(), cutoff_for(domain, k, ratio)?)?),
    };
    let (low, high) = match &mask {
        Some(m) => {
            let (_, low, high) = band_energies(&dft(&x, domain)?, m)?;
            (Some(low), Some(high))
        }
        None => (None, None),
    };
    let (phase_kl_all, phase_kl_band) = match &args.reference {
        Some(path) => {
            let reference = read_npy(path)?;
            if reference.shape() != x.shape() {
                return Err(Error::InvalidInput(format!(
                    "reference shape {} does not match input shape {}",
                    reference.shape(),
                    x.shape()
                )));
            }
            let band = match &mask {
                Some(m) => Some(phase_kl_in_band(&x, &reference, m, args.bins)?),
                None => None,
            };
            (Some(phase_kl(&x, &reference, domain, args.bins)?), band)
        }
        None => (None, None),
    };
    let report = Report {
        version: REPORT_VERSION,
        config: ConfigEcho {
            command: "analyze".into(),
            domain: Some(domain),
            cutoff: mask.as_ref().map(|m| m.cutoff()),
            precision: Some(x.precision()),
            shape: Some(x.shape()),
            bins: Some(args.bins),
            bands: Some(args.bands),
            ..ConfigEcho::default()
        },
        energies: Energies {
            input: x.energy(),
            output: None,
            low,
            high,
        },
        beta: None,
        phase_kl: phase_kl_all,
        phase_kl_band,
        whiteness: whiteness_or_none(&x)?,
        whiteness_rescaled: None,
        band_profile: band_energy_profile(&x, domain, args.bands)?,
    };
    write_json(&report, &args.report)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let reference = read_npy(&args.reference)?;
    let domain: Domain = args.domain.into();
    let (noise, source) = obtain_noise(
        args.noise.as_deref(),
        None,
        &reference,
        args.seed,
        args.precision.map(Into::into),
    )?;
    let precision = args
        .precision
        .map(Into::into)
        .unwrap_or_else(|| noise.precision());
    let cutoffs: Vec<Cutoff> = match domain {
        Domain::Temporal if !args.ratios.is_empty() => {
            return Err(Error::InvalidInput("--ratios applies to the spatial domain".into()))
        }
        Domain::Spatial if !args.ks.is_empty() => {
            return Err(Error::InvalidInput("--ks applies to the temporal domain".into()))
        }
        Domain::Temporal if args.ks.is_empty() => vec![ConditioningConfig::default_for(domain).cutoff],
        Domain::Spatial if args.ratios.is_empty() => {
            vec![ConditioningConfig::default_for(domain).cutoff]
        }
        Domain::Temporal => args.ks.iter().map(|&k| Cutoff::K(k)).collect(),
        Domain::Spatial => args.ratios.iter().map(|&r| Cutoff::Ratio(r)).collect(),
    };
    fs::create_dir_all(&args.outdir)?;

    let mut runs = Vec::new();
    for &gamma in &args.gammas {
        for &cutoff in &cutoffs {
            let config = ConditioningConfig {
                domain,
                cutoff,
                gamma,
                seed: args.seed.unwrap_or(0),
                precision,
            };
            let out = phi_noise_detailed(&noise, &reference, &config, BalanceMode::Balanced)?;
            let name = match cutoff {
                Cutoff::K(k) => format!("phi_g{gamma}_k{k}.npy"),
                Cutoff::Ratio(r) => format!("phi_g{gamma}_r{r}.npy"),
            };
            write_npy(&out.latent, args.outdir.join(&name))?;
            let echo = ConfigEcho {
                command: "sweep".into(),
                domain: Some(domain),
                cutoff: Some(cutoff),
                gamma: Some(gamma),
                ..ConfigEcho::default()
            };
            let mut report = conditioned_report(
                echo, &noise, &out.latent, &out.mask, &out.params, domain, args.bands,
            )?;
            report.phase_kl_band = Some(phase_kl_in_band(&out.latent, &reference, &out.mask, 64)?);
            runs.push(SweepRun {
                gamma,
                cutoff,
                output: name,
                report,
            });
        }
    }
    let combined = SweepReport {
        version: REPORT_VERSION,
        config: ConfigEcho {
            command: "sweep".into(),
            domain: Some(domain),
            seed: (source == "sampled").then(|| args.seed.unwrap_or(0)),
            precision: Some(precision),
            shape: Some(noise.shape()),
            noise_source: Some(source.into()),
            bands: Some(args.bands),
            ..ConfigEcho::default()
        },
        runs,
    };
    write_json(&combined, args.outdir.join("sweep.json"))
}

fn synth(args: SynthArgs) -> Result<()> {
    let x = match args.pattern {
        PatternArg::MovingBlob => {
            let trajectory = match args.period {
                Some(period) => Trajectory::Oscillating {
                    amplitude: args.amplitude,
                    period,
                },
                None => Trajectory::Linear {
                    dx: args.dx.unwrap_or(0.0),
                    dy: args.dy.unwrap_or(0.0),
                },
            };
            gen_moving_blob(args.shape, trajectory, args.sigma, !args.no_wrap)?
        }
        PatternArg::StaticChecker => gen_static(args.shape, StaticPattern::Checker)?,
        PatternArg::StaticGradient => gen_static(args.shape, StaticPattern::Gradient)?,
    };
    write_npy(&x.to_precision(args.precision.into())?, &args.out)
}
