//! `rdp` command-line front end.
//!
//! Every command resolves its inputs into an [`Invocation`], executes it, and
//! writes a `manifest.json` next to its outputs. `rdp replay` re-executes a
//! stored invocation, so numerical outputs can be regenerated byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::common_rate::CommonRate;
use crate::gaussian::{self, GaussianPoint};
use crate::region::{self, RegionQuery, SearchConfig};
use crate::synthesis::{self, SimConfig, Simulator};
use crate::upgrade::{self, UpgradeInput};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "rdp", version, about = "Rate-distortion-perception tradeoffs with limited common randomness")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for every random stream; overrides seeds inside config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Format for tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Common rate 0, unlimited common rate and the classical curve.
    Fig1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Delta,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadratic-Gaussian tradeoff points or curve presets.
    Gauss {
        /// Distortion values in (0, 2].
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        delta: Vec<f64>,
        /// Common randomness rate in bits, or `inf`.
        #[arg(long, default_value = "0")]
        rc: CommonRate,
        #[arg(long, value_enum)]
        curves: Option<Preset>,
    },
    /// Minimum rate or membership for a finite-alphabet query.
    Region {
        #[arg(long)]
        query: PathBuf,
        /// Search settings (JSON); defaults apply to missing fields.
        #[arg(long)]
        search: Option<PathBuf>,
        #[arg(long, value_enum)]
        sweep: Option<SweepAxis>,
        /// Distortion grid for `--sweep delta`; defaults to 21 points up to
        /// the distortion of an independent reconstruction.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        deltas: Vec<f64>,
    },
    /// Soft-covering simulation of the random-codebook scheme.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Blocklengths for a trace `n,tv_gap,tv_ci,distortion`.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sweep_n: Vec<usize>,
        /// Codebooks per blocklength in the trace (medians are reported).
        #[arg(long, default_value_t = 1)]
        draws: usize,
    },
    /// Upgrade a decoder so that its output law matches the target exactly.
    Upgrade {
        #[arg(long)]
        input: PathBuf,
    },
    /// Re-run the invocation stored in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Fully resolved command, as stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Invocation {
    Gauss {
        deltas: Vec<f64>,
        rc: CommonRate,
        curves: Option<Preset>,
        format: Format,
    },
    Region {
        query: RegionQuery,
        search: SearchConfig,
        sweep: Option<Vec<f64>>,
        format: Format,
    },
    Simulate {
        config: SimConfig,
        sweep_n: Vec<usize>,
        draws: usize,
    },
    Upgrade {
        input: UpgradeInput,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Gauss { .. } => "gauss",
            Invocation::Region { .. } => "region",
            Invocation::Simulate { .. } => "simulate",
            Invocation::Upgrade { .. } => "upgrade",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Gauss { .. } | Invocation::Upgrade { .. } => None,
            Invocation::Region { search, .. } => Some(search.seed),
            Invocation::Simulate { config, .. } => Some(config.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
}

/// Reads a JSON file, reporting the path of the offending field on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow::anyhow!("{}: invalid value at `{at}`: {}", path.display(), e.inner())
    })
}

/// Like C's `%.6g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        trim(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{}{:02}", trim(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

fn gauss_csv(points: &[GaussianPoint]) -> String {
    let mut s = String::from("delta,rc,rho,rho_tilde,rate\n");
    for p in points {
        let rc = match p.common_rate {
            CommonRate::Infinite => "inf".to_string(),
            CommonRate::Finite(r) => format_g6(r),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            format_g6(p.delta),
            rc,
            format_g6(p.rho),
            format_g6(p.rho_tilde),
            format_g6(p.rate)
        );
    }
    s
}

fn nonincreasing(points: &[GaussianPoint]) -> bool {
    points.windows(2).all(|w| w[1].rate <= w[0].rate)
}

fn emit_points(w: &mut Writer, stem: &str, points: &[GaussianPoint], format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => w.write(&format!("{stem}.csv"), &gauss_csv(points)),
        Format::Json => w.json(&format!("{stem}.json"), &points),
    }
}

fn run_gauss(w: &mut Writer, deltas: &[f64], rc: CommonRate, curves: Option<Preset>, format: Format) -> anyhow::Result<()> {
    ensure!(!deltas.is_empty() || curves.is_some(), "give --delta values or a --curves preset");
    if !deltas.is_empty() {
        let points = gaussian::curve(deltas, rc)?;
        for p in &points {
            let resid = p.rho * p.rho_tilde - (1.0 - p.delta / 2.0);
            ensure!(resid.abs() <= 1e-10, "correlation equation residual {resid} at delta {}", p.delta);
        }
        emit_points(w, "gauss", &points, format)?;
    }
    if let Some(Preset::Fig1) = curves {
        let grid = gaussian::default_grid();
        let sets = [
            ("fig1_rc0", gaussian::curve(&grid, CommonRate::ZERO)?),
            ("fig1_rcinf", gaussian::curve(&grid, CommonRate::Infinite)?),
            ("fig1_classical", gaussian::classical_curve(&grid)?),
        ];
        for (stem, points) in &sets {
            ensure!(nonincreasing(points), "{stem} is not nonincreasing in delta");
            emit_points(w, stem, points, format)?;
        }
    }
    Ok(())
}

/// `n` evenly spaced budgets from 0 up to the distortion of an independent reconstruction.
fn default_deltas(q: &RegionQuery) -> anyhow::Result<Vec<f64>> {
    let prod = crate::dist::JointPmf::product(&q.source, &q.source);
    let top = crate::dist::expected_distortion(&prod, &q.distortion)?;
    Ok((0..=20).map(|k| top * k as f64 / 20.0).collect())
}

fn run_region(
    w: &mut Writer,
    query: &RegionQuery,
    search: &SearchConfig,
    sweep: Option<&[f64]>,
    format: Format,
) -> anyhow::Result<()> {
    if let Some(deltas) = sweep {
        let curve = region::boundary_curve(query, deltas, search)?;
        return match format {
            Format::Json => w.json("boundary.json", &curve),
            Format::Csv => {
                let mut s = String::from("delta,rc,min_rate,aux_size\n");
                for p in &curve {
                    let _ = writeln!(s, "{},{},{},{}", p.delta, p.rc, p.min_rate, p.aux_size);
                }
                w.write("boundary.csv", &s)
            }
        };
    }
    if query.rate.is_some() {
        let m = region::check_membership(query, search)?;
        if let region::Membership::Member { witness } = &m {
            ensure!(
                witness.certifies(query.rate.unwrap_or_default(), query.common_rate, query.delta, search.constraint_tol),
                "witness failed the constraint re-check"
            );
        }
        w.json("region.json", &m)
    } else {
        let report = region::min_rate(query, search)?;
        w.json("region.json", &report)
    }
}

fn run_simulate(w: &mut Writer, config: &SimConfig, sweep_n: &[usize], draws: usize) -> anyhow::Result<()> {
    let mut report = Simulator::new(config.clone())?.run()?;
    ensure!((0.0..=1.0).contains(&report.tv_gap), "tv gap {} outside [0, 1]", report.tv_gap);
    ensure!(report.distortion >= 0.0, "negative distortion {}", report.distortion);
    if !sweep_n.is_empty() {
        let trace = synthesis::sweep_median(config, sweep_n, draws)?;
        let mut s = String::from("n,tv_gap,tv_ci,distortion\n");
        for r in &trace {
            let _ = writeln!(s, "{},{},{},{}", r.n, r.tv_gap, r.tv_ci, r.distortion);
        }
        w.write("trace.csv", &s)?;
        report.per_n_trace = Some(trace);
    }
    w.json("simulate.json", &report)
}

#[derive(Serialize)]
struct UpgradeReport<'a> {
    #[serde(flatten)]
    output: &'a upgrade::UpgradeOutput,
    certificate: upgrade::CouplingCertificate,
}

fn run_upgrade(w: &mut Writer, input: &UpgradeInput) -> anyhow::Result<()> {
    let output = upgrade::upgrade(input)?;
    let certificate = upgrade::coupling_certificate(input, &output)?;
    let realized = output.upgraded.push_forward(input.weights())?;
    let drift = crate::dist::tv_distance(&realized, input.target())?;
    ensure!(drift <= 1e-12, "upgraded decoder misses the target by {drift}");
    ensure!(certificate.holds(1e-12), "coupling certificate gap {}", certificate.gap());
    w.json(
        "upgrade.json",
        &UpgradeReport {
            output: &output,
            certificate,
        },
    )
}

/// Executes a resolved invocation, writing outputs and the manifest into `out`.
pub fn execute(inv: &Invocation, out: &Path) -> anyhow::Result<RunManifest> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = Writer {
        dir: out,
        written: Vec::new(),
    };
    match inv {
        Invocation::Gauss {
            deltas,
            rc,
            curves,
            format,
        } => run_gauss(&mut w, deltas, *rc, *curves, *format)?,
        Invocation::Region {
            query,
            search,
            sweep,
            format,
        } => run_region(&mut w, query, search, sweep.as_deref(), *format)?,
        Invocation::Simulate { config, sweep_n, draws } => run_simulate(&mut w, config, sweep_n, *draws)?,
        Invocation::Upgrade { input } => run_upgrade(&mut w, input)?,
    }
    let manifest = RunManifest {
        command: inv.name().to_string(),
        config: serde_json::to_value(inv)?,
        seed: inv.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        outputs: w.written.clone(),
    };
    w.json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

/// Turns parsed arguments into an [`Invocation`], loading config files.
pub fn resolve(cli: &Cli) -> anyhow::Result<Invocation> {
    let g = &cli.global;
    Ok(match &cli.command {
        Command::Gauss { delta, rc, curves } => Invocation::Gauss {
            deltas: delta.clone(),
            rc: *rc,
            curves: *curves,
            format: g.format,
        },
        Command::Region {
            query,
            search,
            sweep,
            deltas,
        } => {
            let query: RegionQuery = read_json(query)?;
            query.validate()?;
            let mut search: SearchConfig = match search {
                Some(p) => read_json(p)?,
                None => SearchConfig::default(),
            };
            if let Some(s) = g.seed {
                search.seed = s;
            }
            let sweep = match sweep {
                Some(SweepAxis::Delta) if deltas.is_empty() => Some(default_deltas(&query)?),
                Some(SweepAxis::Delta) => Some(deltas.clone()),
                None => None,
            };
            Invocation::Region {
                query,
                search,
                sweep,
                format: g.format,
            }
        }
        Command::Simulate { config, sweep_n, draws } => {
            let mut config: SimConfig = read_json(config)?;
            if let Some(s) = g.seed {
                config.seed = s;
            }
            config.validate()?;
            Invocation::Simulate {
                config,
                sweep_n: sweep_n.clone(),
                draws: *draws,
            }
        }
        Command::Upgrade { input } => Invocation::Upgrade {
            input: read_json(input)?,
        },
        Command::Replay { manifest } => {
            let m: RunManifest = read_json(manifest)?;
            let inv: Invocation = serde_json::from_value(m.config).context("manifest config")?;
            if inv.name() != m.command {
                bail!("manifest command `{}` does not match its config", m.command);
            }
            inv
        }
    })
}

pub fn run(cli: &Cli) -> anyhow::Result<RunManifest> {
    let inv = resolve(cli)?;
    execute(&inv, &cli.global.out)
}

/// Entry point for the `rdp` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(m) => {
            for f in &m.outputs {
                println!("{}", cli.global.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        assert_eq!(format_g6(0.5), "0.5");
        assert_eq!(format_g6(1.0), "1");
        assert_eq!(format_g6(0.707_106_781_186_547_6), "0.707107");
        assert_eq!(format_g6(123_456_789.0), "1.23457e+08");
        assert_eq!(format_g6(0.000_012_345_67), "1.23457e-05");
        assert_eq!(format_g6(0.000_123_456_7), "0.000123457");
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(2.0), "2");
    }

    #[test]
    fn invocation_roundtrips() {
        let inv = Invocation::Gauss {
            deltas: vec![0.1, 1.0 / 3.0],
            rc: CommonRate::Infinite,
            curves: Some(Preset::Fig1),
            format: Format::Csv,
        };
        let v = serde_json::to_value(&inv).unwrap();
        assert_eq!(v["command"], "gauss");
        assert_eq!(v["rc"], "inf");
        assert_eq!(serde_json::from_value::<Invocation>(v).unwrap(), inv);
    }
}
