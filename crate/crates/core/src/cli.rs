//! The `vortex-wigner` command: state generation, Wigner export, and
//! simulated tomography with reconstruction reports.
//!
//! Flags always override values read from `--config`. No environment
//! variables are consulted.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{
    self, fmt17, MarginalsFile, OamHistogramFile, StateFile, TomogramSetFile, WignerFile,
};
use crate::numerics::{min_points, Angle, PeriodicGrid};
use crate::phase_space::{marginals, wigner_map, AlphaConvention, WignerMap};
use crate::states::{
    coherent_state, oam_eigenstate, random_density_matrix, random_pure_state, superposition_state,
    wedge_state, DensityMatrix,
};
use crate::tomography::{measure_oam, reconstruct_wigner, simulate_tomogram_set};
use crate::{Error, Result};

/// Grid used when neither flags nor config choose one.
const DEFAULT_GRID: usize = 64;
/// Ideal reconstructions must match the direct map to this level.
const IDEAL_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "vortex-wigner", version, about = "Wigner functions and tomography of OAM states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a state and write it as JSON.
    State(StateArgs),
    /// Compute the Wigner map and both marginals of a state file.
    Wigner(WignerArgs),
    /// Simulate tomograms of a state, reconstruct its Wigner map and report the error.
    Tomo(TomoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Oam,
    Coherent,
    Superposition,
    Wedge,
    /// Random pure state on `--support` charges.
    Random,
    /// Random density matrix of rank `--support`.
    RandomMixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Settings shared by every command, loadable from JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub l_max: Option<usize>,
    pub grid_points: Option<usize>,
    pub convention: Option<AlphaConvention>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Flags win over the file.
    fn merged(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            l_max: flags.l_max.or(self.l_max),
            grid_points: flags.grid_points.or(self.grid_points),
            convention: flags.convention.or(self.convention),
            seed: flags.seed.or(self.seed),
            shots: flags.shots.or(self.shots),
            format: flags.format.or(self.format),
            out: flags.out.or(self.out),
        }
    }

    fn resolve(config: &Option<PathBuf>, flags: RunConfig) -> Result<RunConfig> {
        let cfg = match config {
            Some(path) => RunConfig::load(path)?.merged(flags),
            None => flags,
        };
        if cfg.shots.is_some() && cfg.seed.is_none() {
            return Err(Error::InvalidArgument("--seed is required when --shots is set".into()));
        }
        if cfg.shots == Some(0) {
            return Err(Error::InvalidArgument("--shots must be positive".into()));
        }
        Ok(cfg)
    }

    /// Grid for a state of half width `l_max`, at least `4 l_max + 2` points.
    fn grid(&self, l_max: usize) -> Result<PeriodicGrid> {
        let n = self.grid_points.unwrap_or(DEFAULT_GRID.max(min_points(l_max)));
        PeriodicGrid::for_truncation(n, l_max)
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    pub kind: StateKind,
    /// Central (or only) OAM charge.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub l0: i64,
    /// Central angle in radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0: f64,
    /// Wedge width in radians.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Number of charges (random) or rank (random-mixed).
    #[arg(long, default_value_t = 2)]
    pub support: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    pub state: PathBuf,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Map file; marginals go next to it with a `_marginals` suffix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    pub state: PathBuf,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Gauge of the reconstructed coefficients.
    #[arg(long)]
    pub convention: Option<AlphaConvention>,
    /// Shots per tomogram and for the OAM histogram; omit for ideal data.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Format of the reconstructed map.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command, writing the
/// human-readable report to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    execute(cli, stdout)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::State(a) => cmd_state(a, stdout),
        Command::Wigner(a) => cmd_wigner(a, stdout),
        Command::Tomo(a) => cmd_tomo(a, stdout),
    }
}

fn cmd_state(a: StateArgs, stdout: &mut dyn Write) -> Result<()> {
    let flags = RunConfig { l_max: a.lmax, seed: a.seed, out: a.out.clone(), ..Default::default() };
    let cfg = RunConfig::resolve(&a.config, flags)?;
    let l_max = cfg
        .l_max
        .ok_or_else(|| Error::InvalidArgument("--lmax is required".into()))?;
    let phi0 = Angle::new(a.phi0);
    let seeded_rng = || {
        cfg.seed
            .map(ChaCha8Rng::seed_from_u64)
            .ok_or_else(|| Error::InvalidArgument("random states need --seed".into()))
    };
    let file = match a.kind {
        StateKind::Oam => StateFile::from_pure(&oam_eigenstate(a.l0, l_max)?),
        StateKind::Coherent => StateFile::from_pure(&coherent_state(a.l0, phi0, l_max)?),
        StateKind::Superposition => StateFile::from_pure(&superposition_state(a.l0, phi0, l_max)?),
        StateKind::Wedge => {
            let width = a
                .width
                .ok_or_else(|| Error::InvalidArgument("wedge states need --width".into()))?;
            StateFile::from_pure(&wedge_state(phi0, width, l_max)?)
        }
        StateKind::Random => StateFile::from_pure(&random_pure_state(a.support, l_max, &mut seeded_rng()?)?),
        StateKind::RandomMixed => {
            StateFile::from_density(&random_density_matrix(a.support, l_max, &mut seeded_rng()?)?)
        }
    };
    let rho = file.density_matrix()?;
    check_state(&rho)?;
    let out = cfg.out.unwrap_or_else(|| PathBuf::from("state.json"));
    io::write_json(&out, &file)?;
    let leakage = match &file {
        StateFile::Pure { leakage, .. } => leakage.unwrap_or(0.0),
        StateFile::Mixed { .. } => 0.0,
    };
    writeln!(stdout, "wrote {}", out.display())?;
    writeln!(stdout, "norm {}", fmt17(rho.trace().re))?;
    writeln!(stdout, "leakage {}", fmt17(leakage))?;
    Ok(())
}

fn check_state(rho: &DensityMatrix) -> Result<()> {
    let report = rho.validate();
    if !report.passed {
        return Err(Error::InvalidArgument(format!(
            "state is not a valid density matrix (hermiticity defect {:e}, trace defect {:e}, min eigenvalue {:e})",
            report.hermiticity_defect, report.trace_defect, report.min_eigenvalue
        )));
    }
    Ok(())
}

fn load_state(path: &Path) -> Result<DensityMatrix> {
    let rho = io::read_state(path)?.density_matrix()?;
    check_state(&rho)?;
    Ok(rho)
}

fn write_map(path: &Path, map: &WignerMap, format: Format) -> Result<()> {
    match format {
        Format::Json => io::write_json(path, &WignerFile::from_map(map)),
        Format::Csv => Ok(std::fs::write(path, io::wigner_csv(map))?),
    }
}

fn marginals_path(map_path: &Path, format: Format) -> PathBuf {
    let stem = map_path.file_stem().and_then(|s| s.to_str()).unwrap_or("wigner");
    map_path.with_file_name(format!("{stem}_marginals.{}", format.extension()))
}

fn report_map(map: &WignerMap, stdout: &mut dyn Write) -> Result<()> {
    let (min, l, phi) = map.min_entry();
    let m = marginals(map);
    let (lo, hi) = m
        .angle
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    writeln!(stdout, "total mass {}", fmt17(map.total_mass()))?;
    writeln!(stdout, "most negative {} at l = {l}, phi = {}", fmt17(min), fmt17(phi))?;
    writeln!(stdout, "angle marginal range [{}, {}]", fmt17(lo), fmt17(hi))?;
    Ok(())
}

fn cmd_wigner(a: WignerArgs, stdout: &mut dyn Write) -> Result<()> {
    let flags = RunConfig { grid_points: a.grid, format: a.format, out: a.out.clone(), ..Default::default() };
    let cfg = RunConfig::resolve(&a.config, flags)?;
    let rho = load_state(&a.state)?;
    let grid = cfg.grid(rho.l_max())?;
    let format = cfg.format.unwrap_or_default();
    let map = wigner_map(&rho, &grid)?;
    let out = cfg.out.unwrap_or_else(|| PathBuf::from(format!("wigner.{}", format.extension())));
    write_map(&out, &map, format)?;
    let mfile = MarginalsFile::new(&map, &marginals(&map));
    let mpath = marginals_path(&out, format);
    match format {
        Format::Json => io::write_json(&mpath, &mfile)?,
        Format::Csv => std::fs::write(&mpath, io::marginals_csv(&mfile))?,
    }
    writeln!(stdout, "wrote {} and {}", out.display(), mpath.display())?;
    report_map(&map, stdout)
}

#[derive(Debug, Serialize)]
struct TomoReport {
    l_max: usize,
    grid_points: usize,
    convention: AlphaConvention,
    seed: Option<u64>,
    shots: Option<u64>,
    tomograms: usize,
    max_abs_error: f64,
    sigma_mean: Option<f64>,
    sigma_max: Option<f64>,
}

fn cmd_tomo(a: TomoArgs, stdout: &mut dyn Write) -> Result<()> {
    let flags = RunConfig {
        grid_points: a.grid,
        convention: a.convention,
        seed: a.seed,
        shots: a.shots,
        format: a.format,
        out: a.out.clone(),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(&a.config, flags)?;
    let rho = load_state(&a.state)?;
    let l_max = rho.l_max();
    let grid = cfg.grid(l_max)?;
    let conv = cfg.convention.unwrap_or_default();
    let format = cfg.format.unwrap_or_default();

    let set = simulate_tomogram_set(&rho, 2 * l_max, &grid, cfg.shots, cfg.seed)?;
    let oam = measure_oam(&rho, cfg.shots, cfg.seed)?;
    let recon = reconstruct_wigner(&set, &oam, conv)?;
    let direct = wigner_map(&rho, &grid)?;
    let err = recon.max_abs_diff(&direct, l_max);
    let sigma = set.sigma_summary();

    let dir = cfg.out.unwrap_or_else(|| PathBuf::from("tomo"));
    std::fs::create_dir_all(&dir)?;
    io::write_json(&dir.join("tomograms.json"), &TomogramSetFile::from_set(&set))?;
    io::write_json(&dir.join("oam.json"), &OamHistogramFile::from_histogram(&oam))?;
    write_map(&dir.join(format!("wigner.{}", format.extension())), &recon, format)?;
    let report = TomoReport {
        l_max,
        grid_points: grid.len(),
        convention: conv,
        seed: cfg.seed,
        shots: cfg.shots,
        tomograms: set.len(),
        max_abs_error: err,
        sigma_mean: sigma.map(|s| s.0),
        sigma_max: sigma.map(|s| s.1),
    };
    io::write_json(&dir.join("report.json"), &report)?;

    writeln!(stdout, "wrote {} tomograms to {}", set.len(), dir.display())?;
    writeln!(stdout, "max error vs direct map {}", fmt17(err))?;
    if let Some((mean, max)) = sigma {
        writeln!(stdout, "per-bin sigma mean {} max {}", fmt17(mean), fmt17(max))?;
    } else if err > IDEAL_TOL {
        return Err(Error::InvalidArgument(format!(
            "ideal reconstruction deviates from the direct map by {err:e}"
        )));
    }
    report_map(&recon, stdout)
}
