//! `holoris` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | other runtime failure |
//! | 2 | invalid config or arguments |
//! | 3 | I/O error or malformed input file |
//! | 4 | no interference peak, or every candidate evanescent |
//! | 5 | sector prior matched zero or both candidates |

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::beamforming::{
    farfield_phase_profile, link_gain, nearfield_phase_profile, pattern, quantize_1bit, received_power, AngleGrid,
    UeTarget,
};
use crate::config::RunConfig;
use crate::experiments::{ber_suite, gain_suite, grid_suite, showcase_suite, ExperimentError, SuiteOutput};
use crate::formats::{parse_coding, parse_hologram, pattern_table, write_coding, write_hologram, write_report};
use crate::geometry::{AngularLocation, Position};
use crate::localization::{localize, Disambiguation, LocalizationError, LocalizerConfig, PeakSearch, Sector};
use crate::wavefield::{synthesize_hologram, Source};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NO_PEAK: i32 = 4;
pub const EXIT_SECTOR: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "holoris", version, about = "Holographic RIS localization and 1-bit beamforming simulator")]
pub struct Cli {
    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize detector holograms from the configured sources.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Hologram CSV path; several frequency tags produce `<stem>_tag<k>.csv`.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Locate the user from a hologram file and print the report.
    #[command(allow_negative_numbers = true)]
    Localize {
        hologram: PathBuf,
        #[arg(long)]
        bs_theta: f64,
        #[arg(long)]
        bs_phi: f64,
        #[arg(long, default_value_t = 1)]
        zero_pad: usize,
        #[arg(long, default_value_t = 0)]
        dc_guard: usize,
        #[arg(long, default_value_t = PeakSearch::default().min_peak_to_median)]
        min_peak_to_median: f64,
        /// Admissible azimuth range `MIN:MAX` in degrees.
        #[arg(long, allow_hyphen_values = true)]
        sector: Option<String>,
        /// Admissible elevation range `MIN:MAX`, used with `--sector`.
        #[arg(long, allow_hyphen_values = true)]
        sector_theta: Option<String>,
        /// Ground truth `THETA,PHI` for oracle disambiguation.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "sector")]
        oracle_truth: Option<String>,
    },
    /// Write a 1-bit coding steering the BS wave to the user.
    #[command(allow_negative_numbers = true)]
    Codegen {
        #[arg(long, value_enum)]
        mode: CodingMode,
        #[arg(long)]
        bs_theta: f64,
        #[arg(long)]
        bs_phi: f64,
        #[arg(long)]
        ue_theta: f64,
        #[arg(long)]
        ue_phi: f64,
        /// Required in near mode.
        #[arg(long)]
        bs_range: Option<f64>,
        /// Required in near mode.
        #[arg(long)]
        ue_range: Option<f64>,
        #[arg(long)]
        output: PathBuf,
        /// Geometry source; defaults to the reference panel.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate the far-field reflection pattern of a coding file.
    #[command(allow_negative_numbers = true)]
    Pattern {
        coding: PathBuf,
        #[arg(long)]
        bs_theta: f64,
        #[arg(long)]
        bs_phi: f64,
        /// Angular grid step in degrees.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run an experiment suite and write its artifacts plus a manifest.
    Experiment {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `experiment.output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodingMode {
    Far,
    Near,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Grid,
    Gain,
    Ber,
    Showcase,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Grid => "grid",
            Suite::Gain => "gain",
            Suite::Ber => "ber",
            Suite::Showcase => "showcase",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn localization_exit(e: &LocalizationError) -> i32 {
    match e {
        LocalizationError::NoPeak { .. } | LocalizationError::AllCandidatesInfeasible => EXIT_NO_PEAK,
        LocalizationError::SectorAmbiguous | LocalizationError::SectorEmpty => EXIT_SECTOR,
        LocalizationError::TooSmall(..) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

impl From<LocalizationError> for CliError {
    fn from(e: LocalizationError) -> Self {
        Self::new(localization_exit(&e), e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Localization(l) => localization_exit(l),
            ExperimentError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Self::new(code, e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Write via a sibling temporary file and rename, so readers never see a
/// truncated artifact.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Returns the raw text (for hashing) alongside the validated config.
fn load_config(path: Option<&Path>) -> Result<(String, RunConfig), CliError> {
    let text = match path {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    let cfg = RunConfig::from_toml(&text).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    Ok((text, cfg))
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_CONFIG, e.to_string())
}

fn parse_range(flag: &str, s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::new(EXIT_CONFIG, format!("--{flag}: expected MIN:MAX, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_angles(flag: &str, s: &str) -> Result<AngularLocation, CliError> {
    let bad = || CliError::new(EXIT_CONFIG, format!("--{flag}: expected THETA,PHI, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let t: f64 = a.trim().parse().map_err(|_| bad())?;
    let p: f64 = b.trim().parse().map_err(|_| bad())?;
    AngularLocation::new(t, p).map_err(config_error)
}

fn angles(t: f64, p: f64) -> Result<AngularLocation, CliError> {
    AngularLocation::new(t, p).map_err(config_error)
}

fn tagged_path(base: &Path, tag: u32) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}_tag{tag}.{ext}"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Ctx {
    quiet: bool,
}

impl Ctx {
    fn progress(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn cmd_simulate(ctx: &Ctx, config: Option<&Path>, output: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let (_, cfg) = load_config(config)?;
    let geom = cfg.array_geometry().map_err(config_error)?;
    let det = cfg.detector_model().map_err(config_error)?;
    let sources = cfg.sources().map_err(config_error)?;
    let seed = seed.unwrap_or(cfg.experiment.seed);
    let synth = synthesize_hologram(&sources, &geom, &det, seed).map_err(config_error)?;
    for w in &synth.warnings {
        ctx.progress(&format!("warning: {w:?}"));
    }
    if synth.holograms.len() == 1 {
        write_atomic(output, &write_hologram(&synth.holograms[0]))?;
        ctx.progress(&format!("wrote {}", output.display()));
    } else {
        for h in &synth.holograms {
            let path = tagged_path(output, h.frequency_tag());
            write_atomic(&path, &write_hologram(h))?;
            ctx.progress(&format!("wrote {}", path.display()));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_localize(
    hologram: &Path,
    bs: AngularLocation,
    zero_pad: usize,
    dc_guard: usize,
    min_peak_to_median: f64,
    sector: Option<&str>,
    sector_theta: Option<&str>,
    oracle_truth: Option<&str>,
) -> Result<String, CliError> {
    let holo = parse_hologram(&read_text(hologram)?).map_err(|e| io_error(hologram, e))?;
    if zero_pad == 0 {
        return Err(CliError::new(EXIT_CONFIG, "--zero-pad must be >= 1"));
    }
    let policy = match (sector, sector_theta, oracle_truth) {
        (_, _, Some(t)) => Disambiguation::Oracle(parse_angles("oracle-truth", t)?),
        (None, None, None) => Disambiguation::None,
        (phi, theta, None) => Disambiguation::Sector(Sector {
            theta_deg: theta.map(|s| parse_range("sector-theta", s)).transpose()?.unwrap_or((-90.0, 90.0)),
            phi_deg: phi.map(|s| parse_range("sector", s)).transpose()?.unwrap_or((-90.0, 90.0)),
        }),
    };
    let cfg = LocalizerConfig { zero_pad_factor: zero_pad, peak: PeakSearch { dc_guard, min_peak_to_median } };
    let result = localize(&holo, bs, &cfg, &policy)?;
    Ok(write_report(&result))
}

#[allow(clippy::too_many_arguments)]
fn cmd_codegen(
    mode: CodingMode,
    bs: AngularLocation,
    ue: AngularLocation,
    bs_range: Option<f64>,
    ue_range: Option<f64>,
    output: &Path,
    config: Option<&Path>,
) -> Result<String, CliError> {
    let (_, cfg) = load_config(config)?;
    let geom = cfg.array_geometry().map_err(config_error)?;
    let (code, src, target) = match mode {
        CodingMode::Far => {
            let code = quantize_1bit(&farfield_phase_profile(bs, ue, &geom));
            (code, Source::far(bs, 1.0).map_err(config_error)?, UeTarget::Direction(ue))
        }
        CodingMode::Near => {
            let need = |v: Option<f64>, flag: &str| match v {
                Some(r) if r > 0.0 && r.is_finite() => Ok(r),
                Some(_) => Err(CliError::new(EXIT_CONFIG, format!("--{flag} must be finite and > 0"))),
                None => Err(CliError::new(EXIT_CONFIG, format!("near mode requires --{flag}"))),
            };
            let bs_pos = Position::from_direction(bs, need(bs_range, "bs-range")?);
            let ue_pos = Position::from_direction(ue, need(ue_range, "ue-range")?);
            let profile = nearfield_phase_profile(bs_pos, ue_pos, &geom).map_err(config_error)?;
            (quantize_1bit(&profile), Source::near(bs_pos, 1.0).map_err(config_error)?, UeTarget::Point(ue_pos))
        }
    };
    write_atomic(output, &write_coding(&code))?;
    let p = received_power(&code, &src, &target, &geom).map_err(config_error)?;
    let g = link_gain(&code, None, &src, &target, &geom).map_err(config_error)?;
    Ok(format!("target_power={p}\ngain_vs_all_zero_db={}\n", g.gain_db))
}

fn cmd_pattern(
    coding: &Path,
    bs: AngularLocation,
    step: f64,
    output: &Path,
    config: Option<&Path>,
) -> Result<String, CliError> {
    let code = parse_coding(&read_text(coding)?).map_err(|e| io_error(coding, e))?;
    let (_, cfg) = load_config(config)?;
    let geom = cfg.array_geometry().map_err(config_error)?;
    if code.dim() != geom.shape() {
        return Err(CliError::new(
            EXIT_CONFIG,
            format!("coding is {:?} but the configured array is {:?}", code.dim(), geom.shape()),
        ));
    }
    let grid = AngleGrid::uniform((-89.0, 89.0), (-89.0, 89.0), step).map_err(config_error)?;
    let src = Source::far(bs, 1.0).map_err(config_error)?;
    let pat = pattern(&code, &src, &geom, &grid).map_err(config_error)?;
    write_atomic(output, &pattern_table(&pat).to_csv())?;
    Ok(format!(
        "peak_theta_deg={}\npeak_phi_deg={}\nhpbw_theta_deg={}\nhpbw_phi_deg={}\n",
        pat.peak.theta_deg,
        pat.peak.phi_deg,
        fmt_opt(pat.hpbw_theta_deg),
        fmt_opt(pat.hpbw_phi_deg)
    ))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

fn write_manifest(
    dir: &Path,
    suite: &str,
    seed: u64,
    config_text: &str,
    written: &[(String, String)],
    failure: Option<&str>,
) -> Result<(), CliError> {
    let mut m = String::from("# holoris-manifest v1\n");
    m.push_str(&format!("suite={suite}\nseed={seed}\nconfig_sha256={}\n", sha256_hex(config_text.as_bytes())));
    match failure {
        None => m.push_str("status=OK\n"),
        Some(msg) => m.push_str(&format!("status=FAILED\nerror={}\n", msg.replace('\n', " "))),
    }
    for (name, contents) in written {
        m.push_str(&format!("artifact={name} sha256={}\n", sha256_hex(contents.as_bytes())));
    }
    write_atomic(&dir.join(format!("manifest_{suite}.txt")), &m)
}

fn cmd_experiment(
    ctx: &Ctx,
    suite: Suite,
    config: Option<&Path>,
    seed: Option<u64>,
    output_dir: Option<&Path>,
) -> Result<String, CliError> {
    let (text, cfg) = load_config(config)?;
    let mut exp = cfg.experiment_config().map_err(config_error)?;
    if let Some(s) = seed {
        exp.seed = s;
    }
    let dir = output_dir.map(Path::to_path_buf).unwrap_or_else(|| exp.output_dir.clone());
    ctx.progress(&format!("running {} suite (seed {})", suite.name(), exp.seed));
    let outcome: Result<SuiteOutput, CliError> = match suite {
        Suite::Grid => grid_suite(&exp).map_err(Into::into),
        Suite::Gain => {
            let sw = &cfg.experiment.sweep;
            exp.bs_locations = vec![AngularLocation { theta_deg: sw.bs[0], phi_deg: sw.bs[1] }];
            gain_suite(&exp, sw.theta_deg, &sw.phi_deg).map_err(Into::into)
        }
        Suite::Ber => {
            let b = &cfg.experiment.ber;
            ber_suite(&b.snr_db, b.gain_db, b.order).map_err(Into::into)
        }
        Suite::Showcase => {
            let samples = cfg.showcase_samples().map_err(config_error)?;
            showcase_suite(&exp, &samples).map_err(Into::into)
        }
    };
    let out = match outcome {
        Ok(o) => o,
        Err(e) => {
            write_manifest(&dir, suite.name(), exp.seed, &text, &[], Some(&e.message))?;
            return Err(e);
        }
    };
    let mut written = Vec::new();
    for (name, contents) in &out.files {
        if let Err(e) = write_atomic(&dir.join(name), contents) {
            // best effort: the manifest itself may be unwritable too
            let _ = write_manifest(&dir, suite.name(), exp.seed, &text, &written, Some(&e.message));
            return Err(e);
        }
        written.push((name.clone(), contents.clone()));
    }
    write_manifest(&dir, suite.name(), exp.seed, &text, &written, None)?;
    ctx.progress(&format!("wrote {} artifacts to {}", written.len(), dir.display()));
    Ok(format!("{}\n", out.summary))
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let ctx = Ctx { quiet: cli.quiet };
    match cli.command {
        Command::Simulate { config, output, seed } => {
            cmd_simulate(&ctx, config.as_deref(), &output, seed)?;
            Ok(String::new())
        }
        Command::Localize {
            hologram,
            bs_theta,
            bs_phi,
            zero_pad,
            dc_guard,
            min_peak_to_median,
            sector,
            sector_theta,
            oracle_truth,
        } => cmd_localize(
            &hologram,
            angles(bs_theta, bs_phi)?,
            zero_pad,
            dc_guard,
            min_peak_to_median,
            sector.as_deref(),
            sector_theta.as_deref(),
            oracle_truth.as_deref(),
        ),
        Command::Codegen { mode, bs_theta, bs_phi, ue_theta, ue_phi, bs_range, ue_range, output, config } => cmd_codegen(
            mode,
            angles(bs_theta, bs_phi)?,
            angles(ue_theta, ue_phi)?,
            bs_range,
            ue_range,
            &output,
            config.as_deref(),
        ),
        Command::Pattern { coding, bs_theta, bs_phi, step, output, config } => {
            cmd_pattern(&coding, angles(bs_theta, bs_phi)?, step, &output, config.as_deref())
        }
        Command::Experiment { suite, config, seed, output_dir } => {
            cmd_experiment(&ctx, suite, config.as_deref(), seed, output_dir.as_deref())
        }
    }
}

/// Parse arguments, run, print, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
