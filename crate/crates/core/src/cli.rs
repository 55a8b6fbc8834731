//! Command-line front end: `scan`, `hom`, `point` and `verify`.
//!
//! Settings are merged from the `--config` file, then `--set key=value`
//! overrides, then the dedicated flags of each command. Exit codes: 0 success,
//! 1 verification failure, 2 configuration error, 3 numerical or output error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::algebra::with_commutator;
use crate::config::{format_complex, ConfigError, RunConfig, DEFAULT_GAIN};
use crate::correlations::{
    amplitude_method_rate, coincidence_rate, perturbative_state, state_coincidence_rate,
    visibility_distinguishability,
};
use crate::error::Error;
use crate::model::{
    hom_detector_fields, two_crystal_detector_fields, BeamSplitter, CrystalParams, PathDelay,
};
use crate::scan::{
    dominant_fringe_frequency, estimate_visibility, ideal_scan, simulate_counts, write_csv,
    NM_PER_UM,
};
use crate::verify::{run_all, DEFAULT_CASES, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Allowed deviation of `|r|²+|t|²` from 1 for user-supplied splitters.
pub const CLI_UNITARITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "spdc",
    version,
    about = "Two-crystal SPDC interference and HOM calculator"
)]
pub struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output path for CSV results (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    /// RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Delay scan with simulated photon counting and a visibility fit.
    Scan(ScanArgs),
    /// Hong-Ou-Mandel coincidence rate for one splitter or a |t|² sweep.
    Hom(HomArgs),
    /// One coincidence-rate evaluation.
    Point(PointArgs),
    /// Run the property verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// signal, idler or pump
    #[arg(long = "type")]
    pub scan_type: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_nm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lc_um: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delay_start_um: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delay_stop_um: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub baseline_hz: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub bin_s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub accidentals_hz: Option<String>,
}

#[derive(Debug, Args)]
pub struct HomArgs {
    /// Amplitude reflectance, e.g. 0+0.7071067811865476i
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Amplitude transmittance
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Sweep |t|² as start:stop:steps over symmetric splitters
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gain: Option<String>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// two_crystal or hom
    #[arg(long)]
    pub setup: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gain: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi1_rad: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi2_rad: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random cases per suite.
    #[arg(long)]
    pub cases: Option<String>,
    /// Replace the commutator [a, a†] = 1 to check that the suites notice.
    #[arg(long, hide = true)]
    pub tamper_commutator: Option<f64>,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Numeric(String),
    Verification,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(format!("output: {e}"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(e)) => {
            let _ = writeln!(stderr, "config error: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Numeric(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_NUMERIC
        }
        Err(Failure::Verification) => EXIT_VERIFY_FAILED,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError {
                key: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::new(),
    };
    for assignment in &cli.overrides {
        cfg.apply_override(assignment)?;
    }
    let mut flags: Vec<(&str, &Option<String>)> = vec![("out", &cli.out), ("seed", &cli.seed)];
    match &cli.command {
        Command::Scan(a) => flags.extend([
            ("type", &a.scan_type),
            ("lambda_nm", &a.lambda_nm),
            ("lc_um", &a.lc_um),
            ("delay_start_um", &a.delay_start_um),
            ("delay_stop_um", &a.delay_stop_um),
            ("points", &a.points),
            ("alpha", &a.alpha),
            ("baseline_hz", &a.baseline_hz),
            ("bin_s", &a.bin_s),
            ("accidentals_hz", &a.accidentals_hz),
        ]),
        Command::Hom(a) => flags.extend([
            ("bs_r", &a.r),
            ("bs_t", &a.t),
            ("sweep_t2", &a.sweep),
            ("gain", &a.gain),
        ]),
        Command::Point(a) => flags.extend([
            ("setup", &a.setup),
            ("gain", &a.gain),
            ("alpha", &a.alpha),
            ("phi1_rad", &a.phi1_rad),
            ("phi2_rad", &a.phi2_rad),
            ("bs_r", &a.r),
            ("bs_t", &a.t),
        ]),
        Command::Verify(a) => flags.push(("cases", &a.cases)),
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }

    match &cli.command {
        Command::Scan(_) => cmd_scan(&cfg, stdout, stderr),
        Command::Hom(_) => cmd_hom(&cfg, stdout, stderr),
        Command::Point(_) => cmd_point(&cfg, stdout),
        Command::Verify(a) => cmd_verify(&cfg, a.tamper_commutator, stdout),
    }
}

/// Opens the configured `out` path, or stdout.
fn with_output(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match cfg.get("out") {
        Some(path) => {
            let file = File::create(path).map_err(|e| ConfigError {
                key: Some("out".into()),
                message: format!("cannot create {path}: {e}"),
            })?;
            let mut writer = BufWriter::new(file);
            f(&mut writer)?;
            writer.flush()?;
        }
        None => f(stdout)?,
    }
    Ok(())
}

/// Summary lines go to stdout when the CSV goes to a file, otherwise to stderr.
fn summary_sink<'a>(
    cfg: &RunConfig,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
) -> &'a mut dyn Write {
    if cfg.get("out").is_some() {
        stdout
    } else {
        stderr
    }
}

fn gain(cfg: &RunConfig) -> Result<Complex64, Failure> {
    let d = cfg
        .complex("gain")?
        .unwrap_or(Complex64::new(DEFAULT_GAIN, 0.0));
    if d.norm() == 0.0 {
        return Err(ConfigError {
            key: Some("gain".into()),
            message: "must be nonzero to express rates in |D|^2 units".into(),
        }
        .into());
    }
    Ok(d)
}

fn cmd_scan(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let scan = cfg.scan_config()?;
    let counting = cfg.counting_config()?;
    let mut result = simulate_counts(&ideal_scan(&scan)?, &counting)?;
    let fit = estimate_visibility(&result, scan.wavelength_nm);
    result.fit = fit.as_ref().ok().copied();

    let metadata: Vec<(String, String)> = RunConfig::from_scan(&scan, &counting)
        .entries()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    with_output(cfg, stdout, |w| write_csv(&result, &metadata, w))?;

    let summary = summary_sink(cfg, stdout, stderr);
    match fit {
        Ok(f) => writeln!(
            summary,
            "fitted V = {:.6} +/- {:.6}",
            f.visibility, f.stderr
        )?,
        Err(e) => writeln!(summary, "fitted V unavailable: {e}")?,
    }
    let (frequency, resolution) =
        dominant_fringe_frequency(&result.delays_um, &result.ideal_rate_hz);
    let expected = NM_PER_UM / scan.wavelength_nm;
    if frequency > 0.0 && visibility_distinguishability(scan.alpha).visibility > 0.0 {
        let within = (frequency - expected).abs() <= resolution;
        writeln!(
            summary,
            "fringe period = {:.1} nm (expected {} nm, {} one DFT bin)",
            NM_PER_UM / frequency,
            scan.wavelength_nm,
            if within { "within" } else { "NOT within" }
        )?;
    } else {
        writeln!(summary, "fringe period: no fringes (visibility 0)")?;
    }
    Ok(())
}

fn parse_sweep(text: &str) -> Result<(f64, f64, usize), ConfigError> {
    let err = |m: &str| ConfigError {
        key: Some("sweep_t2".into()),
        message: format!("{text:?}: {m}"),
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(err("expected start:stop:steps"));
    };
    let start: f64 = start
        .trim()
        .parse()
        .map_err(|_| err("start is not a number"))?;
    let stop: f64 = stop
        .trim()
        .parse()
        .map_err(|_| err("stop is not a number"))?;
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| err("steps is not an integer"))?;
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
        return Err(err("need 0 <= start <= stop <= 1"));
    }
    if steps < 2 {
        return Err(err("need at least 2 steps"));
    }
    Ok((start, stop, steps))
}

fn cmd_hom(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let d = gain(cfg)?;
    let crystal = CrystalParams::single(d)?;
    let rate_at = |bs: &BeamSplitter| -> Result<f64, Failure> {
        let (ea, eb) = hom_detector_fields(&crystal, bs);
        Ok(coincidence_rate(&ea, &eb)?.in_gain_units(d))
    };

    let Some(sweep) = cfg.get("sweep_t2") else {
        let bs = cfg.beam_splitter(CLI_UNITARITY_TOLERANCE)?;
        let rate = rate_at(&bs)?;
        writeln!(stdout, "R_AB/|D|^2 = {rate:e}")?;
        writeln!(
            stdout,
            "|r^2+t^2|^2 = {:e}",
            (bs.r() * bs.r() + bs.t() * bs.t()).norm_sqr()
        )?;
        return Ok(());
    };
    if cfg.get("bs_r").is_some() || cfg.get("bs_t").is_some() {
        return Err(ConfigError {
            key: Some("sweep_t2".into()),
            message: "cannot be combined with bs_r/bs_t".into(),
        }
        .into());
    }
    let (start, stop, steps) = parse_sweep(sweep)?;
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t2 = start + (stop - start) * k as f64 / (steps - 1) as f64;
        rows.push((t2, rate_at(&BeamSplitter::symmetric(t2)?)?));
    }
    with_output(cfg, stdout, |w| {
        writeln!(w, "# gain={}", format_complex(d))?;
        writeln!(w, "t_sq,rate_d2")?;
        for (t2, rate) in &rows {
            writeln!(w, "{t2},{rate}")?;
        }
        Ok(())
    })?;
    let (t2_min, rate_min) = rows
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        });
    writeln!(
        summary_sink(cfg, stdout, stderr),
        "minimum R_AB/|D|^2 = {rate_min:e} at |t|^2 = {t2_min}"
    )?;
    Ok(())
}

fn cmd_point(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    let d = gain(cfg)?;
    let bs = cfg.beam_splitter(CLI_UNITARITY_TOLERANCE)?;
    match cfg.get("setup").unwrap_or("two_crystal") {
        "two_crystal" => {
            let alpha = cfg.complex("alpha")?.unwrap_or(Complex64::new(1.0, 0.0));
            let phi1 = cfg.float("phi1_rad")?.unwrap_or(0.0);
            let phi2 = cfg.float("phi2_rad")?.unwrap_or(0.0);
            let (c1, c2) = CrystalParams::two_identical(d, alpha)?;
            let (ea, eb) = two_crystal_detector_fields(
                &c1,
                &c2,
                &bs,
                &bs,
                PathDelay::new(phi1)?,
                PathDelay::new(phi2)?,
            )?;
            let rate = coincidence_rate(&ea, &eb)?;
            let (g1, g2) = (c1.effective_gain(), c2.effective_gain());
            let amplitude = amplitude_method_rate(g1, g2, phi1, phi2, bs.r(), bs.t());
            let state = state_coincidence_rate(&perturbative_state(g1, g2), &ea, &eb)?;
            let pair = visibility_distinguishability(alpha);
            writeln!(stdout, "R_AB = {:e}", rate.value())?;
            writeln!(stdout, "R_AB/|D|^2 = {:e}", rate.in_gain_units(d))?;
            writeln!(stdout, "amplitude route = {amplitude:e}")?;
            writeln!(stdout, "state route = {state:e}")?;
            writeln!(
                stdout,
                "V = {} K = {}",
                pair.visibility, pair.distinguishability
            )?;
        }
        "hom" => {
            let (ea, eb) = hom_detector_fields(&CrystalParams::single(d)?, &bs);
            let rate = coincidence_rate(&ea, &eb)?;
            writeln!(stdout, "R_AB = {:e}", rate.value())?;
            writeln!(stdout, "R_AB/|D|^2 = {:e}", rate.in_gain_units(d))?;
        }
        other => {
            return Err(ConfigError {
                key: Some("setup".into()),
                message: format!("{other:?} is not two_crystal or hom"),
            }
            .into())
        }
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, tamper: Option<f64>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cases = cfg.integer("cases")?.map_or(DEFAULT_CASES, |n| n as usize);
    if cases == 0 {
        return Err(ConfigError {
            key: Some("cases".into()),
            message: "must be positive".into(),
        }
        .into());
    }
    let seed = cfg.integer("seed")?.unwrap_or(DEFAULT_SEED);
    let reports = match tamper {
        Some(value) => {
            writeln!(stdout, "commutator [a, a+] tampered to {value}")?;
            with_commutator(value, || run_all(cases, seed))
        }
        None => run_all(cases, seed),
    };
    for report in &reports {
        writeln!(stdout, "{report}")?;
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
