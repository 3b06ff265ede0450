//! Command-line front end for `spinrelax`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! failure, 3 I/O error.

pub mod config;
pub mod svg;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use spinrelax::evolution::{evolve_grid, uniform_grid, ClosedForm, EvolutionPoint};
use spinrelax::spectral::{energy_shift_pv, transition_rate};
use spinrelax::units::{mev_inverse_to_seconds, mev_to_hertz, oersted_to_tesla};
use spinrelax::{LowerLimit, SpectralResult};

use config::{ConfigError, Delta, Particle, RunConfig, TimeSpan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const CSV_HEADER: &str = "t_seconds,t_inverse_mev,markovian,non_markovian,total";

/// Larmor periods shown in the correction panel of `fig1`.
const FIG1_WINDOW_PERIODS: f64 = 20.0;
const FIG1_WINDOW_POINTS: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "spinrelax", version, about = "Relaxation of a driven spin-1/2: rates, evolution curves, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Larmor frequency, decay width, transition rate and level shifts
    Rates(Common),
    /// Write the population curve as CSV
    Evolve(Common),
    /// Write the CSV plus a two-panel SVG (Markovian term, correction term)
    Fig1(Common),
    /// Compare the closed form against the quadrature oracles and run all invariant checks
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (`key = value unit` lines); flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Particle preset
    #[arg(long, value_name = "NAME")]
    particle: Option<String>,
    /// Static field in Oe
    #[arg(long, value_name = "OE")]
    hz_oe: Option<f64>,
    /// Rotating field in Oe
    #[arg(long, value_name = "OE")]
    h1_oe: Option<f64>,
    /// Line half-width in m^-1
    #[arg(long, value_name = "X", conflicts_with = "delta_mev")]
    delta_per_m: Option<f64>,
    /// Line half-width in MeV
    #[arg(long, value_name = "X")]
    delta_mev: Option<f64>,
    /// End of the time grid in seconds
    #[arg(long, value_name = "S", conflicts_with = "t_max_relax")]
    t_max_s: Option<f64>,
    /// End of the time grid in relaxation times 1/(2 gamma)
    #[arg(long, value_name = "K")]
    t_max_relax: Option<f64>,
    /// Number of grid points (>= 2)
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// CSV output path (`-` for standard output)
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
    /// SVG output path
    #[arg(long, value_name = "PATH")]
    out_svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Grid size for the closed form vs contour comparison (>= 10)
    #[arg(long, value_name = "N", default_value_t = 200)]
    grid: usize,
    /// Scale one term of D(xi) as INDEX:FACTOR (mutation test hook)
    #[arg(long, value_name = "INDEX:FACTOR", hide = true)]
    mutate_d_term: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn numeric(e: spinrelax::Error) -> CliError {
    match e {
        spinrelax::Error::InvalidParameter { .. } | spinrelax::Error::DimensionMismatch { .. } => {
            CliError::Config(ConfigError::field("parameters", e.to_string()))
        }
        other => CliError::Verification(other.to_string()),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            RunConfig::parse(&text).map_err(|mut e| {
                e.message = format!("{} ({})", e.message, path.display());
                e
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(name) = &common.particle {
        if spinrelax::ParticleSpec::preset(name).is_none() {
            return Err(ConfigError::field("particle", format!("unknown preset `{name}` (known: proton)")).into());
        }
        cfg.particle = Particle::Preset(name.clone());
    }
    let non_negative = |name: &str, v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::field(name, format!("must be finite and >= 0, got {v}")))
        }
    };
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::field(name, format!("must be finite and > 0, got {v}")))
        }
    };
    if let Some(v) = common.hz_oe {
        cfg.hz_oe = non_negative("hz", v)?;
    }
    if let Some(v) = common.h1_oe {
        cfg.h1_oe = non_negative("h1", v)?;
    }
    if let Some(v) = common.delta_per_m {
        cfg.delta = Delta::PerMeter(positive("delta", v)?);
    }
    if let Some(v) = common.delta_mev {
        cfg.delta = Delta::Mev(positive("delta", v)?);
    }
    if let Some(v) = common.t_max_s {
        cfg.t_max = TimeSpan::Seconds(non_negative("t_max", v)?);
    }
    if let Some(v) = common.t_max_relax {
        cfg.t_max = TimeSpan::RelaxationTimes(non_negative("t_max", v)?);
    }
    if let Some(n) = common.points {
        if n < 2 {
            return Err(ConfigError::field("points", format!("need at least 2, got {n}")).into());
        }
        cfg.points = n;
    }
    if let Some(p) = &common.out_csv {
        cfg.csv = Some(p.clone());
    }
    if let Some(p) = &common.out_svg {
        cfg.svg = Some(p.clone());
    }
    Ok(cfg)
}

/// The `rates` report.
pub fn rates_report(cfg: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let c = cfg.coupling()?;
    let bundle = SpectralResult::compute(&c, LowerLimit::NegativeInfinity).map_err(numeric)?;
    let half_line = energy_shift_pv(&c, LowerLimit::Zero).map_err(numeric)?;
    let w = transition_rate(&c, c.omega0());
    let relax_s = if w > 0.0 { mev_inverse_to_seconds(1.0 / w) } else { f64::INFINITY };
    let spec = cfg.particle.spec().map_err(|e| ConfigError::field("particle", e))?;
    let b = (c.omega0() / c.line().delta()).powi(2);
    let name = match &cfg.particle {
        Particle::Preset(n) => n.clone(),
        Particle::Custom(_) => "custom".into(),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "particle                 {name} (m = {} MeV, g = {})\n",
        spec.mass_mev(),
        spec.g_factor()
    ));
    out.push_str(&format!(
        "omega0                   {:e} MeV ({:.4} MHz)\n",
        c.omega0(),
        mev_to_hertz(c.omega0()) / 1e6
    ));
    out.push_str(&format!("delta                    {:e} MeV\n", c.line().delta()));
    out.push_str(&format!("b = (omega0/delta)^2     {b:.6}\n"));
    out.push_str(&format!("gamma                    {:e} MeV\n", bundle.gamma));
    out.push_str(&format!("W = 2 gamma              {:e} MeV\n", bundle.rate_w));
    if relax_s.is_finite() {
        out.push_str(&format!("relaxation time 1/W      {relax_s:e} s ({:.4} us)\n", relax_s * 1e6));
    } else {
        out.push_str("relaxation time 1/W      inf s\n");
    }
    out.push_str(&format!("PV shift (-inf, inf)     {:e} MeV\n", bundle.energy_shift));
    out.push_str(&format!("PV shift (0, inf)        {half_line:e} MeV\n"));
    Ok((out, c.validity_warning()))
}

pub fn evolution_points(cfg: &RunConfig) -> Result<Vec<EvolutionPoint>, CliError> {
    let p = cfg.evolution()?;
    let t_max = cfg.t_max_inverse_mev(&p)?;
    let grid = uniform_grid(t_max, cfg.points).map_err(numeric)?;
    evolve_grid(&p, &grid).map_err(numeric)
}

/// CSV text: fixed header, LF endings, shortest round-trip floats.
pub fn csv_text(points: &[EvolutionPoint]) -> String {
    let mut out = String::with_capacity(96 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for q in points {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?}\n",
            mev_inverse_to_seconds(q.t),
            q.t,
            q.markovian,
            q.non_markovian,
            q.total
        ));
    }
    out
}

/// Two panels: the Markovian term over the grid, and the correction over
/// the first Larmor periods, where its oscillation is resolved.
pub fn fig1_svg(cfg: &RunConfig, points: &[EvolutionPoint]) -> Result<String, CliError> {
    let p = cfg.evolution()?;
    let t_us: Vec<f64> = points.iter().map(|q| mev_inverse_to_seconds(q.t) * 1e6).collect();
    let markovian: Vec<f64> = points.iter().map(|q| q.markovian).collect();

    let window = FIG1_WINDOW_PERIODS * 2.0 * std::f64::consts::PI / p.omega0();
    let grid = uniform_grid(window, FIG1_WINDOW_POINTS).map_err(numeric)?;
    let fine = evolve_grid(&p, &grid).map_err(numeric)?;
    let t_ns: Vec<f64> = fine.iter().map(|q| mev_inverse_to_seconds(q.t) * 1e9).collect();
    let correction: Vec<f64> = fine.iter().map(|q| q.non_markovian).collect();

    Ok(svg::render(&[
        svg::Panel {
            title: "Markovian term exp(-2 gamma t)",
            x_label: "t (us)",
            y_label: "Markovian term",
            x: &t_us,
            y: &markovian,
        },
        svg::Panel {
            title: "Non-Markovian term, first 20 Larmor periods",
            x_label: "t (ns)",
            y_label: "non-Markovian term",
            x: &t_ns,
            y: &correction,
        },
    ]))
}

fn write_output(path: &Path, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    if path == Path::new("-") {
        return out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("standard output: {e}")));
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn parse_mutation(spec: &str) -> Result<ClosedForm, CliError> {
    let (idx, factor) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("--mutate-d-term expects INDEX:FACTOR, got `{spec}`")))?;
    let idx: usize = idx
        .parse()
        .map_err(|_| CliError::Usage(format!("bad term index `{idx}`")))?;
    let factor: f64 = factor
        .parse()
        .map_err(|_| CliError::Usage(format!("bad factor `{factor}`")))?;
    ClosedForm::with_scaled_d_term(idx, factor).map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |e: std::io::Error| CliError::Io(format!("standard output: {e}"));
    match cli.command {
        Command::Rates(common) => {
            let cfg = load(&common)?;
            let (report, warning) = rates_report(&cfg)?;
            if let Some(w) = warning {
                let _ = writeln!(err, "warning: {w}");
            }
            out.write_all(report.as_bytes()).map_err(stdout_err)?;
        }
        Command::Evolve(common) => {
            let cfg = load(&common)?;
            let points = evolution_points(&cfg)?;
            let path = cfg.csv.clone().unwrap_or_else(|| PathBuf::from("evolution.csv"));
            write_output(&path, &csv_text(&points), out)?;
            if path != Path::new("-") {
                let _ = writeln!(err, "wrote {} rows to {}", points.len(), path.display());
            }
        }
        Command::Fig1(common) => {
            let cfg = load(&common)?;
            let points = evolution_points(&cfg)?;
            let csv_path = cfg.csv.clone().unwrap_or_else(|| PathBuf::from("fig1.csv"));
            let svg_path = cfg.svg.clone().unwrap_or_else(|| PathBuf::from("fig1.svg"));
            let svg = fig1_svg(&cfg, &points)?;
            write_output(&csv_path, &csv_text(&points), out)?;
            write_output(&svg_path, &svg, out)?;
            let _ = writeln!(err, "wrote {} and {}", csv_path.display(), svg_path.display());
        }
        Command::Verify(args) => {
            if args.grid < 10 {
                return Err(CliError::Usage(format!("--grid must be at least 10, got {}", args.grid)));
            }
            let form = match &args.mutate_d_term {
                Some(spec) => parse_mutation(spec)?,
                None => ClosedForm::default(),
            };
            let cfg = load(&args.common)?;
            let c = cfg.coupling()?;
            let p = cfg.evolution()?;
            let t_max = cfg.t_max_inverse_mev(&p)?;
            let report = verify::run(&c, oersted_to_tesla(cfg.hz_oe), t_max, args.grid, &form)
                .map_err(|e| CliError::Verification(e.to_string()))?;
            out.write_all(report.render().as_bytes()).map_err(stdout_err)?;
            if let Some(bad) = report.worst_failure() {
                let at = bad
                    .worst_t
                    .map(|t| format!(" at t = {t:e} MeV^-1 ({:e} s)", mev_inverse_to_seconds(t)))
                    .unwrap_or_default();
                return Err(CliError::Verification(format!(
                    "{}: {:e} exceeds {:e}{at}",
                    bad.name, bad.deviation, bad.limit
                )));
            }
            let _ = writeln!(out, "all {} checks passed", report.checks.len());
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn csv_format() {
        let pts = [
            EvolutionPoint { t: 0.0, markovian: 1.0, non_markovian: 0.0, total: 1.0 },
            EvolutionPoint { t: 1e15, markovian: 0.1, non_markovian: -2.5e-9, total: 0.1 - 2.5e-9 },
        ];
        let text = csv_text(&pts);
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "0.0,0.0,1.0,0.0,1.0");
        assert_eq!(lines[2], "6.582119569e-7,1000000000000000.0,0.1,-2.5e-9,0.0999999975");
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
        for field in lines[2].split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:?}"), field);
        }
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_args(&["spinrelax"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "rates", "--hz-oe", "abc"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "rates", "--delta-per-m", "1", "--delta-mev", "1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "rates", "--particle", "muon"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "rates", "--delta-mev", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "verify", "--grid", "9"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "verify", "--mutate-d-term", "7:2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["spinrelax", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn rates_for_defaults() {
        let (code, out, _) = run_args(&["spinrelax", "rates"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("(42.5341 MHz)"), "{out}");
        assert!(out.contains("729.73"), "{out}");
        assert!(out.contains("2.7703"), "{out}");
    }

    #[test]
    fn rates_without_drive() {
        let (code, out, _) = run_args(&["spinrelax", "rates", "--h1-oe", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("gamma                    0e0 MeV"), "{out}");
        assert!(out.contains("relaxation time 1/W      inf s"), "{out}");
    }

    #[test]
    fn strong_drive_warns() {
        let (code, _, err) = run_args(&["spinrelax", "rates", "--h1-oe", "5000"]);
        assert_eq!(code, EXIT_OK);
        assert!(err.starts_with("warning:"), "{err}");
    }

    #[test]
    fn mutation_spec() {
        assert!(parse_mutation("2:1.5").is_ok());
        assert!(parse_mutation("2").is_err());
        assert!(parse_mutation("x:1").is_err());
        assert!(parse_mutation("1:y").is_err());
    }
}
