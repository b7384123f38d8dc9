//! Command-line front end: `check`, `design`, `simulate` and `random`.
//!
//! Exit codes: 0 success, 1 no observer exists, 2 input error,
//! 3 numerical certification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, DetectabilityReport};
use crate::io::{self, IoError};
use crate::model::{self, StateSpaceSystem, TransformedSystem};
use crate::numerics::{self, C64};
use crate::sim::{self, InputSignal, SimError, SimulationSettings};
use crate::synthesis::{self, rank_factorize, PhiChoice, SynthesisConfig, SynthesisError};
use crate::testkit::{self, GeneratorSpec, SystemKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_OBSERVER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

const IMPOSSIBLE: &str = "construction of reduced order proportional-integral observer is impossible";

#[derive(Debug, Parser)]
#[command(name = "pi-observer", version, about = "Reduced-order PI observer existence check, design and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report rank(C), rank(A12), the detectability verdict and the largest feasible k.
    Check {
        system: PathBuf,
        #[arg(long = "tol-rank")]
        tol_rank: Option<f64>,
        /// Eigenvalues with real part ≥ −tol are PBH-tested.
        #[arg(long, default_value_t = analysis::DEFAULT_BOUNDARY_TOL)]
        boundary_tol: f64,
    },
    /// Construct and certify L, F, G; write the design JSON.
    Design {
        system: PathBuf,
        #[command(flatten)]
        opts: DesignArgs,
        /// Design JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate plant and observer; write the trace CSV and print a summary.
    Simulate {
        system: PathBuf,
        design: PathBuf,
        #[command(flatten)]
        opts: SimArgs,
        /// Trace CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random system with known detectability.
    Random {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Detectable)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Target poles for A22 + K·A12, e.g. "-1,-2+1i,-2-1i".
    #[arg(long, allow_hyphen_values = true)]
    pub poles: Option<String>,
    /// Eigenvalues of Φ.
    #[arg(long = "phi-poles", allow_hyphen_values = true)]
    pub phi_poles: Option<String>,
    #[arg(long = "tol-rank")]
    pub tol_rank: Option<f64>,
    #[arg(long = "stability-margin", default_value_t = analysis::DEFAULT_STABILITY_MARGIN)]
    pub stability_margin: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Zero,
    Step,
    Sine,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Detectable,
    UndetectablePlanted,
    Observable,
    Hurwitz,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Detectable => SystemKind::Detectable,
            KindArg::UndetectablePlanted => SystemKind::UndetectablePlanted,
            KindArg::Observable => SystemKind::Observable,
            KindArg::Hurwitz => SystemKind::Hurwitz,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct SimArgs {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tf: Option<f64>,
    #[arg(long, value_enum, default_value_t = InputKind::Zero)]
    pub input: InputKind,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub amplitude: f64,
    /// Step time.
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// Sine frequency in rad/s.
    #[arg(long, default_value_t = 1.0)]
    pub frequency: f64,
    /// Piecewise-constant input table `t,u_1..u_m` for `--input csv`.
    #[arg(long = "input-csv")]
    pub input_csv: Option<PathBuf>,
    /// Initial plant state, comma separated (default: all ones).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Initial estimate of z2 (default: zero).
    #[arg(long = "z2hat0", allow_hyphen_values = true)]
    pub z2_hat0: Option<String>,
    /// Initial integral state (default: zero).
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error("{0}")]
    Output(#[from] std::io::Error),
    /// The check ran but the pair is not detectable.
    #[error("{IMPOSSIBLE}")]
    NotDetectable,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotDetectable => EXIT_NO_OBSERVER,
            CliError::Synthesis(e) => match e {
                SynthesisError::Undetectable { .. } | SynthesisError::OrderExceedsRank { .. } => EXIT_NO_OBSERVER,
                SynthesisError::Certification { .. }
                | SynthesisError::PlacementFailed { .. }
                | SynthesisError::Numerics(_)
                | SynthesisError::Analysis(_) => EXIT_CERTIFICATION,
                _ => EXIT_INPUT,
            },
            CliError::Sim(SimError::Divergence { .. }) | CliError::Numerics(_) | CliError::Analysis(_) => {
                EXIT_CERTIFICATION
            }
            _ => EXIT_INPUT,
        }
    }
}

/// Parses `"-1, -2+0.5i, -2-0.5i"`.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_complex)
        .collect()
}

fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("cannot parse {s:?} as a complex number (use e.g. -1+2i)"));
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = compact.strip_suffix(['i', 'j']) else {
        return compact.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that does not start the number or an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

fn parse_vector(name: &str, text: &str, len: usize) -> Result<DVector<f64>, CliError> {
    let vals: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("{name}: cannot parse {s:?}"))))
        .collect::<Result<_, _>>()?;
    if vals.len() != len {
        return Err(CliError::Usage(format!("{name} must have {len} entries, got {}", vals.len())));
    }
    Ok(DVector::from_vec(vals))
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

impl DesignArgs {
    pub fn to_config(&self) -> Result<SynthesisConfig, CliError> {
        if let Some(t) = self.tol_rank {
            check_positive("--tol-rank", t)?;
        }
        check_positive("--stability-margin", self.stability_margin)?;
        Ok(SynthesisConfig {
            k: self.k,
            target_poles: self.poles.as_deref().map(parse_complex_list).transpose()?,
            phi: match &self.phi_poles {
                Some(p) => PhiChoice::Poles(parse_complex_list(p)?),
                None => PhiChoice::Default,
            },
            rank_tol: self.tol_rank,
            stability_margin: self.stability_margin,
            seed: self.seed,
            ..Default::default()
        })
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub rank_c: usize,
    pub q: usize,
    pub max_k: usize,
    pub detectable: bool,
    pub reduced_pair_detectable: bool,
    pub pbh: DetectabilityReport,
    pub verdict: String,
}

pub fn check_report(sys: &StateSpaceSystem, rank_tol: Option<f64>, boundary_tol: f64) -> Result<CheckReport, CliError> {
    let (n, p) = (sys.n(), sys.p());
    let ts = TransformedSystem::new(sys, rank_tol.unwrap_or_else(|| numerics::default_rank_tol(p, n)))?;
    let pair = analysis::detectable_pair_equivalence(sys, &ts, boundary_tol)?;
    let a12_tol = rank_tol.unwrap_or_else(|| numerics::default_rank_tol(p, n - p));
    let q = rank_factorize(&ts.a12, a12_tol)?.q;
    let detectable = pair.plant.detectable && pair.reduced.detectable;
    let rank_c = numerics::numerical_rank(sys.c(), rank_tol.unwrap_or_else(|| numerics::default_rank_tol(p, n)))?;
    Ok(CheckReport {
        n,
        m: sys.m(),
        p,
        rank_c,
        q,
        max_k: if detectable { q } else { 0 },
        detectable,
        reduced_pair_detectable: pair.reduced.detectable,
        pbh: pair.plant,
        verdict: if !detectable {
            IMPOSSIBLE.to_string()
        } else if q == 0 {
            "detectable, but rank(A12) = 0 leaves no room for an integral state".to_string()
        } else {
            format!("a reduced order proportional-integral observer exists for 1 ≤ k ≤ {q}")
        },
    })
}

fn cmd_check(
    system: &Path,
    tol_rank: Option<f64>,
    boundary_tol: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(t) = tol_rank {
        check_positive("--tol-rank", t)?;
    }
    check_positive("--boundary-tol", boundary_tol)?;
    let sys = io::read_system(system, tol_rank)?;
    let report = check_report(&sys, tol_rank, boundary_tol)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if report.detectable {
        Ok(())
    } else {
        Err(CliError::NotDetectable)
    }
}

fn cmd_design(system: &Path, opts: &DesignArgs, dest: Option<&PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = io::read_system(system, opts.tol_rank)?;
    let config = opts.to_config()?;
    let d = synthesis::design(&sys, &config)?;
    let text = io::design_to_json(&d.t, &d.observer);
    match dest {
        Some(path) => {
            io::write_text(path, &text)?;
            writeln!(out, "composite spectrum:")?;
            for z in d.observer.composite_spectrum.sorted().eigenvalues() {
                writeln!(out, "  {:+.6} {:+.6}i", z.re, z.im)?;
            }
            if !d.observer.certificate.unplaced_poles.is_empty() {
                writeln!(out, "unplaced poles: {:?}", d.observer.certificate.unplaced_poles)?;
            }
            writeln!(out, "design written to {}", path.display())?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

/// Builds simulation settings for a plant/design pair from CLI options.
pub fn sim_settings(
    sys: &StateSpaceSystem,
    real: &sim::ObserverRealization,
    design: &synthesis::ObserverDesign,
    opts: &SimArgs,
) -> Result<SimulationSettings, CliError> {
    let (n, r, k) = (sys.n(), real.order(), real.k());
    let dt = match opts.dt {
        Some(dt) => {
            check_positive("--dt", dt)?;
            dt
        }
        None => sim::default_dt(sys, real)?,
    };
    let tf = match opts.tf {
        Some(tf) => {
            check_positive("--tf", tf)?;
            tf
        }
        None => sim::default_tf(design),
    };
    let input = match opts.input {
        InputKind::Zero => InputSignal::Zero,
        InputKind::Step => InputSignal::Step {
            amplitude: opts.amplitude,
            t0: opts.t0,
        },
        InputKind::Sine => InputSignal::Sine {
            amplitude: opts.amplitude,
            frequency: opts.frequency,
        },
        InputKind::Csv => {
            let path = opts
                .input_csv
                .as_ref()
                .ok_or_else(|| CliError::Usage("--input csv requires --input-csv <path>".into()))?;
            InputSignal::from_csv(io::read_text(path)?.as_bytes())?
        }
    };
    let vec_or = |name: &str, text: &Option<String>, len: usize, fill: f64| match text {
        Some(t) => parse_vector(name, t, len),
        None => Ok(DVector::from_element(len, fill)),
    };
    Ok(SimulationSettings {
        dt,
        tf,
        input,
        x0: vec_or("--x0", &opts.x0, n, 1.0)?,
        z2_hat0: vec_or("--z2hat0", &opts.z2_hat0, r, 0.0)?,
        omega0: vec_or("--omega0", &opts.omega0, k, 0.0)?,
    })
}

fn cmd_simulate(
    system: &Path,
    design: &Path,
    opts: &SimArgs,
    dest: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sys = io::read_system(system, None)?;
    let stored = io::design_from_json(&io::read_text(design)?)?;
    if stored.t.nrows() != sys.n() || stored.observer.p() != sys.p() {
        return Err(CliError::Usage(format!(
            "design is for n = {}, p = {} but the system has n = {}, p = {}",
            stored.t.nrows(),
            stored.observer.p(),
            sys.n(),
            sys.p()
        )));
    }
    let ts = model::partition(&sys, &stored.t)?;
    let real = sim::realize(&stored.observer, &ts)?;
    let settings = sim_settings(&sys, &real, &stored.observer, opts)?;
    let trace = sim::simulate(&sys, &real, &settings)?;
    if let Some(path) = dest {
        let file = std::fs::File::create(path).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
        trace.write_csv(std::io::BufWriter::new(file))?;
    }
    let summary = sim::summarize(&stored.observer, &trace);
    writeln!(out, "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    Ok(())
}

fn cmd_random(spec: GeneratorSpec, dest: Option<&PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    if !spec.is_valid() {
        return Err(CliError::Usage(format!(
            "invalid dimensions n = {}, m = {}, p = {}, k = {} for kind {:?}: need 1 ≤ p, m, k and p + k < n \
             (p + k ≤ n for observable/hurwitz)",
            spec.n, spec.m, spec.p, spec.k, spec.kind
        )));
    }
    let text = io::system_to_json(&testkit::gen_system(&spec));
    match dest {
        Some(path) => io::write_text(path, &text)?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Check { system, tol_rank, boundary_tol } => cmd_check(system, *tol_rank, *boundary_tol, out),
        Command::Design { system, opts, out: dest } => cmd_design(system, opts, dest.as_ref(), out),
        Command::Simulate { system, design, opts, out: dest } => cmd_simulate(system, design, opts, dest.as_ref(), out),
        Command::Random { n, m, p, k, kind, seed, out: dest } => cmd_random(
            GeneratorSpec {
                n: *n,
                m: *m,
                p: *p,
                k: *k,
                seed: *seed,
                kind: (*kind).into(),
            },
            dest.as_ref(),
            out,
        ),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
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

    #[test]
    fn parses_complex_lists() {
        let z = parse_complex_list("-1, -2+0.5i, -2-0.5i,-3e-1, -1e-2-1e+1i, -i").unwrap();
        assert_eq!(
            z,
            vec![
                C64::new(-1.0, 0.0),
                C64::new(-2.0, 0.5),
                C64::new(-2.0, -0.5),
                C64::new(-0.3, 0.0),
                C64::new(-0.01, -10.0),
                C64::new(0.0, -1.0),
            ]
        );
        assert!(parse_complex_list("abc").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::NotDetectable.exit_code(), 1);
        assert_eq!(
            CliError::Synthesis(SynthesisError::OrderExceedsRank { k: 2, q: 1 }).exit_code(),
            1
        );
        assert_eq!(
            CliError::Synthesis(SynthesisError::Certification {
                check: String::new(),
                conditions: Default::default()
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
    }
}
