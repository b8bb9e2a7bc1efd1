//! Command-line front end: circular configurations, action
//! minimization, conjugate-point certificates, and mass sweeps.
//!
//! Exit codes: 0 on success, 1 on numerical failure (unconverged
//! minimization, unavailable certificate, failed sweep rows), 2 on
//! usage errors.

mod json;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sitnikov::{
    jacobi_report, minimize, validate_config, verify_periodicity, CircularConfig, Error,
    JacobiReport, MassSystem, MinimizeOptions, MinimizerReport, PeriodicityCheck, SymmetryClass,
    ValidationReport,
};

#[derive(Debug)]
pub enum Failure {
    /// Bad input or environment; exit code 2.
    Usage(String),
    /// The computation itself failed or did not certify; exit code 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidInstance(_) | Error::GridTooCoarse { .. } | Error::PeriodMismatch { .. } => {
                Failure::Usage(err.to_string())
            }
            Error::NoConjugatePoint { .. } | Error::CertificateUnavailable(_) => {
                Failure::Numerical(err.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sitnikov",
    version,
    about = "Vertical-axis periodic orbits of the circular restricted 3- and 4-body problems",
    long_about = "Vertical-axis periodic orbits of the circular restricted 3- and 4-body \
                  problems: circular primary configurations, action minimization over \
                  symmetric loop spaces, and conjugate-point certificates that the planar \
                  rest solution is not a minimizer.\n\nUnits use G = 1 throughout; the \
                  default period is T = 2\u{3c0}."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the circular primary configuration and its residuals
    Config(ConfigCmd),
    /// Minimize the action over a symmetry class
    Minimize(MinimizeCmd),
    /// Second-variation report for the planar rest solution z = 0
    Jacobi(JacobiCmd),
    /// Run a mass-grid sweep described by a JSON file
    Sweep(SweepCmd),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    /// Anti-half-period symmetry, z(t + T/2) = -z(t)
    #[value(name = "anti-half")]
    AntiHalf,
    /// Odd symmetry, z(-t) = -z(t)
    #[value(name = "odd")]
    Odd,
}

impl From<ClassArg> for SymmetryClass {
    fn from(value: ClassArg) -> Self {
        match value {
            ClassArg::AntiHalf => SymmetryClass::AntiHalfPeriod,
            ClassArg::Odd => SymmetryClass::Odd,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Problem-instance JSON file: {"masses": [m1, ...], "period": T}
    #[arg(long, value_name = "FILE", conflicts_with_all = ["n", "masses", "period"])]
    instance: Option<PathBuf>,

    /// Number of primaries (2 or 3); checked against --masses
    #[arg(long, value_name = "N")]
    n: Option<usize>,

    /// Comma-separated primary masses
    #[arg(long, value_delimiter = ',', value_name = "M1,M2[,M3]")]
    masses: Option<Vec<f64>>,

    /// Orbital period of the primaries [default: 2pi]
    #[arg(long, value_name = "T")]
    period: Option<f64>,
}

impl InstanceArgs {
    fn resolve(&self) -> Result<MassSystem, Failure> {
        if let Some(path) = &self.instance {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            return serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("invalid instance {}: {e}", path.display())));
        }
        let masses = self
            .masses
            .clone()
            .ok_or_else(|| Failure::Usage("provide --masses or --instance".into()))?;
        if let Some(n) = self.n {
            if n != masses.len() {
                return Err(Failure::Usage(format!(
                    "--n {n} disagrees with {} masses",
                    masses.len()
                )));
            }
        }
        let period = self.period.unwrap_or(std::f64::consts::TAU);
        Ok(MassSystem::new(masses, period)?)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Directory for report artifacts (created if missing)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn prepare(&self) -> Result<Option<&Path>, Failure> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)
                .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
            Ok(Some(dir))
        } else {
            Ok(None)
        }
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::write(dir.join(name), contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", dir.join(name).display())))
}

#[derive(Args)]
struct ConfigCmd {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MinimizeCmd {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Symmetry class of the loop space
    #[arg(long, value_enum)]
    class: ClassArg,

    /// Truncation order K of the loop representation
    #[arg(long, default_value_t = 32, value_name = "K")]
    modes: usize,

    /// Seed for the initial iterate
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Convergence tolerance on the coefficient-gradient sup-norm
    #[arg(long, default_value_t = 1e-9)]
    gtol: f64,

    /// Iteration budget
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,

    /// Amplitude of the k=1 mode of the initial iterate
    /// [default: 0.5 min r_i]
    #[arg(long, value_name = "A")]
    init_amplitude: Option<f64>,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct JacobiCmd {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Symmetry class the certificate is issued for
    #[arg(long, value_enum)]
    class: ClassArg,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepCmd {
    /// Sweep description JSON file (axes, period, class, options)
    #[arg(long = "sweep-grid", value_name = "FILE")]
    sweep_grid: PathBuf,

    /// Emit only (masses, omega, c, margin) and skip minimization
    #[arg(long)]
    jacobi_only: bool,

    #[command(flatten)]
    out: OutArgs,
}

#[derive(Serialize)]
struct ConfigDoc {
    n_primaries: usize,
    masses: Vec<f64>,
    period: f64,
    config: CircularConfig,
    validation: ValidationReport,
}

#[derive(Serialize)]
struct MinimizeDoc {
    n_primaries: usize,
    masses: Vec<f64>,
    period: f64,
    class: &'static str,
    options: MinimizeOptions,
    config: CircularConfig,
    /// Action of the rest solution z = 0.
    rest_action: f64,
    minimizer: MinimizerReport,
    periodicity: PeriodicityCheck,
}

#[derive(Serialize)]
struct JacobiDoc {
    n_primaries: usize,
    masses: Vec<f64>,
    period: f64,
    class: &'static str,
    config: CircularConfig,
    report: JacobiReport,
}

fn run_config(cmd: ConfigCmd) -> Result<(), Failure> {
    let system = cmd.instance.resolve()?;
    let config = CircularConfig::for_system(&system)?;
    let validation = validate_config(&config, &system);
    let doc = ConfigDoc {
        n_primaries: system.n_primaries(),
        masses: system.masses().to_vec(),
        period: system.period(),
        config,
        validation,
    };
    let rendered = json::to_string(&doc);
    println!("{rendered}");
    if let Some(dir) = cmd.out.prepare()? {
        write_artifact(dir, "config.json", &format!("{rendered}\n"))?;
    }
    Ok(())
}

fn run_minimize(cmd: MinimizeCmd) -> Result<(), Failure> {
    let system = cmd.instance.resolve()?;
    let class: SymmetryClass = cmd.class.into();
    let options = MinimizeOptions {
        modes: cmd.modes,
        gtol: cmd.gtol,
        max_iter: cmd.max_iter,
        seed: cmd.seed,
        init_amplitude: cmd.init_amplitude,
        ..Default::default()
    };
    let config = CircularConfig::for_system(&system)?;
    let minimizer = minimize(&system, class, &options)?;
    let periodicity = verify_periodicity(&minimizer.loop_z, &system, &config)?;
    let rest_action = system.period() * config.axial_potential(&system, 0.0);

    let succeeded = minimizer.converged && minimizer.nontrivial;
    let doc = MinimizeDoc {
        n_primaries: system.n_primaries(),
        masses: system.masses().to_vec(),
        period: system.period(),
        class: class.label(),
        options,
        config: config.clone(),
        rest_action,
        minimizer,
        periodicity,
    };
    let rendered = json::to_string(&doc);
    println!("{rendered}");

    if let Some(dir) = cmd.out.prepare()? {
        write_artifact(dir, "report.json", &format!("{rendered}\n"))?;

        let samples = doc.minimizer.loop_z.sample_grid(doc.minimizer.loop_z.default_grid_len())?;
        let mut trajectory = String::from("t,z,dz\n");
        for j in 0..samples.times.len() {
            trajectory.push_str(&format!(
                "{},{},{}\n",
                json::csv_f64(samples.times[j]),
                json::csv_f64(samples.z[j]),
                json::csv_f64(samples.dz[j]),
            ));
        }
        write_artifact(dir, "trajectory.csv", &trajectory)?;

        let mut trace = String::from("iteration,action,grad_norm\n");
        for point in &doc.minimizer.trace {
            trace.push_str(&format!(
                "{},{},{}\n",
                point.iteration,
                json::csv_f64(point.action),
                json::csv_f64(point.grad_norm),
            ));
        }
        write_artifact(dir, "trace.csv", &trace)?;

        let (z0, v0) = doc.minimizer.loop_z.evaluate(0.0);
        let flowed = sitnikov::integrate(
            &system,
            &config,
            z0,
            v0,
            system.period(),
            sitnikov::ode::default_dt(&system),
        )?;
        let mut ode = String::from("t,z,v,energy\n");
        for j in 0..flowed.times.len() {
            ode.push_str(&format!(
                "{},{},{},{}\n",
                json::csv_f64(flowed.times[j]),
                json::csv_f64(flowed.z[j]),
                json::csv_f64(flowed.v[j]),
                json::csv_f64(flowed.energy[j]),
            ));
        }
        write_artifact(dir, "ode.csv", &ode)?;
    }

    if succeeded {
        Ok(())
    } else {
        Err(Failure::Numerical(
            "minimization did not converge to a non-trivial loop".into(),
        ))
    }
}

fn run_jacobi(cmd: JacobiCmd) -> Result<(), Failure> {
    let system = cmd.instance.resolve()?;
    let class: SymmetryClass = cmd.class.into();
    let config = CircularConfig::for_system(&system)?;
    let report = jacobi_report(&system, &config, class)?;
    let doc = JacobiDoc {
        n_primaries: system.n_primaries(),
        masses: system.masses().to_vec(),
        period: system.period(),
        class: class.label(),
        config,
        report,
    };
    let rendered = json::to_string(&doc);
    println!("{rendered}");
    if let Some(dir) = cmd.out.prepare()? {
        write_artifact(dir, "jacobi.json", &format!("{rendered}\n"))?;
    }
    Ok(())
}

fn run_sweep(cmd: SweepCmd) -> Result<(), Failure> {
    let text = fs::read_to_string(&cmd.sweep_grid).map_err(|e| {
        Failure::Usage(format!("cannot read {}: {e}", cmd.sweep_grid.display()))
    })?;
    let grid: sweep::SweepGrid = serde_json::from_str(&text).map_err(|e| {
        Failure::Usage(format!("invalid sweep grid {}: {e}", cmd.sweep_grid.display()))
    })?;
    let outcome = sweep::run(&grid, cmd.jacobi_only)?;
    print!("{}", outcome.csv);
    if let Some(dir) = cmd.out.prepare()? {
        write_artifact(dir, "sweep.csv", &outcome.csv)?;
    }
    if outcome.failed_rows == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{} of {} sweep rows failed",
            outcome.failed_rows, outcome.total_rows
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Config(cmd) => run_config(cmd),
        Command::Minimize(cmd) => run_minimize(cmd),
        Command::Jacobi(cmd) => run_jacobi(cmd),
        Command::Sweep(cmd) => run_sweep(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
