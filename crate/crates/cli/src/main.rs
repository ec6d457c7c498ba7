//! Command-line front end: runs pipeline stages on a system spec and prints
//! a JSON report on stdout, with a readable summary on stderr.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use emergentq::catalog::{resolve, CompiledSystem, BUILTIN_NAMES};
use emergentq::report::{Recorder, Report, ReportSet};
use emergentq::spectra::SpectrumReport;
use emergentq::suite::{
    analyze_checks, brst_checks, reduce_checks, simulate_checks, spectrum_checks, verify, BrstOptions,
    SimulateOptions, SpectrumOptions, VerifyOptions,
};

#[derive(Parser, Debug)]
#[command(name = "emergentq", version, about = "Deterministic quantization as a verifiable computation")]
struct Cli {
    /// Seed for every random draw (lattice configurations, test points).
    #[arg(long, global = true, env = "EMERGENTQ_SEED", default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time per check (makes reports run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constraint analysis: multipliers, charge conservation, φ, classification.
    Analyze { spec: String },
    /// Gauge fixing and reduction: K, Q₁*, K* and their certificates.
    Reduce { spec: String },
    /// Integrate the doubled flow and check conservation, det M and the Wronskian.
    Simulate {
        spec: String,
        #[command(flatten)]
        sim: SimArgs,
        /// Trajectory CSV destination (default: <system>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BRST and superfield invariance on lattice discretisations.
    Brst {
        spec: String,
        #[command(flatten)]
        brst: BrstArgs,
    },
    /// Grid spectrum of the emergent Hamiltonian.
    Spectrum {
        spec: String,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Every stage.
    Verify {
        #[arg(required_unless_present = "all_builtin", conflicts_with = "all_builtin")]
        spec: Option<String>,
        /// Verify every built-in system.
        #[arg(long)]
        all_builtin: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        brst: BrstArgs,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 0.0)]
    t1: f64,
    #[arg(long, default_value_t = 5.0)]
    t2: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Initial point, comma separated (default: all ones).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    q0: Option<Vec<f64>>,
    /// Initial auxiliary point, comma separated (default: all ones).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    qbar0: Option<Vec<f64>>,
}

impl SimArgs {
    fn options(&self) -> SimulateOptions {
        SimulateOptions { t1: self.t1, t2: self.t2, dt: self.dt, q0: self.q0.clone(), qbar0: self.qbar0.clone() }
    }
}

#[derive(Args, Debug)]
struct BrstArgs {
    /// Largest lattice size; grids from 3 slices up to this are checked.
    #[arg(long, default_value_t = 6)]
    slices: usize,
    /// Random configurations per grid.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

impl BrstArgs {
    fn options(&self, seed: u64) -> BrstOptions {
        BrstOptions { slices: 3..=self.slices.max(3), trials: self.trials, seed }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Half-width of the grid interval [−L, L].
    #[arg(long = "L", default_value_t = 10.0)]
    half_width: f64,
    /// Interior grid points.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of levels to compare.
    #[arg(long, default_value_t = 5)]
    levels: usize,
}

impl SpectrumArgs {
    fn options(&self) -> SpectrumOptions {
        SpectrumOptions { half_width: self.half_width, n: self.n, levels: self.levels, ..Default::default() }
    }
}

#[derive(Serialize)]
struct WithSpectrum {
    #[serde(flatten)]
    report: Report,
    spectrum: Option<SpectrumReport>,
}

/// Failure to even start: bad spec, unreadable file, unwritable output.
struct UsageError(String);

fn load(spec: &str) -> Result<CompiledSystem, UsageError> {
    resolve(spec)
        .and_then(|s| s.compile())
        .map_err(|e| UsageError(format!("{spec}: {e}")))
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn finish(report: &Report) -> bool {
    eprint!("{}", report.summary());
    report.passed()
}

fn run(cli: Cli) -> Result<bool, UsageError> {
    let rec = Recorder { timings: cli.timings };
    match cli.command {
        Command::Analyze { spec } => {
            let c = load(&spec)?;
            let report = Report::new(c.spec.name.clone(), rec.time(|| analyze_checks(&c)));
            emit(&report);
            Ok(finish(&report))
        }
        Command::Reduce { spec } => {
            let c = load(&spec)?;
            let report = Report::new(c.spec.name.clone(), rec.time(|| reduce_checks(&c)));
            emit(&report);
            Ok(finish(&report))
        }
        Command::Simulate { spec, sim, out } => {
            let c = load(&spec)?;
            let mut traj = None;
            let checks = rec.time(|| {
                let (t, checks) = simulate_checks(&c, &sim.options());
                traj = t;
                checks
            });
            if let Some(t) = &traj {
                let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", c.spec.name)));
                let file = File::create(&path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                t.write_csv(BufWriter::new(file)).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                eprintln!("trajectory written to {}", path.display());
            }
            let report = Report::new(c.spec.name.clone(), checks);
            emit(&report);
            Ok(finish(&report))
        }
        Command::Brst { spec, brst } => {
            let c = load(&spec)?;
            let report = Report::new(c.spec.name.clone(), rec.time(|| brst_checks(&c, &brst.options(cli.seed))));
            emit(&report);
            Ok(finish(&report))
        }
        Command::Spectrum { spec, spectrum } => {
            let c = load(&spec)?;
            let mut computed = None;
            let checks = rec.time(|| {
                let (s, checks) = spectrum_checks(&c, &spectrum.options());
                computed = s;
                checks
            });
            let report = Report::new(c.spec.name.clone(), checks);
            let ok = report.passed();
            eprint!("{}", report.summary());
            emit(&WithSpectrum { report, spectrum: computed });
            Ok(ok)
        }
        Command::Verify { spec, all_builtin, sim, brst, spectrum } => {
            let opts = VerifyOptions { simulate: sim.options(), brst: brst.options(cli.seed), spectrum: spectrum.options() };
            let names: Vec<String> = match spec {
                Some(s) => vec![s],
                None => BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
            };
            let systems = names.iter().map(|n| load(n)).collect::<Result<Vec<_>, _>>()?;
            let reports: Vec<Report> = systems.iter().map(|c| verify(c, &opts, rec)).collect();
            for r in &reports {
                eprint!("{}", r.summary());
            }
            if all_builtin {
                let set = ReportSet::new(reports);
                emit(&set);
                Ok(set.passed())
            } else {
                let report = reports.into_iter().next().expect("one system");
                emit(&report);
                Ok(report.passed())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
