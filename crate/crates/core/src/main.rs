use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use axisym::config::{QuadConfig, SimConfig};
use axisym::diagnostics::{fit_exponent, DiagnosticsRecord};
use axisym::dynamics::{self, RunSink};
use axisym::field::Reduction;
use axisym::kernel::Convention;
use axisym::particles::Snapshot;
use axisym::series::{Series, SeriesWriter};
use axisym::verify::{self, IdentityTolerances};
use axisym::{Error, Result};

#[derive(Parser)]
#[command(name = "axisym", version, about = "Vortex-particle simulator for axisymmetric Euler flow without swirl")]
struct Cli {
    /// Worker threads for field sums (default: all cores).
    #[arg(long, global = true, env = "AXISYM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured scenario and write series.csv, snapshots and the resolved config.
    Run(RunArgs),
    /// Check the kernel against quadrature, asymptotes and the Legendre relation.
    VerifyKernel {
        /// Evaluate the kernel with the modulus passed where the parameter belongs.
        #[arg(long, hide = true)]
        perturb_convention: bool,
    },
    /// Evaluate both sides of every moment and mass identity.
    VerifyIdentities(IdentityArgs),
    /// Fit a log-log slope to one column of a series.
    Fit(FitArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed-order reductions, bit-reproducible for any thread count.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["snapshot", "config"]))]
struct IdentityArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Seed the configured scenario and check it at its initial time.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a tolerance: dp2, dz, mass, mass_z, p2_line, z_line.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct FitArgs {
    /// series.csv written by `run`.
    series: PathBuf,
    /// Column name, e.g. P2 or omega_sup.
    column: String,
    #[arg(long, default_value_t = 2.0)]
    from: f64,
    #[arg(long, default_value_t = 10.0)]
    to: f64,
}

struct DirSink {
    dir: PathBuf,
    series: SeriesWriter<BufWriter<File>>,
    last: Option<DiagnosticsRecord>,
}

impl RunSink for DirSink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.series.write(record)?;
        self.last = Some(record.clone());
        Ok(())
    }

    fn snapshot(&mut self, step: usize, snapshot: &Snapshot) -> Result<()> {
        snapshot.save(&self.dir.join(format!("snap_{step:06}.txt")))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut config = SimConfig::load(&args.config)?;
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    config.deterministic |= args.deterministic;
    let dir = config.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    write_file(&dir.join("config.resolved.json"), &config.resolved().to_json_pretty())?;
    let series_path = dir.join("series.csv");
    let file = File::create(&series_path).map_err(|e| Error::Io {
        path: series_path.clone(),
        source: e,
    })?;
    let mut sink = DirSink {
        dir: dir.clone(),
        series: SeriesWriter::new(BufWriter::new(file), &dynamics::record_spec(&config))?,
        last: None,
    };
    let summary = dynamics::run(&config, &mut sink)?;
    println!(
        "{} particles, {} steps, {} records -> {}",
        summary.final_state.system.len(),
        summary.steps,
        summary.records,
        series_path.display()
    );
    if let Some(last) = &sink.last {
        if !last.flags.is_empty() {
            println!("last record flags: {}", last.flags.join(";"));
        }
    }
    Ok(match summary.aborted {
        Some(why) => {
            eprintln!("run aborted at t = {}: {why}", summary.final_state.time);
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    })
}

fn cmd_verify_kernel(perturb: bool) -> Result<ExitCode> {
    let convention = if perturb {
        Convention::SwappedModulus
    } else {
        Convention::Parameter
    };
    let report = verify::verify_kernel(convention)?;
    print!("{report}");
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_verify_identities(args: IdentityArgs) -> Result<ExitCode> {
    let mut tol = IdentityTolerances::default();
    for t in &args.tol {
        tol.apply(t)?;
    }
    let (system, quad, deterministic) = match (&args.snapshot, &args.config) {
        (Some(path), _) => (Snapshot::load(path)?.system, QuadConfig::default(), false),
        (None, Some(path)) => {
            let config = SimConfig::load(path)?;
            (dynamics::seed(&config)?.system, config.quadrature, config.deterministic)
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let reduction = if args.deterministic || deterministic {
        Reduction::Deterministic
    } else {
        Reduction::Fast
    };
    let (report, _) = verify::verify_identities(&system, &quad, &tol, reduction)?;
    println!("{} particles, delta = {}", system.len(), system.delta());
    print!("{report}");
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let series = Series::load(&args.series)?;
    let data = series.column(&args.column)?;
    let fit = fit_exponent(&data, (args.from, args.to))?;
    println!(
        "{}: slope {:.6} over t in [{}, {}] ({} samples, rms log residual {:.3e})",
        args.column, fit.slope, args.from, args.to, fit.samples, fit.residual
    );
    if args.column == "P2" {
        let times: Vec<(f64, f64)> = data
            .iter()
            .filter(|(t, _)| *t > 1.0)
            .map(|&(t, _)| (t, t / t.ln()))
            .collect();
        let lower = fit_exponent(&times, (args.from, args.to))
            .map(|f| format!("{:.4}", f.slope))
            .unwrap_or_else(|_| "n/a".into());
        println!("reference bracket: t/log t slope {lower} (lower trend), t^2 slope 2 (upper bound)");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::VerifyKernel { perturb_convention } => cmd_verify_kernel(perturb_convention),
        Command::VerifyIdentities(a) => cmd_verify_identities(a),
        Command::Fit(a) => cmd_fit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
