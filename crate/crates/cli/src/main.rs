//! Benchmark CLI for the sliced fast kernel summation library.
//!
//! Subcommands reproduce the desk-scale experiment protocol: `gen-data`
//! writes a reproducible sample, `run` executes one method and reports the
//! per-summand error against the exact oracle, `sweep` walks a parameter
//! grid into a CSV, and `compare` puts slicing and the two random-feature
//! estimators side by side on one configuration.

use clap::{Args, Parser, Subcommand};
use kernelsum::bench::{
    self, gnuplot_script, BenchRecord, ExperimentConfig, Method, SweepParam, CSV_HEADER,
};
use kernelsum::slicer::SliceOptions;
use kernelsum::{KernelSpec, Result};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "kernelsum",
    version,
    about = "Fast sliced kernel summation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Kernel family: gaussian | laplacian | matern | negdist
    #[arg(long, default_value = "gaussian")]
    kernel: String,
    /// Gaussian bandwidth σ
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Laplacian rate α
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Matérn length scale β
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Matérn smoothness index p (ν = p + 1/2)
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Ambient dimension d
    #[arg(long, default_value_t = 50)]
    d: usize,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec> {
        match self.kernel.as_str() {
            "gaussian" => KernelSpec::gaussian(self.sigma, self.d),
            "laplacian" => KernelSpec::laplacian(self.alpha, self.d),
            "matern" => KernelSpec::matern(self.p, self.beta, self.d),
            "negdist" => KernelSpec::negative_distance(self.d),
            other => Err(kernelsum::Error::Config(format!(
                "unknown kernel '{other}' (expected gaussian, laplacian, matern or negdist)"
            ))),
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Source point count N
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Target point count M
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Projections P for the slicing method
    #[arg(long = "proj", default_value_t = 256)]
    proj: usize,
    /// Features D for the random-feature methods (defaults to P)
    #[arg(long = "features")]
    features: Option<usize>,
    /// Method: exact | slice | rff1 | rff2
    #[arg(long, default_value = "slice")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions; directions/features are re-drawn, the data is not
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Relative Fourier coefficient threshold ε
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Override the automatic Gaussian K_max
    #[arg(long)]
    kmax: Option<i64>,
    /// Rescaling half-width T (must be < 0.25)
    #[arg(long = "threshold", default_value_t = 0.2)]
    t_half: f64,
    /// Direction batch size B
    #[arg(long)]
    batch: Option<usize>,
    /// Largest N·M for which the exact error oracle runs
    #[arg(long = "oracle-budget", default_value_t = 100_000_000)]
    oracle_budget: u128,
    /// Timing-only run: explicitly forgo the error oracle
    #[arg(long, default_value_t = false)]
    skip_oracle: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let method = Method::parse(&self.method)?;
        let p_or_d = match method {
            Method::Slice | Method::Exact => self.proj,
            Method::Rff1 | Method::Rff2 => self.features.unwrap_or(self.proj),
        };
        let mut config = ExperimentConfig::new(self.kernel.spec()?, self.n, self.m, p_or_d, method);
        config.seed = self.seed;
        config.repetitions = self.reps;
        config.oracle_budget = self.oracle_budget;
        config.skip_oracle = self.skip_oracle;
        config.batch = self.batch;
        config.slice_opts = SliceOptions {
            t_half: self.t_half,
            eps_rel: self.eps,
            k_max: self.kmax,
            ..SliceOptions::default()
        };
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the experiment sample (points from N(0, 0.1² I), uniform
    /// weights) and write it as CSV
    GenData {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one method on one configuration and report a CSV row
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Append the row to this CSV file (header written when new)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write one CSV row per grid point
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Swept axis: n | proj | dim
        #[arg(long = "sweep-param")]
        param: String,
        /// Comma-separated grid values, e.g. 64,256,1024,4096
        #[arg(long = "sweep-values")]
        values: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write a gnuplot script next to the CSV
        #[arg(long, default_value_t = false)]
        gnuplot: bool,
    },
    /// Slicing versus both RFF variants on one configuration
    Compare {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(record: &BenchRecord, out: &mut Option<File>, printed_header: &mut bool) -> Result<()> {
    if !*printed_header {
        println!("{CSV_HEADER}");
        *printed_header = true;
    }
    println!("{}", record.csv_row());
    if let Some(f) = out {
        writeln!(f, "{}", record.csv_row())?;
    }
    Ok(())
}

fn open_out(path: &Option<PathBuf>) -> Result<Option<File>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let new = !p.exists();
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)?;
            if new {
                writeln!(f, "{CSV_HEADER}")?;
            }
            Ok(Some(f))
        }
    }
}

fn main() {
    if let Some(threads) = bench::thread_cap_from_env() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool already initialized");
    }
    if let Err(e) = dispatch(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { n, m, d, seed, out } => {
            let (x, y, w) = bench::gen_data(n, m, d, seed)?;
            let mut sink: Box<dyn Write> = match out {
                Some(p) => Box::new(File::create(p)?),
                None => Box::new(std::io::stdout().lock()),
            };
            writeln!(sink, "set,index,values")?;
            for (tag, pts) in [("x", &x), ("y", &y)] {
                for (i, row) in pts.rows().enumerate() {
                    let vals: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                    writeln!(sink, "{tag},{i},{}", vals.join(","))?;
                }
            }
            for (i, v) in w.iter().enumerate() {
                writeln!(sink, "w,{i},{v:.16e}")?;
            }
            Ok(())
        }
        Command::Run { args, out } => {
            let config = args.config()?;
            let record = bench::run(&config)?;
            let mut out = open_out(&out)?;
            emit(&record, &mut out, &mut false)
        }
        Command::Sweep {
            args,
            param,
            values,
            out,
            gnuplot,
        } => {
            let config = args.config()?;
            let param = SweepParam::parse(&param)?;
            let values: Vec<u64> = values
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| kernelsum::Error::Config(format!("bad sweep value '{s}'")))
                })
                .collect::<Result<_>>()?;
            let file = File::create(&out)?;
            bench::sweep(&config, param, &values, file)?;
            eprintln!("wrote {} rows to {}", values.len(), out.display());
            if gnuplot {
                let script = out.with_extension("gp");
                std::fs::write(&script, gnuplot_script(&out.display().to_string(), param))?;
                eprintln!("wrote gnuplot script {}", script.display());
            }
            Ok(())
        }
        Command::Compare { args, out } => {
            let base = args.config()?;
            let mut out = open_out(&out)?;
            let mut printed = false;
            for method in [Method::Slice, Method::Rff1, Method::Rff2] {
                let mut config = base.clone();
                config.method = method;
                if matches!(method, Method::Rff1 | Method::Rff2) {
                    config.p_or_d = args.features.unwrap_or(args.proj);
                } else {
                    config.p_or_d = args.proj;
                }
                match bench::run(&config) {
                    Ok(record) => emit(&record, &mut out, &mut printed)?,
                    Err(e) => eprintln!("{} failed: {e}", method.as_str()),
                }
            }
            Ok(())
        }
    }
}
