//! Benchmark harness: reproducible data generation, method execution,
//! per-summand error metrics and CSV output.
//!
//! Reproducibility contract: every random quantity is drawn from ChaCha8
//! streams derived from the experiment seed with splitmix64 tags, so a
//! config plus seed pins the data, the directions and the features on any
//! platform. CSV rows are byte-identical across runs except for the two
//! timing columns.

use crate::baselines::{exact_sum, per_summand_error, rff_sum, sample_spectral, RffVariant};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;
use crate::slicer::{sliced_kernel_sum, SliceBatchConfig, SliceOptions};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::Instant;

/// Summation method under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Slice,
    Rff1,
    Rff2,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Slice => "slice",
            Method::Rff1 => "rff1",
            Method::Rff2 => "rff2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "slice" => Ok(Method::Slice),
            "rff1" => Ok(Method::Rff1),
            "rff2" => Ok(Method::Rff2),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// One experiment: kernel, sizes, method, seeding and oracle policy.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub n: usize,
    pub m: usize,
    /// Projections P (slice) or features D (rff); ignored for exact.
    pub p_or_d: usize,
    pub method: Method,
    pub seed: u64,
    /// Repetitions re-draw directions/features, never the data.
    pub repetitions: usize,
    /// Maximum N·M for which the exact oracle is computed.
    pub oracle_budget: u128,
    /// Explicitly forgo the error oracle (timing-only run).
    pub skip_oracle: bool,
    pub batch: Option<usize>,
    pub slice_opts: SliceOptions,
}

impl ExperimentConfig {
    pub fn new(kernel: KernelSpec, n: usize, m: usize, p_or_d: usize, method: Method) -> Self {
        Self {
            kernel,
            n,
            m,
            p_or_d,
            method,
            seed: 0,
            repetitions: 1,
            oracle_budget: 100_000_000,
            skip_oracle: false,
            batch: None,
            slice_opts: SliceOptions::default(),
        }
    }
}

/// One result row.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub method: Method,
    pub kernel: KernelSpec,
    pub n: usize,
    pub m: usize,
    pub p_or_d: usize,
    pub seed: u64,
    pub repetitions: usize,
    /// Mean per-summand error over repetitions; None for timing-only runs.
    pub err_per_summand: Option<f64>,
    /// Sample standard deviation over repetitions (0 for a single rep).
    pub err_std: Option<f64>,
    pub t_setup_s: f64,
    pub t_sum_s: f64,
}

pub const CSV_HEADER: &str =
    "method,kernel,params,N,M,d,P_or_D,seed,rep,err_per_summand,err_std,t_setup_s,t_sum_s";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".to_string(),
    }
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.16e},{:.16e}",
            self.method.as_str(),
            self.kernel.family_tag(),
            self.kernel.param_string(),
            self.n,
            self.m,
            self.kernel.dim,
            self.p_or_d,
            self.seed,
            self.repetitions,
            fmt_opt(self.err_per_summand),
            fmt_opt(self.err_std),
            self.t_setup_s,
            self.t_sum_s,
        )
    }
}

/// splitmix64; used to derive independent sub-seeds from (seed, tag).
fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TAG_X: u64 = 1;
const TAG_Y: u64 = 2;
const TAG_W: u64 = 3;
const TAG_METHOD: u64 = 4;

/// Experiment data: N source and M target points iid from N(0, 0.1² I),
/// weights uniform on [0, 1). Deterministic per seed: the points come from
/// ChaCha8 streams keyed by splitmix64-derived sub-seeds, with coordinates
/// drawn in row-major order.
pub fn gen_data(
    n: usize,
    m: usize,
    dim: usize,
    seed: u64,
) -> Result<(PointSet, PointSet, Vec<f64>)> {
    if n == 0 || m == 0 || dim == 0 {
        return Err(Error::Domain("sizes must be positive".into()));
    }
    let normal_cloud = |count: usize, tag: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag));
        (0..count * dim)
            .map(|_| 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    };
    let x = PointSet::new(normal_cloud(n, TAG_X), n, dim)?;
    let y = PointSet::new(normal_cloud(m, TAG_Y), m, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_W));
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    Ok((x, y, w))
}

/// Execute one experiment: run the method `repetitions` times (re-drawing
/// directions/features each time), compare against the exact oracle when
/// the budget allows, and aggregate into one record.
///
/// Requesting an error report beyond the oracle budget is an explicit
/// error, never a silent skip; set `skip_oracle` for timing-only runs.
pub fn run(config: &ExperimentConfig) -> Result<BenchRecord> {
    if config.repetitions == 0 {
        return Err(Error::Config("repetitions must be >= 1".into()));
    }
    let (x, y, w) = gen_data(config.n, config.m, config.kernel.dim, config.seed)?;

    let want_oracle = config.method != Method::Exact && !config.skip_oracle;
    let pairs = config.n as u128 * config.m as u128;
    if want_oracle && pairs > config.oracle_budget {
        return Err(Error::OracleBudget {
            pairs,
            budget: config.oracle_budget,
        });
    }
    let truth = if want_oracle {
        Some(exact_sum(&config.kernel, &x, &y, &w)?)
    } else {
        None
    };

    let mut errs = Vec::with_capacity(config.repetitions);
    let mut t_setup_total = 0.0;
    let mut t_sum_total = 0.0;
    for rep in 0..config.repetitions {
        let rep_seed = derive_seed(config.seed, TAG_METHOD + rep as u64);
        let (values, t_setup, t_sum) = match config.method {
            Method::Exact => {
                let t0 = Instant::now();
                let values = exact_sum(&config.kernel, &x, &y, &w)?;
                (values, 0.0, t0.elapsed().as_secs_f64())
            }
            Method::Slice => {
                let batch = match config.batch {
                    Some(b) => SliceBatchConfig::new(b)?,
                    None => SliceBatchConfig::for_directions(config.p_or_d),
                };
                let result = sliced_kernel_sum(
                    &config.kernel,
                    &x,
                    &y,
                    &w,
                    config.p_or_d,
                    rep_seed,
                    batch,
                    &config.slice_opts,
                )?;
                (result.values, result.t_setup_s, result.t_sum_s)
            }
            Method::Rff1 | Method::Rff2 => {
                let variant = if config.method == Method::Rff1 {
                    RffVariant::Phased
                } else {
                    RffVariant::CosSin
                };
                let t0 = Instant::now();
                let sample = sample_spectral(&config.kernel, config.p_or_d, rep_seed, variant)?;
                let t_setup = t0.elapsed().as_secs_f64();
                let t1 = Instant::now();
                let values = rff_sum(&sample, variant, &x, &y, &w)?;
                (values, t_setup, t1.elapsed().as_secs_f64())
            }
        };
        t_setup_total += t_setup;
        t_sum_total += t_sum;
        if config.method == Method::Exact {
            errs.push(0.0);
        } else if let Some(truth) = &truth {
            errs.push(per_summand_error(truth, &values, &w));
        }
    }

    let (err_mean, err_std) = if errs.is_empty() {
        (None, None)
    } else {
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let std = if errs.len() > 1 {
            (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errs.len() as f64 - 1.0))
                .sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(std))
    };

    Ok(BenchRecord {
        method: config.method,
        kernel: config.kernel,
        n: config.n,
        m: config.m,
        p_or_d: config.p_or_d,
        seed: config.seed,
        repetitions: config.repetitions,
        err_per_summand: err_mean,
        err_std,
        t_setup_s: t_setup_total / config.repetitions as f64,
        t_sum_s: t_sum_total / config.repetitions as f64,
    })
}

/// Which axis a sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    ProjOrFeatures,
    Dim,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepParam::N),
            "p" | "d-features" | "features" | "proj" => Ok(SweepParam::ProjOrFeatures),
            "dim" => Ok(SweepParam::Dim),
            other => Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (expected n, proj or dim)"
            ))),
        }
    }
}

/// Run the base config once per grid value, writing one CSV row each.
/// Failed grid points are reported on the row (NaN error columns) and the
/// sweep continues.
pub fn sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[u64],
    mut out: impl Write,
) -> Result<Vec<BenchRecord>> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut records = Vec::new();
    for &v in values {
        let mut config = base.clone();
        match param {
            SweepParam::N => {
                config.n = v as usize;
                config.m = v as usize;
            }
            SweepParam::ProjOrFeatures => config.p_or_d = v as usize,
            SweepParam::Dim => {
                config.kernel = KernelSpec::new(config.kernel.family, v as usize)?;
            }
        }
        match run(&config) {
            Ok(record) => {
                writeln!(out, "{}", record.csv_row())?;
                records.push(record);
            }
            Err(e) => {
                eprintln!("sweep point {param:?} = {v} failed: {e}");
                let record = BenchRecord {
                    method: config.method,
                    kernel: config.kernel,
                    n: config.n,
                    m: config.m,
                    p_or_d: config.p_or_d,
                    seed: config.seed,
                    repetitions: config.repetitions,
                    err_per_summand: None,
                    err_std: None,
                    t_setup_s: f64::NAN,
                    t_sum_s: f64::NAN,
                };
                writeln!(out, "{}", record.csv_row())?;
            }
        }
    }
    Ok(records)
}

/// gnuplot script plotting a sweep CSV (error and run time against the
/// swept column) for quick log-log inspection.
pub fn gnuplot_script(csv_path: &str, param: SweepParam) -> String {
    let (x_col, x_label) = match param {
        SweepParam::N => (4, "N"),
        SweepParam::ProjOrFeatures => (7, "P or D"),
        SweepParam::Dim => (6, "d"),
    };
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel '{x_label}'\n\
         set key left bottom\n\
         set term pngcairo size 900,400\n\
         set output 'sweep.png'\n\
         set multiplot layout 1,2\n\
         set ylabel 'per-summand error'\n\
         plot '{csv_path}' using {x_col}:10 skip 1 with linespoints title 'error'\n\
         set ylabel 'run time [s]'\n\
         plot '{csv_path}' using {x_col}:($12+$13) skip 1 with linespoints title 'time'\n\
         unset multiplot\n"
    )
}

/// Least-squares slope of log(err) against log(param); the Monte-Carlo rate
/// check fits this to -1/2.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Worker-thread cap from the KERNELSUM_THREADS environment variable.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var("KERNELSUM_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
}
