//! Reference implementations the fast path is judged against: the exact
//! O(N·M) summation (the ground-truth oracle) and the two random Fourier
//! feature estimators.

use crate::error::{Error, Result};
use crate::kernels::{basis_evaluator, KernelFamily, KernelSpec};
use crate::points::{dist_sq, dot, PointSet};
use crate::specfun::CompensatedSum;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Exact kernel sums s_m = Σ_n w_n F(‖x_n − y_m‖) by a blocked double loop
/// with compensated accumulation. Quadratic cost; this is the oracle every
/// approximation is measured against.
pub fn exact_sum(spec: &KernelSpec, x: &PointSet, y: &PointSet, w: &[f64]) -> Result<Vec<f64>> {
    if x.dim() != spec.dim || y.dim() != spec.dim {
        return Err(Error::Contract(format!(
            "point dimension ({}, {}) does not match kernel dimension {}",
            x.dim(),
            y.dim(),
            spec.dim
        )));
    }
    if w.len() != x.len() {
        return Err(Error::Contract(format!(
            "weight count {} does not match source count {}",
            w.len(),
            x.len()
        )));
    }
    let kernel = basis_evaluator(spec)?;
    let mut out = vec![0.0f64; y.len()];
    // block over targets so each source row is reused from cache across the
    // whole block
    const BLOCK: usize = 32;
    out.par_chunks_mut(BLOCK)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let m0 = chunk_idx * BLOCK;
            let mut acc = vec![CompensatedSum::new(); chunk.len()];
            for (xr, &wn) in x.rows().zip(w) {
                for (j, a) in acc.iter_mut().enumerate() {
                    let d2 = dist_sq(xr, y.row(m0 + j));
                    a.add(wn * kernel(d2.sqrt()));
                }
            }
            for (slot, a) in chunk.iter_mut().zip(&acc) {
                *slot = a.value();
            }
        });
    Ok(out)
}

/// Per-summand error metric ‖s_true − s_approx‖₁ / (M Σ_n |w_n|).
pub fn per_summand_error(truth: &[f64], approx: &[f64], w: &[f64]) -> f64 {
    let w_l1: f64 = w.iter().map(|v| v.abs()).sum();
    let diff: f64 = truth.iter().zip(approx).map(|(a, b)| (a - b).abs()).sum();
    diff / (truth.len() as f64 * w_l1)
}

/// Which random-feature estimator a spectral sample feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RffVariant {
    /// Variant 1: features cos(2π⟨·, v⟩ + b) with random phases, estimator
    /// scaled by 2/D.
    Phased,
    /// Variant 2: paired cos/sin features without phases, scaled by 1/D.
    CosSin,
}

/// D spectral frequencies drawn from the kernel's spectral measure, plus
/// phases when the phased variant asked for them.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    freqs: Vec<f64>,
    dim: usize,
    count: usize,
    phases: Option<Vec<f64>>,
    pub seed: u64,
}

impl SpectralSample {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frequency(&self, j: usize) -> &[f64] {
        &self.freqs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn variant(&self) -> RffVariant {
        if self.phases.is_some() {
            RffVariant::Phased
        } else {
            RffVariant::CosSin
        }
    }
}

/// Draw D frequencies from the spectral measure μ of a positive definite
/// kernel, in the convention F(‖z‖) = E_v[exp(2πi⟨z, v⟩)]:
///
/// * Gaussian: v = g/(2πσ), g standard normal;
/// * Laplacian: v = (α/2π) g/|z₀| (multivariate Cauchy);
/// * Matérn ν = p+1/2: v = g/(2πβ) · √(2ν/χ²_{2ν}) (multivariate Student-t,
///   2ν = 2p+1 degrees of freedom).
///
/// The scales are pinned by the Monte-Carlo moment tests below, not taken
/// on faith. Conditionally positive definite kernels (negative distance,
/// thin-plate) have no spectral measure and are rejected.
pub fn sample_spectral(
    spec: &KernelSpec,
    count: usize,
    seed: u64,
    variant: RffVariant,
) -> Result<SpectralSample> {
    if count == 0 {
        return Err(Error::Domain("feature count must be >= 1".into()));
    }
    // (t-distribution parameters per family)
    let (rate, chi_df) = match spec.family {
        KernelFamily::Gaussian { sigma } => (1.0 / (2.0 * PI * sigma), 0u32),
        KernelFamily::Laplacian { alpha } => (alpha / (2.0 * PI), 1u32),
        KernelFamily::Matern { p, beta } => (1.0 / (2.0 * PI * beta), 2 * p + 1),
        KernelFamily::NegativeDistance
        | KernelFamily::Riesz { .. }
        | KernelFamily::ThinPlateSpline => {
            return Err(Error::Unsupported(format!(
                "random Fourier features require a positive definite kernel; {} is not",
                spec.family_tag()
            )))
        }
    };
    let dim = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX); // keep clear of the direction substreams
    let mut freqs = Vec::with_capacity(count * dim);
    let mut phases = Vec::with_capacity(count);
    for _ in 0..count {
        let scale = if chi_df == 0 {
            rate
        } else {
            // multivariate t: g · √(df / χ²_df); χ² as a sum of squares
            let chi2: f64 = (0..chi_df)
                .map(|_| {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    z * z
                })
                .sum();
            rate * (chi_df as f64 / chi2).sqrt()
        };
        for _ in 0..dim {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            freqs.push(scale * g);
        }
        phases.push(rng.random::<f64>() * 2.0 * PI);
    }
    Ok(SpectralSample {
        freqs,
        dim,
        count,
        phases: match variant {
            RffVariant::Phased => Some(phases),
            RffVariant::CosSin => None,
        },
        seed,
    })
}

/// Random-feature kernel sums in O(D·d·(N+M)).
///
/// Variant 1: s_m ≈ (2/D) Σ_p cos(2π⟨y_m,v_p⟩+b_p) Σ_n w_n cos(2π⟨x_n,v_p⟩+b_p).
/// Variant 2: the cos/cos + sin/sin form scaled by 1/D. Both carry the 1/D
/// Monte-Carlo normalization that makes the estimators consistent.
pub fn rff_sum(
    sample: &SpectralSample,
    variant: RffVariant,
    x: &PointSet,
    y: &PointSet,
    w: &[f64],
) -> Result<Vec<f64>> {
    if sample.variant() != variant {
        return Err(Error::Contract(
            "spectral sample was drawn for the other estimator variant".into(),
        ));
    }
    if x.dim() != sample.dim || y.dim() != sample.dim {
        return Err(Error::Contract(format!(
            "point dimension ({}, {}) does not match sample dimension {}",
            x.dim(),
            y.dim(),
            sample.dim
        )));
    }
    if w.len() != x.len() {
        return Err(Error::Contract(format!(
            "weight count {} does not match source count {}",
            w.len(),
            x.len()
        )));
    }
    let d_count = sample.count;
    match variant {
        RffVariant::Phased => {
            let phases = sample.phases.as_ref().expect("checked above");
            // stage 1: source-side feature sums A_p
            let a: Vec<f64> = (0..d_count)
                .into_par_iter()
                .map(|p| {
                    let v = sample.frequency(p);
                    let b = phases[p];
                    let mut acc = CompensatedSum::new();
                    for (xr, &wn) in x.rows().zip(w) {
                        acc.add(wn * (2.0 * PI * dot(xr, v) + b).cos());
                    }
                    acc.value()
                })
                .collect();
            // stage 2: target-side features
            let scale = 2.0 / d_count as f64;
            Ok((0..y.len())
                .into_par_iter()
                .map(|m| {
                    let yr = y.row(m);
                    let mut acc = CompensatedSum::new();
                    for p in 0..d_count {
                        let v = sample.frequency(p);
                        acc.add((2.0 * PI * dot(yr, v) + phases[p]).cos() * a[p]);
                    }
                    scale * acc.value()
                })
                .collect())
        }
        RffVariant::CosSin => {
            let ab: Vec<(f64, f64)> = (0..d_count)
                .into_par_iter()
                .map(|p| {
                    let v = sample.frequency(p);
                    let mut ac = CompensatedSum::new();
                    let mut as_ = CompensatedSum::new();
                    for (xr, &wn) in x.rows().zip(w) {
                        let (s, c) = (2.0 * PI * dot(xr, v)).sin_cos();
                        ac.add(wn * c);
                        as_.add(wn * s);
                    }
                    (ac.value(), as_.value())
                })
                .collect();
            let scale = 1.0 / d_count as f64;
            Ok((0..y.len())
                .into_par_iter()
                .map(|m| {
                    let yr = y.row(m);
                    let mut acc = CompensatedSum::new();
                    for (p, &(a_cos, a_sin)) in ab.iter().enumerate() {
                        let v = sample.frequency(p);
                        let (s, c) = (2.0 * PI * dot(yr, v)).sin_cos();
                        acc.add(c * a_cos + s * a_sin);
                    }
                    scale * acc.value()
                })
                .collect())
        }
    }
}
