//! One-dimensional fast summation engines.
//!
//! Three routes for t_m = Σ_n w_n f(|x_n - y_m|) on the line:
//!
//! * truncated Fourier summation for smooth counterparts, two
//!   non-equispaced transforms around a diagonal coefficient multiply,
//!   t = F_y (c ⊙ F_xᴴ w), costing O((N+M)·|C|) with the NDFT engine or
//!   O(N + M + |C| log |C|) with the NFFT engine;
//! * an exact O(N+M) cumulative-sum pass over sorted merged nodes for the
//!   negative distance kernel;
//! * the sum of both for the Laplacian, split as
//!   exp(-αs) = [exp(-αs) + αs] + [-αs], whose first part is differentiable
//!   and Fourier-friendly while the second is a negative distance kernel.

use crate::error::{Error, Result};
use crate::kernels::{negdist_coeff, FourierCoeffSet};
use crate::nufft::{ndft_adjoint, ndft_forward, Grid1D, NfftPlan};
use crate::specfun::CompensatedSum;

/// Which non-equispaced transform backs the Fourier fast summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Exact transform; right choice for small scattered coefficient sets.
    Ndft,
    /// Windowed fast transform for contiguous bands; `accuracy` bounds the
    /// transform error relative to the L1 norm of its input.
    Nfft { accuracy: f64 },
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Nfft { accuracy: 1e-8 }
    }
}

/// Affine map x ↦ τx + shift confining 1D data to [-T, T] with T < 1/4,
/// so every pairwise difference stays inside one period of the Fourier
/// representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaling {
    pub tau: f64,
    pub shift: f64,
    pub t_half: f64,
}

impl Rescaling {
    /// Map covering [c_min, c_max] onto [-T, T]: τ = 2T/(c_max - c_min),
    /// shift = -τ·c_min - T. A degenerate width maps the single value to 0
    /// with τ = 1.
    pub fn from_bounds(c_min: f64, c_max: f64, t_half: f64) -> Result<Self> {
        if !(t_half > 0.0 && t_half < 0.25) {
            return Err(Error::Domain(format!(
                "threshold T must be in (0, 0.25), got {t_half}"
            )));
        }
        if !(c_min.is_finite() && c_max.is_finite() && c_min <= c_max) {
            return Err(Error::Domain(format!("bad data bounds [{c_min}, {c_max}]")));
        }
        if c_max > c_min {
            let tau = 2.0 * t_half / (c_max - c_min);
            Ok(Self {
                tau,
                shift: -tau * c_min - t_half,
                t_half,
            })
        } else {
            Ok(Self {
                tau: 1.0,
                shift: -c_min,
                t_half,
            })
        }
    }

    /// Like [`Rescaling::from_bounds`] but with τ capped from above; the
    /// mapped data then occupies a sub-interval of [-T, T]. Used when the
    /// periodization error, not the data extent, dictates the scale.
    pub fn from_bounds_capped(c_min: f64, c_max: f64, t_half: f64, tau_cap: f64) -> Result<Self> {
        let base = Self::from_bounds(c_min, c_max, t_half)?;
        if !(tau_cap > 0.0) {
            return Err(Error::Domain(format!(
                "tau cap must be positive, got {tau_cap}"
            )));
        }
        if c_max > c_min && tau_cap < base.tau {
            let mid = 0.5 * (c_min + c_max);
            Ok(Self {
                tau: tau_cap,
                shift: -tau_cap * mid,
                t_half,
            })
        } else {
            Ok(base)
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.tau * x + self.shift
    }

    pub fn apply_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }
}

/// Rescale two 1D point sets into [-T, T] and return the map. Kernel
/// parameters must be rescaled consistently by the caller (σ̃ = τσ for the
/// Gaussian, α̃ = α/τ for exponential-type rates) so the rescaled sum equals
/// the original.
pub fn rescale(x: &[f64], y: &[f64], t_half: f64) -> Result<(Vec<f64>, Vec<f64>, Rescaling)> {
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for &v in x.iter().chain(y) {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite input value {v}")));
        }
        c_min = c_min.min(v);
        c_max = c_max.max(v);
    }
    if x.is_empty() && y.is_empty() {
        return Err(Error::Domain("cannot rescale empty data".into()));
    }
    let map = Rescaling::from_bounds(c_min, c_max, t_half)?;
    Ok((map.apply_all(x), map.apply_all(y), map))
}

fn check_rescaled(nodes: &[f64]) -> Result<()> {
    for &v in nodes {
        if !(-0.25..=0.25).contains(&v) {
            return Err(Error::Contract(format!(
                "node {v} outside [-1/4, 1/4]; inputs must be rescaled before Fourier summation"
            )));
        }
    }
    Ok(())
}

/// Truncated Fourier summation: t_m ≈ Σ_n w_n φ(x̃_n - ỹ_m) where φ is the
/// periodic profile represented by `coeffs`. Inputs must already be
/// rescaled; the error is the coefficient truncation error plus the engine
/// accuracy.
pub fn fourier_fastsum(
    x: &[f64],
    y: &[f64],
    weights: &[f64],
    coeffs: &FourierCoeffSet,
    engine: Engine,
) -> Result<Vec<f64>> {
    if weights.len() != x.len() {
        return Err(Error::Contract(format!(
            "weight count {} does not match source count {}",
            weights.len(),
            x.len()
        )));
    }
    if coeffs.is_empty() {
        return Err(Error::Contract("empty coefficient set".into()));
    }
    check_rescaled(x)?;
    check_rescaled(y)?;
    let gx = Grid1D::new(x.to_vec())?;
    let gy = Grid1D::new(y.to_vec())?;
    match engine {
        Engine::Ndft => {
            let mut spectrum = ndft_adjoint(&gx, weights, &coeffs.freqs)?;
            for (v, &c) in spectrum.values.iter_mut().zip(&coeffs.coeffs) {
                *v *= c;
            }
            ndft_forward(&gy, &spectrum, &coeffs.freqs)
        }
        Engine::Nfft { accuracy } => {
            if !coeffs.is_contiguous_band() {
                return Err(Error::Contract(
                    "NFFT engine requires a contiguous symmetric frequency band".into(),
                ));
            }
            let k_max = *coeffs.freqs.last().unwrap();
            let plan_x = NfftPlan::new(&gx, k_max, accuracy)?;
            let plan_y = NfftPlan::new(&gy, k_max, accuracy)?;
            let mut spectrum = plan_x.adjoint(weights)?;
            for (v, &c) in spectrum.values.iter_mut().zip(&coeffs.coeffs) {
                *v *= c;
            }
            plan_y.forward(&spectrum)
        }
    }
}

/// Exact negative-distance sums over an already sorted merged sequence:
/// t_m = -Σ_n c_d v_n |z_n - z_m| in O(N+M) via two compensated cumulative
/// sums.
pub fn negdist_fastsum_sorted(z: &[f64], v: &[f64], c_d: f64) -> Result<Vec<f64>> {
    if z.len() != v.len() {
        return Err(Error::Contract("value/weight length mismatch".into()));
    }
    if z.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Contract("merged sequence must be sorted".into()));
    }
    let len = z.len();
    if len == 0 {
        return Ok(Vec::new());
    }
    // a_i = Σ_{j<=i} c_d v_j
    let mut a = Vec::with_capacity(len);
    let mut acc = CompensatedSum::new();
    for &vi in v {
        acc.add(c_d * vi);
        a.push(acc.value());
    }
    // b_j = Σ_{i<=j} a_{i-1} (z_i - z_{i-1}), b_0 = 0
    let mut b = Vec::with_capacity(len);
    let mut acc = CompensatedSum::new();
    b.push(0.0);
    for i in 1..len {
        acc.add(a[i - 1] * (z[i] - z[i - 1]));
        b.push(acc.value());
    }
    let b_last = b[len - 1];
    let a_last = a[len - 1];
    let z_last = z[len - 1];
    Ok((0..len)
        .map(|m| b_last - 2.0 * b[m] - a_last * (z_last - z[m]))
        .collect())
}

/// Exact negative-distance kernel sums t_m = -Σ_n c_d w_n |x_n - y_m| for
/// the y block: merge, stable sort, run the cumulative pass, undo the
/// permutation. c_d = √π Γ((d+1)/2)/Γ(d/2) is the slicing constant of the
/// d-dimensional kernel.
pub fn negdist_fastsum(x: &[f64], y: &[f64], w: &[f64], dim: usize) -> Result<Vec<f64>> {
    if w.len() != x.len() {
        return Err(Error::Contract(format!(
            "weight count {} does not match source count {}",
            w.len(),
            x.len()
        )));
    }
    for &v in x.iter().chain(y) {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite input value {v}")));
        }
    }
    let c_d = negdist_coeff(dim)?;
    let m = y.len();
    let total = m + x.len();
    let mut z = Vec::with_capacity(total);
    z.extend_from_slice(y);
    z.extend_from_slice(x);
    let mut v = vec![0.0; m];
    v.extend_from_slice(w);

    // stable argsort; ties keep input order and contribute nothing anyway
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| z[i].total_cmp(&z[j]));
    let z_sorted: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let v_sorted: Vec<f64> = order.iter().map(|&i| v[i]).collect();

    let t_sorted = negdist_fastsum_sorted(&z_sorted, &v_sorted, c_d)?;
    let mut t = vec![0.0; total];
    for (rank, &orig) in order.iter().enumerate() {
        t[orig] = t_sorted[rank];
    }
    t.truncate(m);
    Ok(t)
}

/// Laplacian kernel sums by decomposition: the smooth part
/// k₁(s) = exp(-α̃s) + α̃ c_d s goes through the Fourier path with
/// `coeffs_smooth` (built by [`crate::kernels::numeric_fourier_coeffs`] for
/// the same map the set carries), the non-smooth part k₂(s) = -α̃ c_d s
/// through the exact sorting pass on the raw nodes.
pub fn laplace_fastsum(
    x: &[f64],
    y: &[f64],
    w: &[f64],
    alpha: f64,
    dim: usize,
    coeffs_smooth: &FourierCoeffSet,
    engine: Engine,
) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let map = Rescaling {
        tau: coeffs_smooth.scale,
        shift: coeffs_smooth.shift,
        t_half: 0.25,
    };
    let xt = map.apply_all(x);
    let yt = map.apply_all(y);
    let smooth = fourier_fastsum(&xt, &yt, w, coeffs_smooth, engine)?;
    // distance part of the decomposition: -α c_d Σ w |x - y| on raw values,
    // which equals α · negdist_fastsum since the latter carries the -c_d
    let distance = negdist_fastsum(x, y, w, dim)?;
    Ok(smooth
        .iter()
        .zip(&distance)
        .map(|(s, t)| s + alpha * t)
        .collect())
}
