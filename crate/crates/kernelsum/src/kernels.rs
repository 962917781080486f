//! Kernel catalog: radial basis functions F, their one-dimensional sliced
//! counterparts f, the sphere-average transform connecting them, and Fourier
//! coefficient construction for the 1D fast summation.
//!
//! For a radial kernel K(x, y) = F(‖x−y‖) on R^d, the sliced representation
//! K(x, y) = E_ξ[f(|⟨ξ, x⟩ − ⟨ξ, y⟩|)] holds with F = S_d(f), where
//!
//! S_d(f)(s) = 2Γ(d/2)/(√π Γ((d−1)/2)) ∫₀¹ f(ts) (1−t²)^((d−3)/2) dt,
//!
//! a generalized Riemann–Liouville fractional integral. For analytic F with
//! globally convergent Taylor series Σ aₙ xⁿ the counterpart is the series
//! Σ bₙ xⁿ with bₙ = √π Γ((n+d)/2) / (Γ(d/2) Γ((n+1)/2)) · aₙ, which is what
//! [`series_transform`] computes and what the closed forms below implement
//! per kernel family.

use crate::error::{Error, Result};
use crate::specfun::{
    self, gamma_ratio, harmonic, hyp1f1_neg, hyp1f2, log_gamma, CompensatedSum, SeriesTolerance,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Kernel family with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// F(x) = exp(-x²/(2σ²))
    Gaussian { sigma: f64 },
    /// F(x) = exp(-αx)
    Laplacian { alpha: f64 },
    /// Matérn kernel with half-integer smoothness ν = p + 1/2 and length β.
    Matern { p: u32, beta: f64 },
    /// F(x) = -x (energy kernel)
    NegativeDistance,
    /// F(x) = -x^r for r in (0, 2)
    Riesz { r: f64 },
    /// F(x) = x² log x
    ThinPlateSpline,
}

/// A fully specified kernel: family, parameters and ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        match family {
            KernelFamily::Gaussian { sigma } if !(sigma > 0.0) => {
                return Err(Error::Domain(format!(
                    "sigma must be positive, got {sigma}"
                )))
            }
            KernelFamily::Laplacian { alpha } if !(alpha > 0.0) => {
                return Err(Error::Domain(format!(
                    "alpha must be positive, got {alpha}"
                )))
            }
            KernelFamily::Matern { beta, .. } if !(beta > 0.0) => {
                return Err(Error::Domain(format!("beta must be positive, got {beta}")))
            }
            KernelFamily::Riesz { r } if !(r > 0.0 && r < 2.0) => {
                return Err(Error::Domain(format!(
                    "riesz exponent must be in (0,2), got {r}"
                )))
            }
            _ => {}
        }
        Ok(Self { family, dim })
    }

    pub fn gaussian(sigma: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Gaussian { sigma }, dim)
    }

    pub fn laplacian(alpha: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Laplacian { alpha }, dim)
    }

    pub fn matern(p: u32, beta: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern { p, beta }, dim)
    }

    pub fn negative_distance(dim: usize) -> Result<Self> {
        Self::new(KernelFamily::NegativeDistance, dim)
    }

    pub fn riesz(r: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Riesz { r }, dim)
    }

    pub fn thin_plate(dim: usize) -> Result<Self> {
        Self::new(KernelFamily::ThinPlateSpline, dim)
    }

    /// Short tag used in CSV output and coefficient cache files.
    pub fn family_tag(&self) -> &'static str {
        match self.family {
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::Laplacian { .. } => "laplacian",
            KernelFamily::Matern { .. } => "matern",
            KernelFamily::NegativeDistance => "negdist",
            KernelFamily::Riesz { .. } => "riesz",
            KernelFamily::ThinPlateSpline => "thinplate",
        }
    }

    /// Parameter string, e.g. `sigma=1;` for CSV columns and cache headers.
    pub fn param_string(&self) -> String {
        match self.family {
            KernelFamily::Gaussian { sigma } => format!("sigma={sigma:.16e}"),
            KernelFamily::Laplacian { alpha } => format!("alpha={alpha:.16e}"),
            KernelFamily::Matern { p, beta } => format!("p={p};beta={beta:.16e}"),
            KernelFamily::NegativeDistance => String::new(),
            KernelFamily::Riesz { r } => format!("r={r:.16e}"),
            KernelFamily::ThinPlateSpline => String::new(),
        }
    }
}

/// Evaluate the d-dimensional basis function F at s ≥ 0.
pub fn eval_basis(spec: &KernelSpec, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!(
            "basis argument must be >= 0, got {s}"
        )));
    }
    Ok(match spec.family {
        KernelFamily::Gaussian { sigma } => (-s * s / (2.0 * sigma * sigma)).exp(),
        KernelFamily::Laplacian { alpha } => (-alpha * s).exp(),
        KernelFamily::Matern { p, beta } => specfun::matern_halfint_f_basis(p, beta, s)?,
        KernelFamily::NegativeDistance => -s,
        KernelFamily::Riesz { r } => -s.powf(r),
        KernelFamily::ThinPlateSpline => {
            if s == 0.0 {
                0.0
            } else {
                s * s * s.ln()
            }
        }
    })
}

/// Derivative F′(s), used by the d = 3 shortcut f(t) = F(t) + t F′(t).
pub fn eval_basis_deriv(spec: &KernelSpec, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!(
            "basis argument must be >= 0, got {s}"
        )));
    }
    Ok(match spec.family {
        KernelFamily::Gaussian { sigma } => {
            -s / (sigma * sigma) * (-s * s / (2.0 * sigma * sigma)).exp()
        }
        KernelFamily::Laplacian { alpha } => -alpha * (-alpha * s).exp(),
        KernelFamily::Matern { p, beta } => {
            // F = e^{-γs} S(s) with S the closed-form polynomial
            let gamma_rate = (2.0 * p as f64 + 1.0).sqrt() / beta;
            let poly = |x: f64| {
                specfun::matern_halfint_f_basis(p, beta, x).map(|f| f * (gamma_rate * x).exp())
            };
            // differentiate S numerically-free: S is a polynomial of degree p
            // in s; evaluate its derivative from the explicit coefficients.
            let mut sum = CompensatedSum::new();
            let lead = log_gamma(p as f64 + 1.0)? - log_gamma(2.0 * p as f64 + 1.0)?;
            for n in 0..p {
                let (pf, nf) = (p as f64, n as f64);
                let ln_coeff =
                    log_gamma(pf + nf + 1.0)? - log_gamma(nf + 1.0)? - log_gamma(pf - nf + 1.0)?;
                let pow = pf - nf; // >= 1 here
                let ln_term = lead
                    + ln_coeff
                    + pow.ln()
                    + (pow) * (2.0 * gamma_rate).ln()
                    + if pow > 1.0 {
                        if s == 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            (pow - 1.0) * s.ln()
                        }
                    } else {
                        0.0
                    };
                sum.add(ln_term.exp());
            }
            let s_poly = poly(s)?;
            (-gamma_rate * s).exp() * sum.value() - gamma_rate * (-gamma_rate * s).exp() * s_poly
        }
        KernelFamily::NegativeDistance => -1.0,
        KernelFamily::Riesz { r } => -r * s.powf(r - 1.0),
        KernelFamily::ThinPlateSpline => {
            if s == 0.0 {
                0.0
            } else {
                2.0 * s * s.ln() + s
            }
        }
    })
}

/// The negative-distance slicing constant c_d = √π Γ((d+1)/2) / Γ(d/2).
pub fn negdist_coeff(dim: usize) -> Result<f64> {
    let d = dim as f64;
    Ok(PI.sqrt() * gamma_ratio((d + 1.0) / 2.0, d / 2.0)?)
}

/// Precompiled basis evaluator for tight per-pair loops: constants and
/// polynomial coefficients are computed once, the returned closure is pure
/// arithmetic.
pub fn basis_evaluator(spec: &KernelSpec) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    Ok(match spec.family {
        KernelFamily::Gaussian { sigma } => {
            let inv = -0.5 / (sigma * sigma);
            Box::new(move |s| (inv * s * s).exp())
        }
        KernelFamily::Laplacian { alpha } => Box::new(move |s| (-alpha * s).exp()),
        KernelFamily::Matern { p, beta } => {
            // F(s) = e^{-γs} Σ_j q_j s^j with the closed-form polynomial
            let gamma_rate = (2.0 * p as f64 + 1.0).sqrt() / beta;
            let lead = log_gamma(p as f64 + 1.0)? - log_gamma(2.0 * p as f64 + 1.0)?;
            let mut poly = vec![0.0f64; p as usize + 1];
            for n in 0..=p {
                let (pf, nf) = (p as f64, n as f64);
                let ln_coeff =
                    log_gamma(pf + nf + 1.0)? - log_gamma(nf + 1.0)? - log_gamma(pf - nf + 1.0)?;
                let pow = (p - n) as usize;
                poly[pow] = (lead + ln_coeff + pow as f64 * (2.0 * gamma_rate).ln()).exp();
            }
            Box::new(move |s| {
                let horner = poly.iter().rev().fold(0.0, |acc, &c| acc * s + c);
                (-gamma_rate * s).exp() * horner
            })
        }
        KernelFamily::NegativeDistance => Box::new(|s| -s),
        KernelFamily::Riesz { r } => Box::new(move |s| -s.powf(r)),
        KernelFamily::ThinPlateSpline => Box::new(|s| if s == 0.0 { 0.0 } else { s * s * s.ln() }),
    })
}

/// The thin-plate counterpart constant C = -(d/2)(H_{d/2} - 2 + ln 4).
pub fn thin_plate_const(dim: usize) -> Result<f64> {
    let d = dim as f64;
    Ok(-(d / 2.0) * (harmonic(d / 2.0)? - 2.0 + (4.0f64).ln()))
}

/// Evaluate the 1D sliced counterpart f at s ≥ 0, so that
/// F = S_d(f) holds for the paired [`eval_basis`].
///
/// The Laplacian and Matérn counterparts are differences of two ₁F₂ values
/// which cancel catastrophically once the rescaled argument grows large; in
/// that regime a convergence error is returned instead of noise.
pub fn eval_counterpart(spec: &KernelSpec, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!(
            "counterpart argument must be >= 0, got {s}"
        )));
    }
    let d = spec.dim as f64;
    let tol = SeriesTolerance::default();
    Ok(match spec.family {
        KernelFamily::Gaussian { sigma } => {
            hyp1f1_neg(d / 2.0, 0.5, s * s / (2.0 * sigma * sigma), tol)?
        }
        KernelFamily::Laplacian { alpha } => matern_counterpart_pair(d, 0, 1.0 / alpha, s, tol)?,
        KernelFamily::Matern { p, beta } => matern_counterpart_pair(d, p, beta, s, tol)?,
        KernelFamily::NegativeDistance => -negdist_coeff(spec.dim)? * s,
        KernelFamily::Riesz { r } => {
            let ln_const = 0.5 * PI.ln() + log_gamma((d + r) / 2.0)?
                - log_gamma(d / 2.0)?
                - log_gamma((r + 1.0) / 2.0)?;
            -ln_const.exp() * s.powf(r)
        }
        KernelFamily::ThinPlateSpline => {
            if s == 0.0 {
                0.0
            } else {
                d * s * s * s.ln() - thin_plate_const(spec.dim)? * s * s
            }
        }
    })
}

/// Counterpart of the Matérn kernel with ν = p + 1/2 (Laplacian for p = 0,
/// where β = 1/α):
///
/// f(x) = ₁F₂(d/2; 1/2, 1-ν; q) - Γ(1-ν)Γ(ν+d/2)(2ν)^ν x^{2ν} /
///        (Γ(d/2)Γ(2ν+1)β^{2ν}) · ₁F₂(ν+d/2; ν+1/2, ν+1; q),
///        q = ν x² / (2β²).
fn matern_counterpart_pair(d: f64, p: u32, beta: f64, x: f64, tol: SeriesTolerance) -> Result<f64> {
    let nu = p as f64 + 0.5;
    let q = nu * x * x / (2.0 * beta * beta);
    let first = hyp1f2(d / 2.0, 0.5, 1.0 - nu, q, tol)?;
    if x == 0.0 {
        return Ok(first);
    }
    let (ln_g, sign) = specfun::ln_abs_gamma_signed(1.0 - nu)?;
    let ln_pref = ln_g + log_gamma(nu + d / 2.0)? + nu * (2.0 * nu).ln() + 2.0 * nu * x.ln()
        - log_gamma(d / 2.0)?
        - log_gamma(2.0 * nu + 1.0)?
        - 2.0 * nu * beta.ln();
    let second = sign * ln_pref.exp() * hyp1f2(nu + d / 2.0, nu + 0.5, nu + 1.0, q, tol)?;
    let value = first - second;
    // Pair-level cancellation guard. The difference of the two series loses
    // log10(parts/|value|) digits; past 1e12 the noise floor of the term
    // recurrences (~1e2 eps x parts) reaches the result itself.
    if first.abs().max(second.abs()) > 1e12 * value.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence {
            context: "matern counterpart (pair cancellation)",
            partial: value,
        });
    }
    Ok(value)
}

/// Truncated power series Σ aₙ xⁿ, assumed globally convergent.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub coefficients: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Horner
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Map the series of F to the series of its counterpart f:
/// bₙ = √π Γ((n+d)/2) / (Γ(d/2) Γ((n+1)/2)) · aₙ, in log space.
pub fn series_transform(series: &PowerSeries, dim: usize) -> Result<PowerSeries> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let d = dim as f64;
    let ln_gd = log_gamma(d / 2.0)?;
    let coefficients = series
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            let nf = n as f64;
            let ln_factor =
                0.5 * PI.ln() + log_gamma((nf + d) / 2.0)? - ln_gd - log_gamma((nf + 1.0) / 2.0)?;
            Ok(ln_factor.exp() * a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerSeries { coefficients })
}

/// d = 3 shortcut: the counterpart of a differentiable basis F is
/// f(t) = F(t) + t F′(t).
pub fn d3_counterpart(basis: impl Fn(f64) -> f64, deriv: impl Fn(f64) -> f64, s: f64) -> f64 {
    basis(s) + s * deriv(s)
}

// ---------------------------------------------------------------------------
// Sphere-average transform as numerical quadrature (the independent oracle
// pairing eval_basis with eval_counterpart).
// ---------------------------------------------------------------------------

/// Apply S_d to an arbitrary 1D profile by tanh-sinh quadrature:
///
/// S_d(f)(s) = 2Γ(d/2)/(√π Γ((d−1)/2)) ∫₀¹ f(ts)(1−t²)^((d−3)/2) dt
///
/// The double-exponential substitution handles both the weight singularity
/// at t = 1 (d = 2) and profiles with algebraic behaviour at t = 0 (Riesz).
pub fn slice_transform_numeric(
    profile: impl Fn(f64) -> f64,
    dim: usize,
    s: f64,
    abs_tol: f64,
) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(
            "slice transform quadrature requires d >= 2".into(),
        ));
    }
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("argument must be >= 0, got {s}")));
    }
    let d = dim as f64;
    let weight_pow = (d - 3.0) / 2.0;
    let ln_norm = (2.0f64).ln() + log_gamma(d / 2.0)? - 0.5 * PI.ln() - log_gamma((d - 1.0) / 2.0)?;
    let norm = ln_norm.exp();

    // integrand over t in (0,1) with endpoint-stable 1 - t
    let g = |t: f64, one_minus_t: f64| -> f64 {
        let w = (one_minus_t * (1.0 + t)).powf(weight_pow);
        profile(t * s) * w
    };

    let integral = tanh_sinh_unit(g, abs_tol / norm.max(1.0))?;
    Ok(norm * integral)
}

/// Tanh-sinh quadrature of ∫₀¹ g(t, 1-t) dt; the callback receives both t and
/// a cancellation-free 1-t.
fn tanh_sinh_unit(g: impl Fn(f64, f64) -> f64, tol: f64) -> Result<f64> {
    const U_MAX: f64 = 4.0;
    let eval_level = |h: f64, stride_only_odd: bool| -> f64 {
        let mut acc = CompensatedSum::new();
        let mut j = if stride_only_odd { 1 } else { 0 };
        loop {
            let u = j as f64 * h;
            if u > U_MAX {
                break;
            }
            for sgn in [1.0, -1.0] {
                if u == 0.0 && sgn < 0.0 {
                    continue;
                }
                let v = 0.5 * PI * (sgn * u).sinh();
                // t = (1 + tanh v)/2; 1 - t = 1/(e^{2v} + 1) exactly
                let e2v = (2.0 * v).exp();
                let one_minus_t = 1.0 / (e2v + 1.0);
                let t = 1.0 - one_minus_t;
                let w = 0.25 * PI * (sgn * u).cosh() / (0.5 * PI * (sgn * u).sinh()).cosh().powi(2);
                if w < 1e-300 {
                    continue;
                }
                let val = g(t, one_minus_t);
                if val.is_finite() {
                    acc.add(w * val);
                }
            }
            j += if stride_only_odd { 2 } else { 1 };
        }
        acc.value()
    };

    let mut h = 0.5;
    let mut total = h * eval_level(h, false);
    for _ in 0..10 {
        let refined = 0.5 * h * eval_level(0.5 * h, true);
        let new_total = 0.5 * total + refined;
        let delta = (new_total - total).abs();
        total = new_total;
        h *= 0.5;
        if delta <= tol && h <= 0.125 {
            return Ok(total);
        }
    }
    Err(Error::Convergence {
        context: "tanh-sinh quadrature",
        partial: total,
    })
}

// ---------------------------------------------------------------------------
// Fourier coefficients
// ---------------------------------------------------------------------------

/// Closed-form Fourier transform of the sliced Gaussian counterpart f_σ,
/// evaluated at integer frequency k:
///
/// c_k = d π σ exp(-2π²σ²k²) (2π²σ²k²)^((d-1)/2) / (√2 Γ((d+2)/2))
///
/// computed entirely in log space. For d = 1 this reduces to the ordinary
/// Gaussian transform σ√(2π) exp(-2π²σ²k²).
pub fn gaussian_fourier_coeff(sigma: f64, dim: usize, k: i64) -> Result<f64> {
    gaussian_fourier_transform(sigma, dim, k as f64)
}

/// The same transform at a continuous frequency ω; [`gaussian_fourier_coeff`]
/// samples this at the integers.
pub fn gaussian_fourier_transform(sigma: f64, dim: usize, omega: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let d = dim as f64;
    let u = 2.0 * PI * PI * sigma * sigma * omega * omega;
    if dim == 1 {
        return Ok(sigma * (2.0 * PI).sqrt() * (-u).exp());
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    let ln_c = d.ln() + PI.ln() + sigma.ln() - u + 0.5 * (d - 1.0) * u.ln()
        - 0.5 * (2.0f64).ln()
        - log_gamma((d + 2.0) / 2.0)?;
    Ok(ln_c.exp())
}

/// Symmetric set of integer frequencies with real, even Fourier
/// coefficients, plus the rescaling the coefficients were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffSet {
    /// Sorted frequencies; k is present iff -k is present.
    pub freqs: Vec<i64>,
    /// Coefficient per frequency, equal at k and -k.
    pub coeffs: Vec<f64>,
    /// Scale τ of the affine map x ↦ τx + shift the set was built for.
    pub scale: f64,
    /// Shift of that map.
    pub shift: f64,
    pub built_for: KernelSpec,
}

impl FourierCoeffSet {
    /// Number of retained frequencies |C|.
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Rebind the coefficient set to the affine map it will be used under.
    pub fn with_map(mut self, scale: f64, shift: f64) -> Self {
        self.scale = scale;
        self.shift = shift;
        self
    }

    /// True when the frequencies form the contiguous band {-K, ..., K}.
    pub fn is_contiguous_band(&self) -> bool {
        if self.freqs.is_empty() {
            return false;
        }
        let k = *self.freqs.last().unwrap();
        self.freqs.len() == (2 * k + 1) as usize && self.freqs[0] == -k
    }

    /// Evaluate the truncated series Σ c_k e^{2πikx} (real by symmetry).
    pub fn eval_series(&self, x: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (&k, &c) in self.freqs.iter().zip(&self.coeffs) {
            if k == 0 {
                acc.add(c);
            } else if k > 0 {
                acc.add(2.0 * c * (2.0 * PI * k as f64 * x).cos());
            }
        }
        acc.value()
    }

    fn validate(&self) -> Result<()> {
        if self.freqs.len() != self.coeffs.len() {
            return Err(Error::Contract(
                "frequency/coefficient length mismatch".into(),
            ));
        }
        if !self.freqs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Contract(
                "frequencies must be sorted and unique".into(),
            ));
        }
        for (i, &k) in self.freqs.iter().enumerate() {
            let j = self.freqs.binary_search(&-k).map_err(|_| {
                Error::Contract(format!("frequency {k} present without its mirror"))
            })?;
            if (self.coeffs[i] - self.coeffs[j]).abs()
                > 1e-12 * self.coeffs[i].abs().max(self.coeffs[j].abs()).max(1e-300)
            {
                return Err(Error::Contract(format!("coefficients at ±{k} differ")));
            }
        }
        Ok(())
    }

    /// Serialize to the small CSV cache format: a header line with the kernel
    /// and map metadata, then one `k,c_k` pair per line with 17 significant
    /// digits (exact f64 round trip).
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "family,params,d,tau,shift,kmax")?;
        writeln!(
            w,
            "{},{},{},{:.16e},{:.16e},{}",
            self.built_for.family_tag(),
            self.built_for.param_string(),
            self.built_for.dim,
            self.scale,
            self.shift,
            self.freqs.last().copied().unwrap_or(0)
        )?;
        writeln!(w, "k,c")?;
        for (&k, &c) in self.freqs.iter().zip(&self.coeffs) {
            writeln!(w, "{k},{c:.16e}")?;
        }
        Ok(())
    }

    /// Parse the CSV cache format written by [`FourierCoeffSet::write_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Contract("truncated coefficient file".into()))?
                .map_err(Error::from)
        };
        let header = next()?;
        if header.trim() != "family,params,d,tau,shift,kmax" {
            return Err(Error::Contract(format!("unexpected header: {header}")));
        }
        let meta = next()?;
        let fields: Vec<&str> = meta.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Contract(format!("malformed metadata row: {meta}")));
        }
        let dim: usize = fields[2]
            .parse()
            .map_err(|_| Error::Contract(format!("bad dimension: {}", fields[2])))?;
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Contract(format!("bad float: {s}")))
        };
        let built_for = parse_kernel_fields(fields[0], fields[1], dim)?;
        let scale = parse_f(fields[3])?;
        let shift = parse_f(fields[4])?;
        let cols = next()?;
        if cols.trim() != "k,c" {
            return Err(Error::Contract(format!("unexpected column row: {cols}")));
        }
        let mut freqs = Vec::new();
        let mut coeffs = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (ks, cs) = line
                .split_once(',')
                .ok_or_else(|| Error::Contract(format!("malformed pair row: {line}")))?;
            freqs.push(
                ks.parse::<i64>()
                    .map_err(|_| Error::Contract(format!("bad frequency: {ks}")))?,
            );
            coeffs.push(parse_f(cs)?);
        }
        let set = Self {
            freqs,
            coeffs,
            scale,
            shift,
            built_for,
        };
        set.validate()?;
        Ok(set)
    }
}

fn parse_kernel_fields(tag: &str, params: &str, dim: usize) -> Result<KernelSpec> {
    let get = |key: &str| -> Result<f64> {
        params
            .split(';')
            .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
            .ok_or_else(|| Error::Contract(format!("missing parameter {key}")))?
            .parse()
            .map_err(|_| Error::Contract(format!("bad parameter {key}")))
    };
    match tag {
        "gaussian" => KernelSpec::gaussian(get("sigma")?, dim),
        "laplacian" => KernelSpec::laplacian(get("alpha")?, dim),
        "matern" => KernelSpec::matern(get("p")? as u32, get("beta")?, dim),
        "negdist" => KernelSpec::negative_distance(dim),
        "riesz" => KernelSpec::riesz(get("r")?, dim),
        "thinplate" => KernelSpec::thin_plate(dim),
        other => Err(Error::Contract(format!("unknown kernel tag: {other}"))),
    }
}

/// Smallest K such that the Gaussian coefficient at k = K falls below
/// `eps_rel` times the peak coefficient; found by outward scan from the
/// stationary point k* = √(d-1)/(2πσ), where the coefficient is unimodal
/// in |k|.
pub fn auto_kmax(sigma: f64, dim: usize, eps_rel: f64) -> Result<i64> {
    let d = dim as f64;
    let k_star = if dim == 1 {
        0
    } else {
        ((d - 1.0).sqrt() / (2.0 * PI * sigma)).round() as i64
    };
    let mut c_peak = 0.0f64;
    for k in 0..=(k_star + 2) {
        c_peak = c_peak.max(gaussian_fourier_coeff(sigma, dim, k)?);
    }
    let threshold = eps_rel * c_peak;
    let mut k = k_star.max(1);
    loop {
        if gaussian_fourier_coeff(sigma, dim, k)? < threshold {
            return Ok(k);
        }
        k += 1;
        if k > k_star + 10_000_000 {
            return Err(Error::Config("coefficient scan did not terminate".into()));
        }
    }
}

/// Thresholded symmetric coefficient set for the Gaussian counterpart:
/// C = { k : -K ≤ k ≤ K, c_k > ε·max_k c_k }, coefficients from
/// [`gaussian_fourier_coeff`]. The threshold is relative to the peak
/// coefficient. The returned set carries the identity map (τ = 1,
/// shift = 0); rebind with [`FourierCoeffSet::with_map`].
pub fn select_coeff_set(
    sigma: f64,
    dim: usize,
    eps_rel: f64,
    k_max: i64,
) -> Result<FourierCoeffSet> {
    if !(eps_rel >= 0.0) {
        return Err(Error::Domain(format!(
            "relative threshold must be >= 0, got {eps_rel}"
        )));
    }
    let mut c_peak = 0.0f64;
    let mut cs = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let c = gaussian_fourier_coeff(sigma, dim, k)?;
        c_peak = c_peak.max(c);
        cs.push(c);
    }
    let threshold = eps_rel * c_peak;
    let mut freqs = Vec::new();
    let mut coeffs = Vec::new();
    for k in -k_max..=k_max {
        let c = cs[k.unsigned_abs() as usize];
        let keep = if eps_rel == 0.0 {
            c != 0.0
        } else {
            c > threshold
        };
        if keep {
            freqs.push(k);
            coeffs.push(c);
        }
    }
    if freqs.is_empty() {
        return Err(Error::Config(format!(
            "empty coefficient set: eps_rel = {eps_rel} too large or k_max = {k_max} too small"
        )));
    }
    Ok(FourierCoeffSet {
        freqs,
        coeffs,
        scale: 1.0,
        shift: 0.0,
        built_for: KernelSpec::gaussian(sigma, dim)?,
    })
}

/// Discrete Fourier coefficients of an even periodic profile sampled on an
/// equispaced grid over [-1/2, 1/2). Returns the contiguous band |k| ≤ k_max.
///
/// This is the engine behind [`numeric_fourier_coeffs`]; it is exposed
/// separately so arbitrary profiles can be transformed and tested.
pub fn periodized_profile_coeffs(
    profile: impl Fn(f64) -> f64,
    k_max: usize,
    grid_size: usize,
) -> Result<(Vec<i64>, Vec<f64>)> {
    if !grid_size.is_power_of_two() || grid_size < 8 * k_max.max(1) {
        return Err(Error::Config(format!(
            "grid_size must be a power of two >= 8*k_max, got {grid_size} for k_max {k_max}"
        )));
    }
    let n = grid_size;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(profile(-0.5 + j as f64 / n as f64), 0.0))
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    // grid starts at -1/2, so c_k picks up a (-1)^k twist relative to the DFT
    let mut freqs = Vec::with_capacity(2 * k_max + 1);
    let mut coeffs = Vec::with_capacity(2 * k_max + 1);
    for k in -(k_max as i64)..=(k_max as i64) {
        let idx = k.rem_euclid(n as i64) as usize;
        let twist = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = buf[idx] * twist / n as f64;
        if c.im.abs() > 1e-9 * (c.re.abs() + 1.0) {
            return Err(Error::Contract(format!(
                "profile is not even: coefficient at k = {k} has imaginary part {}",
                c.im
            )));
        }
        freqs.push(k);
        coeffs.push(c.re);
    }
    // enforce exact evenness (the profile is even up to rounding)
    for i in 0..=k_max {
        let lo = k_max - i;
        let hi = k_max + i;
        let avg = 0.5 * (coeffs[lo] + coeffs[hi]);
        coeffs[lo] = avg;
        coeffs[hi] = avg;
    }
    Ok((freqs, coeffs))
}

/// Numeric Fourier coefficients for kernels without a closed-form transform.
///
/// Samples the rescaled counterpart profile φ(x) = f(|x|/τ) on a grid over
/// [-1/2, 1/2) and returns the discrete transform values for |k| ≤ k_max.
/// For the Laplacian family the sampled profile is the smooth component
/// f₁(u) = f(u) + α c_d u of the decomposition; the distance part is handled
/// exactly by sorting and never goes through Fourier space.
pub fn numeric_fourier_coeffs(
    spec: &KernelSpec,
    tau: f64,
    k_max: usize,
    grid_size: usize,
) -> Result<FourierCoeffSet> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let (profile, context): (Box<dyn Fn(f64) -> Result<f64>>, _) = match spec.family {
        KernelFamily::Matern { .. } => (
            Box::new(move |x: f64| eval_counterpart(spec, (x / tau).abs())),
            "matern counterpart evaluation on coefficient grid",
        ),
        KernelFamily::Laplacian { alpha } => {
            let cd = negdist_coeff(spec.dim)?;
            (
                Box::new(move |x: f64| {
                    let u = (x / tau).abs();
                    Ok(eval_counterpart(spec, u)? + alpha * cd * u)
                }),
                "laplacian counterpart evaluation on coefficient grid",
            )
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "numeric coefficients are for Mat\u{e9}rn and the smooth Laplacian part; {} has an analytic or sorting path",
                spec.family_tag()
            )))
        }
    };
    let failure = std::cell::Cell::new(None);
    let (freqs, coeffs) = periodized_profile_coeffs(
        |x| match profile(x) {
            Ok(v) => v,
            Err(_) => {
                failure.set(Some(x));
                f64::NAN
            }
        },
        k_max,
        grid_size,
    )?;
    if let Some(x) = failure.get() {
        return Err(Error::Convergence {
            context,
            partial: x,
        });
    }
    Ok(FourierCoeffSet {
        freqs,
        coeffs,
        scale: tau,
        shift: 0.0,
        built_for: *spec,
    })
}
