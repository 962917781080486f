//! Special functions used by the kernel catalog.
//!
//! Everything here is pure `f64` arithmetic. Gamma-function expressions are
//! evaluated in log space and exponentiated once at the end, because the
//! coefficients they feed (sliced-kernel series, Fourier transforms of the
//! Gaussian counterpart) span hundreds of orders of magnitude in high
//! dimension.

use crate::error::{Error, Result};

/// Truncation control for hypergeometric series evaluation.
///
/// A series is accepted once the term magnitude stays below
/// `rel_tol * |partial sum|` for three consecutive terms (guarding against
/// even/odd zero terms), and rejected after `max_terms` terms.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTolerance {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 10_000,
        }
    }
}

impl SeriesTolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::Domain(format!(
                "rel_tol must be in (0,1), got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be >= 1".into()));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

/// Largest-term-to-result ratio admitted before a hypergeometric evaluation
/// is declared catastrophically cancelled and rejected.
const CANCELLATION_GUARD: f64 = 1e15;

// Lanczos approximation, g = 7, 9 coefficients. Good to ~1e-15 relative on
// Gamma over the positive half line.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_ln_gamma(x: f64) -> f64 {
    // requires x >= 0.5
    let mut acc = LANCZOS_COEFF[0];
    for (i, &c) in LANCZOS_COEFF.iter().enumerate().skip(1) {
        acc += c / (x - 1.0 + i as f64);
    }
    let t = x + LANCZOS_G - 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * t.ln() - t + acc.ln()
}

/// Natural logarithm of the gamma function for positive arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection: ln Γ(x) = ln(π / sin(πx)) - ln Γ(1-x); sin(πx) > 0 here
        let reflected = lanczos_ln_gamma(1.0 - x);
        Ok((std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - reflected)
    } else {
        Ok(lanczos_ln_gamma(x))
    }
}

/// ln |Γ(x)| together with the sign of Γ(x), defined for any non-integer
/// negative argument as well. Internal helper for prefactors such as
/// Γ(1/2 - p) in the Matérn counterpart.
pub(crate) fn ln_abs_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((log_gamma(x)?, 1.0));
    }
    if x == x.floor() {
        return Err(Error::Domain(format!(
            "gamma pole at non-positive integer {x}"
        )));
    }
    // reflection: Γ(x)Γ(1-x) = π / sin(πx)
    let s = (std::f64::consts::PI * x).sin();
    let ln_abs = (std::f64::consts::PI / s.abs()).ln() - log_gamma(1.0 - x)?;
    Ok((ln_abs, s.signum()))
}

/// Γ(a)/Γ(b) via `exp(log_gamma(a) - log_gamma(b))`.
///
/// Stays finite for arguments up to ~1e5 where the gammas themselves would
/// overflow long before.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "gamma_ratio requires positive arguments, got ({a}, {b})"
        )));
    }
    Ok((log_gamma(a)? - log_gamma(b)?).exp())
}

/// Neumaier-compensated accumulator; the workhorse for every long sum in
/// this crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum a series given its first term and the term-to-term ratio rule.
/// Returns (value, largest |term| seen, converged).
fn sum_series(
    first: f64,
    mut ratio: impl FnMut(usize) -> f64,
    tol: SeriesTolerance,
) -> (f64, f64, bool) {
    let mut acc = CompensatedSum::new();
    acc.add(first);
    let mut term = first;
    let mut max_term = first.abs();
    let mut small_streak = 0usize;
    for n in 0..tol.max_terms {
        term *= ratio(n);
        acc.add(term);
        max_term = max_term.max(term.abs());
        if term.abs() <= tol.rel_tol * acc.value().abs() {
            small_streak += 1;
            if small_streak >= 3 {
                return (acc.value(), max_term, true);
            }
        } else {
            small_streak = 0;
        }
    }
    (acc.value(), max_term, false)
}

/// Confluent hypergeometric function at a negative argument: ₁F₁(a; b; -x).
///
/// For b > a the Kummer transformation ₁F₁(a;b;-x) = e⁻ˣ ₁F₁(b-a;b;x) turns
/// the alternating series into one with positive terms; the raw series loses
/// every digit by x ≈ 30. The transformation also applies when b - a is a
/// non-positive integer, where the transformed series terminates. Otherwise
/// the alternating series is summed directly with compensation; its accuracy
/// degrades with the internal cancellation ratio, which is reported as a
/// convergence error past [`CANCELLATION_GUARD`].
pub fn hyp1f1_neg(a: f64, b: f64, x: f64, tol: SeriesTolerance) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("hyp1f1_neg requires a > 0, got {a}")));
    }
    if b <= 0.0 && b == b.floor() {
        return Err(Error::Domain(format!(
            "hyp1f1_neg pole: b = {b} is a non-positive integer"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "hyp1f1_neg requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }

    let ap = b - a;
    let terminating = ap <= 0.0 && ap == ap.floor();
    if b > a || terminating {
        // e^{-x} * 1F1(b-a; b; x): positive terms (or a finite sum)
        let (s, _max, converged) = sum_series(
            1.0,
            |n| {
                let nf = n as f64;
                (ap + nf) / (b + nf) * x / (nf + 1.0)
            },
            tol,
        );
        let value = (-x).exp() * s;
        if !converged && !terminating {
            return Err(Error::Convergence {
                context: "hyp1f1_neg (Kummer series)",
                partial: value,
            });
        }
        return Ok(value);
    }

    let (s, max_term, converged) = sum_series(
        1.0,
        |n| {
            let nf = n as f64;
            -(a + nf) / (b + nf) * x / (nf + 1.0)
        },
        tol,
    );
    if !converged {
        return Err(Error::Convergence {
            context: "hyp1f1_neg (direct series)",
            partial: s,
        });
    }
    if max_term > CANCELLATION_GUARD * s.abs() {
        return Err(Error::Convergence {
            context: "hyp1f1_neg (cancellation)",
            partial: s,
        });
    }
    Ok(s)
}

/// Generalized hypergeometric function ₁F₂(a; b, c; x) from its defining
/// series, with compensated accumulation.
///
/// The evaluation is rejected when the largest term exceeds
/// [`CANCELLATION_GUARD`] times the result: past that point the sliced
/// Laplacian/Matérn pair cancels catastrophically and the value would be
/// noise.
pub fn hyp1f2(a: f64, b: f64, c: f64, x: f64, tol: SeriesTolerance) -> Result<f64> {
    for (name, v) in [("b", b), ("c", c)] {
        if v <= 0.0 && v == v.floor() {
            return Err(Error::Domain(format!(
                "hyp1f2 pole: {name} = {v} is a non-positive integer"
            )));
        }
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("hyp1f2 requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let (s, max_term, converged) = sum_series(
        1.0,
        |n| {
            let nf = n as f64;
            (a + nf) / ((b + nf) * (c + nf)) * x / (nf + 1.0)
        },
        tol,
    );
    if !converged {
        return Err(Error::Convergence {
            context: "hyp1f2",
            partial: s,
        });
    }
    if max_term > CANCELLATION_GUARD * s.abs() {
        return Err(Error::Convergence {
            context: "hyp1f2 (cancellation)",
            partial: s,
        });
    }
    Ok(s)
}

/// Harmonic number H_x = ∫₀¹ (1-tˣ)/(1-t) dt for x ≥ 0.
///
/// Integers use the finite sum, half-integers the closed form
/// H_{1/2} = 2 - 2 ln 2 plus the recurrence H_x = H_{x-1} + 1/x; other
/// arguments go through digamma, H_x = ψ(x+1) + γ.
pub fn harmonic(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("harmonic requires x >= 0, got {x}")));
    }
    if x == x.floor() {
        let n = x as u64;
        let mut acc = CompensatedSum::new();
        for k in 1..=n {
            acc.add(1.0 / k as f64);
        }
        return Ok(acc.value());
    }
    if (2.0 * x) == (2.0 * x).floor() {
        // half-integer: walk up from H_{1/2} = 2 - 2 ln 2
        let mut h = 2.0 - 2.0 * std::f64::consts::LN_2;
        let mut t = 0.5;
        while t < x - 0.25 {
            t += 1.0;
            h += 1.0 / t;
        }
        return Ok(h);
    }
    Ok(digamma(x + 1.0) + EULER_GAMMA)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Digamma via the asymptotic series after shifting the argument above 12.
fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ψ(x) ~ ln x - 1/(2x) - Σ B_{2n}/(2n x^{2n})
    acc + x.ln()
        - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Matérn basis function for half-integer smoothness ν = p + 1/2:
///
/// F(x) = exp(-√(2p+1) x/β) · (p!/(2p)!) · Σ_{n=0}^{p} (p+n)!/(n!(p-n)!) (2√(2p+1) x/β)^{p-n}
///
/// Normalized so that F(0) = 1. For p = 0 this is the Laplacian kernel with
/// α = 1/β.
pub fn matern_halfint_f_basis(p: u32, beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "matern basis requires beta > 0, got {beta}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "matern basis requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let gamma_arg = (2.0 * p as f64 + 1.0).sqrt() * x / beta;
    let ln_lead = log_gamma(p as f64 + 1.0)? - log_gamma(2.0 * p as f64 + 1.0)?;
    let mut acc = CompensatedSum::new();
    for n in 0..=p {
        let (pf, nf) = (p as f64, n as f64);
        let ln_coeff = log_gamma(pf + nf + 1.0)? - log_gamma(nf + 1.0)? - log_gamma(pf - nf + 1.0)?;
        let pow = pf - nf;
        let ln_arg = if pow == 0.0 {
            0.0
        } else {
            pow * (2.0 * gamma_arg).ln()
        };
        acc.add((ln_lead + ln_coeff + ln_arg).exp());
    }
    Ok((-gamma_arg).exp() * acc.value())
}
