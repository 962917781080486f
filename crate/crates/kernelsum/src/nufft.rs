//! Discrete Fourier transforms on non-equispaced 1D grids.
//!
//! The adjoint transform aggregates weights into spectral coefficients,
//! ŵ_k = Σ_n w_n exp(-2πik x_n), and the forward transform evaluates a
//! truncated series at scattered nodes, t_m = Σ_k v_k exp(2πik y_m). The
//! exact versions (NDFT) cost O(|C|·N); the accelerated versions (NFFT)
//! spread onto an oversampled equispaced grid through a truncated Gaussian
//! window and cost O(N + |C| log |C|), with the window error controlled by
//! the requested accuracy.
//!
//! The NDFT is the default for small scattered frequency sets (the Gaussian
//! kernel's thresholded coefficients); the NFFT expects a contiguous
//! symmetric band {-K, ..., K} (Matérn and smoothed-Laplacian
//! coefficients). The caller picks the engine.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Nodes in [-1/2, 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        for &x in &nodes {
            if !(-0.5..0.5).contains(&x) {
                return Err(Error::Domain(format!("grid node {x} outside [-1/2, 1/2)")));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Spectral coefficients aligned with a frequency list.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub values: Vec<Complex64>,
}

impl SpectralVector {
    /// Conjugate symmetry across ±k, which is what makes the forward
    /// transform real-valued for real data.
    pub fn is_conjugate_symmetric(&self, freqs: &[i64], rel_tol: f64) -> bool {
        let scale: f64 = self
            .values
            .iter()
            .map(|v| v.norm())
            .sum::<f64>()
            .max(1e-300);
        for (i, &k) in freqs.iter().enumerate() {
            if let Ok(j) = freqs.binary_search(&-k) {
                if (self.values[i] - self.values[j].conj()).norm() > rel_tol * scale {
                    return false;
                }
            } else {
                return false;
            }
        }
        true
    }
}

fn check_freqs_sorted(freqs: &[i64]) -> Result<()> {
    if !freqs.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Contract(
            "frequencies must be sorted and unique".into(),
        ));
    }
    Ok(())
}

/// Walk a sorted frequency list evaluating base^k incrementally.
#[inline]
fn walk_freqs(base: Complex64, freqs: &[i64], mut visit: impl FnMut(usize, Complex64)) {
    let mut cur = powi(base, freqs[0]);
    visit(0, cur);
    for (i, w) in freqs.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap == 1 {
            cur *= base;
        } else {
            cur *= powi(base, gap);
        }
        visit(i + 1, cur);
    }
}

#[inline]
fn powi(base: Complex64, k: i64) -> Complex64 {
    let mut result = Complex64::new(1.0, 0.0);
    let mut b = if k >= 0 { base } else { base.conj() };
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}

/// Exact adjoint transform: ŵ_k = Σ_n w_n exp(-2πik x_n).
pub fn ndft_adjoint(grid: &Grid1D, weights: &[f64], freqs: &[i64]) -> Result<SpectralVector> {
    if weights.len() != grid.len() {
        return Err(Error::Contract(format!(
            "weight count {} does not match node count {}",
            weights.len(),
            grid.len()
        )));
    }
    check_freqs_sorted(freqs)?;
    let mut values = vec![Complex64::new(0.0, 0.0); freqs.len()];
    if freqs.is_empty() {
        return Ok(SpectralVector { values });
    }
    for (&x, &w) in grid.nodes().iter().zip(weights) {
        let base = Complex64::from_polar(1.0, -2.0 * PI * x);
        walk_freqs(base, freqs, |i, phase| values[i] += w * phase);
    }
    Ok(SpectralVector { values })
}

/// Exact forward transform: t_m = Re[Σ_k v_k exp(2πik y_m)].
///
/// Requires a conjugate-symmetric spectrum so the result is genuinely real;
/// the discarded imaginary part is checked to be ≤ 1e-10 relative.
pub fn ndft_forward(grid: &Grid1D, spectrum: &SpectralVector, freqs: &[i64]) -> Result<Vec<f64>> {
    if spectrum.values.len() != freqs.len() {
        return Err(Error::Contract(format!(
            "spectrum length {} does not match frequency count {}",
            spectrum.values.len(),
            freqs.len()
        )));
    }
    check_freqs_sorted(freqs)?;
    if !spectrum.is_conjugate_symmetric(freqs, 1e-10) {
        return Err(Error::Contract(
            "spectrum is not conjugate-symmetric; a real-valued forward transform is not defined"
                .into(),
        ));
    }
    let scale: f64 = spectrum
        .values
        .iter()
        .map(|v| v.norm())
        .sum::<f64>()
        .max(1e-300);
    let mut out = Vec::with_capacity(grid.len());
    if freqs.is_empty() {
        out.resize(grid.len(), 0.0);
        return Ok(out);
    }
    for &y in grid.nodes() {
        let base = Complex64::from_polar(1.0, 2.0 * PI * y);
        let mut acc = Complex64::new(0.0, 0.0);
        walk_freqs(base, freqs, |i, phase| acc += spectrum.values[i] * phase);
        if acc.im.abs() > 1e-10 * scale {
            return Err(Error::Contract(format!(
                "forward transform produced imaginary residual {:e}",
                acc.im
            )));
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// Immutable NFFT plan for one grid and one contiguous frequency band;
/// shareable across threads.
pub struct NfftPlan {
    nodes: Vec<f64>,
    k_max: i64,
    /// oversampled grid size (power of two)
    n_over: usize,
    /// window cutoff: 2m+1 grid points per node
    m_cut: usize,
    /// Gaussian window shape parameter
    b_shape: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// deconvolution factors exp(b (πk/n)²) for k = -K..K
    deconv: Vec<f64>,
}

/// Window cutoff needed for a target accuracy at oversampling factor 2,
/// from the truncated-Gaussian bound 4·exp(-mπ(1 - 1/(2σ-1))).
fn window_cutoff(accuracy: f64) -> Result<usize> {
    if !(accuracy > 0.0) {
        return Err(Error::Domain(format!(
            "accuracy must be positive, got {accuracy}"
        )));
    }
    let m = (3.0 / (2.0 * PI) * (4.0 / accuracy).ln()).ceil();
    if m > 20.0 {
        return Err(Error::Config(format!(
            "accuracy {accuracy:e} needs window cutoff m = {m}, beyond what the Gaussian window supports"
        )));
    }
    Ok((m as usize).max(2))
}

impl NfftPlan {
    pub fn new(grid: &Grid1D, k_max: i64, accuracy: f64) -> Result<Self> {
        if k_max < 0 {
            return Err(Error::Contract("k_max must be non-negative".into()));
        }
        let m_cut = window_cutoff(accuracy)?;
        let band = (2 * k_max + 1) as usize;
        let n_over = (2 * band).next_power_of_two().max(16);
        let sigma_over = n_over as f64 / band as f64;
        let b_shape = 2.0 * sigma_over * m_cut as f64 / ((2.0 * sigma_over - 1.0) * PI);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_over);
        let ifft = planner.plan_fft_inverse(n_over);
        let deconv = (-k_max..=k_max)
            .map(|k| {
                let arg = PI * k as f64 / n_over as f64;
                (b_shape * arg * arg).exp()
            })
            .collect();
        Ok(Self {
            nodes: grid.nodes().to_vec(),
            k_max,
            n_over,
            m_cut,
            b_shape,
            fft,
            ifft,
            deconv,
        })
    }

    pub fn band(&self) -> impl Iterator<Item = i64> {
        -self.k_max..=self.k_max
    }

    #[inline]
    fn window(&self, dist: f64) -> f64 {
        let nd = self.n_over as f64 * dist;
        (-nd * nd / self.b_shape).exp() / (PI * self.b_shape).sqrt()
    }

    /// Spread node values onto the oversampled grid (the transpose picks
    /// grid values back up at the nodes).
    fn spread(&self, weights: &[f64]) -> Vec<Complex64> {
        let n = self.n_over;
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        for (&x, &w) in self.nodes.iter().zip(weights) {
            let u = x * n as f64;
            let l0 = u.round() as i64;
            for l in (l0 - self.m_cut as i64)..=(l0 + self.m_cut as i64) {
                let dist = x - l as f64 / n as f64;
                let idx = l.rem_euclid(n as i64) as usize;
                g[idx] += w * self.window(dist);
            }
        }
        g
    }

    /// ŵ_k ≈ Σ_n w_n exp(-2πik x_n) for k in the band.
    pub fn adjoint(&self, weights: &[f64]) -> Result<SpectralVector> {
        if weights.len() != self.nodes.len() {
            return Err(Error::Contract(format!(
                "weight count {} does not match plan node count {}",
                weights.len(),
                self.nodes.len()
            )));
        }
        let mut g = self.spread(weights);
        self.fft.process(&mut g);
        let n = self.n_over as i64;
        let values = (-self.k_max..=self.k_max)
            .map(|k| g[k.rem_euclid(n) as usize] * self.deconv[(k + self.k_max) as usize])
            .collect();
        Ok(SpectralVector { values })
    }

    /// t_m ≈ Re[Σ_k v_k exp(2πik x_m)] for the plan's nodes.
    pub fn forward(&self, spectrum: &SpectralVector) -> Result<Vec<f64>> {
        let band_len = (2 * self.k_max + 1) as usize;
        if spectrum.values.len() != band_len {
            return Err(Error::Contract(format!(
                "spectrum length {} does not match band size {band_len}",
                spectrum.values.len()
            )));
        }
        let freqs: Vec<i64> = (-self.k_max..=self.k_max).collect();
        if !spectrum.is_conjugate_symmetric(&freqs, 1e-10) {
            return Err(Error::Contract(
                "spectrum is not conjugate-symmetric; a real-valued forward transform is not defined".into(),
            ));
        }
        let n = self.n_over;
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        for (i, k) in (-self.k_max..=self.k_max).enumerate() {
            g[k.rem_euclid(n as i64) as usize] = spectrum.values[i] * self.deconv[i];
        }
        // the n from 1/psi-hat cancels the unnormalized inverse FFT
        self.ifft.process(&mut g);
        let mut out = Vec::with_capacity(self.nodes.len());
        for &x in &self.nodes {
            let u = x * n as f64;
            let l0 = u.round() as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (l0 - self.m_cut as i64)..=(l0 + self.m_cut as i64) {
                let dist = x - l as f64 / n as f64;
                let idx = l.rem_euclid(n as i64) as usize;
                acc += g[idx] * self.window(dist);
            }
            out.push(acc.re);
        }
        Ok(out)
    }
}

fn contiguous_band(freqs: &[i64]) -> Result<i64> {
    if freqs.is_empty() {
        return Err(Error::Contract("empty frequency band".into()));
    }
    let k = *freqs.last().unwrap();
    if freqs[0] != -k || freqs.len() != (2 * k + 1) as usize {
        return Err(Error::Contract(
            "NFFT requires a contiguous symmetric band {-K, ..., K}".into(),
        ));
    }
    Ok(k)
}

/// Accelerated adjoint transform on a contiguous band, max abs. error
/// ≤ accuracy · ‖weights‖₁.
pub fn nfft_adjoint(
    grid: &Grid1D,
    weights: &[f64],
    freqs: &[i64],
    accuracy: f64,
) -> Result<SpectralVector> {
    let k = contiguous_band(freqs)?;
    NfftPlan::new(grid, k, accuracy)?.adjoint(weights)
}

/// Accelerated forward transform on a contiguous band, max abs. error
/// ≤ accuracy · ‖spectrum‖₁.
pub fn nfft_forward(
    grid: &Grid1D,
    spectrum: &SpectralVector,
    freqs: &[i64],
    accuracy: f64,
) -> Result<Vec<f64>> {
    let k = contiguous_band(freqs)?;
    NfftPlan::new(grid, k, accuracy)?.forward(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> Grid1D {
        Grid1D::new((0..n).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap()
    }

    /// Brute-force double loops, the oracle for both transform directions.
    fn adjoint_brute(grid: &Grid1D, w: &[f64], freqs: &[i64]) -> Vec<Complex64> {
        freqs
            .iter()
            .map(|&k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&x, &wn) in grid.nodes().iter().zip(w) {
                    acc += wn * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * x);
                }
                acc
            })
            .collect()
    }

    fn forward_brute(grid: &Grid1D, v: &[Complex64], freqs: &[i64]) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&y| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&k, &vk) in freqs.iter().zip(v) {
                    acc += vk * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * y);
                }
                acc.re
            })
            .collect()
    }

    fn symmetric_spectrum(rng: &mut ChaCha8Rng, k_max: i64) -> (Vec<i64>, SpectralVector) {
        let freqs: Vec<i64> = (-k_max..=k_max).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); freqs.len()];
        for k in 0..=k_max {
            let v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let i = (k + k_max) as usize;
            let j = (k_max - k) as usize;
            if k == 0 {
                values[i] = Complex64::new(v.re, 0.0);
            } else {
                values[i] = v;
                values[j] = v.conj();
            }
        }
        (freqs, SpectralVector { values })
    }

    #[test]
    fn grid_validates_range() {
        assert!(Grid1D::new(vec![0.0, -0.5, 0.49]).is_ok());
        assert!(Grid1D::new(vec![0.5]).is_err());
        assert!(Grid1D::new(vec![-0.6]).is_err());
    }

    #[test]
    fn adjoint_single_node_at_origin() {
        let grid = Grid1D::new(vec![0.0]).unwrap();
        let freqs: Vec<i64> = (-5..=5).collect();
        let s = ndft_adjoint(&grid, &[1.0], &freqs).unwrap();
        for v in s.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn adjoint_matches_classical_dft_on_equispaced_nodes() {
        let n = 8usize;
        let grid = Grid1D::new((0..n).map(|j| j as f64 / n as f64 - 0.5).collect()).unwrap();
        let w: Vec<f64> = (0..n).map(|j| (j as f64 + 1.0) / n as f64).collect();
        let freqs: Vec<i64> = (0..n as i64).collect();
        let s = ndft_adjoint(&grid, &w, &freqs).unwrap();
        // x_j = j/n - 1/2 gives the DFT times the alternating phase (-1)^k
        for (i, &k) in freqs.iter().enumerate() {
            let mut dft = Complex64::new(0.0, 0.0);
            for (j, &wj) in w.iter().enumerate() {
                dft +=
                    wj * Complex64::from_polar(1.0, -2.0 * PI * (k as usize * j) as f64 / n as f64);
            }
            let phase = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((s.values[i] - dft * phase).norm() < 1e-13);
        }
    }

    #[test]
    fn ndft_matches_brute_force() {
        let mut r = rng(42);
        for trial in 0..20 {
            let n = 3 + (trial % 7);
            let grid = random_grid(&mut r, n);
            let w: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 2.0 - 1.0).collect();
            let freqs: Vec<i64> = vec![-9, -4, -1, 0, 1, 4, 9];
            let s = ndft_adjoint(&grid, &w, &freqs).unwrap();
            let oracle = adjoint_brute(&grid, &w, &freqs);
            for (a, b) in s.values.iter().zip(&oracle) {
                assert!((a - b).norm() <= 1e-13, "adjoint deviates: {a} vs {b}");
            }
            let (freqs, spec) = symmetric_spectrum(&mut r, 6);
            let t = ndft_forward(&grid, &spec, &freqs).unwrap();
            let oracle = forward_brute(&grid, &spec.values, &freqs);
            for (a, b) in t.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-13, "forward deviates: {a} vs {b}");
            }
        }
    }

    #[test]
    fn forward_zero_and_cosine() {
        let mut r = rng(7);
        let grid = random_grid(&mut r, 11);
        let freqs: Vec<i64> = (-3..=3).collect();
        let zeros = SpectralVector {
            values: vec![Complex64::new(0.0, 0.0); 7],
        };
        assert!(ndft_forward(&grid, &zeros, &freqs)
            .unwrap()
            .iter()
            .all(|&t| t == 0.0));
        // 1/2 at k = ±1 gives cos(2πy)
        let mut values = vec![Complex64::new(0.0, 0.0); 7];
        values[2] = Complex64::new(0.5, 0.0);
        values[4] = Complex64::new(0.5, 0.0);
        let t = ndft_forward(&grid, &SpectralVector { values }, &freqs).unwrap();
        for (&y, &tm) in grid.nodes().iter().zip(&t) {
            assert!((tm - (2.0 * PI * y).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn forward_rejects_asymmetric_spectrum() {
        let grid = Grid1D::new(vec![0.1, -0.2]).unwrap();
        let freqs = vec![-1, 0, 1];
        let values = vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.7, 0.2),
        ];
        assert!(matches!(
            ndft_forward(&grid, &SpectralVector { values }, &freqs),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn adjointness_identity() {
        let mut r = rng(99);
        let grid = random_grid(&mut r, 40);
        let (freqs, v) = symmetric_spectrum(&mut r, 10);
        let u: Vec<f64> = (0..grid.len()).map(|_| r.random::<f64>() - 0.5).collect();
        let t = ndft_forward(&grid, &v, &freqs).unwrap();
        let lhs: f64 = t.iter().zip(&u).map(|(a, b)| a * b).sum();
        let w_hat = ndft_adjoint(&grid, &u, &freqs).unwrap();
        let rhs: f64 = v
            .values
            .iter()
            .zip(&w_hat.values)
            .map(|(vk, wk)| (vk * wk.conj()).re)
            .sum();
        let scale: f64 = v.values.iter().map(|z| z.norm()).sum::<f64>() * u.len() as f64;
        assert!(
            (lhs - rhs).abs() <= 1e-12 * scale.max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn linearity_in_weights() {
        let mut r = rng(3);
        let grid = random_grid(&mut r, 25);
        let freqs: Vec<i64> = (-8..=8).collect();
        let w1: Vec<f64> = (0..25).map(|_| r.random::<f64>()).collect();
        let w2: Vec<f64> = (0..25).map(|_| r.random::<f64>()).collect();
        let (a, b) = (0.7, -2.3);
        let combo: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
        let s1 = ndft_adjoint(&grid, &w1, &freqs).unwrap();
        let s2 = ndft_adjoint(&grid, &w2, &freqs).unwrap();
        let sc = ndft_adjoint(&grid, &combo, &freqs).unwrap();
        for i in 0..freqs.len() {
            let expect = a * s1.values[i] + b * s2.values[i];
            assert!((sc.values[i] - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn nfft_matches_ndft() {
        let mut r = rng(11);
        for &k_max in &[16i64, 256] {
            for &n in &[10usize, 1000] {
                let grid = random_grid(&mut r, n);
                let w: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 2.0 - 1.0).collect();
                let w_l1: f64 = w.iter().map(|x| x.abs()).sum();
                let freqs: Vec<i64> = (-k_max..=k_max).collect();
                let exact = ndft_adjoint(&grid, &w, &freqs).unwrap();
                let fast = nfft_adjoint(&grid, &w, &freqs, 1e-8).unwrap();
                let worst = exact
                    .values
                    .iter()
                    .zip(&fast.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                assert!(
                    worst <= 1e-8 * w_l1,
                    "adjoint error {worst:e} at K={k_max}, N={n}"
                );

                let (freqs, spec) = symmetric_spectrum(&mut r, k_max);
                let v_l1: f64 = spec.values.iter().map(|z| z.norm()).sum();
                let exact = ndft_forward(&grid, &spec, &freqs).unwrap();
                let fast = nfft_forward(&grid, &spec, &freqs, 1e-8).unwrap();
                let worst = exact
                    .iter()
                    .zip(&fast)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(
                    worst <= 1e-8 * v_l1,
                    "forward error {worst:e} at K={k_max}, N={n}"
                );
            }
        }
    }

    #[test]
    fn nfft_degenerate_band() {
        // K = 0: the adjoint reduces to plain summation
        let grid = Grid1D::new(vec![0.3, -0.1, 0.05]).unwrap();
        let s = nfft_adjoint(&grid, &[1.0, 2.0, 3.0], &[0], 1e-8).unwrap();
        assert!((s.values[0] - Complex64::new(6.0, 0.0)).norm() < 1e-8 * 6.0);
        // zero weights give a zero spectrum
        let s = nfft_adjoint(&grid, &[0.0; 3], &[0], 1e-8).unwrap();
        assert_eq!(s.values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn nfft_rejects_scattered_freqs_and_impossible_accuracy() {
        let grid = Grid1D::new(vec![0.0]).unwrap();
        assert!(matches!(
            nfft_adjoint(&grid, &[1.0], &[-3, 0, 3], 1e-8),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            nfft_adjoint(&grid, &[1.0], &[-1, 0, 1], 1e-30),
            Err(Error::Config(_))
        ));
    }
}
