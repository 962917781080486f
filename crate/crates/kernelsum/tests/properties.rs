//! Cross-module properties that tie the approximation layers together.

use kernelsum::baselines::per_summand_error;
use kernelsum::fastsum::{fourier_fastsum, Engine, Rescaling};
use kernelsum::kernels::{auto_kmax, gaussian_fourier_transform, select_coeff_set};
use kernelsum::slicer::{sliced_kernel_sum, SliceBatchConfig, SliceOptions};
use kernelsum::specfun::CompensatedSum;
use kernelsum::{KernelSpec, PointSet};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi
/// rotations; plenty for a 20×20 Gram matrix.
fn min_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

/// The sliced approximation of a positive definite kernel stays (numerically)
/// positive definite: the P-direction Gram matrix of 20 random points has
/// smallest eigenvalue above -1e-6.
#[test]
fn sliced_gaussian_gram_matrix_stays_positive() {
    let dim = 8;
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let data: Vec<f64> = (0..n * dim)
        .map(|_| 0.3 * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let pts = PointSet::new(data, n, dim).unwrap();
    let spec = KernelSpec::gaussian(0.5, dim).unwrap();
    // column j of the approximate Gram matrix is the sliced sum with a unit
    // weight on point j; a fixed seed reuses the same directions per column
    let mut gram = vec![vec![0.0f64; n]; n];
    for j in 0..n {
        let mut w = vec![0.0; n];
        w[j] = 1.0;
        let col = sliced_kernel_sum(
            &spec,
            &pts,
            &pts,
            &w,
            2000,
            7,
            SliceBatchConfig::for_directions(2000),
            &SliceOptions::default(),
        )
        .unwrap();
        for i in 0..n {
            gram[i][j] = col.values[i];
        }
    }
    // symmetrize away the tiny fast-sum asymmetry before the eigensolve
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (gram[i][j] + gram[j][i]);
            gram[i][j] = avg;
            gram[j][i] = avg;
        }
    }
    let lambda_min = min_eigenvalue(gram);
    assert!(
        lambda_min > -1e-6,
        "smallest Gram eigenvalue {lambda_min:e}"
    );
}

/// Dense evaluator of the Gaussian counterpart through its closed-form
/// transform (trapezoid at spacing 1/4); stays accurate where the power
/// series cancels catastrophically.
fn counterpart_dense(sigma: f64, dim: usize) -> impl Fn(f64) -> f64 {
    let h = 0.25;
    let mut weights = Vec::new();
    let mut peak = 0.0f64;
    let mut j = 0i64;
    loop {
        let c = gaussian_fourier_transform(sigma, dim, j as f64 * h).unwrap();
        peak = peak.max(c);
        weights.push(c);
        if j as f64 * h > (dim as f64).sqrt() / (2.0 * PI * sigma) && c < 1e-22 * peak {
            break;
        }
        j += 1;
    }
    move |u: f64| {
        let mut acc = CompensatedSum::new();
        acc.add(weights[0]);
        for (j, &c) in weights.iter().enumerate().skip(1) {
            acc.add(2.0 * c * (2.0 * PI * j as f64 * h * u).cos());
        }
        h * acc.value()
    }
}

/// The Fourier fast sum can never be worse than N·max|w| times the uniform
/// coefficient-truncation error of the profile it sums.
#[test]
fn fourier_fastsum_error_respects_truncation_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 400;
    let sigma_t = 0.05;
    let dim = 20;
    let x: Vec<f64> = (0..n).map(|_| 0.4 * rng.random::<f64>() - 0.2).collect();
    let y: Vec<f64> = (0..n).map(|_| 0.4 * rng.random::<f64>() - 0.2).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let set = select_coeff_set(sigma_t, dim, 1e-8, auto_kmax(sigma_t, dim, 1e-8).unwrap()).unwrap();
    let t = fourier_fastsum(&x, &y, &w, &set, Engine::Ndft).unwrap();
    let f_dense = counterpart_dense(sigma_t, dim);
    let mut truncation = 0.0f64;
    for i in 0..=4000 {
        let u = -0.5 + i as f64 / 4000.0;
        truncation = truncation.max((set.eval_series(u) - f_dense(u)).abs());
    }
    let w_max = w.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let bound = n as f64 * truncation * w_max + 1e-10;
    let worst = y
        .iter()
        .enumerate()
        .map(|(m, &ym)| {
            let mut acc = CompensatedSum::new();
            for (&xn, &wn) in x.iter().zip(&w) {
                acc.add(wn * f_dense(xn - ym));
            }
            (t[m] - acc.value()).abs()
        })
        .fold(0.0f64, f64::max);
    assert!(
        worst <= bound,
        "fast-sum deviation {worst:e} above N·max|φ−series|·max|w| = {bound:e}"
    );
}

/// Rescaling keeps the mapped data strictly inside the period for random
/// bounds and caps.
#[test]
fn rescaling_containment_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let a = rng.random::<f64>() * 20.0 - 10.0;
        let b = a + rng.random::<f64>() * 20.0;
        let t_half = 0.05 + 0.19 * rng.random::<f64>();
        let cap = 10f64.powf(rng.random::<f64>() * 4.0 - 3.0);
        let map = Rescaling::from_bounds_capped(a, b, t_half, cap).unwrap();
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let v = map.apply(a + frac * (b - a));
            assert!(v.abs() <= t_half + 1e-12, "mapped {v} outside ±{t_half}");
        }
        assert!(map.tau <= cap * (1.0 + 1e-12) || (b - a) == 0.0);
    }
}

/// Per-summand error of the sliced sum stays within twice the expectation
/// envelope on repeated draws (the envelope is per kernel evaluation, so the
/// averaged sum sits well inside it).
#[test]
fn sliced_error_within_expectation_envelope() {
    use kernelsum::baselines::exact_sum;
    use kernelsum::slicer::slicing_error_bound;
    let dim = 30;
    let (x, y, w) = kernelsum::bench::gen_data(300, 300, dim, 5).unwrap();
    for spec in [
        KernelSpec::gaussian(0.5, dim).unwrap(),
        KernelSpec::negative_distance(dim).unwrap(),
    ] {
        let truth = exact_sum(&spec, &x, &y, &w).unwrap();
        let p = 512;
        let mut mean = 0.0;
        for rep in 0..5 {
            let s = sliced_kernel_sum(
                &spec,
                &x,
                &y,
                &w,
                p,
                100 + rep,
                SliceBatchConfig::for_directions(p),
                &SliceOptions::default(),
            )
            .unwrap();
            mean += per_summand_error(&truth, &s.values, &w);
        }
        mean /= 5.0;
        let diam = 2.0 * x.max_norm().max(y.max_norm());
        let bound = slicing_error_bound(&spec, p, diam).unwrap();
        assert!(
            mean <= 2.0 * bound.value,
            "{}: mean error {mean:e} above 2x envelope {:e}",
            spec.family_tag(),
            bound.value
        );
    }
}
