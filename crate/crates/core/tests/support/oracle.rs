//! Independent checks of the quadratic unit against its algebraic definition.

use qmlp::nn::{Adam, Matrix};
use qmlp::quadratic::{ExplicitQuadratic, QuadraticNeuron};
use qmlp::rng::{rng_from, Rng};
use rand::Rng as _;

pub const HOMOGENEITY_TOL: f64 = 1e-12;
pub const RANK_ONE_TOL: f64 = 1e-10;
pub const FIT_MSE_TOL: f64 = 1e-10;

fn uniform(rng: &mut Rng, rows: usize, cols: usize, r: f64) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.random_range(-r..=r)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn random_unit(rng: &mut Rng, n: usize, n_f: usize, out: usize) -> QuadraticNeuron<f64> {
    QuadraticNeuron::from_parts(
        uniform(rng, n_f, n, 1.0),
        uniform(rng, n_f, n, 1.0),
        uniform(rng, out, n_f, 1.0),
        Matrix::zeros(out, 1),
    )
    .unwrap()
}

fn abs_dot(row: &[f64], x: &[f64]) -> f64 {
    row.iter().zip(x).map(|(a, b)| (a * b).abs()).sum()
}

/// `features(λx)` against `λ² features(x)`. The error of each feature is
/// measured relative to `λ² (|a|·|x|)(|b|·|x|)`, the magnitude its
/// projections are summed from, so cancellation inside a projection does not
/// masquerade as a homogeneity failure.
pub fn homogeneity(trials: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng_from(seed);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let n = rng.random_range(1..=10);
        let n_f = rng.random_range(1..=10);
        let q = random_unit(&mut rng, n, n_f, 1);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let lambda = if t % 2 == 0 { 2.0 } else { rng.random_range(-5.0..=5.0) };
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let f = q.features(&Matrix::column(&x)).unwrap();
        let g = q.features(&Matrix::column(&scaled)).unwrap();
        for k in 0..n_f {
            let mag = lambda * lambda
                * abs_dot(q.theta_prime.value.row_slice(k), &x)
                * abs_dot(q.theta_double_prime.value.row_slice(k), &x);
            if mag == 0.0 {
                continue;
            }
            let err = (g[(k, 0)] - lambda * lambda * f[(k, 0)]).abs() / mag;
            worst = worst.max(err);
            if err > HOMOGENEITY_TOL {
                return Err(format!("trial {t}: feature {k} relative error {err:.2e} at λ = {lambda}"));
            }
        }
    }
    Ok(worst)
}

/// Factorized features against the folded upper-triangular explicit form.
pub fn rank_one_equivalence(trials: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng_from(seed);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let n = rng.random_range(1..=10);
        let n_f = rng.random_range(1..=6);
        let q = random_unit(&mut rng, n, n_f, 1);
        let explicit =
            ExplicitQuadratic::from_factorized(&q.theta_prime.value, &q.theta_double_prime.value).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
            let f = q.features(&Matrix::column(&x)).unwrap();
            let e = explicit.forward(&x).unwrap();
            for k in 0..n_f {
                let err = (f[(k, 0)] - e[k]).abs();
                worst = worst.max(err);
                if err > RANK_ONE_TOL {
                    return Err(format!("trial {t}: feature {k} differs by {err:.2e}"));
                }
            }
        }
    }
    Ok(worst)
}

/// Fits a single-output unit with `n_f` features to `xᵀMx + c` on generic
/// points by full-batch Adam on the mean squared error. Returns the final MSE.
pub fn fit_quadratic_target(n: usize, n_f: usize, seed: u64, iterations: usize) -> f64 {
    let mut rng = rng_from(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let c: f64 = rng.random_range(-1.0..=1.0);
    let points = 2 * (n * (n + 1) / 2 + 1);
    let x = uniform(&mut rng, n, points, 1.0);
    let target: Vec<f64> = (0..points)
        .map(|p| {
            let xp = x.column_vec(p);
            let mut y = c;
            for i in 0..n {
                for j in 0..n {
                    y += xp[i] * m[(i, j)] * xp[j];
                }
            }
            y
        })
        .collect();

    let mut q = QuadraticNeuron::from_parts(
        uniform(&mut rng, n_f, n, 0.5),
        uniform(&mut rng, n_f, n, 0.5),
        uniform(&mut rng, 1, n_f, 0.5),
        Matrix::zeros(1, 1),
    )
    .unwrap();
    let mse = |q: &QuadraticNeuron<f64>| {
        let y = q.predict(&x).unwrap();
        y.as_slice().iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / points as f64
    };
    for it in 0..iterations {
        // Adam moves every weight by roughly `lr` per step however small the
        // gradient, so the error floor tracks the final rate; decay it
        // geometrically from 1e-2 to 1e-7.
        let lr = 1e-2 * 1e-5f64.powf(it as f64 / iterations as f64);
        let y = q.forward(&x).unwrap();
        let grad: Vec<f64> = y
            .as_slice()
            .iter()
            .zip(&target)
            .map(|(a, b)| 2.0 * (a - b) / points as f64)
            .collect();
        q.backward(&Matrix::from_vec(1, points, grad).unwrap()).unwrap();
        Adam::with_lr(lr).step(&mut q.params_mut()).unwrap();
    }
    mse(&q)
}

pub const FIT_ITERATIONS: usize = 20_000;

/// Worst final MSE over `N = 1..=6` with `n_f = N`.
pub fn polynomial_exactness(seed: u64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let mse = fit_quadratic_target(n, n, seed + n as u64, FIT_ITERATIONS);
        worst = worst.max(mse);
        if !(mse <= FIT_MSE_TOL) {
            return Err(format!("N = {n}, n_f = {n}: final MSE {mse:.3e}"));
        }
    }
    Ok(worst)
}
