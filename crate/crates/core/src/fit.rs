//! Small dense Levenberg–Marquardt least squares with a finite-difference
//! Jacobian, plus the two line-shape models used by the solver and spectra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Parameter covariance scaled by the residual variance.
    pub covariance: DMatrix<f64>,
    pub sum_sq: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the relative decrease of the residual sum falls below this.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-14,
        }
    }
}

/// Minimises Σ (model(x_i, p) − y_i)².
pub fn levenberg_marquardt<F>(
    xs: &[f64],
    ys: &[f64],
    initial: &[f64],
    model: F,
    options: FitOptions,
) -> Result<FitResult>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let n = xs.len();
    let p = initial.len();
    if n != ys.len() || n <= p {
        return Err(Error::Numerical(format!(
            "fit needs more points ({n}) than parameters ({p}) and matching lengths"
        )));
    }
    let residuals = |params: &[f64]| -> DVector<f64> {
        DVector::from_iterator(n, xs.iter().zip(ys).map(|(&x, &y)| model(x, params) - y))
    };
    let jacobian = |params: &[f64]| -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(n, p);
        let mut work = params.to_vec();
        for j in 0..p {
            let h = 1e-7 * params[j].abs().max(1e-7);
            work[j] = params[j] + h;
            let plus: Vec<f64> = xs.iter().map(|&x| model(x, &work)).collect();
            work[j] = params[j] - h;
            for (i, &x) in xs.iter().enumerate() {
                jac[(i, j)] = (plus[i] - model(x, &work)) / (2.0 * h);
            }
            work[j] = params[j];
        }
        jac
    };

    let mut params = initial.to_vec();
    let mut r = residuals(&params);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::Numerical("non-finite residual at the initial guess".into()));
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for iter in 0..options.max_iterations {
        iterations = iter + 1;
        let jac = jacobian(&params);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..p {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = residuals(&trial);
            let c_trial = r_trial.norm_squared();
            if c_trial.is_finite() && c_trial <= cost {
                let rel = (cost - c_trial) / cost.max(1e-300);
                params = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < options.tolerance {
                    return finish(params, &jacobian, cost, n, p, iterations);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    finish(params, &jacobian, cost, n, p, iterations)
}

fn finish<J>(
    params: Vec<f64>,
    jacobian: &J,
    cost: f64,
    n: usize,
    p: usize,
    iterations: usize,
) -> Result<FitResult>
where
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let jac = jacobian(&params);
    let jtj = jac.transpose() * &jac;
    let variance = cost / (n - p) as f64;
    let covariance = jtj
        .try_inverse()
        .map(|inv| inv * variance)
        .unwrap_or_else(|| DMatrix::from_element(p, p, f64::INFINITY));
    Ok(FitResult {
        params,
        covariance,
        sum_sq: cost,
        iterations,
    })
}

/// Breit–Wigner phase on a linear background:
/// δ(E) = c₀ + c₁(E − E_ref) + atan(2(E − E_r)/Γ). Parameters `[E_r, Γ, c₀, c₁]`.
pub fn breit_wigner_phase(energy: f64, params: &[f64], reference: f64) -> f64 {
    let (er, width, c0, c1) = (params[0], params[1], params[2], params[3]);
    c0 + c1 * (energy - reference) + (2.0 * (energy - er) / width).atan()
}

/// Lorentzian peak on a constant background: A·w²/((x − x₀)² + w²) + b.
/// Parameters `[x₀, w (HWHM), A, b]`.
pub fn lorentzian(x: f64, params: &[f64]) -> f64 {
    let (x0, w, a, b) = (params[0], params[1], params[2], params[3]);
    a * w * w / ((x - x0).powi(2) + w * w) + b
}
