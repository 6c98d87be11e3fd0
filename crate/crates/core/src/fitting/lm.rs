//! Levenberg–Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost decrease below which an accepted step counts as converged.
    pub ftol: f64,
    /// Step-norm tolerance, relative to the parameter norm.
    pub xtol: f64,
    /// Infinity-norm gradient tolerance.
    pub gtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            ftol: 1e-10,
            xtol: 1e-12,
            gtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: DVector<f64>,
    /// Half the residual sum of squares.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes ½‖r(x)‖². `model` fills the residual vector and its Jacobian.
pub fn minimize<F>(x0: DVector<f64>, m: usize, options: &LmOptions, mut model: F) -> LmReport
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>, Option<&mut DMatrix<f64>>),
{
    let n = x0.len();
    let mut x = x0;
    let mut r = DVector::zeros(m);
    let mut j = DMatrix::zeros(m, n);
    model(&x, &mut r, Some(&mut j));
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut trial_r = DVector::zeros(m);

    if n == 0 {
        return LmReport { x, cost, iterations: 0, converged: true };
    }

    for iter in 1..=options.max_iterations {
        let g = j.transpose() * &r;
        if g.amax() <= options.gtol || cost == 0.0 {
            return LmReport { x, cost, iterations: iter - 1, converged: true };
        }
        let jtj = j.transpose() * &j;
        let diag_scale: Vec<f64> = (0..n).map(|i| jtj[(i, i)].max(1e-12)).collect();

        loop {
            let mut a = jtj.clone();
            for (i, d) in diag_scale.iter().enumerate() {
                a[(i, i)] += lambda * d;
            }
            let step = match a.cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        return LmReport { x, cost, iterations: iter, converged: false };
                    }
                    continue;
                }
            };
            if step.norm() <= options.xtol * (x.norm() + options.xtol) {
                return LmReport { x, cost, iterations: iter, converged: true };
            }
            let trial = &x + &step;
            model(&trial, &mut trial_r, None);
            let trial_cost = 0.5 * trial_r.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let decrease = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                model(&x, &mut r, Some(&mut j));
                cost = 0.5 * r.norm_squared();
                lambda = (lambda / 10.0).max(1e-15);
                if decrease < options.ftol {
                    return LmReport { x, cost, iterations: iter, converged: true };
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // no descent direction left at machine precision
                return LmReport { x, cost, iterations: iter, converged: true };
            }
        }
    }
    LmReport { x, cost, iterations: options.max_iterations, converged: false }
}
