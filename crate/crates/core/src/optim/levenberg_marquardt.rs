use nalgebra::{DMatrix, DVector};

/// A residual vector `r(x)` to be minimized in the sum of squares.
pub trait LeastSquares {
    fn residuals(&self, x: &[f64]) -> Vec<f64>;

    /// Analytic `∂r_i/∂x_j`; the default falls back to finite differences.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        finite_difference_jacobian(|p| self.residuals(p), x, 1e-7)
    }
}

/// Central-difference Jacobian with relative step `h`.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut p = x.to_vec();
    for j in 0..x.len() {
        let step = h * (1.0 + x[j].abs());
        p[j] = x[j] + step;
        let plus = f(&p);
        p[j] = x[j] - step;
        let minus = f(&p);
        p[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    jac
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step is below this.
    pub ftol: f64,
    /// Stop when the step norm relative to `‖x‖ + 1` is below this.
    pub xtol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-12,
            xtol: 1e-12,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// `Σ r_i²`.
    pub cost: f64,
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg–Marquardt with Marquardt diagonal scaling.
pub fn levenberg_marquardt<P: LeastSquares + ?Sized>(problem: &P, x0: &[f64], opts: &LmOptions) -> LmReport {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = problem.residuals(&x);
    let mut cost = sum_sq(&r);
    let initial_cost = cost;
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&x);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        if g.amax() < 1e-300 {
            converged = true;
            break;
        }
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = problem.residuals(&trial);
            let cost_trial = sum_sq(&r_trial);
            if cost_trial.is_finite() && cost_trial < cost {
                let decrease = (cost - cost_trial) / cost.max(1e-300);
                let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda / 3.0).max(1e-12);
                if decrease < opts.ftol || step.norm() < opts.xtol * (x_norm + 1.0) {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                // No descent direction left at machine precision.
                converged = true;
                break 'outer;
            }
        }
    }
    LmReport {
        x,
        cost,
        initial_cost,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Expo {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for Expo {
        fn residuals(&self, x: &[f64]) -> Vec<f64> {
            self.t
                .iter()
                .zip(&self.y)
                .map(|(t, y)| x[0] * (-x[1] * t).exp() - y)
                .collect()
        }
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y = t.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let rep = levenberg_marquardt(&Expo { t, y }, &[1.0, 0.1], &LmOptions::default());
        assert!(rep.converged);
        assert!((rep.x[0] - 2.5).abs() < 1e-8 && (rep.x[1] - 0.7).abs() < 1e-8);
    }
}
