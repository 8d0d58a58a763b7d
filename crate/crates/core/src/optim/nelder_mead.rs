use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len()
            || lower
                .iter()
                .zip(&upper)
                .any(|(l, u)| l.partial_cmp(u).map_or(true, |o| o.is_gt()))
        {
            return Err(Error::InvalidArgument("bounds must pair lower ≤ upper".into()));
        }
        Ok(Self { lower, upper })
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Converged when every vertex lies within `xtol` of the best one.
    pub xtol: f64,
    /// ... and the objective spread is below `ftol`.
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            xtol: 1e-10,
            ftol: 1e-14,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex minimization. Out-of-bounds trial points are
/// projected onto the box.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], bounds: Option<&Bounds>, opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let project = |mut x: Vec<f64>| {
        if let Some(b) = bounds {
            b.clamp(&mut x);
        }
        x
    };
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let start = project(x0.to_vec());
    simplex.push((start.clone(), eval(&start)));
    for i in 0..n {
        let mut x = start.clone();
        x[i] += step[i];
        let mut x = project(x);
        if x == start {
            x[i] -= step[i];
            x = project(x);
        }
        let v = eval(&x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = (simplex[n].1 - best.1).abs();
        if x_spread <= opts.xtol && f_spread <= opts.ftol.max(opts.ftol * best.1.abs()) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            project(centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect())
        };
        let worst = simplex[n].0.clone();
        let fw = simplex[n].1;
        let xr = along(alpha, &worst);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(gamma, &worst);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < fw {
                let xc = along(rho, &worst);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho, &worst);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fw.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = project(best.iter().zip(&v.0).map(|(b, x)| b + sigma * (x - b)).collect());
                    let fx = eval(&x);
                    *v = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], None, &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_bounds() {
        let b = Bounds::new(vec![0.5], vec![2.0]).unwrap();
        let m = nelder_mead(|x| x[0] * x[0], &[1.5], &[0.3], Some(&b), &NelderMeadOptions::default());
        assert!((m.x[0] - 0.5).abs() < 1e-9);
    }
}
