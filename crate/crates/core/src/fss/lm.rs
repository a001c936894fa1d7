use faer::linalg::solvers::Solve;
use faer::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once an accepted step lowers χ² by less than this fraction.
    pub rel_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, rel_tol: 1e-12, initial_damping: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmOutcome {
    pub theta: Vec<f64>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank_deficient: bool,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F: FnMut(&[f64], &mut [f64])>(theta: &[f64], m: usize, f: &mut F) -> Mat<f64> {
    let p = theta.len();
    let mut jac = Mat::zeros(m, p);
    let mut t = theta.to_vec();
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    for j in 0..p {
        let h = 1e-6 * (1.0 + theta[j].abs());
        t[j] = theta[j] + h;
        f(&t, &mut plus);
        t[j] = theta[j] - h;
        f(&t, &mut minus);
        t[j] = theta[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Damped Gauss-Newton minimization of `Σ rᵢ²`. Steps are accepted only if
/// they lower the objective; the damping shrinks after an accepted step and
/// grows after a rejected one.
pub fn levenberg_marquardt<F: FnMut(&[f64], &mut [f64])>(
    theta0: &[f64],
    m: usize,
    opts: &LmOptions,
    mut f: F,
) -> LmOutcome {
    let p = theta0.len();
    let mut theta = theta0.to_vec();
    let mut r = vec![0.0; m];
    f(&theta, &mut r);
    let mut chi2 = sum_sq(&r);
    let mut mu = opts.initial_damping;
    let mut trial = vec![0.0; p];
    let mut r_trial = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&theta, m, &mut f);
    if !chi2.is_finite() {
        return LmOutcome { theta, chi2, iterations, converged, rank_deficient: false };
    }

    'outer: while iterations < opts.max_iter {
        iterations += 1;
        let jt = jac.transpose();
        let a: Mat<f64> = jt * &jac;
        let mut g: Mat<f64> = Mat::zeros(p, 1);
        for j in 0..p {
            g[(j, 0)] = (0..m).map(|i| jac[(i, j)] * r[i]).sum();
        }
        let gmax = (0..p).map(|j| g[(j, 0)].abs()).fold(0.0, f64::max);
        if gmax <= 1e-14 * (1.0 + chi2) {
            converged = true;
            break;
        }
        let dmax = (0..p).map(|j| a[(j, j)]).fold(0.0, f64::max).max(1e-300);
        loop {
            let mut damped = a.clone();
            for j in 0..p {
                damped[(j, j)] += mu * a[(j, j)].max(1e-12 * dmax);
            }
            let step = damped.partial_piv_lu().solve(&g);
            for j in 0..p {
                trial[j] = theta[j] - step[(j, 0)];
            }
            f(&trial, &mut r_trial);
            let c = sum_sq(&r_trial);
            if c.is_finite() && c < chi2 {
                let drop = chi2 - c;
                theta.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut r_trial);
                chi2 = c;
                mu = (mu / 3.0).max(1e-15);
                jac = jacobian(&theta, m, &mut f);
                if drop <= opts.rel_tol * chi2 {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            mu *= 4.0;
            if mu > 1e15 {
                // no descent direction left at this precision
                converged = true;
                break 'outer;
            }
        }
    }
    let rank_deficient = match jac.thin_svd() {
        Ok(svd) => {
            let s = svd.S().column_vector();
            let smax = (0..s.nrows()).map(|i| s[i]).fold(0.0, f64::max);
            let smin = (0..s.nrows()).map(|i| s[i]).fold(f64::INFINITY, f64::min);
            smax == 0.0 || smin < 1e-12 * smax
        }
        Err(_) => true,
    };
    LmOutcome { theta, chi2, iterations, converged, rank_deficient }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential() {
        // y = 2 e^{−0.5 x}
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-0.5 * x).exp()).collect();
        let o = levenberg_marquardt(&[1.0, -0.1], xs.len(), &LmOptions::default(), |t, r| {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri = ys[i] - t[0] * (t[1] * xs[i]).exp();
            }
        });
        assert!(o.converged);
        assert!((o.theta[0] - 2.0).abs() < 1e-8);
        assert!((o.theta[1] + 0.5).abs() < 1e-8);
        assert!(!o.rank_deficient);
    }
}
