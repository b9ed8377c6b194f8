//! Damped least squares (Levenberg-Marquardt) with numeric Jacobians.
//!
//! Small and deliberately boring: dense normal equations via nalgebra, a
//! multiplicative damping schedule, bounded iterations and a relative step
//! tolerance. Enough for the handful-of-parameter fits in this crate.

use nalgebra::{DMatrix, DVector};

pub(crate) struct LmOptions {
    pub max_iterations: usize,
    pub relative_step_tol: f64,
    /// Per-parameter finite-difference steps (absolute).
    pub fd_steps: Vec<f64>,
}

impl LmOptions {
    pub fn new(fd_steps: Vec<f64>) -> Self {
        Self { max_iterations: 200, relative_step_tol: 1e-10, fd_steps }
    }
}

pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub chi2: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `(J^T J)^-1` at the optimum, when invertible.
    pub curvature_inverse: Option<DMatrix<f64>>,
    pub n_residuals: usize,
}

impl LmOutcome {
    /// Standard errors scaled by the residual variance,
    /// `sigma_j = sqrt([(J^T J)^-1]_jj * chi2 / (m - n))`.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.x.len();
        let dof = self.n_residuals.saturating_sub(n).max(1) as f64;
        let s2 = self.chi2 / dof;
        match &self.curvature_inverse {
            Some(ci) => (0..n).map(|j| (ci[(j, j)].max(0.0) * s2).sqrt()).collect(),
            None => vec![f64::NAN; n],
        }
    }
}

/// Minimize the sum of squared residuals of `f` starting from `x0`.
///
/// `f` writes `n_residuals` values into its output slice and may assume the
/// slice is zeroed. Returns the best point visited even when not converged.
pub(crate) fn minimize(
    f: &mut dyn FnMut(&[f64], &mut [f64]),
    x0: &[f64],
    n_residuals: usize,
    opts: &LmOptions,
) -> LmOutcome {
    let n = x0.len();
    assert_eq!(opts.fd_steps.len(), n, "one finite-difference step per parameter");
    let mut x = DVector::from_column_slice(x0);
    let mut r = DVector::zeros(n_residuals);
    let mut buf_hi = DVector::zeros(n_residuals);
    let mut buf_lo = DVector::zeros(n_residuals);

    let eval = |f: &mut dyn FnMut(&[f64], &mut [f64]), x: &DVector<f64>, out: &mut DVector<f64>| {
        out.fill(0.0);
        f(x.as_slice(), out.as_mut_slice());
    };

    eval(f, &x, &mut r);
    let mut chi2 = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = DMatrix::zeros(n_residuals, n);

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        // central-difference Jacobian at x
        for j in 0..n {
            let h = opts.fd_steps[j];
            let mut xp = x.clone();
            xp[j] += h;
            eval(f, &xp, &mut buf_hi);
            xp[j] = x[j] - h;
            eval(f, &xp, &mut buf_lo);
            for i in 0..n_residuals {
                jac[(i, j)] = (buf_hi[i] - buf_lo[i]) / (2.0 * h);
            }
        }
        let jt = jac.transpose();
        let h_mat = &jt * &jac;
        let g = &jt * &r;

        let mut stepped = false;
        for _ in 0..40 {
            let mut damped = h_mat.clone();
            for j in 0..n {
                let d = h_mat[(j, j)];
                damped[(j, j)] = d + lambda * if d > 0.0 { d } else { 1.0 };
            }
            let delta = match damped.clone().lu().solve(&(-&g)) {
                Some(d) => d,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let x_try = &x + &delta;
            eval(f, &x_try, &mut buf_hi);
            let chi2_try = buf_hi.norm_squared();
            if chi2_try.is_finite() && chi2_try < chi2 {
                let small_step = (0..n).all(|j| {
                    delta[j].abs() <= opts.relative_step_tol * (x[j].abs() + opts.fd_steps[j])
                });
                x = x_try;
                r.copy_from(&buf_hi);
                chi2 = chi2_try;
                lambda = (lambda * 0.1).max(1e-14);
                stepped = true;
                if small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged {
            break;
        }
        if !stepped {
            // no descent direction left; treat the current point as final
            converged = chi2.is_finite();
            break;
        }
    }

    // curvature at the final point
    for j in 0..n {
        let h = opts.fd_steps[j];
        let mut xp = x.clone();
        xp[j] += h;
        eval(f, &xp, &mut buf_hi);
        xp[j] = x[j] - h;
        eval(f, &xp, &mut buf_lo);
        for i in 0..n_residuals {
            jac[(i, j)] = (buf_hi[i] - buf_lo[i]) / (2.0 * h);
        }
    }
    let h_mat = jac.transpose() * &jac;
    let curvature_inverse = h_mat.try_inverse();

    LmOutcome {
        x: x.as_slice().to_vec(),
        chi2,
        converged,
        iterations,
        curvature_inverse,
        n_residuals,
    }
}
