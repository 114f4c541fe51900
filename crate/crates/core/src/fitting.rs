//! Shared least-squares machinery: closed-form weighted linear fits and a
//! damped Gauss-Newton solver for the small nonlinear models used throughout
//! the analysis chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of a weighted straight-line fit y = intercept + slope * x.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_sigma: f64,
    pub intercept: f64,
    pub intercept_sigma: f64,
    /// [[var(intercept), cov], [cov, var(slope)]]
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
    pub dof: usize,
}

/// Weighted linear least squares with weights 1/sigma^2, solved by the normal
/// equations in closed form. Parameter uncertainties follow from the weights
/// alone (sigmas are taken as known, not rescaled by the residual chi-square).
pub fn weighted_linear_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() != sigma.len() {
        return Err(Error::invalid(
            "linear fit",
            format!("mismatched lengths: {} x, {} y, {} sigma", x.len(), y.len(), sigma.len()),
        ));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            what: "points",
            needed: 2,
            got: x.len(),
        });
    }
    for (i, &s) in sigma.iter().enumerate() {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(
                "linear fit",
                format!("sigma[{i}] must be positive and finite, got {s}"),
            ));
        }
    }

    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    let mut swxx = 0.0;
    let mut swxy = 0.0;
    for i in 0..x.len() {
        let w = 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    let det = sw * swxx - swx * swx;
    if !(det > 0.0) || det <= 1e-14 * sw * swxx {
        return Err(Error::RankDeficient {
            message: "abscissa values do not span a line (all x equal?)".into(),
        });
    }

    let slope = (sw * swxy - swx * swy) / det;
    let intercept = (swxx * swy - swx * swxy) / det;
    let var_slope = sw / det;
    let var_intercept = swxx / det;
    let cov = -swx / det;

    let chi2: f64 = x
        .iter()
        .zip(y)
        .zip(sigma)
        .map(|((&xi, &yi), &si)| {
            let r = (yi - intercept - slope * xi) / si;
            r * r
        })
        .sum();

    Ok(LinearFit {
        slope,
        slope_sigma: var_slope.sqrt(),
        intercept,
        intercept_sigma: var_intercept.sqrt(),
        covariance: [[var_intercept, cov], [cov, var_slope]],
        chi2,
        dof: x.len() - 2,
    })
}

/// Unweighted straight-line slope; used where a deliberately naive fit is part
/// of the model (apparent heating rate over a delay grid).
pub fn unweighted_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let sigma = vec![1.0; x.len()];
    Ok(weighted_linear_fit(x, y, &sigma)?.slope)
}

/// Options for the damped Gauss-Newton solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative parameter step below which the fit is converged.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            step_tolerance: 1e-10,
        }
    }
}

/// Outcome of a nonlinear least-squares fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: Vec<f64>,
    /// 1-sigma parameter uncertainties from the local quadratic approximation
    /// (inverse of J^T J in units of the weighted residuals).
    pub sigmas: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub iterations: usize,
    pub at_lower_bound: Vec<bool>,
    pub at_upper_bound: Vec<bool>,
    /// Set when J^T J needed ridge regularization to invert; the sigmas of
    /// unconstrained directions are then only order-of-magnitude.
    pub degenerate_covariance: bool,
}

/// Damped Gauss-Newton (Levenberg) minimization of sum(residuals^2) with box
/// bounds. The residual closure must fold in any per-point weighting.
///
/// `scales` sets the finite-difference step and the denominator of the
/// relative-step convergence test per parameter; pass a typical magnitude.
pub fn fit_least_squares<F>(
    residuals: F,
    initial: &[f64],
    lower: &[f64],
    upper: &[f64],
    scales: &[f64],
    options: &FitOptions,
) -> Result<FitOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let np = initial.len();
    if np == 0 || lower.len() != np || upper.len() != np || scales.len() != np {
        return Err(Error::invalid("fit", "parameter/bound/scale lengths must match"));
    }
    for j in 0..np {
        if !(lower[j] <= upper[j]) {
            return Err(Error::invalid("fit", format!("bounds inverted for parameter {j}")));
        }
        if !(scales[j] > 0.0) {
            return Err(Error::invalid("fit", format!("scale for parameter {j} must be > 0")));
        }
    }

    let clamp = |p: &mut [f64]| {
        for j in 0..np {
            p[j] = p[j].clamp(lower[j], upper[j]);
        }
    };

    let mut params = initial.to_vec();
    clamp(&mut params);

    let mut res = residuals(&params);
    if res.len() < np {
        return Err(Error::InsufficientData {
            what: "residuals",
            needed: np,
            got: res.len(),
        });
    }
    let mut cost = dot(&res, &res);
    if !cost.is_finite() {
        return Err(Error::invalid("fit", "residuals not finite at the initial point"));
    }

    let mut lambda = 1e-3;
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        let jac = jacobian(&residuals, &params, lower, upper, scales, &res);
        let (h, g) = normal_equations(&jac, &res);

        // Inner damping loop: inflate lambda until a step reduces the cost.
        let mut accepted = false;
        loop {
            let mut damped = h.clone();
            for j in 0..np {
                let d = h[j][j].max(1e-30);
                damped[j][j] = h[j][j] + lambda * d;
            }
            let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2);
            if let Some(step) = solve(&damped, &g) {
                let mut trial: Vec<f64> = (0..np).map(|j| params[j] - step[j]).collect();
                clamp(&mut trial);
                // When the raw step runs into a bound, the clamped point is
                // not the constrained optimum of the quadratic model: fix the
                // clamped parameters on their bounds and re-solve for the
                // rest.
                let raw: Vec<f64> = (0..np).map(|j| params[j] - step[j]).collect();
                if raw != trial {
                    let fixed: Vec<bool> = (0..np).map(|j| raw[j] != trial[j]).collect();
                    if let Some(projected) =
                        solve_with_fixed(&damped, &g, &params, &trial, &fixed)
                    {
                        let mut projected = projected;
                        clamp(&mut projected);
                        candidates.push(projected);
                    }
                }
                candidates.push(trial);
            }
            let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
            let mut any_moved = false;
            for trial in candidates {
                if trial == params {
                    continue;
                }
                any_moved = true;
                let trial_res = residuals(&trial);
                let trial_cost = dot(&trial_res, &trial_res);
                if trial_cost.is_finite()
                    && trial_cost <= cost
                    && best.as_ref().map_or(true, |b| trial_cost < b.2)
                {
                    best = Some((trial, trial_res, trial_cost));
                }
            }
            if let Some((trial, trial_res, trial_cost)) = best {
                last_step = (0..np)
                    .map(|j| (trial[j] - params[j]).abs() / params[j].abs().max(scales[j]))
                    .fold(0.0, f64::max);
                params = trial;
                res = trial_res;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            if !any_moved {
                // Fully pinned against the bounds: nothing left to do.
                last_step = 0.0;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }

        if !accepted && last_step > 0.0 {
            // Could not find a descent direction; treat the current point as
            // the optimum only if we are already inside tolerance.
            break;
        }
        if last_step < options.step_tolerance {
            converged = true;
            break;
        }
    }

    if !converged && last_step >= options.step_tolerance {
        return Err(Error::NonConvergence {
            iterations,
            last_step,
        });
    }

    // Uncertainties from the quadratic approximation at the optimum.
    let jac = jacobian(&residuals, &params, lower, upper, scales, &res);
    let (h, _) = normal_equations(&jac, &res);
    let (covariance, degenerate) = invert_with_ridge(&h);
    let sigmas: Vec<f64> = (0..np)
        .map(|j| covariance[j][j].max(0.0).sqrt())
        .collect();

    let tol_bound = |j: usize| 1e-12 * scales[j].max(params[j].abs());
    let at_lower_bound: Vec<bool> = (0..np).map(|j| params[j] - lower[j] <= tol_bound(j)).collect();
    let at_upper_bound: Vec<bool> = (0..np).map(|j| upper[j] - params[j] <= tol_bound(j)).collect();

    Ok(FitOutcome {
        params,
        sigmas,
        covariance,
        chi2: cost,
        iterations,
        at_lower_bound,
        at_upper_bound,
        degenerate_covariance: degenerate,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward-difference Jacobian, flipping to backward steps at the bounds.
fn jacobian<F>(
    residuals: &F,
    params: &[f64],
    lower: &[f64],
    upper: &[f64],
    scales: &[f64],
    base: &[f64],
) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let np = params.len();
    let nr = base.len();
    let rel = f64::EPSILON.sqrt();
    let mut jac = vec![vec![0.0; np]; nr];
    let mut work = params.to_vec();
    for j in 0..np {
        let mut h = rel * params[j].abs().max(scales[j]);
        if params[j] + h > upper[j] {
            h = -h;
        }
        if params[j] + h < lower[j] {
            // Parameter squeezed into a degenerate interval; column stays 0.
            continue;
        }
        work[j] = params[j] + h;
        let shifted = residuals(&work);
        work[j] = params[j];
        let inv_h = 1.0 / h;
        for i in 0..nr {
            jac[i][j] = (shifted[i] - base[i]) * inv_h;
        }
    }
    jac
}

/// H = J^T J and g = J^T r.
fn normal_equations(jac: &[Vec<f64>], res: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let np = jac.first().map_or(0, Vec::len);
    let mut h = vec![vec![0.0; np]; np];
    let mut g = vec![0.0; np];
    for (row, &r) in jac.iter().zip(res) {
        for j in 0..np {
            g[j] += row[j] * r;
            for k in j..np {
                h[j][k] += row[j] * row[k];
            }
        }
    }
    for j in 0..np {
        for k in 0..j {
            h[j][k] = h[k][j];
        }
    }
    (h, g)
}

/// Gaussian elimination with partial pivoting.
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot <= 0.0 || !pivot.is_finite() {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Constrained quadratic-model step: parameters flagged `fixed` move exactly
/// to `target`; the others minimize the damped model with that movement
/// folded into the right-hand side. Returns the full trial point.
fn solve_with_fixed(
    damped: &[Vec<f64>],
    g: &[f64],
    params: &[f64],
    target: &[f64],
    fixed: &[bool],
) -> Option<Vec<f64>> {
    let np = params.len();
    let free: Vec<usize> = (0..np).filter(|&j| !fixed[j]).collect();
    if free.is_empty() || free.len() == np {
        return None;
    }
    let delta_fixed: Vec<f64> = (0..np)
        .map(|j| if fixed[j] { target[j] - params[j] } else { 0.0 })
        .collect();
    let nf = free.len();
    let mut a = vec![vec![0.0; nf]; nf];
    let mut b = vec![0.0; nf];
    for (fi, &j) in free.iter().enumerate() {
        let mut rhs = -g[j];
        for k in 0..np {
            if fixed[k] {
                rhs -= damped[j][k] * delta_fixed[k];
            }
        }
        b[fi] = rhs;
        for (fk, &k) in free.iter().enumerate() {
            a[fi][fk] = damped[j][k];
        }
    }
    let delta_free = solve(&a, &b)?;
    let mut trial = params.to_vec();
    for j in 0..np {
        if fixed[j] {
            trial[j] = target[j];
        }
    }
    for (fi, &j) in free.iter().enumerate() {
        trial[j] += delta_free[fi];
    }
    Some(trial)
}

/// Invert a symmetric positive semidefinite matrix, adding an escalating
/// ridge when it is singular (flat fit directions). Returns the inverse and
/// whether regularization was needed.
fn invert_with_ridge(h: &[Vec<f64>]) -> (Vec<Vec<f64>>, bool) {
    let n = h.len();
    let max_diag = (0..n).map(|j| h[j][j]).fold(0.0f64, f64::max).max(1e-300);
    for (attempt, tau) in [0.0, 1e-12, 1e-9, 1e-6, 1e-3].iter().enumerate() {
        let mut m = h.to_vec();
        for j in 0..n {
            m[j][j] += tau * max_diag;
        }
        let mut inv = vec![vec![0.0; n]; n];
        let mut ok = true;
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            match solve(&m, &e) {
                Some(x) => {
                    for row in 0..n {
                        inv[row][col] = x[row];
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return (inv, attempt > 0);
        }
    }
    // Hopeless: report infinite uncertainty rather than panicking.
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        inv[j][j] = f64::INFINITY;
    }
    (inv, true)
}
