//! A compact limited-memory BFGS minimizer with a weak-Wolfe line search.
//!
//! Good enough for the low-dimensional, smooth likelihood surfaces fitted in
//! [`super`]: a handful of parameters, analytic gradients, and objective
//! evaluations that may return `+inf` for infeasible iterates (which the line
//! search treats as a failed trial and brackets away from). The curvature
//! condition keeps every stored `(s, y)` pair positive so the inverse-Hessian
//! model stays well defined even through Rosenbrock-style curved valleys.

/// Outcome of a minimization run.
#[derive(Clone, Debug)]
pub(crate) struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const HISTORY: usize = 8;
const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_LINE_SEARCH: usize = 60;

/// Minimizes `f` starting from `x0`. `f` writes the gradient into its second
/// argument and returns the objective value; non-finite values mark infeasible
/// points. Terminates on a gradient max-norm below `grad_tol`, on a relative
/// objective decrease below `1e-13` across an iteration, on line-search
/// failure, or after `max_iters` iterations.
pub(crate) fn minimize<F>(
    mut f: F,
    x0: &[f64],
    max_iters: usize,
    grad_tol: f64,
) -> MinimizeResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() {
        return MinimizeResult {
            x,
            value: fx,
            iterations: 0,
            converged: false,
        };
    }

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut stalls = 0usize;

    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();

    for iter in 0..max_iters {
        if inf_norm(&g) <= grad_tol {
            return MinimizeResult {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }

        // Two-loop recursion for d = -H g.
        let mut d: Vec<f64> = g.iter().map(|&v| -v).collect();
        let mut alphas = vec![0.0; s_hist.len()];
        for k in (0..s_hist.len()).rev() {
            let alpha = rho_hist[k] * dot(&s_hist[k], &d);
            alphas[k] = alpha;
            for j in 0..n {
                d[j] -= alpha * y_hist[k][j];
            }
        }
        if let Some(k) = s_hist.len().checked_sub(1) {
            let gamma = dot(&s_hist[k], &y_hist[k]) / dot(&y_hist[k], &y_hist[k]);
            if gamma.is_finite() && gamma > 0.0 {
                for v in &mut d {
                    *v *= gamma;
                }
            }
        }
        for k in 0..s_hist.len() {
            let beta = rho_hist[k] * dot(&y_hist[k], &d);
            for j in 0..n {
                d[j] += s_hist[k][j] * (alphas[k] - beta);
            }
        }

        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Not a descent direction; fall back to steepest descent.
            d = g.iter().map(|&v| -v).collect();
            slope = -dot(&g, &g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Weak-Wolfe line search: bracket a step that both decreases the
        // objective (Armijo) and flattens the directional derivative enough
        // (curvature), bisecting between the two failure modes. The curvature
        // condition guarantees `s^T y > 0` for the accepted step.
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut step = 1.0f64;
        let mut x_new = vec![0.0; n];
        let mut g_new = vec![0.0; n];
        let mut f_new = f64::INFINITY;
        let mut accepted = false;
        for _ in 0..MAX_LINE_SEARCH {
            for j in 0..n {
                x_new[j] = x[j] + step * d[j];
            }
            f_new = f(&x_new, &mut g_new);
            if !(f_new.is_finite() && f_new <= fx + ARMIJO_C1 * step * slope) {
                hi = step;
            } else if dot(&g_new, &d) < WOLFE_C2 * slope {
                lo = step;
            } else {
                accepted = true;
                break;
            }
            step = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * step };
            if !(step > 0.0) || !step.is_finite() {
                break;
            }
        }
        if !accepted && lo > 0.0 {
            // The budget ran out while only the curvature condition kept
            // failing; settle for the best plain-Armijo point found.
            step = lo;
            for j in 0..n {
                x_new[j] = x[j] + step * d[j];
            }
            f_new = f(&x_new, &mut g_new);
            accepted = f_new.is_finite() && f_new <= fx + ARMIJO_C1 * step * slope;
        }
        if !accepted {
            // No improving step along d: treat the current point as final.
            return MinimizeResult {
                x,
                value: fx,
                iterations: iter,
                converged: inf_norm(&g) <= grad_tol.max(1e-6),
            };
        }

        let s: Vec<f64> = (0..n).map(|j| x_new[j] - x[j]).collect();
        let yv: Vec<f64> = (0..n).map(|j| g_new[j] - g[j]).collect();
        let sy = dot(&s, &yv);
        let s_norm = dot(&s, &s).sqrt();
        let y_norm = dot(&yv, &yv).sqrt();
        if sy > 1e-12 * s_norm * y_norm {
            s_hist.push(s);
            y_hist.push(yv);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }

        let decrease = fx - f_new;
        x = x_new.clone();
        g = g_new.clone();
        fx = f_new;
        // A single stalled iteration can be a heavily backtracked step through
        // a badly scaled region; only repeated stalls mean convergence.
        if decrease <= 1e-13 * (1.0 + fx.abs()) {
            stalls += 1;
            if stalls >= 3 {
                return MinimizeResult {
                    x,
                    value: fx,
                    iterations: iter + 1,
                    converged: true,
                };
            }
        } else {
            stalls = 0;
        }
    }

    MinimizeResult {
        x: x.clone(),
        value: fx,
        iterations: max_iters,
        converged: inf_norm(&g) <= grad_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let res = minimize(
            |x, g| {
                g[0] = 2.0 * (x[0] - 3.0);
                g[1] = 8.0 * (x[1] + 1.0);
                (x[0] - 3.0).powi(2) + 4.0 * (x[1] + 1.0).powi(2)
            },
            &[0.0, 0.0],
            100,
            1e-10,
        );
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-8);
        assert!((res.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let res = minimize(
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            &[-1.2, 1.0],
            500,
            1e-8,
        );
        assert!(res.value < 1e-12, "final value {}", res.value);
        assert!((res.x[0] - 1.0).abs() < 1e-5);
        assert!((res.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn survives_infeasible_regions() {
        // Objective is +inf for x < 0; minimum at the (feasible) point x = 1.
        let res = minimize(
            |x, g| {
                if x[0] < 0.0 {
                    g[0] = 0.0;
                    return f64::INFINITY;
                }
                g[0] = 2.0 * (x[0] - 1.0);
                (x[0] - 1.0).powi(2)
            },
            &[4.0],
            200,
            1e-10,
        );
        assert!((res.x[0] - 1.0).abs() < 1e-7, "x = {}", res.x[0]);
    }

    #[test]
    fn reports_failure_from_infeasible_start() {
        let res = minimize(
            |_x, g| {
                g[0] = 0.0;
                f64::INFINITY
            },
            &[0.0],
            50,
            1e-8,
        );
        assert!(!res.converged);
        assert!(!res.value.is_finite());
    }
}
