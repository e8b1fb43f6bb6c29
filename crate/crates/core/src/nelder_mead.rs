//! Derivative-free simplex minimization (Nelder–Mead) with optional box
//! clamping, shared by the moment-matching calibrator and the
//! continuous-hours polish inside the solver.

/// Stopping rules and simplex coefficients.
#[derive(Debug, Clone)]
pub struct NmOptions {
    /// Maximum number of objective evaluations.
    pub max_evals: usize,
    /// Converged when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Converged when the spread of objective values falls below this.
    pub f_tol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_evals: 5000,
            x_tol: 1e-10,
            f_tol: 1e-12,
        }
    }
}

/// Result of a simplex run.
#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    /// True when a stopping tolerance was met before the budget ran out.
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with coordinate-wise initial steps.
///
/// When `bounds` is given, every trial point is clamped into the box
/// before evaluation, so `f` is never called outside it.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    bounds: Option<(&[f64], &[f64])>,
    opts: &NmOptions,
) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0, "need at least one dimension");
    assert_eq!(step.len(), n);

    let clamp = |x: &mut [f64]| {
        if let Some((lo, hi)) = bounds {
            for i in 0..n {
                x[i] = x[i].clamp(lo[i], hi[i]);
            }
        }
    };

    let mut evals = 0usize;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| -> f64 {
        clamp(x);
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Initial simplex: x0 plus one displaced vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut v0 = x0.to_vec();
    let fv0 = eval(&mut v0, &mut evals);
    simplex.push((v0, fv0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
        let fv = eval(&mut v, &mut evals);
        simplex.push((v, fv));
    }

    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if diameter < opts.x_tol
            || (f_worst - f_best).abs() < opts.f_tol && f_worst.is_finite()
        {
            converged = true;
            break;
        }

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let worst = simplex[n].0.clone();
        let mut reflected: Vec<f64> = (0..n)
            .map(|i| centroid[i] + ALPHA * (centroid[i] - worst[i]))
            .collect();
        let f_reflected = eval(&mut reflected, &mut evals);

        if f_reflected < simplex[0].1 {
            let mut expanded: Vec<f64> = (0..n)
                .map(|i| centroid[i] + GAMMA * (reflected[i] - centroid[i]))
                .collect();
            let f_expanded = eval(&mut expanded, &mut evals);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
            continue;
        }

        // Contract toward the better of the worst vertex and its
        // reflection.
        let (toward, f_toward) = if f_reflected < simplex[n].1 {
            (&reflected, f_reflected)
        } else {
            (&worst, simplex[n].1)
        };
        let mut contracted: Vec<f64> = (0..n)
            .map(|i| centroid[i] + RHO * (toward[i] - centroid[i]))
            .collect();
        let f_contracted = eval(&mut contracted, &mut evals);
        if f_contracted < f_toward {
            simplex[n] = (contracted, f_contracted);
            continue;
        }

        // Shrink everything toward the best vertex.
        let best = simplex[0].0.clone();
        for (v, fv) in simplex[1..].iter_mut() {
            for i in 0..n {
                v[i] = best[i] + SIGMA * (v[i] - best[i]);
            }
            *fv = eval(v, &mut evals);
            if evals >= opts.max_evals {
                break;
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, fx) = simplex.swap_remove(0);
    NmResult {
        x,
        fx,
        evals,
        converged,
    }
}
