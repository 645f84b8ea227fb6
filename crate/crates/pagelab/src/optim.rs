//! Nelder-Mead simplex minimization with restarts.
//!
//! Used by the ansatz fitting, whose objective goes through a matrix
//! exponential and is cheapest to treat derivative-free at these sizes.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Loss improvement below this counts toward the stall counter.
    pub loss_tol: f64,
    /// Vertex movement below this counts toward the stall counter.
    pub step_tol: f64,
    /// Consecutive stalled iterations that end one descent.
    pub stall_iters: usize,
    /// Initial simplex edge length.
    pub initial_scale: f64,
    /// Additional descents from the best point with a shrunken simplex.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iters: 5000,
            loss_tol: 1e-12,
            step_tol: 1e-8,
            stall_iters: 20,
            initial_scale: 0.5,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub loss: f64,
    pub converged: bool,
    pub evals: usize,
    pub iterations: usize,
}

/// Minimize `f` starting from `x0`. Deterministic; the best-ever point is
/// non-increasing in loss across iterations by construction.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> OptimResult {
    let mut best_x = x0.to_vec();
    let mut best_loss = f(x0);
    let mut evals = 1usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut scale = opts.initial_scale;
    for _ in 0..=opts.restarts {
        let r = descend(f, &best_x, best_loss, scale, opts, &mut evals, &mut iterations);
        assert!(r.1 <= best_loss + 1e-15, "accepted step increased the loss");
        best_x = r.0;
        best_loss = r.1;
        converged = r.2;
        scale *= 0.1;
        if best_loss == 0.0 {
            break;
        }
    }
    OptimResult { x: best_x, loss: best_loss, converged, evals, iterations }
}

fn descend(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    scale: f64,
    opts: &NelderMeadOptions,
    evals: &mut usize,
    iterations: &mut usize,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    if n == 0 {
        return (x0.to_vec(), f0, true);
    }
    // simplex: x0 plus one orthogonal step per coordinate
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale;
        let fv = f(&v);
        *evals += 1;
        simplex.push((v, fv));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut stalled = 0usize;
    let mut prev_best = f0.min(simplex.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
    let mut iters_here = 0usize;
    while *iterations < opts.max_iters {
        *iterations += 1;
        iters_here += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite losses"));
        let best = simplex[0].1;
        let worst_idx = n;
        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for p in simplex.iter().take(n) {
            for (c, &x) in centroid.iter_mut().zip(&p.0) {
                *c += x / n as f64;
            }
        }
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst_idx].0)
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let fr = f(&reflect);
        *evals += 1;
        let mut moved = 0.0f64;
        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst_idx].0)
                .map(|(&c, &w)| c + gamma * (c - w))
                .collect();
            let fe = f(&expand);
            *evals += 1;
            let (nv, nf) = if fe < fr { (expand, fe) } else { (reflect, fr) };
            moved = vertex_distance(&simplex[worst_idx].0, &nv);
            simplex[worst_idx] = (nv, nf);
        } else if fr < simplex[n - 1].1 {
            moved = vertex_distance(&simplex[worst_idx].0, &reflect);
            simplex[worst_idx] = (reflect, fr);
        } else {
            let contract: Vec<f64> = if fr < simplex[worst_idx].1 {
                centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(&c, &r)| c + rho * (r - c))
                    .collect()
            } else {
                centroid
                    .iter()
                    .zip(&simplex[worst_idx].0)
                    .map(|(&c, &w)| c + rho * (w - c))
                    .collect()
            };
            let fc = f(&contract);
            *evals += 1;
            if fc < simplex[worst_idx].1.min(fr) {
                moved = vertex_distance(&simplex[worst_idx].0, &contract);
                simplex[worst_idx] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    for (x, &b) in p.0.iter_mut().zip(&best_x) {
                        *x = b + sigma * (*x - b);
                    }
                    p.1 = f(&p.0);
                    *evals += 1;
                }
                moved = f64::INFINITY; // shrink moves everything; don't stall on it
            }
        }
        let new_best = simplex.iter().map(|p| p.1).fold(best, f64::min);
        let improvement = prev_best - new_best;
        prev_best = prev_best.min(new_best);
        if improvement < opts.loss_tol || moved < opts.step_tol {
            stalled += 1;
            if stalled >= opts.stall_iters {
                simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite losses"));
                return (simplex[0].0.clone(), simplex[0].1, true);
            }
        } else {
            stalled = 0;
        }
        let _ = iters_here;
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite losses"));
    (simplex[0].0.clone(), simplex[0].1, false)
}

fn vertex_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(0.0, f64::max)
}
