use nalgebra::{DMatrix, DVector};

/// Outcome of one barrier run.
#[derive(Debug, Clone)]
pub(crate) struct BarrierRun {
    pub x: DVector<f64>,
    pub gap: f64,
    pub newton_steps: usize,
    pub centered: bool,
}

/// A smooth convex program `min f(x) s.t. h_i(x) < 0` seen through its
/// log-barrier `t f(x) - sum log(-h_i(x))`.
pub(crate) trait BarrierProblem {
    fn dim(&self) -> usize;
    fn barrier_terms(&self) -> usize;
    /// Barrier value at `t`, or `None` outside the strict domain.
    fn value(&self, x: &DVector<f64>, t: f64) -> Option<f64>;
    /// Barrier value, gradient and Hessian at `t`.
    fn derivatives(&self, x: &DVector<f64>, t: f64) -> Option<(f64, DVector<f64>, DMatrix<f64>)>;
    /// Early exit test applied after every accepted Newton step.
    fn done(&self, _x: &DVector<f64>) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierParams {
    pub t0: f64,
    pub mu: f64,
    pub gap: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        Self {
            t0: 1.0,
            mu: 20.0,
            gap: 1e-10,
            newton_tol: 1e-11,
            max_newton: 200,
            max_outer: 60,
        }
    }
}

pub(crate) fn solve_barrier<P: BarrierProblem>(
    problem: &P,
    start: DVector<f64>,
    params: BarrierParams,
) -> BarrierRun {
    let m = problem.barrier_terms().max(1) as f64;
    let mut x = start;
    let mut t = params.t0;
    let mut steps = 0;
    let mut centered = true;
    for _ in 0..params.max_outer {
        let (ok, used, early) = center(problem, &mut x, t, params);
        steps += used;
        if early {
            return BarrierRun {
                x,
                gap: m / t,
                newton_steps: steps,
                centered: ok,
            };
        }
        centered = ok;
        if m / t <= params.gap {
            break;
        }
        t *= params.mu;
    }
    BarrierRun {
        x,
        gap: m / t,
        newton_steps: steps,
        centered,
    }
}

fn center<P: BarrierProblem>(
    problem: &P,
    x: &mut DVector<f64>,
    t: f64,
    params: BarrierParams,
) -> (bool, usize, bool) {
    for step in 0..params.max_newton {
        let Some((phi, grad, hess)) = problem.derivatives(x, t) else {
            return (false, step, false);
        };
        let dx = newton_direction(&hess, &grad);
        let slope = grad.dot(&dx);
        let decrement = -slope;
        // Below this floor the decrement is dominated by rounding in phi.
        let slack = 1e-13 * (1.0 + phi.abs());
        if !(decrement > 2.0 * params.newton_tol + slack) {
            return (true, step, false);
        }
        let mut alpha = 1.0;
        loop {
            let trial = &*x + alpha * &dx;
            if let Some(v) = problem.value(&trial, t) {
                if v <= phi + 0.25 * alpha * slope + slack {
                    *x = trial;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                return (true, step, false);
            }
        }
        if problem.done(x) {
            return (true, step + 1, true);
        }
    }
    (false, params.max_newton, false)
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let n = hess.nrows();
    let scale = (0..n)
        .map(|i| hess[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut reg = 0.0;
    loop {
        let mut h = hess.clone();
        if reg > 0.0 {
            for i in 0..n {
                h[(i, i)] += reg;
            }
        }
        if let Some(ch) = h.cholesky() {
            return -ch.solve(grad);
        }
        reg = if reg == 0.0 {
            1e-14 * scale
        } else {
            reg * 10.0
        };
        if reg > 1e6 * scale {
            return -grad / scale;
        }
    }
}
