//! Adaptive Dormand–Prince 5(4) integrator for matrix-valued ODEs.

use crate::error::{Error, Result};
use crate::linalg::Operator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-8, atol: 1e-12, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }
}

impl OdeOptions {
    /// Half the step bound and tolerances tightened by 2⁵.
    pub fn halved(&self) -> Self {
        OdeOptions { rtol: self.rtol / 32.0, atol: self.atol / 32.0, max_step: self.max_step / 2.0, ..*self }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Stateful integrator that remembers its step size between calls.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub opts: OdeOptions,
    step: Option<f64>,
}

impl Dopri5 {
    pub fn new(opts: OdeOptions) -> Self {
        Dopri5 { opts, step: None }
    }

    /// Advances `y` from `t0` to `t1`.
    pub fn integrate<F>(&mut self, f: &F, t0: f64, t1: f64, y: Operator) -> Result<Operator>
    where
        F: Fn(f64, &Operator) -> Operator,
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y);
        }
        let o = self.opts;
        let mut h = self.step.unwrap_or_else(|| initial_step(f, t0, &y, &o)).min(o.max_step).min(span);
        let mut t = t0;
        let mut y = y;
        let mut k1 = f(t, &y);
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > o.max_steps {
                return Err(Error::StepSizeFailure { t, step: h });
            }
            let last = t + h >= t1 - 1e-14 * t1.abs().max(1.0);
            let h_try = if last { t1 - t } else { h };
            let mut k: Vec<Operator> = Vec::with_capacity(7);
            k.push(k1.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        axpy(&mut ys, h_try * A[s][j], kj);
                    }
                }
                k.push(f(t + C[s] * h_try, &ys));
            }
            let mut y_new = y.clone();
            for (j, kj) in k.iter().enumerate().take(6) {
                if A[6][j] != 0.0 {
                    axpy(&mut y_new, h_try * A[6][j], kj);
                }
            }
            let mut err_sq = 0.0;
            for idx in 0..y.len() {
                let e: num_complex::Complex64 = (0..7).map(|j| k[j][idx] * E[j]).sum::<num_complex::Complex64>() * h_try;
                let sc = o.atol + o.rtol * y[idx].norm().max(y_new[idx].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / y.len() as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + h_try };
                y = y_new;
                k1 = k.swap_remove(6);
                if !last || h_try >= h {
                    h = (h_try * factor).min(o.max_step);
                }
            } else {
                h = h_try * factor.min(1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeFailure { t, step: h });
                }
            }
        }
        self.step = Some(h);
        Ok(y)
    }
}

fn axpy(y: &mut Operator, a: f64, x: &Operator) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += xi * a;
    }
}

fn initial_step<F>(f: &F, t0: f64, y: &Operator, o: &OdeOptions) -> f64
where
    F: Fn(f64, &Operator) -> Operator,
{
    let d = y.norm().max(o.atol);
    let dy = f(t0, y).norm();
    let h = if dy == 0.0 { 1e-3 } else { 0.01 * d / dy };
    h.clamp(1e-12, o.max_step.min(1.0))
}
