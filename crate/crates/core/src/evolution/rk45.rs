//! Dormand–Prince 5(4) with an embedded error estimate on complex vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::C64;

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
// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integrator state. The step size carries over between calls to
/// [`Rk45::advance`], so a run split at sampling times costs little extra.
pub(crate) struct Rk45 {
    tol: f64,
    max_steps: usize,
    h: f64,
    pub(crate) steps: usize,
    pub(crate) rejected: usize,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    fsal_valid: bool,
}

impl Rk45 {
    /// `h0` is the first trial step.
    pub(crate) fn new(dim: usize, tol: f64, max_steps: usize, h0: f64) -> Self {
        let z = || vec![C64::zero(); dim];
        Self {
            tol,
            max_steps,
            h: h0,
            steps: 0,
            rejected: 0,
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            fsal_valid: false,
        }
    }

    /// Integrates `dy/dt = f(t, y)` from `t0` to `t1`, overwriting `y`.
    /// Accepts a step when `‖err‖₂ ≤ tol · max(‖y‖₂, ‖y_new‖₂)`.
    pub(crate) fn advance<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut Vec<C64>) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut t = t0;
        if !self.fsal_valid {
            f(t, y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        let mut y_new = vec![C64::zero(); y.len()];
        while t < t1 {
            if self.steps + self.rejected >= self.max_steps {
                return Err(Error::StepLimit { t, steps: self.steps });
            }
            let last = t + self.h >= t1;
            let h = if last { t1 - t } else { self.h };
            for s in 1..7 {
                for (i, v) in self.stage.iter_mut().enumerate() {
                    let mut acc = y[i];
                    for (j, a) in A[s][..s].iter().enumerate() {
                        if *a != 0.0 {
                            acc += self.k[j][i] * (h * a);
                        }
                    }
                    *v = acc;
                }
                f(t + C[s] * h, &self.stage, &mut self.k[s]);
            }
            // Stage 7 evaluates at the fifth-order solution, which is `stage` after s = 6.
            y_new.copy_from_slice(&self.stage);
            let mut err2 = 0.0;
            let (mut n_old, mut n_new) = (0.0, 0.0);
            for i in 0..y.len() {
                let mut e = C64::zero();
                for (s, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += self.k[s][i] * *w;
                    }
                }
                err2 += (e * h).norm_sqr();
                n_old += y[i].norm_sqr();
                n_new += y_new[i].norm_sqr();
            }
            let scale = self.tol * n_old.max(n_new).sqrt().max(f64::MIN_POSITIVE);
            let err = err2.sqrt() / scale;
            if !err.is_finite() {
                return Err(Error::NoConvergence("Dormand-Prince step (non-finite error estimate)"));
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                core::mem::swap(y, &mut y_new);
                self.k.swap(0, 6);
                self.steps += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the natural step when the last one was only clipped to hit t1.
                if !last || h >= self.h {
                    self.h = h * grow;
                }
            } else {
                self.rejected += 1;
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if self.h <= f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::StepLimit { t, steps: self.steps });
                }
            }
        }
        Ok(())
    }
}
