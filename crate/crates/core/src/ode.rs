//! Adaptive Dormand-Prince 5(4) integrator over complex state vectors.

use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::error::{JcError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub t: f64,
    pub y: Vec<Complex64>,
    pub accepted: usize,
    pub rejected: usize,
    /// True when the observer asked to stop before `t_end`.
    pub stopped: bool,
}

fn axpy(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `dy/dt = f(t, y)` from `t0` to `t_end`.
    ///
    /// `observe` runs after every accepted step (and once at `t0`) and may
    /// break to stop the integration early.
    pub fn integrate<F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: Vec<Complex64>,
        t_end: f64,
        mut observe: O,
    ) -> Result<OdeSolution>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
        O: FnMut(f64, &[Complex64]) -> ControlFlow<()>,
    {
        let n = y0.len();
        let mut y = y0;
        let mut t = t0;
        let sol = |t, y, accepted, rejected, stopped| OdeSolution {
            t,
            y,
            accepted,
            rejected,
            stopped,
        };
        if observe(t, &y).is_break() {
            return Ok(sol(t, y, 0, 0, true));
        }

        let mut k1 = vec![Complex64::new(0.0, 0.0); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut k5 = k1.clone();
        let mut k6 = k1.clone();
        let mut k7 = k1.clone();
        let mut tmp = k1.clone();
        let mut y_new = k1.clone();

        f(t, &y, &mut k1);
        let scale_of = |y: &[Complex64], i: usize, atol: f64, rtol: f64| atol + rtol * y[i].norm();
        let mut h = match self.h_init {
            Some(h) => h,
            None => {
                // Hairer's starting-step heuristic, first stage only.
                let d0 = rms(&y, |i| scale_of(&y, i, self.atol, self.rtol));
                let d1 = rms(&k1, |i| scale_of(&y, i, self.atol, self.rtol));
                let h0 = if d0 < 1e-5 || d1 < 1e-5 {
                    1e-6
                } else {
                    0.01 * d0 / d1
                };
                h0.min(t_end - t0)
            }
        }
        .min(self.h_max);

        let (mut accepted, mut rejected) = (0usize, 0usize);
        while t < t_end {
            if accepted + rejected >= self.max_steps {
                return Err(JcError::StepSizeUnderflow { t, h });
            }
            if h < self.h_min {
                return Err(JcError::StepSizeUnderflow { t, h });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }

            axpy(&mut tmp, &y, h, &[(A21, &k1)]);
            f(t + C2 * h, &tmp, &mut k2);
            axpy(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * h, &tmp, &mut k3);
            axpy(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * h, &tmp, &mut k4);
            axpy(
                &mut tmp,
                &y,
                h,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            );
            f(t + C5 * h, &tmp, &mut k5);
            axpy(
                &mut tmp,
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            f(t + h, &tmp, &mut k6);
            axpy(
                &mut y_new,
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            f(t + h, &y_new, &mut k7);

            let err = {
                let mut acc = 0.0;
                for i in 0..n {
                    let e = (k1[i] * E1
                        + k3[i] * E3
                        + k4[i] * E4
                        + k5[i] * E5
                        + k6[i] * E6
                        + k7[i] * E7)
                        * h;
                    let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                    acc += (e.norm() / sc).powi(2);
                }
                (acc / n.max(1) as f64).sqrt()
            };

            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;
                if observe(t, &y).is_break() {
                    return Ok(sol(t, y, accepted, rejected, true));
                }
            } else {
                rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(self.h_max);
        }
        Ok(sol(t, y, accepted, rejected, false))
    }
}

fn rms(v: &[Complex64], scale: impl Fn(usize) -> f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| (x.norm() / scale(i)).powi(2))
        .sum();
    (s / v.len() as f64).sqrt()
}
