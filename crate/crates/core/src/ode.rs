//! Dormand–Prince 5(4) explicit integrator with embedded error control.
//!
//! The right-hand side returns `None` when evaluated outside its domain; the
//! step is then shrunk and retried, and the stepper reports whether the
//! eventual collapse was driven by domain violations.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: f64::INFINITY,
            min_step: 1e-13,
            max_steps: 1_000_000,
        }
    }
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        StepControl {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halt {
    /// Step size fell below `min_step`.
    Collapsed {
        h: f64,
        domain_violation: bool,
    },
    TooManySteps,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub struct Dopri5<F, const N: usize> {
    rhs: F,
    ctl: StepControl,
    t: f64,
    y: [f64; N],
    k1: Option<[f64; N]>,
    h: f64,
    steps: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> Option<[f64; N]>,
{
    pub fn new(rhs: F, t0: f64, y0: [f64; N], ctl: StepControl) -> Self {
        Dopri5 {
            rhs,
            ctl,
            t: t0,
            y: y0,
            k1: None,
            h: 0.0,
            steps: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    /// Steps forward until `t_end` is reached exactly, calling `on_step` after
    /// every accepted step.
    pub fn advance<G>(&mut self, t_end: f64, mut on_step: G) -> Result<(), Halt>
    where
        G: FnMut(f64, &[f64; N]),
    {
        let k1 = match self.k1 {
            Some(k) => k,
            None => match (self.rhs)(self.t, &self.y) {
                Some(k) => k,
                None => {
                    return Err(Halt::Collapsed {
                        h: 0.0,
                        domain_violation: true,
                    })
                }
            },
        };
        self.k1 = Some(k1);
        if self.h <= 0.0 {
            self.h = (t_end - self.t).abs().min(self.ctl.max_step).min(1e-2);
        }
        let mut domain_violation = false;
        while self.t < t_end {
            if self.steps >= self.ctl.max_steps {
                return Err(Halt::TooManySteps);
            }
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.ctl.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            } else if h < self.ctl.min_step {
                return Err(Halt::Collapsed { h, domain_violation });
            }
            let Some((y_new, k7, err)) = self.try_step(h) else {
                domain_violation = true;
                self.h = h * 0.25;
                if last && self.h < self.ctl.min_step {
                    return Err(Halt::Collapsed {
                        h: self.h,
                        domain_violation,
                    });
                }
                continue;
            };
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k1 = Some(k7);
                self.steps += 1;
                domain_violation = false;
                on_step(self.t, &self.y);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a clipped final step should not shrink the next proposal
                if !last || h * fac > self.h {
                    self.h = h * fac;
                }
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
                if last && self.h < self.ctl.min_step {
                    return Err(Halt::Collapsed {
                        h: self.h,
                        domain_violation,
                    });
                }
            }
        }
        Ok(())
    }

    fn try_step(&self, h: f64) -> Option<([f64; N], [f64; N], f64)> {
        let mut k = [[0.0; N]; 7];
        k[0] = self.k1.expect("k1 initialised in advance");
        for s in 1..7 {
            let mut ys = self.y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *yi += h * acc;
            }
            let ks = (self.rhs)(self.t + C[s] * h, &ys)?;
            if ks.iter().any(|v| !v.is_finite()) {
                return None;
            }
            k[s] = ks;
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let mut y_new = self.y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[6][j] * k[j][i];
            }
            *yi += h * acc;
        }
        let mut sum = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            let sc = self.ctl.atol + self.ctl.rtol * self.y[i].abs().max(y_new[i].abs());
            let q = h * e / sc;
            sum += q * q;
        }
        let err = (sum / N as f64).sqrt();
        if !err.is_finite() {
            return None;
        }
        Some((y_new, k[6], err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let rhs = |_t: f64, y: &[f64; 2]| Some([y[1], -y[0]]);
        let mut s = Dopri5::new(rhs, 0.0, [1.0, 0.0], StepControl::with_tol(1e-12));
        s.advance(std::f64::consts::TAU, |_, _| {}).unwrap();
        assert!((s.y()[0] - 1.0).abs() < 1e-10);
        assert!(s.y()[1].abs() < 1e-10);
        assert_eq!(s.t(), std::f64::consts::TAU);
    }

    #[test]
    fn lands_on_intermediate_times() {
        let rhs = |_t: f64, y: &[f64; 1]| Some([y[0]]);
        let mut s = Dopri5::new(rhs, 0.0, [1.0], StepControl::default());
        for k in 1..=10 {
            let t = k as f64 * 0.1;
            s.advance(t, |_, _| {}).unwrap();
            assert_eq!(s.t(), t);
            assert!((s.y()[0] - t.exp()).abs() < 1e-9 * t.exp());
        }
    }

    #[test]
    fn domain_violation_collapses() {
        // y' = -1 leaves y > 0 at t = 0.5
        let rhs = |_t: f64, y: &[f64; 1]| if y[0] > 0.0 { Some([-1.0 / y[0].sqrt()]) } else { None };
        let mut s = Dopri5::new(rhs, 0.0, [0.5], StepControl::default());
        match s.advance(2.0, |_, _| {}) {
            Err(Halt::Collapsed { .. }) | Err(Halt::TooManySteps) => {}
            other => panic!("expected halt, got {other:?}"),
        }
        assert!(s.y()[0] > 0.0 && s.y()[0] < 1e-3);
    }

    #[test]
    fn respects_max_step() {
        let rhs = |_t: f64, _y: &[f64; 1]| Some([1.0]);
        let mut s = Dopri5::new(rhs, 0.0, [0.0], StepControl::default().max_step(0.1));
        let mut ts = vec![0.0];
        s.advance(1.0, |t, _| ts.push(t)).unwrap();
        assert!(ts.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-15));
        assert_eq!(*ts.last().unwrap(), 1.0);
    }
}
