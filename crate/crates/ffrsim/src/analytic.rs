//! Closed-form small-signal engine for the grid/data-center loop.
//!
//! The loop transfer from a per-unit disturbance step to frequency
//! deviation is 1 / (2hs + d + k_dc/(1+tau*s)); clearing the lag term gives
//! the quadratic 2h*tau*s^2 + (2h + d*tau)*s + (d + k_dc). This module
//! evaluates that system exactly (poles, step response, steady state,
//! nadir) and serves as the oracle the time-domain simulator is checked
//! against in its linear configuration. There is deliberately no governor
//! here; the simulator disables its own when comparing.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ClosedLoopModel {
    /// Inertia constant, seconds.
    pub h: f64,
    /// Load damping, per-unit/per-unit.
    pub d: f64,
    /// Aggregate data-center gain, per-unit/per-unit.
    pub k_dc: f64,
    /// Actuation lag, seconds.
    pub tau: f64,
    /// Nominal frequency for reporting responses in Hz.
    pub f0: f64,
}

/// Pole structure of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Poles {
    /// tau = 0 collapses the loop to first order.
    First(f64),
    /// Distinct roots, real or a conjugate pair.
    Pair(Complex64, Complex64),
    /// Double real root (discriminant within 1e-12 of zero, relative).
    Repeated(f64),
}

impl ClosedLoopModel {
    /// Denominator coefficients (a, b, c) of a*s^2 + b*s + c.
    fn coefficients(&self) -> (f64, f64, f64) {
        (
            2.0 * self.h * self.tau,
            2.0 * self.h + self.d * self.tau,
            self.d + self.k_dc,
        )
    }

    pub fn poles(&self) -> Poles {
        let (a, b, c) = self.coefficients();
        if self.tau == 0.0 {
            return Poles::First(-c / (2.0 * self.h));
        }
        let disc = b * b - 4.0 * a * c;
        if disc.abs() <= 1e-12 * (b * b).max((4.0 * a * c).abs()) {
            return Poles::Repeated(-b / (2.0 * a));
        }
        if disc > 0.0 {
            // b > 0 for every valid model, so this ordering is stable.
            let q = -(b + disc.sqrt()) / 2.0;
            Poles::Pair(Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0))
        } else {
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a);
            Poles::Pair(Complex64::new(re, im), Complex64::new(re, -im))
        }
    }

    /// Frequency deviation in Hz at time `t` after a sustained per-unit
    /// disturbance step of size `dp`. Exact inverse transform of
    /// dp*(1+tau*s) / (s*(a*s^2 + b*s + c)) in all three pole regimes.
    pub fn step_response(&self, dp: f64, t: f64) -> f64 {
        let (a, _, c) = self.coefficients();
        let y_pu = match self.poles() {
            Poles::First(p) => (dp / c) * (1.0 - (p * t).exp()),
            Poles::Repeated(r) => {
                let r2 = r * r;
                (dp / a) * (1.0 / r2 + (-1.0 / r2 + ((1.0 + self.tau * r) / r) * t) * (r * t).exp())
            }
            Poles::Pair(s1, s2) => {
                let r1 = dp * (1.0 + self.tau * s1) / (a * s1 * (s1 - s2));
                let r2 = dp * (1.0 + self.tau * s2) / (a * s2 * (s2 - s1));
                dp / c + (r1 * (s1 * t).exp() + r2 * (s2 * t).exp()).re
            }
        };
        self.f0 * y_pu
    }

    /// Final frequency deviation in Hz for a sustained per-unit step.
    pub fn steady_state_deviation(&self, dp: f64) -> Result<f64> {
        let c = self.d + self.k_dc;
        if c <= 0.0 {
            return Err(Error::UnboundedResponse);
        }
        Ok(self.f0 * dp / c)
    }

    /// Deepest frequency excursion for a sustained deficit `dp < 0`:
    /// coarse scan followed by golden-section refinement to 1e-9 s. A
    /// response that only creeps toward its asymptote has no interior
    /// minimum; that case returns (infinity, steady-state deviation).
    pub fn nadir(&self, dp: f64) -> Result<(f64, f64)> {
        debug_assert!(dp <= 0.0, "nadir is defined for deficits");
        if dp == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ss = self.steady_state_deviation(dp)?;

        let step = if self.tau > 0.0 {
            (self.tau / 10.0).min(self.h / 100.0)
        } else {
            self.h / 100.0
        };
        let horizon = match self.poles() {
            Poles::First(p) => 12.0 / p.abs(),
            Poles::Repeated(r) => 12.0 / r.abs(),
            Poles::Pair(s1, s2) => {
                if s1.im != 0.0 {
                    // Cover the first trough plus several decay constants.
                    2.0 * std::f64::consts::PI / s1.im.abs() + 10.0 / s1.re.abs()
                } else {
                    12.0 / s1.re.abs().min(s2.re.abs())
                }
            }
        };
        let n = ((horizon / step).ceil() as usize).clamp(10, 2_000_000);

        let mut best_i = 0usize;
        let mut best_y = self.step_response(dp, 0.0);
        for i in 1..=n {
            let y = self.step_response(dp, i as f64 * step);
            if y < best_y {
                best_y = y;
                best_i = i;
            }
        }
        if best_i == n {
            return Ok((f64::INFINITY, ss));
        }

        let mut lo = best_i.saturating_sub(1) as f64 * step;
        let mut hi = (best_i + 1) as f64 * step;
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut y1 = self.step_response(dp, x1);
        let mut y2 = self.step_response(dp, x2);
        while hi - lo > 1e-9 {
            if y1 < y2 {
                hi = x2;
                x2 = x1;
                y2 = y1;
                x1 = hi - phi * (hi - lo);
                y1 = self.step_response(dp, x1);
            } else {
                lo = x1;
                x1 = x2;
                y1 = y2;
                x2 = lo + phi * (hi - lo);
                y2 = self.step_response(dp, x2);
            }
        }
        let t = (lo + hi) / 2.0;
        Ok((t, self.step_response(dp, t)))
    }
}
