//! Bulk-grid frequency dynamics: a single-bus swing model with first-order
//! governor response and an optional integral secondary controller.
//!
//! Conventions used throughout the crate:
//! - frequency deviation `delta_f` is stored in Hz; division by `f0`
//!   happens inside the right-hand sides
//! - every power is per-unit on the system base `s_sys` (MW quantities are
//!   converted at the boundary, see [`mw_per_hz_to_pu`])
//! - positive imbalance accelerates the grid (generation surplus)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a droop gain given in MW per Hz into per-unit power per
/// per-unit frequency on the `(s_sys, f0)` base.
pub fn mw_per_hz_to_pu(gain_mw_per_hz: f64, s_sys_mw: f64, f0_hz: f64) -> f64 {
    gain_mw_per_hz * f0_hz / s_sys_mw
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    /// Loss of generation: a sustained power deficit.
    GenerationTrip,
    /// Sudden load increase: same sign as a trip, different bookkeeping name.
    LoadStep,
    /// Quiescent system.
    None,
}

/// A step disturbance applied at `t_start` and held for the rest of the run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Disturbance {
    pub kind: DisturbanceKind,
    /// Magnitude in MW, non-negative; the sign convention lives in `kind`.
    pub magnitude: f64,
    /// Onset time in seconds.
    pub t_start: f64,
}

impl Disturbance {
    pub fn generation_trip(magnitude_mw: f64, t_start_s: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::GenerationTrip,
            magnitude: magnitude_mw,
            t_start: t_start_s,
        }
    }

    pub fn load_step(magnitude_mw: f64, t_start_s: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::LoadStep,
            magnitude: magnitude_mw,
            t_start: t_start_s,
        }
    }

    pub fn none() -> Self {
        Disturbance {
            kind: DisturbanceKind::None,
            magnitude: 0.0,
            t_start: 0.0,
        }
    }
}

/// Per-unit power imbalance injected by the disturbance at time `t`.
/// Both a generation trip and a load step remove power from the balance,
/// so both map to a negative step of `magnitude / s_sys` from `t_start` on.
pub fn disturbance_power(d: &Disturbance, t: f64, s_sys_mw: f64) -> f64 {
    match d.kind {
        DisturbanceKind::None => 0.0,
        DisturbanceKind::GenerationTrip | DisturbanceKind::LoadStep => {
            if t >= d.t_start {
                -d.magnitude / s_sys_mw
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridParams {
    /// Nominal frequency, Hz.
    pub f0: f64,
    /// System base and total generation capacity, MW.
    pub s_sys: f64,
    /// Inertia constant H, seconds.
    pub inertia_h: f64,
    /// Load damping, per-unit power per per-unit frequency.
    pub damping_d: f64,
    /// Governor droop R (frequency regulation), dimensionless.
    pub governor_droop_r: f64,
    /// Governor time constant, seconds.
    pub governor_tc: f64,
    pub governor_enabled: bool,
    /// Headroom for primary reserve, per-unit. The governor output is
    /// clamped to this band.
    pub governor_limit: f64,
    /// Secondary control (AGC) integral gain, per-unit power per
    /// per-unit-frequency-second. Zero disables the integrator.
    pub agc_gain: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            f0: 60.0,
            s_sys: 6100.0,
            inertia_h: 2.0,
            damping_d: 0.8,
            governor_droop_r: 0.05,
            governor_tc: 3.0,
            governor_enabled: true,
            governor_limit: 0.02,
            agc_gain: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    /// Frequency deviation from nominal, Hz.
    pub delta_f: f64,
    /// Governor output, per-unit.
    pub p_gov: f64,
    /// Accumulated secondary-control power, per-unit.
    pub agc_integral: f64,
    /// Simulation time, seconds.
    pub t: f64,
}

impl GridState {
    /// Quiescent system at t = 0.
    pub fn at_rest() -> Self {
        GridState {
            delta_f: 0.0,
            p_gov: 0.0,
            agc_integral: 0.0,
            t: 0.0,
        }
    }
}

/// Swing equation right-hand side: dΔf/dt in Hz/s given the net per-unit
/// imbalance (disturbance + governor + secondary control + load relief).
pub fn swing_rhs(delta_f_hz: f64, net_imbalance_pu: f64, params: &GridParams) -> f64 {
    (params.f0 / (2.0 * params.inertia_h))
        * (net_imbalance_pu - params.damping_d * delta_f_hz / params.f0)
}

/// Steady-state governor command for a given deviation, clamped to the
/// reserve band.
fn governor_target(delta_f_hz: f64, params: &GridParams) -> f64 {
    let raw = (-delta_f_hz / params.f0) / params.governor_droop_r;
    raw.clamp(-params.governor_limit, params.governor_limit)
}

/// Standalone one-step governor update: exact first-order relaxation of
/// `p_gov` toward the droop target while `delta_f` is held. Inside [`step`]
/// the governor is integrated jointly with the swing equation instead.
pub fn governor_update(state: &GridState, params: &GridParams, dt: f64) -> f64 {
    if !params.governor_enabled {
        return 0.0;
    }
    let target = governor_target(state.delta_f, params);
    if params.governor_tc == 0.0 {
        return target;
    }
    target + (state.p_gov - target) * (-dt / params.governor_tc).exp()
}

/// Time derivatives of (delta_f, p_gov, agc_integral). `external_pu` is the
/// disturbance plus data-center relief, held constant over a step.
fn derivatives(
    delta_f: f64,
    p_gov: f64,
    agc_integral: f64,
    external_pu: f64,
    params: &GridParams,
) -> (f64, f64, f64) {
    let d_gov = if params.governor_enabled {
        (governor_target(delta_f, params) - p_gov) / params.governor_tc
    } else {
        0.0
    };
    let d_agc = if params.agc_gain != 0.0 {
        -params.agc_gain * delta_f / params.f0
    } else {
        0.0
    };
    let net = external_pu + p_gov + agc_integral;
    (swing_rhs(delta_f, net, params), d_gov, d_agc)
}

/// Advances the grid one step of classical fixed-step fourth-order
/// Runge-Kutta. Disturbance and data-center relief are per-unit inputs held
/// constant over the step. Fails if any state variable leaves the finite
/// range.
pub fn step(
    state: &GridState,
    params: &GridParams,
    disturbance_pu: f64,
    dc_relief_pu: f64,
    dt: f64,
) -> Result<GridState> {
    let ext = disturbance_pu + dc_relief_pu;
    let (f, g, a) = (state.delta_f, state.p_gov, state.agc_integral);

    let (k1f, k1g, k1a) = derivatives(f, g, a, ext, params);
    let h2 = dt / 2.0;
    let (k2f, k2g, k2a) = derivatives(f + h2 * k1f, g + h2 * k1g, a + h2 * k1a, ext, params);
    let (k3f, k3g, k3a) = derivatives(f + h2 * k2f, g + h2 * k2g, a + h2 * k2a, ext, params);
    let (k4f, k4g, k4a) = derivatives(f + dt * k3f, g + dt * k3g, a + dt * k3a, ext, params);

    let sixth = dt / 6.0;
    let delta_f = f + sixth * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    let mut p_gov = g + sixth * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    let agc_integral = a + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);

    // Reserve band holds at step boundaries even when a substep overshoots.
    p_gov = p_gov.clamp(-params.governor_limit, params.governor_limit);

    let t = state.t + dt;
    let next = GridState {
        delta_f,
        p_gov,
        agc_integral,
        t,
    };
    for (value, field) in [
        (next.delta_f, "delta_f"),
        (next.p_gov, "p_gov"),
        (next.agc_integral, "agc_integral"),
    ] {
        if !value.is_finite() {
            return Err(Error::NumericDivergence { field, t });
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_grid(
        params: &GridParams,
        disturbance: &Disturbance,
        duration: f64,
        dt: f64,
    ) -> Vec<GridState> {
        let n = (duration / dt).round() as usize;
        let mut states = Vec::with_capacity(n + 1);
        let mut s = GridState::at_rest();
        states.push(s);
        for i in 0..n {
            let t = i as f64 * dt;
            let dist = disturbance_power(disturbance, t, params.s_sys);
            s = step(&s, params, dist, 0.0, dt).expect("finite");
            states.push(s);
        }
        states
    }

    #[test]
    fn gain_conversion() {
        assert_eq!(mw_per_hz_to_pu(0.0, 6100.0, 60.0), 0.0);
        let pu = mw_per_hz_to_pu(25.0, 6100.0, 60.0);
        assert!((pu - 0.2459016393442623).abs() < 1e-12);
        // A gain of s_sys/f0 MW per Hz is unity in per-unit.
        assert!((mw_per_hz_to_pu(6100.0 / 60.0, 6100.0, 60.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disturbance_step_values() {
        let trip = Disturbance::generation_trip(200.0, 5.0);
        assert_eq!(disturbance_power(&trip, 4.99, 6100.0), 0.0);
        let post = disturbance_power(&trip, 5.0, 6100.0);
        assert!((post - (-0.03278688524590164)).abs() < 1e-12);

        let load = Disturbance::load_step(150.0, 5.0);
        let at10 = disturbance_power(&load, 10.0, 6100.0);
        assert!((at10 - (-0.02459016393442623)).abs() < 1e-12);

        assert_eq!(disturbance_power(&Disturbance::none(), 100.0, 6100.0), 0.0);
    }

    #[test]
    fn swing_rhs_matches_hand_arithmetic() {
        let params = GridParams {
            inertia_h: 2.0,
            damping_d: 0.0,
            ..GridParams::default()
        };
        let net = -200.0 / 6100.0;
        let rhs = swing_rhs(0.0, net, &params);
        assert!((rhs - (-0.4918032786885246)).abs() < 1e-12);

        // Doubling inertia halves the initial rate of change exactly.
        let heavier = GridParams {
            inertia_h: 4.0,
            ..params
        };
        assert_eq!(swing_rhs(0.0, net, &heavier), rhs / 2.0);
    }

    #[test]
    fn quiescent_state_is_a_fixed_point() {
        let params = GridParams::default();
        let s0 = GridState::at_rest();
        let s1 = step(&s0, &params, 0.0, 0.0, 0.01).unwrap();
        assert_eq!(s1.delta_f, 0.0);
        assert_eq!(s1.p_gov, 0.0);
        assert_eq!(s1.agc_integral, 0.0);
    }

    #[test]
    fn governor_converges_to_droop_target() {
        let params = GridParams {
            agc_gain: 0.0,
            governor_limit: 0.5,
            ..GridParams::default()
        };
        let mut state = GridState {
            delta_f: -0.3,
            ..GridState::at_rest()
        };
        for _ in 0..10_000 {
            state.p_gov = governor_update(&state, &params, 0.01);
        }
        // (0.3 / 60) / 0.05 = 0.1 per-unit.
        assert!((state.p_gov - 0.1).abs() < 1e-9);
    }

    #[test]
    fn governor_pushes_against_the_deviation() {
        let params = GridParams {
            agc_gain: 0.0,
            ..GridParams::default()
        };
        for sign in [-1.0, 1.0] {
            let mut state = GridState {
                delta_f: sign * 0.2,
                ..GridState::at_rest()
            };
            let mut prev = 0.0;
            for _ in 0..2_000 {
                state.p_gov = governor_update(&state, &params, 0.01);
                // Opposes the deviation and never retreats while it lasts.
                assert!(state.p_gov * sign <= 0.0);
                assert!(state.p_gov.abs() + 1e-15 >= prev);
                prev = state.p_gov.abs();
            }
        }
    }

    #[test]
    fn droop_only_settles_to_hand_value_and_agc_removes_it() {
        let droop_only = GridParams {
            agc_gain: 0.0,
            governor_limit: f64::INFINITY,
            ..GridParams::default()
        };
        let trip = Disturbance::generation_trip(200.0, 0.0);
        let end = run_grid(&droop_only, &trip, 300.0, 0.01).last().unwrap().delta_f;
        // Equilibrium of 0 = dp + p_gov - D*df/f0 with p_gov = -(df/f0)/R.
        let dp = -200.0 / droop_only.s_sys;
        let expected =
            dp * droop_only.f0 / (droop_only.damping_d + 1.0 / droop_only.governor_droop_r);
        assert!(
            (end - expected).abs() < 1e-9,
            "droop-only settles at {end}, expected {expected}"
        );

        let with_agc = GridParams {
            governor_limit: f64::INFINITY,
            ..GridParams::default()
        };
        let end = run_grid(&with_agc, &trip, 300.0, 0.01).last().unwrap().delta_f;
        assert!(end.abs() < 1e-6, "secondary control leaves {end} Hz");
    }

    #[test]
    fn governor_disabled_stays_zero() {
        let params = GridParams {
            governor_enabled: false,
            ..GridParams::default()
        };
        let state = GridState {
            delta_f: -0.5,
            p_gov: 0.0,
            agc_integral: 0.0,
            t: 0.0,
        };
        assert_eq!(governor_update(&state, &params, 0.1), 0.0);
        let next = step(&state, &params, -0.03, 0.0, 0.01).unwrap();
        assert_eq!(next.p_gov, 0.0);
    }

    #[test]
    fn governor_output_respects_reserve_band() {
        // A deficit far beyond primary reserve pins the governor at its
        // limit without ever crossing it.
        let params = GridParams {
            agc_gain: 0.0,
            ..GridParams::default()
        };
        let mut s = GridState::at_rest();
        for _ in 0..10_000 {
            s = step(&s, &params, -0.5, 0.0, 0.01).unwrap();
            assert!(s.p_gov.abs() <= params.governor_limit);
        }
        assert!((s.p_gov - params.governor_limit).abs() < 1e-9);
    }

    #[test]
    fn first_post_event_step_magnitude() {
        // One 0.01 s step into a 200 MW deficit on the default grid the
        // deviation is inertia-dominated: about -0.492 Hz/s times dt.
        let params = GridParams::default();
        let trip = Disturbance::generation_trip(200.0, 0.0);
        let dist = disturbance_power(&trip, 0.0, params.s_sys);
        let s1 = step(&GridState::at_rest(), &params, dist, 0.0, 0.01).unwrap();
        assert!((s1.delta_f - (-0.00489)).abs() < 1e-4);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Richardson comparison on a smooth trajectory: halving dt should
        // shrink the error against a fine reference by about 2^4.
        let params = GridParams {
            governor_limit: f64::INFINITY,
            ..GridParams::default()
        };
        let trip = Disturbance::generation_trip(200.0, 0.0);
        let horizon = 1.0;
        let coarse = run_grid(&params, &trip, horizon, 0.02);
        let half = run_grid(&params, &trip, horizon, 0.01);
        let reference = run_grid(&params, &trip, horizon, 0.0005);
        let e_coarse = (coarse.last().unwrap().delta_f - reference.last().unwrap().delta_f).abs();
        let e_half = (half.last().unwrap().delta_f - reference.last().unwrap().delta_f).abs();
        let ratio = e_coarse / e_half;
        assert!(
            (10.0..=24.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio} ({e_coarse} vs {e_half})"
        );
    }

    #[test]
    fn step_size_convergence_on_linear_configuration() {
        let params = GridParams {
            governor_limit: f64::INFINITY,
            ..GridParams::default()
        };
        let trip = Disturbance::generation_trip(200.0, 5.0);
        let coarse = run_grid(&params, &trip, 60.0, 0.01);
        let fine = run_grid(&params, &trip, 60.0, 0.001);
        let mut max_diff: f64 = 0.0;
        for (i, s) in coarse.iter().enumerate() {
            let diff = (s.delta_f - fine[i * 10].delta_f).abs();
            max_diff = max_diff.max(diff);
        }
        assert!(max_diff < 1e-6, "max dt-refinement drift {max_diff} Hz");
    }

    #[test]
    fn response_is_linear_in_disturbance() {
        let params = GridParams {
            governor_limit: f64::INFINITY,
            ..GridParams::default()
        };
        let base = run_grid(&params, &Disturbance::generation_trip(50.0, 1.0), 30.0, 0.01);
        let tripled = run_grid(&params, &Disturbance::generation_trip(150.0, 1.0), 30.0, 0.01);
        // Relative in max-norm: pointwise ratios degenerate at the zero
        // crossings of the recovery.
        let amplitude = tripled
            .iter()
            .map(|s| s.delta_f.abs())
            .fold(0.0f64, f64::max);
        for (a, b) in base.iter().zip(tripled.iter()) {
            assert!((b.delta_f - 3.0 * a.delta_f).abs() < 1e-12 * amplitude);
        }
    }

    #[test]
    fn divergence_reports_field() {
        // An absurd step size blows up RK4; the error must say which state
        // variable went non-finite.
        let params = GridParams {
            inertia_h: 1e-4,
            governor_enabled: false,
            agc_gain: 0.0,
            ..GridParams::default()
        };
        let mut s = GridState::at_rest();
        let mut saw_divergence = false;
        for _ in 0..200 {
            match step(&s, &params, -0.03, 0.0, 10.0) {
                Ok(next) => s = next,
                Err(Error::NumericDivergence { field, .. }) => {
                    assert_eq!(field, "delta_f");
                    saw_divergence = true;
                    break;
                }
                Err(other) => panic!("unexpected error {other}"),
            }
        }
        assert!(saw_divergence);
    }
}
