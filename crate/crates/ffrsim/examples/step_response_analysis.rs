//! Compare the closed-form small-signal step response against the
//! integrator on the configuration both describe exactly: droop with no
//! deadband, no clamps, and primary/secondary control off.

use ffrsim::analytic::{ClosedLoopModel, Poles};
use ffrsim::datacenter::Mode;
use ffrsim::grid::{mw_per_hz_to_pu, Disturbance};
use ffrsim::scenario::{run, Scenario};

fn main() {
    let mut scenario = Scenario::default();
    scenario.grid.governor_enabled = false;
    scenario.grid.agc_gain = 0.0;
    scenario.dc.deadband = 0.0;
    scenario.dc.limits_enabled = false;
    scenario.dc.e_cap = f64::INFINITY;
    scenario.mode = Mode::Coordinated;
    scenario.disturbance = Disturbance::generation_trip(200.0, 0.0);

    let g = &scenario.grid;
    let model = ClosedLoopModel {
        h: g.inertia_h,
        d: g.damping_d,
        k_dc: mw_per_hz_to_pu(scenario.dc.k_srv + scenario.dc.k_ups, g.s_sys, g.f0),
        tau: scenario.dc.tau_dc,
        f0: g.f0,
    };
    let dp = -200.0 / g.s_sys;

    match model.poles() {
        Poles::Pair(p1, _) if p1.im != 0.0 => {
            println!("poles: {:.4} +/- {:.4}i", p1.re, p1.im.abs())
        }
        Poles::Pair(p1, p2) => println!("poles: {:.4}, {:.4}", p1.re, p2.re),
        Poles::First(p) => println!("pole: {p:.4}"),
        Poles::Repeated(p) => println!("pole: {p:.4} (repeated)"),
    }
    let ss = model.steady_state_deviation(dp).expect("damped system");
    println!("steady-state deviation: {ss:.6} Hz");
    let (t_nadir, f_nadir) = model.nadir(dp).expect("damped system");
    if t_nadir.is_finite() {
        println!("analytic nadir: {f_nadir:.6} Hz at t = {t_nadir:.4} s");
    } else {
        println!("monotone response; deepest point is the steady state {f_nadir:.6} Hz");
    }

    let series = run(&scenario).expect("scenario runs");
    let max_err = series
        .samples
        .iter()
        .map(|s| (s.delta_f_hz - model.step_response(dp, s.t)).abs())
        .fold(0.0_f64, f64::max);
    println!("integrator vs closed form over {} s: max |err| = {max_err:.3e} Hz", scenario.duration);
}
