//! Follow the UPS through a full discharge/recharge cycle: the event
//! drains the battery, and once frequency is back inside the deadband the
//! controller draws recharge power until the state of charge is restored.

use ffrsim::scenario::{run, ups_energy_mwh, Scenario};

fn main() {
    let mut scenario = Scenario::default();
    // Small battery so the cycle is visible in the state of charge.
    scenario.dc.e_cap = 0.05;
    scenario.duration = 120.0;

    let series = run(&scenario).expect("scenario runs");
    let soc_init = scenario.dc.soc_init;

    let low = series
        .samples
        .iter()
        .min_by(|a, b| a.soc.total_cmp(&b.soc))
        .unwrap();
    println!(
        "deepest discharge: soc {:.3} at t = {:.1} s ({:+.4} MWh vs start)",
        low.soc,
        low.t,
        (low.soc - soc_init) * scenario.dc.e_cap
    );

    let restored = series
        .samples
        .iter()
        .skip_while(|s| s.soc >= soc_init)
        .find(|s| s.soc >= soc_init);
    match restored {
        Some(s) => println!("state of charge restored to {soc_init:.2} at t = {:.1} s", s.t),
        None => println!("state of charge not yet restored at the end of the run"),
    }

    println!(
        "ups energy delivered during the event: {:.4} MWh",
        ups_energy_mwh(&series, &scenario)
    );

    println!();
    println!("    t      delta_f     p_ups     p_dc    soc");
    for smp in series.samples.iter().step_by(800) {
        println!(
            "{:6.1} s  {:+.4} Hz  {:+6.2} MW  {:5.2} MW  {:.3}",
            smp.t, smp.delta_f_hz, smp.p_ups_mw, smp.p_dc_mw, smp.soc
        );
    }
    println!();
    println!("negative ups power is recharge: the facility draws above nominal until the battery is full again");
}
