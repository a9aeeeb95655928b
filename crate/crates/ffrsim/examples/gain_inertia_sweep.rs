//! Sweep the aggregate droop gain against system inertia and print the
//! nadir improvement grid.

use ffrsim::scenario::{sweep, Scenario};

fn main() {
    let scenario = Scenario::default();
    let k_values = [10.0, 15.0, 20.0, 25.0, 30.0];
    let h_values = [2.0, 3.0, 4.0, 5.0];

    let cells = sweep(&scenario, &k_values, &h_values, 0).expect("sweep runs");

    println!("nadir improvement over baseline [mHz]");
    print!("  H \\ K_dc ");
    for k in k_values {
        print!("  {k:>5.0} MW/Hz");
    }
    println!();
    for (hi, h) in h_values.iter().enumerate() {
        print!("  {h:>4.0} s   ");
        for ki in 0..k_values.len() {
            let cell = &cells[hi * k_values.len() + ki];
            print!("  {:>10.2}", cell.nadir_improvement_hz * 1e3);
        }
        println!();
    }

    println!();
    let low = &cells[k_values.len() - 1];
    let high = &cells[cells.len() - 1];
    println!(
        "the same {:.0} MW/Hz of droop buys {:.1}x more nadir at H = {} s than at H = {} s",
        low.k_dc_mw_per_hz,
        low.nadir_improvement_hz / high.nadir_improvement_hz,
        low.h_s,
        high.h_s,
    );
}
