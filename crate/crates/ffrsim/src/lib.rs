//! Grid frequency dynamics with a frequency-responsive data center.
//!
//! A deterministic fixed-step simulator for the frequency of a power
//! system after a generation or load event, where a data center helps
//! arrest the excursion by shedding IT load and discharging its UPS along
//! a droop curve. A closed-form small-signal model of the same loop backs
//! the integrator for verification and quick what-if analysis.
//!
//! The pieces:
//!
//! * [`grid`]: swing dynamics, governor with limited headroom, secondary
//!   control.
//! * [`datacenter`]: droop response split between servers and UPS,
//!   actuation lags, state-of-charge accounting, recharge.
//! * [`scenario`]: couples the two per step, computes case metrics, runs
//!   three-way strategy comparisons and gain/inertia sweeps.
//! * [`analytic`]: poles, step response, steady state, and nadir of the
//!   linearized loop.
//! * [`config`] / [`output`] / [`cli`]: JSON configuration with strict key
//!   checking and provenance, CSV/JSON writers, and the `ffrsim` binary
//!   wiring them together.
//!
//! Start with the examples; each one exercises one capability end to end:
//!
//! * `generation_trip`: one event, one strategy, milestone printout.
//! * `case_comparison`: baseline vs UPS-only vs coordinated metrics.
//! * `gain_inertia_sweep`: nadir improvement across droop gain and
//!   system inertia.
//! * `step_response_analysis`: closed form against the integrator.
//! * `ups_recharge_cycle`: battery discharge and restoration.
//!
//! ```
//! use ffrsim::scenario::{compute_metrics, run, Scenario};
//!
//! let scenario = Scenario::default();
//! let series = run(&scenario).unwrap();
//! let metrics = compute_metrics(&series, &scenario);
//! assert!(metrics.f_min > 59.5 && metrics.f_min < 60.0);
//! ```

pub mod analytic;
pub mod cli;
pub mod config;
pub mod datacenter;
pub mod error;
pub mod grid;
pub mod output;
pub mod scenario;

pub use error::{Error, Result};
