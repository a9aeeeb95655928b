//! Frequency-responsive data center: droop-controlled server load, a UPS
//! battery that discharges into the facility bus, and the state of charge
//! bookkeeping that limits both.
//!
//! Power signs: `p_ups > 0` discharges (reduces grid draw), `p_ups < 0`
//! charges. Server power is absolute facility IT load in MW, never a delta.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// No data-center participation at all.
    Baseline,
    /// UPS discharge only, servers untouched.
    UpsOnly,
    /// Server droop and UPS discharge together.
    Coordinated,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::UpsOnly => "ups_only",
            Mode::Coordinated => "coordinated",
        }
    }

    pub const ALL: [Mode; 3] = [Mode::Baseline, Mode::UpsOnly, Mode::Coordinated];
}

/// Which way the round-trip efficiencies enter the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocConvention {
    /// dE/dt = -eta_dis * P_dis + P_ch / eta_ch.
    Paper,
    /// dE/dt = -P_dis / eta_dis + eta_ch * P_ch.
    Conventional,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DataCenterParams {
    /// Nominal facility power, MW.
    pub p_dc0: f64,
    /// Power usage effectiveness; splits facility power into servers and
    /// cooling (p_srv0 = p_dc0 / pue).
    pub pue: f64,
    /// Server droop gain, MW per Hz.
    pub k_srv: f64,
    /// UPS droop gain, MW per Hz.
    pub k_ups: f64,
    /// UPS actuation lag, seconds.
    pub tau_dc: f64,
    /// Server actuation lag, seconds. Defaults to tau_dc.
    pub tau_srv: f64,
    /// UPS energy capacity, MWh.
    pub e_cap: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_init: f64,
    /// Discharge efficiency.
    pub eta_dis: f64,
    /// Charge efficiency.
    pub eta_ch: f64,
    /// UPS inverter power limit, MW (both directions).
    pub p_ups_max: f64,
    /// Recharge power drawn once frequency is back inside the deadband, MW.
    pub p_recharge: f64,
    /// Droop deadband, Hz. No response while |delta_f| <= deadband.
    pub deadband: f64,
    pub mode: Mode,
    pub soc_convention: SocConvention,
    /// False disables output clamps and SOC curtailment; only the linear
    /// small-signal configuration used for oracle comparisons turns it off.
    pub limits_enabled: bool,
}

impl Default for DataCenterParams {
    fn default() -> Self {
        DataCenterParams {
            p_dc0: 20.0,
            pue: 1.2,
            k_srv: 10.0,
            k_ups: 15.0,
            tau_dc: 0.1,
            tau_srv: 0.1,
            e_cap: 5.0,
            soc_min: 0.2,
            soc_max: 0.8,
            soc_init: 0.5,
            eta_dis: 0.95,
            eta_ch: 0.9,
            p_ups_max: 10.0,
            p_recharge: 2.0,
            deadband: 0.03,
            mode: Mode::Coordinated,
            soc_convention: SocConvention::Paper,
            limits_enabled: true,
        }
    }
}

impl DataCenterParams {
    /// Nominal server (IT) power, MW.
    pub fn p_srv0(&self) -> f64 {
        self.p_dc0 / self.pue
    }

    /// Nominal cooling and overhead power, MW. Held constant during a run.
    pub fn p_cool0(&self) -> f64 {
        self.p_dc0 - self.p_srv0()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataCenterState {
    /// Actual server power after actuation lag, MW.
    pub p_srv: f64,
    /// Actual UPS power after lag and SOC curtailment, MW. Positive
    /// discharges.
    pub p_ups: f64,
    /// Commanded server power before lag, MW.
    pub p_srv_cmd: f64,
    /// Commanded UPS power before lag, MW.
    pub p_ups_cmd: f64,
    /// State of charge, fraction of e_cap.
    pub soc: f64,
}

impl DataCenterState {
    pub fn nominal(params: &DataCenterParams) -> Self {
        let p_srv0 = params.p_srv0();
        DataCenterState {
            p_srv: p_srv0,
            p_ups: 0.0,
            p_srv_cmd: p_srv0,
            p_ups_cmd: 0.0,
            soc: params.soc_init,
        }
    }
}

/// Droop response to a frequency deviation: returns (server power
/// reduction, UPS power command), both MW. Zero inside the deadband.
/// Under-frequency sheds server load and discharges the UPS; over-frequency
/// keeps servers at nominal and charges.
pub fn droop_command(delta_f_hz: f64, params: &DataCenterParams) -> (f64, f64) {
    if params.mode == Mode::Baseline || delta_f_hz.abs() <= params.deadband {
        return (0.0, 0.0);
    }
    if delta_f_hz < 0.0 {
        let srv_reduction = match params.mode {
            Mode::Coordinated => params.k_srv * (-delta_f_hz),
            _ => 0.0,
        };
        (srv_reduction, params.k_ups * (-delta_f_hz))
    } else {
        (0.0, -params.k_ups * delta_f_hz)
    }
}

/// Recharge command once frequency is back inside the deadband: draw up to
/// p_recharge from the grid until the SOC is restored to soc_init. The
/// command tapers in the final step so the SOC lands exactly on the target.
/// Returns a charge command (<= 0) or 0.
pub fn recharge_controller(
    delta_f_hz: f64,
    state: &DataCenterState,
    params: &DataCenterParams,
    dt: f64,
) -> f64 {
    if params.mode == Mode::Baseline
        || delta_f_hz.abs() > params.deadband
        || state.soc >= params.soc_init
        || params.p_recharge <= 0.0
    {
        return 0.0;
    }
    let deficit_mwh = (params.soc_init - state.soc) * params.e_cap;
    let landing_mw = match params.soc_convention {
        SocConvention::Paper => deficit_mwh * params.eta_ch * 3600.0 / dt,
        SocConvention::Conventional => deficit_mwh * 3600.0 / (params.eta_ch * dt),
    };
    -params.p_recharge.min(landing_mw)
}

/// Exact one-step relaxation of a first-order lag toward `target`.
/// tau = 0 degenerates to a jump.
fn relax(current: f64, target: f64, tau: f64, dt: f64) -> f64 {
    if tau == 0.0 {
        target
    } else {
        target + (current - target) * (-dt / tau).exp()
    }
}

/// Advances server and UPS power one step toward their commands through the
/// actuation lags. Outputs are clamped to the physical ranges and the lag
/// state is set to the clamped value, so saturation leaves no accumulated
/// error behind (anti-windup).
pub fn lag_update(
    state: &DataCenterState,
    p_srv_cmd: f64,
    p_ups_cmd: f64,
    params: &DataCenterParams,
    dt: f64,
) -> DataCenterState {
    let mut p_srv = relax(state.p_srv, p_srv_cmd, params.tau_srv, dt);
    let mut p_ups = relax(state.p_ups, p_ups_cmd, params.tau_dc, dt);
    if params.limits_enabled {
        p_srv = p_srv.clamp(0.0, params.p_srv0());
        p_ups = p_ups.clamp(-params.p_ups_max, params.p_ups_max);
    }
    DataCenterState {
        p_srv,
        p_ups,
        p_srv_cmd,
        p_ups_cmd,
        soc: state.soc,
    }
}

/// Energy rate into the battery in MW (d/dt of stored energy) for a given
/// terminal power.
fn energy_rate_mw(p_ups: f64, params: &DataCenterParams) -> f64 {
    let (dis, ch) = (p_ups.max(0.0), (-p_ups).max(0.0));
    match params.soc_convention {
        SocConvention::Paper => -params.eta_dis * dis + ch / params.eta_ch,
        SocConvention::Conventional => -dis / params.eta_dis + params.eta_ch * ch,
    }
}

/// Integrates the state of charge over one step. When the step would cross
/// a SOC bound, p_ups is curtailed so the SOC lands exactly on the bound;
/// at the bound the forbidden direction yields p_ups = 0 until conditions
/// reverse.
pub fn soc_update(state: &DataCenterState, params: &DataCenterParams, dt: f64) -> DataCenterState {
    let mut next = *state;
    let d_soc = energy_rate_mw(state.p_ups, params) * dt / 3600.0 / params.e_cap;
    if !params.limits_enabled {
        next.soc += d_soc;
        return next;
    }
    let candidate = state.soc + d_soc;
    if candidate < params.soc_min {
        // Discharging past empty: scale back to exactly drain to soc_min.
        let avail_mwh = (state.soc - params.soc_min) * params.e_cap;
        next.p_ups = match params.soc_convention {
            SocConvention::Paper => avail_mwh * 3600.0 / (params.eta_dis * dt),
            SocConvention::Conventional => avail_mwh * params.eta_dis * 3600.0 / dt,
        };
        next.soc = params.soc_min;
    } else if candidate > params.soc_max {
        let room_mwh = (params.soc_max - state.soc) * params.e_cap;
        let charge = match params.soc_convention {
            SocConvention::Paper => room_mwh * params.eta_ch * 3600.0 / dt,
            SocConvention::Conventional => room_mwh * 3600.0 / (params.eta_ch * dt),
        };
        next.p_ups = -charge;
        next.soc = params.soc_max;
    } else {
        next.soc = candidate;
    }
    next
}

/// One full controller step: droop (or recharge) command from the measured
/// deviation, actuation lag, SOC integration.
pub fn control_step(
    state: &DataCenterState,
    params: &DataCenterParams,
    delta_f_hz: f64,
    dt: f64,
) -> DataCenterState {
    let (srv_reduction, ups_droop) = droop_command(delta_f_hz, params);
    let p_ups_cmd = if delta_f_hz.abs() <= params.deadband {
        recharge_controller(delta_f_hz, state, params, dt)
    } else {
        ups_droop
    };
    let p_srv_cmd = params.p_srv0() - srv_reduction;
    let lagged = lag_update(state, p_srv_cmd, p_ups_cmd, params, dt);
    soc_update(&lagged, params, dt)
}

/// Facility power drawn from the grid, MW. UPS discharge offsets draw.
pub fn net_power(state: &DataCenterState, params: &DataCenterParams) -> f64 {
    state.p_srv + params.p_cool0() - state.p_ups
}

/// Instantaneous power usage effectiveness.
pub fn pue(p_srv: f64, p_cool: f64) -> f64 {
    (p_srv + p_cool) / p_srv
}

/// Load relief seen by the grid, per-unit on the system base. Positive when
/// the facility draws less than nominal.
pub fn grid_relief(state: &DataCenterState, params: &DataCenterParams, s_sys_mw: f64) -> f64 {
    (params.p_dc0 - net_power(state, params)) / s_sys_mw
}
