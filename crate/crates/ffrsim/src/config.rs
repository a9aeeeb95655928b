//! JSON configuration: a single document with sections `grid`, `datacenter`,
//! `scenario`, `sweep`, and `output`. Every parameter has a documented
//! default, so `{}` is a complete config. Unknown keys are rejected with
//! their full path, and every resolved value is recorded in a provenance
//! block together with whether it came from the defaults or the user.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::datacenter::{DataCenterParams, Mode, SocConvention};
use crate::error::{Error, Result};
use crate::grid::{mw_per_hz_to_pu, Disturbance, DisturbanceKind, GridParams};
use crate::scenario::Scenario;

const SECTION_KEYS: &[(&str, &[&str])] = &[
    (
        "grid",
        &[
            "f0",
            "s_sys",
            "inertia_h",
            "damping_d",
            "damping_d_pu_per_hz",
            "governor_droop_r",
            "governor_tc",
            "governor_enabled",
            "governor_limit",
            "agc_gain",
        ],
    ),
    (
        "datacenter",
        &[
            "p_dc0",
            "pue",
            "k_srv",
            "k_ups",
            "tau_dc",
            "tau_srv",
            "e_cap",
            "soc_min",
            "soc_max",
            "soc_init",
            "eta_dis",
            "eta_ch",
            "p_ups_max",
            "p_recharge",
            "deadband",
            "mode",
            "soc_convention",
            "limits_enabled",
        ],
    ),
    (
        "scenario",
        &["disturbance", "mode", "duration", "dt", "e_ffr_ups_only"],
    ),
    ("sweep", &["k_dc_mw_per_hz", "h_s", "workers"]),
    ("output", &["timeseries", "metrics", "sweep"]),
];

const DISTURBANCE_KEYS: &[&str] = &["kind", "magnitude", "t_start"];

/// Sensitivity-sweep grid. Defaults cover the published study: aggregate
/// gain 10..30 MW/Hz against inertia 2..5 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    /// Aggregate data-center gain targets, MW/Hz. Split between servers
    /// and UPS at the configured k_srv:k_ups ratio.
    pub k_dc_mw_per_hz: Vec<f64>,
    /// Inertia values, seconds.
    pub h_s: Vec<f64>,
    /// Worker threads for sweep cells; 0 picks the machine default.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            k_dc_mw_per_hz: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            h_s: vec![2.0, 3.0, 4.0, 5.0],
            workers: 0,
        }
    }
}

/// Output file names, resolved relative to the CLI `--out` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub timeseries: String,
    pub metrics: String,
    pub sweep: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            timeseries: "timeseries.csv".into(),
            metrics: "metrics.json".into(),
            sweep: "sweep.csv".into(),
        }
    }
}

/// The `scenario` section as it appears in a resolved document. `mode`
/// always carries the effective case here, even when the input inherited
/// it from `datacenter.mode`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSection {
    pub disturbance: Disturbance,
    pub mode: Mode,
    pub duration: f64,
    pub dt: f64,
    pub e_ffr_ups_only: bool,
}

/// Fully resolved configuration document. Serializing this and loading the
/// result reproduces the same parameters, which is how provenance blocks
/// stay replayable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedDocument {
    pub grid: GridParams,
    pub datacenter: DataCenterParams,
    pub scenario: ScenarioSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// Values computed from the resolved parameters, reported for reference.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedValues {
    /// Nominal IT load, MW.
    pub p_srv0_mw: f64,
    /// Nominal cooling load, MW.
    pub p_cool0_mw: f64,
    /// Aggregate data-center droop gain, MW/Hz.
    pub k_dc_mw_per_hz: f64,
    /// The same gain normalized to per-unit power per per-unit frequency.
    pub k_dc_pu: f64,
}

/// Everything needed to reproduce a run: the resolved document, where each
/// value came from, and any unit conversions applied on the way in.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config: ResolvedDocument,
    pub sources: BTreeMap<String, &'static str>,
    pub conversions: Vec<String>,
    pub derived: DerivedValues,
}

/// Loaded, validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub sweep: SweepSection,
    pub output: OutputSection,
    pub provenance: Provenance,
}

#[derive(Debug, Default, Deserialize)]
struct RawGrid {
    f0: Option<f64>,
    s_sys: Option<f64>,
    inertia_h: Option<f64>,
    damping_d: Option<f64>,
    damping_d_pu_per_hz: Option<f64>,
    governor_droop_r: Option<f64>,
    governor_tc: Option<f64>,
    governor_enabled: Option<bool>,
    governor_limit: Option<f64>,
    agc_gain: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawDataCenter {
    p_dc0: Option<f64>,
    pue: Option<f64>,
    k_srv: Option<f64>,
    k_ups: Option<f64>,
    tau_dc: Option<f64>,
    tau_srv: Option<f64>,
    e_cap: Option<f64>,
    soc_min: Option<f64>,
    soc_max: Option<f64>,
    soc_init: Option<f64>,
    eta_dis: Option<f64>,
    eta_ch: Option<f64>,
    p_ups_max: Option<f64>,
    p_recharge: Option<f64>,
    deadband: Option<f64>,
    mode: Option<Mode>,
    soc_convention: Option<SocConvention>,
    limits_enabled: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
struct RawDisturbance {
    kind: Option<DisturbanceKind>,
    magnitude: Option<f64>,
    t_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawScenario {
    disturbance: Option<RawDisturbance>,
    mode: Option<Mode>,
    duration: Option<f64>,
    dt: Option<f64>,
    e_ffr_ups_only: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
struct RawSweep {
    k_dc_mw_per_hz: Option<Vec<f64>>,
    h_s: Option<Vec<f64>>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
struct RawOutput {
    timeseries: Option<String>,
    metrics: Option<String>,
    sweep: Option<String>,
}

impl Config {
    pub fn from_file(path: impl AsRef<Path>, overrides: &[String]) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigIo {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_text(&text, overrides)
    }

    pub fn from_text(text: &str, overrides: &[String]) -> Result<Config> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        for assignment in overrides {
            apply_override(&mut doc, assignment)?;
        }
        reject_unknown_keys(&doc)?;
        resolve(&doc)
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::from_text("{}", &[]).expect("empty config is the default set")
    }
}

/// Applies one `key.path=value` override onto the raw document. The value
/// is parsed as JSON when possible and kept as a string otherwise, so both
/// `--set grid.inertia_h=4` and `--set datacenter.mode=ups_only` work.
fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw_value) = assignment.split_once('=').ok_or_else(|| {
        Error::ConfigParse(format!("malformed --set '{assignment}', expected key.path=value"))
    })?;
    if path.is_empty() {
        return Err(Error::ConfigParse(format!(
            "malformed --set '{assignment}', empty key path"
        )));
    }
    let value: Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| Value::String(raw_value.to_string()));
    let mut node = doc;
    let mut segments = path.split('.').peekable();
    while let Some(seg) = segments.next() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::ConfigParse(format!("--set '{assignment}' descends into a non-object value"))
        })?;
        if segments.peek().is_none() {
            obj.insert(seg.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split never yields zero segments");
}

fn unknown_key(path: String) -> Error {
    Error::ConfigInvalid {
        key: path,
        message: "unknown key".into(),
    }
}

fn reject_unknown_keys(doc: &Value) -> Result<()> {
    let top = doc
        .as_object()
        .ok_or_else(|| Error::ConfigParse("top level must be a JSON object".into()))?;
    for (name, section) in top {
        let allowed = SECTION_KEYS
            .iter()
            .find(|(s, _)| s == name)
            .map(|(_, keys)| *keys)
            .ok_or_else(|| unknown_key(name.clone()))?;
        let fields = section.as_object().ok_or_else(|| Error::ConfigInvalid {
            key: name.clone(),
            message: "section must be a JSON object".into(),
        })?;
        for (field, value) in fields {
            if !allowed.contains(&field.as_str()) {
                return Err(unknown_key(format!("{name}.{field}")));
            }
            if name == "scenario" && field == "disturbance" {
                let inner = value.as_object().ok_or_else(|| Error::ConfigInvalid {
                    key: "scenario.disturbance".into(),
                    message: "must be a JSON object".into(),
                })?;
                for key in inner.keys() {
                    if !DISTURBANCE_KEYS.contains(&key.as_str()) {
                        return Err(unknown_key(format!("scenario.disturbance.{key}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Deserializes one section, attaching the full key path to type errors.
fn section<T: Default + serde::de::DeserializeOwned>(doc: &Value, name: &str) -> Result<T> {
    match doc.get(name) {
        None => Ok(T::default()),
        Some(v) => serde_path_to_error::deserialize(v.clone()).map_err(|e| {
            let inside = e.path().to_string();
            let key = if inside == "." {
                name.to_string()
            } else {
                format!("{name}.{inside}")
            };
            Error::ConfigInvalid {
                key,
                message: e.inner().to_string(),
            }
        }),
    }
}

struct Tracker {
    sources: BTreeMap<String, &'static str>,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            sources: BTreeMap::new(),
        }
    }

    fn take<T>(&mut self, key: &str, raw: Option<T>, default: T) -> T {
        match raw {
            Some(v) => {
                self.sources.insert(key.into(), "user");
                v
            }
            None => {
                self.sources.insert(key.into(), "paper-default");
                default
            }
        }
    }

    /// Like `take`, but the fallback itself may have been user-chosen
    /// (e.g. tau_srv inheriting a user tau_dc).
    fn inherit<T>(&mut self, key: &str, raw: Option<T>, parent: T, parent_was_user: bool) -> T {
        match raw {
            Some(v) => {
                self.sources.insert(key.into(), "user");
                v
            }
            None => {
                self.sources
                    .insert(key.into(), if parent_was_user { "user" } else { "paper-default" });
                parent
            }
        }
    }
}

fn resolve(doc: &Value) -> Result<Config> {
    let raw_grid: RawGrid = section(doc, "grid")?;
    let raw_dc: RawDataCenter = section(doc, "datacenter")?;
    let raw_scenario: RawScenario = section(doc, "scenario")?;
    let raw_sweep: RawSweep = section(doc, "sweep")?;
    let raw_output: RawOutput = section(doc, "output")?;

    let mut tr = Tracker::new();
    let mut conversions = Vec::new();

    let gd = GridParams::default();
    let f0 = tr.take("grid.f0", raw_grid.f0, gd.f0);
    let damping_d = match (raw_grid.damping_d, raw_grid.damping_d_pu_per_hz) {
        (Some(_), Some(_)) => {
            return Err(Error::ConfigInvalid {
                key: "grid.damping_d".into(),
                message: "set either damping_d or damping_d_pu_per_hz, not both".into(),
            })
        }
        (None, Some(per_hz)) => {
            let pu = per_hz * f0;
            conversions.push(format!(
                "grid.damping_d_pu_per_hz = {per_hz} converted to damping_d = {pu} (multiplied by f0 = {f0})"
            ));
            tr.sources.insert("grid.damping_d".into(), "user");
            pu
        }
        (d, None) => tr.take("grid.damping_d", d, gd.damping_d),
    };
    let grid = GridParams {
        f0,
        s_sys: tr.take("grid.s_sys", raw_grid.s_sys, gd.s_sys),
        inertia_h: tr.take("grid.inertia_h", raw_grid.inertia_h, gd.inertia_h),
        damping_d,
        governor_droop_r: tr.take(
            "grid.governor_droop_r",
            raw_grid.governor_droop_r,
            gd.governor_droop_r,
        ),
        governor_tc: tr.take("grid.governor_tc", raw_grid.governor_tc, gd.governor_tc),
        governor_enabled: tr.take(
            "grid.governor_enabled",
            raw_grid.governor_enabled,
            gd.governor_enabled,
        ),
        governor_limit: tr.take(
            "grid.governor_limit",
            raw_grid.governor_limit,
            gd.governor_limit,
        ),
        agc_gain: tr.take("grid.agc_gain", raw_grid.agc_gain, gd.agc_gain),
    };

    let dd = DataCenterParams::default();
    let tau_dc_was_user = raw_dc.tau_dc.is_some();
    let tau_dc = tr.take("datacenter.tau_dc", raw_dc.tau_dc, dd.tau_dc);
    let dc_mode_was_user = raw_dc.mode.is_some();
    let datacenter = DataCenterParams {
        p_dc0: tr.take("datacenter.p_dc0", raw_dc.p_dc0, dd.p_dc0),
        pue: tr.take("datacenter.pue", raw_dc.pue, dd.pue),
        k_srv: tr.take("datacenter.k_srv", raw_dc.k_srv, dd.k_srv),
        k_ups: tr.take("datacenter.k_ups", raw_dc.k_ups, dd.k_ups),
        tau_dc,
        tau_srv: tr.inherit("datacenter.tau_srv", raw_dc.tau_srv, tau_dc, tau_dc_was_user),
        e_cap: tr.take("datacenter.e_cap", raw_dc.e_cap, dd.e_cap),
        soc_min: tr.take("datacenter.soc_min", raw_dc.soc_min, dd.soc_min),
        soc_max: tr.take("datacenter.soc_max", raw_dc.soc_max, dd.soc_max),
        soc_init: tr.take("datacenter.soc_init", raw_dc.soc_init, dd.soc_init),
        eta_dis: tr.take("datacenter.eta_dis", raw_dc.eta_dis, dd.eta_dis),
        eta_ch: tr.take("datacenter.eta_ch", raw_dc.eta_ch, dd.eta_ch),
        p_ups_max: tr.take("datacenter.p_ups_max", raw_dc.p_ups_max, dd.p_ups_max),
        p_recharge: tr.take("datacenter.p_recharge", raw_dc.p_recharge, dd.p_recharge),
        deadband: tr.take("datacenter.deadband", raw_dc.deadband, dd.deadband),
        mode: tr.take("datacenter.mode", raw_dc.mode, dd.mode),
        soc_convention: tr.take(
            "datacenter.soc_convention",
            raw_dc.soc_convention,
            dd.soc_convention,
        ),
        limits_enabled: tr.take(
            "datacenter.limits_enabled",
            raw_dc.limits_enabled,
            dd.limits_enabled,
        ),
    };

    let sd = Scenario::default();
    let raw_disturbance = raw_scenario.disturbance.unwrap_or_default();
    let disturbance = Disturbance {
        kind: tr.take(
            "scenario.disturbance.kind",
            raw_disturbance.kind,
            sd.disturbance.kind,
        ),
        magnitude: tr.take(
            "scenario.disturbance.magnitude",
            raw_disturbance.magnitude,
            sd.disturbance.magnitude,
        ),
        t_start: tr.take(
            "scenario.disturbance.t_start",
            raw_disturbance.t_start,
            sd.disturbance.t_start,
        ),
    };
    let scenario_section = ScenarioSection {
        disturbance,
        mode: tr.inherit(
            "scenario.mode",
            raw_scenario.mode,
            datacenter.mode,
            dc_mode_was_user,
        ),
        duration: tr.take("scenario.duration", raw_scenario.duration, sd.duration),
        dt: tr.take("scenario.dt", raw_scenario.dt, sd.dt),
        e_ffr_ups_only: tr.take(
            "scenario.e_ffr_ups_only",
            raw_scenario.e_ffr_ups_only,
            sd.e_ffr_ups_only,
        ),
    };

    let swd = SweepSection::default();
    let sweep = SweepSection {
        k_dc_mw_per_hz: tr.take(
            "sweep.k_dc_mw_per_hz",
            raw_sweep.k_dc_mw_per_hz,
            swd.k_dc_mw_per_hz,
        ),
        h_s: tr.take("sweep.h_s", raw_sweep.h_s, swd.h_s),
        workers: tr.take("sweep.workers", raw_sweep.workers, swd.workers),
    };

    let od = OutputSection::default();
    let output = OutputSection {
        timeseries: tr.take("output.timeseries", raw_output.timeseries, od.timeseries),
        metrics: tr.take("output.metrics", raw_output.metrics, od.metrics),
        sweep: tr.take("output.sweep", raw_output.sweep, od.sweep),
    };

    let resolved = ResolvedDocument {
        grid,
        datacenter,
        scenario: scenario_section,
        sweep,
        output,
    };
    validate(&resolved)?;

    let scenario = Scenario {
        grid: resolved.grid,
        dc: resolved.datacenter,
        disturbance: resolved.scenario.disturbance,
        mode: resolved.scenario.mode,
        duration: resolved.scenario.duration,
        dt: resolved.scenario.dt,
        e_ffr_ups_only: resolved.scenario.e_ffr_ups_only,
    };
    scenario.validate().map_err(|e| Error::ConfigInvalid {
        key: "scenario".into(),
        message: e.to_string(),
    })?;

    let k_dc = resolved.datacenter.k_srv + resolved.datacenter.k_ups;
    let derived = DerivedValues {
        p_srv0_mw: resolved.datacenter.p_srv0(),
        p_cool0_mw: resolved.datacenter.p_cool0(),
        k_dc_mw_per_hz: k_dc,
        k_dc_pu: mw_per_hz_to_pu(k_dc, resolved.grid.s_sys, resolved.grid.f0),
    };

    Ok(Config {
        scenario,
        sweep: resolved.sweep.clone(),
        output: resolved.output.clone(),
        provenance: Provenance {
            config: resolved,
            sources: tr.sources,
            conversions,
            derived,
        },
    })
}

fn check(ok: bool, key: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConfigInvalid {
            key: key.into(),
            message: message.into(),
        })
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v > 0.0, key, format!("must be a positive number, got {v}"))
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v >= 0.0, key, format!("must be a non-negative number, got {v}"))
}

fn efficiency(key: &str, v: f64) -> Result<()> {
    check(
        v.is_finite() && v > 0.0 && v <= 1.0,
        key,
        format!("must lie in (0, 1], got {v}"),
    )
}

fn validate(doc: &ResolvedDocument) -> Result<()> {
    let g = &doc.grid;
    positive("grid.f0", g.f0)?;
    positive("grid.s_sys", g.s_sys)?;
    positive("grid.inertia_h", g.inertia_h)?;
    non_negative("grid.damping_d", g.damping_d)?;
    positive("grid.governor_droop_r", g.governor_droop_r)?;
    non_negative("grid.governor_tc", g.governor_tc)?;
    non_negative("grid.governor_limit", g.governor_limit)?;
    non_negative("grid.agc_gain", g.agc_gain)?;

    let d = &doc.datacenter;
    positive("datacenter.p_dc0", d.p_dc0)?;
    check(
        d.pue.is_finite() && d.pue >= 1.0,
        "datacenter.pue",
        format!("must be at least 1, got {}", d.pue),
    )?;
    non_negative("datacenter.k_srv", d.k_srv)?;
    non_negative("datacenter.k_ups", d.k_ups)?;
    non_negative("datacenter.tau_dc", d.tau_dc)?;
    non_negative("datacenter.tau_srv", d.tau_srv)?;
    positive("datacenter.e_cap", d.e_cap)?;
    check(
        d.soc_min.is_finite()
            && d.soc_max.is_finite()
            && 0.0 <= d.soc_min
            && d.soc_min < d.soc_max
            && d.soc_max <= 1.0,
        "datacenter.soc_min",
        format!(
            "soc bounds must satisfy 0 <= soc_min < soc_max <= 1, got soc_min = {}, soc_max = {}",
            d.soc_min, d.soc_max
        ),
    )?;
    check(
        d.soc_init.is_finite() && d.soc_min <= d.soc_init && d.soc_init <= d.soc_max,
        "datacenter.soc_init",
        format!(
            "must lie within [soc_min, soc_max] = [{}, {}], got {}",
            d.soc_min, d.soc_max, d.soc_init
        ),
    )?;
    efficiency("datacenter.eta_dis", d.eta_dis)?;
    efficiency("datacenter.eta_ch", d.eta_ch)?;
    non_negative("datacenter.p_ups_max", d.p_ups_max)?;
    non_negative("datacenter.p_recharge", d.p_recharge)?;
    non_negative("datacenter.deadband", d.deadband)?;

    let s = &doc.scenario;
    positive("scenario.duration", s.duration)?;
    positive("scenario.dt", s.dt)?;
    non_negative("scenario.disturbance.magnitude", s.disturbance.magnitude)?;
    non_negative("scenario.disturbance.t_start", s.disturbance.t_start)?;

    let sw = &doc.sweep;
    check(
        !sw.k_dc_mw_per_hz.is_empty(),
        "sweep.k_dc_mw_per_hz",
        "must list at least one gain",
    )?;
    for (i, k) in sw.k_dc_mw_per_hz.iter().enumerate() {
        non_negative(&format!("sweep.k_dc_mw_per_hz[{i}]"), *k)?;
    }
    check(!sw.h_s.is_empty(), "sweep.h_s", "must list at least one inertia")?;
    for (i, h) in sw.h_s.iter().enumerate() {
        positive(&format!("sweep.h_s[{i}]"), *h)?;
    }

    let o = &doc.output;
    check(!o.timeseries.is_empty(), "output.timeseries", "must not be empty")?;
    check(!o.metrics.is_empty(), "output.metrics", "must not be empty")?;
    check(!o.sweep.is_empty(), "output.sweep", "must not be empty")?;
    Ok(())
}
