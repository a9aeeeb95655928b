//! Deterministic result serialization: fixed-precision CSV for time series
//! and sweep grids, fixed-key-order JSON for metrics and analysis. Identical
//! inputs produce byte-identical files on every platform.

use std::path::Path;

use serde::Serialize;

use crate::analytic::{ClosedLoopModel, Poles};
use crate::config::Provenance;
use crate::error::{Error, Result};
use crate::scenario::{CaseResult, Sample, SweepCell, TimeSeries};

pub const TIMESERIES_HEADER: &str = "t,delta_f_hz,p_gov_mw,p_srv_mw,p_ups_mw,p_cool_mw,p_dc_mw,soc";
pub const SWEEP_HEADER: &str = "k_dc_mw_per_hz,h_s,nadir_improvement_hz";

/// Fixed-point rendering with nine significant digits. Stable across
/// platforms, so golden files and byte-identity checks hold everywhere.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        // Covers -0.0; a signless zero keeps outputs canonical.
        return "0.000000000".into();
    }
    let decimals = (8 - x.abs().log10().floor() as i64).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::OutputIo {
        path: path.display().to_string(),
        source,
    })
}

pub fn render_timeseries(ts: &TimeSeries) -> String {
    let mut out = String::with_capacity(ts.samples.len() * 96 + 64);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for s in &ts.samples {
        let row = [
            s.t, s.delta_f_hz, s.p_gov_mw, s.p_srv_mw, s.p_ups_mw, s.p_cool_mw, s.p_dc_mw, s.soc,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format_sig9(v));
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn write_timeseries(ts: &TimeSeries, path: &Path) -> Result<()> {
    write_file(path, &render_timeseries(ts))
}

/// Parses a CSV produced by `render_timeseries` back into a series.
pub fn parse_timeseries(text: &str) -> Result<TimeSeries> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ConfigParse("empty time series".into()))?;
    if header != TIMESERIES_HEADER {
        return Err(Error::ConfigParse(format!(
            "unexpected time series header: {header}"
        )));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',').map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::ConfigParse(format!("row {}: {e}", i + 1)))
        });
        let mut next = || {
            fields
                .next()
                .ok_or_else(|| Error::ConfigParse(format!("row {}: too few columns", i + 1)))?
        };
        let s = Sample {
            t: next()?,
            delta_f_hz: next()?,
            p_gov_mw: next()?,
            p_srv_mw: next()?,
            p_ups_mw: next()?,
            p_cool_mw: next()?,
            p_dc_mw: next()?,
            soc: next()?,
        };
        samples.push(s);
    }
    Ok(TimeSeries { samples })
}

pub fn render_sweep(cells: &[SweepCell]) -> String {
    let mut out = String::with_capacity(cells.len() * 40 + 48);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&format_sig9(c.k_dc_mw_per_hz));
        out.push(',');
        out.push_str(&format_sig9(c.h_s));
        out.push(',');
        out.push_str(&format_sig9(c.nadir_improvement_hz));
        out.push('\n');
    }
    out
}

pub fn write_sweep(cells: &[SweepCell], path: &Path) -> Result<()> {
    write_file(path, &render_sweep(cells))
}

/// One case's summary in the metrics document. Field order is the JSON key
/// order; optional metrics are omitted rather than null.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub case: &'static str,
    pub f_min_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nadir_improvement_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_rec_s: Option<f64>,
    pub e_ffr_mwh: f64,
    pub avg_ups_mw: f64,
    pub delta_sla_pct: f64,
}

impl From<&CaseResult> for MetricsRow {
    fn from(r: &CaseResult) -> Self {
        MetricsRow {
            case: r.mode.as_str(),
            f_min_hz: r.metrics.f_min,
            nadir_improvement_hz: r.nadir_improvement,
            t_rec_s: r.metrics.t_rec,
            e_ffr_mwh: r.metrics.e_ffr,
            avg_ups_mw: r.metrics.avg_ups_power,
            delta_sla_pct: r.metrics.delta_sla,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct MetricDefinitions {
    f_min_hz: &'static str,
    nadir_improvement_hz: &'static str,
    t_rec_s: &'static str,
    e_ffr_mwh: &'static str,
    avg_ups_mw: &'static str,
    delta_sla_pct: &'static str,
}

const DEFINITIONS: MetricDefinitions = MetricDefinitions {
    f_min_hz: "lowest frequency reached after the disturbance, Hz",
    nadir_improvement_hz: "f_min gain over the baseline case on the same grid, Hz; absent for the baseline itself",
    t_rec_s: "time from disturbance onset until the frequency stays within +/-0.02 Hz of nominal, s; absent when the run ends outside the band",
    e_ffr_mwh: "UPS throughput plus deferred IT energy over the event, trapezoidal, MWh; UPS-only when scenario.e_ffr_ups_only is set",
    avg_ups_mw: "mean UPS output over the samples where it discharges, MW; 0 when it never does",
    delta_sla_pct: "deferred IT energy as a percentage of nominal IT energy over the full horizon",
};

#[derive(Serialize)]
struct MetricsDocument<'a> {
    cases: Vec<MetricsRow>,
    definitions: MetricDefinitions,
    provenance: &'a Provenance,
}

pub fn render_metrics(cases: &[CaseResult], provenance: &Provenance) -> String {
    let doc = MetricsDocument {
        cases: cases.iter().map(MetricsRow::from).collect(),
        definitions: DEFINITIONS,
        provenance,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("metrics document serializes");
    text.push('\n');
    text
}

pub fn write_metrics(cases: &[CaseResult], provenance: &Provenance, path: &Path) -> Result<()> {
    write_file(path, &render_metrics(cases, provenance))
}

#[derive(Serialize)]
struct PoleEntry {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct NadirEntry {
    /// Seconds after the disturbance step; null when the response approaches
    /// steady state monotonically and has no interior extremum.
    t_s: Option<f64>,
    delta_f_hz: f64,
}

#[derive(Serialize)]
struct AnalysisDocument {
    model: ModelEntry,
    poles: Vec<PoleEntry>,
    delta_f_ss_hz: f64,
    nadir: NadirEntry,
}

#[derive(Serialize)]
struct ModelEntry {
    h_s: f64,
    d_pu: f64,
    k_dc_pu: f64,
    tau_s: f64,
    f0_hz: f64,
    step_pu: f64,
}

/// Renders the small-signal analysis for one step disturbance as JSON.
pub fn render_analysis(model: &ClosedLoopModel, dp: f64) -> Result<String> {
    let poles = match model.poles() {
        Poles::First(p) => vec![PoleEntry { re: p, im: 0.0 }],
        Poles::Repeated(p) => vec![
            PoleEntry { re: p, im: 0.0 },
            PoleEntry { re: p, im: 0.0 },
        ],
        Poles::Pair(a, b) => vec![
            PoleEntry { re: a.re, im: a.im },
            PoleEntry { re: b.re, im: b.im },
        ],
    };
    let delta_f_ss_hz = model.steady_state_deviation(dp)?;
    let (t_nadir, f_nadir) = model.nadir(dp)?;
    let doc = AnalysisDocument {
        model: ModelEntry {
            h_s: model.h,
            d_pu: model.d,
            k_dc_pu: model.k_dc,
            tau_s: model.tau,
            f0_hz: model.f0,
            step_pu: dp,
        },
        poles,
        delta_f_ss_hz,
        nadir: NadirEntry {
            t_s: t_nadir.is_finite().then_some(t_nadir),
            delta_f_hz: f_nadir,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("analysis document serializes");
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::scenario::{compare_cases, run, Scenario};

    #[test]
    fn sig9_fixed_points() {
        assert_eq!(format_sig9(0.0), "0.000000000");
        assert_eq!(format_sig9(-0.0), "0.000000000");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(-0.03278688524590164), "-0.0327868852");
        assert_eq!(format_sig9(59.97), "59.9700000");
        assert_eq!(format_sig9(6100.0), "6100.00000");
        assert_eq!(format_sig9(0.01), "0.0100000000");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(-2.5e-7), "-0.000000250000000");
    }

    #[test]
    fn timeseries_layout_and_first_row() {
        let two = TimeSeries {
            samples: vec![
                Sample {
                    t: 0.0,
                    delta_f_hz: 0.0,
                    p_gov_mw: 0.0,
                    p_srv_mw: 16.666666666666668,
                    p_ups_mw: 0.0,
                    p_cool_mw: 3.333333333333332,
                    p_dc_mw: 20.0,
                    soc: 0.5,
                },
                Sample {
                    t: 0.01,
                    delta_f_hz: -0.001,
                    p_gov_mw: 0.5,
                    p_srv_mw: 16.666666666666668,
                    p_ups_mw: 0.0,
                    p_cool_mw: 3.333333333333332,
                    p_dc_mw: 20.0,
                    soc: 0.5,
                },
            ],
        };
        let text = render_timeseries(&two);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], TIMESERIES_HEADER);
        assert!(lines[1].starts_with("0.000000000,0.000000000,0.000000000,"));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn timeseries_round_trip_is_stable_at_serialized_precision() {
        let ts = run(&Scenario {
            duration: 10.0,
            ..Scenario::default()
        })
        .unwrap();
        let once = render_timeseries(&ts);
        let twice = render_timeseries(&parse_timeseries(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = Scenario {
            duration: 10.0,
            ..Scenario::default()
        };
        let a = render_timeseries(&run(&s).unwrap());
        let b = render_timeseries(&run(&s).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn metrics_document_shape() {
        let cfg = Config::default();
        let mut s = cfg.scenario.clone();
        s.duration = 20.0;
        let cases = compare_cases(&s).unwrap();
        let text = render_metrics(&cases, &cfg.provenance);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();

        let rows = v["cases"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0]["case"], "baseline");
        assert_eq!(rows[1]["case"], "ups_only");
        assert_eq!(rows[2]["case"], "coordinated");
        // Baseline has no improvement entry at all.
        assert!(rows[0].get("nadir_improvement_hz").is_none());
        assert!(rows[2]["nadir_improvement_hz"].as_f64().unwrap() > 0.0);

        assert!((v["provenance"]["derived"]["k_dc_pu"].as_f64().unwrap()
            - 0.2459016393442623)
            .abs()
            < 1e-15);
        assert_eq!(v["provenance"]["sources"]["grid.f0"], "paper-default");
        assert!(v["definitions"]["delta_sla_pct"].is_string());
    }

    #[test]
    fn single_case_metrics_without_reference() {
        let cfg = Config::default();
        let mut s = cfg.scenario.clone();
        s.duration = 10.0;
        let ts = run(&s).unwrap();
        let m = crate::scenario::compute_metrics(&ts, &s);
        let case = CaseResult {
            mode: s.mode,
            series: ts,
            metrics: m,
            nadir_improvement: None,
        };
        let text = render_metrics(std::slice::from_ref(&case), &cfg.provenance);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["cases"].as_array().unwrap().len(), 1);
        assert!(v["cases"][0].get("nadir_improvement_hz").is_none());
    }

    #[test]
    fn sweep_csv_layout() {
        let cells = vec![
            SweepCell {
                k_dc_mw_per_hz: 0.0,
                h_s: 2.0,
                nadir_improvement_hz: 0.0,
            },
            SweepCell {
                k_dc_mw_per_hz: 25.0,
                h_s: 2.0,
                nadir_improvement_hz: 0.016,
            },
        ];
        let text = render_sweep(&cells);
        assert_eq!(
            text,
            "k_dc_mw_per_hz,h_s,nadir_improvement_hz\n\
             0.000000000,2.00000000,0.000000000\n\
             25.0000000,2.00000000,0.0160000000\n"
        );
    }

    #[test]
    fn analysis_document_shape() {
        let model = ClosedLoopModel {
            h: 2.0,
            d: 0.8,
            k_dc: 0.2459016393442623,
            tau: 0.1,
            f0: 60.0,
        };
        let dp = -200.0 / 6100.0;
        let text = render_analysis(&model, dp).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let poles = v["poles"].as_array().unwrap();
        assert_eq!(poles.len(), 2);
        for p in poles {
            assert!(p["re"].as_f64().unwrap() < 0.0);
        }
        assert!(v["delta_f_ss_hz"].as_f64().unwrap() < 0.0);
        // The default configuration approaches steady state monotonically.
        assert!(v["nadir"]["t_s"].is_null());
        assert_eq!(
            v["nadir"]["delta_f_hz"].as_f64().unwrap(),
            v["delta_f_ss_hz"].as_f64().unwrap()
        );
    }
}
