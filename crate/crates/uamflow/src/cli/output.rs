//! File outputs: CSV tables and JSON summaries. All writers format floats
//! with the shortest round-trip representation, so identical data means
//! identical bytes.

use crate::airspace::{FlightPlan, Network};
use crate::dcb::{DcbConfig, DcbSolution};
use crate::engine::EpisodeLog;
use crate::metrics::RunStats;
use crate::tactical::EpisodeReward;
use anyhow::{Context, Result};
use std::collections::BTreeMap;
use std::path::Path;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_schedule_csv(path: &Path, plans: &[FlightPlan]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "flight_id",
        "route_id",
        "scheduled_departure",
        "required_departure",
    ])?;
    for p in plans {
        w.write_record([
            p.flight_id.as_str(),
            p.route_id.as_str(),
            &fmt(p.scheduled_departure),
            &fmt(p.required_departure),
        ])?;
    }
    Ok(w.flush()?)
}

/// The strategic solution table: one row per flight, schedule order.
pub fn write_solution_csv(path: &Path, plans: &[FlightPlan], sol: &DcbSolution) -> Result<()> {
    let mut sorted: Vec<&FlightPlan> = plans.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheduled_departure
            .total_cmp(&b.scheduled_departure)
            .then_with(|| a.flight_id.cmp(&b.flight_id))
    });
    let mut w = writer(path)?;
    w.write_record(["flight_id", "scheduled", "required", "delay"])?;
    for p in sorted {
        let required = sol
            .required_departures
            .get(&p.flight_id)
            .copied()
            .unwrap_or(p.scheduled_departure);
        w.write_record([
            p.flight_id.as_str(),
            &fmt(p.scheduled_departure),
            &fmt(required),
            &fmt((required - p.scheduled_departure).max(0.0)),
        ])?;
    }
    Ok(w.flush()?)
}

/// Per-resource demand histogram before and after optimization: how many
/// arrivals each window holds under scheduled versus required departures.
pub fn write_occupancy_csv(
    path: &Path,
    plans: &[FlightPlan],
    network: &Network,
    cfg: &DcbConfig,
    sol: &DcbSolution,
) -> Result<()> {
    let mut scheduled: BTreeMap<(String, i64), u32> = BTreeMap::new();
    let mut optimized: BTreeMap<(String, i64), u32> = BTreeMap::new();
    for p in plans {
        let mut before = p.clone();
        before.required_departure = before.scheduled_departure;
        let mut after = p.clone();
        if let Some(&r) = sol.required_departures.get(&p.flight_id) {
            after.required_departure = r;
        }
        for (plan, map) in [(before, &mut scheduled), (after, &mut optimized)] {
            for (res, eta) in plan.etas(network)? {
                *map.entry((res, cfg.window_index(eta))).or_insert(0) += 1;
            }
        }
    }
    let mut keys: Vec<(String, i64)> = scheduled
        .keys()
        .chain(optimized.keys())
        .cloned()
        .collect();
    keys.sort();
    keys.dedup();
    let mut w = writer(path)?;
    w.write_record([
        "resource",
        "window",
        "window_start",
        "scheduled_demand",
        "optimized_demand",
    ])?;
    for (res, win) in keys {
        w.write_record([
            res.as_str(),
            &win.to_string(),
            &fmt(cfg.window_start(win)),
            &scheduled.get(&(res.clone(), win)).copied().unwrap_or(0).to_string(),
            &optimized.get(&(res.clone(), win)).copied().unwrap_or(0).to_string(),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_events_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "kind",
        "flight_a",
        "flight_b",
        "t_start",
        "t_end",
        "min_distance",
    ])?;
    for e in &log.events {
        w.write_record([
            e.kind.label(),
            e.flight_a.as_str(),
            e.flight_b.as_str(),
            &fmt(e.t_start),
            &fmt(e.t_end),
            &fmt(e.min_distance),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_flights_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "flight_id",
        "route_id",
        "scheduled",
        "required",
        "estimated_time",
        "actual_time",
        "alerts",
        "ground_delay",
        "airborne_delay",
        "outcome",
    ])?;
    for f in &log.flights {
        w.write_record([
            f.flight_id.as_str(),
            f.route_id.as_str(),
            &fmt(f.scheduled_departure),
            &fmt(f.required_departure),
            &fmt(f.estimated_time),
            &fmt_opt(f.actual_time),
            &f.alerts.to_string(),
            &fmt(f.ground_delay),
            &fmt_opt(f.airborne_delay),
            &serde_json::to_value(f.outcome)
                .expect("outcome serializes")
                .as_str()
                .expect("outcome is a string")
                .to_string(),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_speeds_csv(path: &Path, log: &EpisodeLog) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "flight_id", "speed"])?;
    if let Some(trace) = &log.speed_trace {
        for s in trace {
            w.write_record([&fmt(s.t), s.flight_id.as_str(), &fmt(s.speed)])?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_runs_csv(path: &Path, stats: &[RunStats]) -> Result<()> {
    let mut w = writer(path)?;
    for s in stats {
        w.serialize(s)?;
    }
    Ok(w.flush()?)
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunStats>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("reading runs table {}", path.display()))?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_curve_csv(path: &Path, curve: &[EpisodeReward]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["episode", "total", "safety", "time", "action"])?;
    for e in curve {
        w.write_record([
            &e.episode.to_string(),
            &fmt(e.total),
            &fmt(e.safety),
            &fmt(e.time),
            &fmt(e.action),
        ])?;
    }
    Ok(w.flush()?)
}

/// Pretty JSON plus trailing newline, for stable bytes.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
