//! Safety and efficiency metrics over episode logs: event rates per flight
//! hour, the estimated-collision chain, risk ratios against an unmitigated
//! baseline, and run-level aggregation with confidence intervals.

mod sweep;

pub use sweep::{capacity_sweep, SweepRow, SweepTable};

use crate::engine::{EpisodeLog, EventKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Target level of safety: estimated collisions per 100,000 flight hours.
pub const TARGET_LEVEL_OF_SAFETY: f64 = 0.94;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("flight hours must be positive, got {0}")]
    ZeroFlightHours(f64),
    #[error("probability out of range: {0}")]
    BadProbability(f64),
}

/// The analytic collision-risk chain: collisions are not simulated, they
/// are estimated from observed near collisions via a conditional
/// probability, discounted by the effectiveness of an (unmodeled) onboard
/// collision-avoidance system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskModelParams {
    /// P(collision | near collision), measured on unmitigated traffic.
    pub p_mac_given_nmac: f64,
    /// Multiplicative credit for onboard collision avoidance.
    pub acasx_risk_ratio: f64,
}

impl Default for RiskModelParams {
    fn default() -> Self {
        Self {
            p_mac_given_nmac: 5.038e-3,
            acasx_risk_ratio: 0.005,
        }
    }
}

impl RiskModelParams {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for p in [self.p_mac_given_nmac, self.acasx_risk_ratio] {
            if !(0.0..=1.0).contains(&p) {
                return Err(MetricsError::BadProbability(p));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacEstimate {
    pub expected_macs: f64,
    pub rate_per_100k_fh: f64,
}

/// Expected collisions from an observed near-collision count:
/// `E = P(MAC|NMAC) * beta * n_nmac`, plus the rate per 100,000 flight
/// hours. Linear in both the count and each factor.
pub fn estimate_mac(
    n_nmac: u64,
    flight_hours: f64,
    params: &RiskModelParams,
) -> Result<MacEstimate, MetricsError> {
    if !(flight_hours > 0.0) {
        return Err(MetricsError::ZeroFlightHours(flight_hours));
    }
    let expected = params.p_mac_given_nmac * params.acasx_risk_ratio * n_nmac as f64;
    Ok(MacEstimate {
        expected_macs: expected,
        rate_per_100k_fh: expected / flight_hours * 100_000.0,
    })
}

/// Pooled P(MAC|NMAC) from unmitigated runs, with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub p: f64,
    pub mac_events: u64,
    pub nmac_events: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Measures P(MAC|NMAC) on logs from runs without any intervention. `None`
/// when no near collision was observed (the ratio is undefined).
pub fn calibrate_p_mac_given_nmac(logs: &[EpisodeLog]) -> Option<Calibration> {
    let mac: u64 = logs.iter().map(|l| l.count_events(EventKind::Mac) as u64).sum();
    let nmac: u64 = logs.iter().map(|l| l.count_events(EventKind::Nmac) as u64).sum();
    if nmac == 0 {
        return None;
    }
    let p = mac as f64 / nmac as f64;
    let (ci_low, ci_high) = wilson_interval(mac as f64, nmac as f64, 1.96);
    Some(Calibration {
        p,
        mac_events: mac,
        nmac_events: nmac,
        ci_low,
        ci_high,
    })
}

fn wilson_interval(successes: f64, n: f64, z: f64) -> (f64, f64) {
    let p = successes / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Method rate divided by the unmitigated baseline rate; above 1 means the
/// method is riskier than doing nothing. `None` when the baseline rate is
/// zero (the ratio is undefined).
pub fn risk_ratio(method_rate: f64, baseline_rate: f64) -> Option<f64> {
    (baseline_rate > 0.0).then(|| method_rate / baseline_rate)
}

/// Per-run counts, the unit the aggregation works on. One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub run_index: u64,
    pub seed: u64,
    pub flights: u64,
    pub flight_hours: f64,
    pub lowc_events: u64,
    pub nmac_events: u64,
    pub mac_events: u64,
    pub total_ground_delay: f64,
    pub total_airborne_delay: f64,
    pub total_alerts: u64,
    pub truncated: bool,
}

impl RunStats {
    pub fn from_log(run_index: u64, log: &EpisodeLog) -> Self {
        Self {
            run_index,
            seed: log.seed,
            flights: log.flights.len() as u64,
            flight_hours: log.flight_hours,
            lowc_events: log.count_events(EventKind::LoWC) as u64,
            nmac_events: log.count_events(EventKind::Nmac) as u64,
            mac_events: log.count_events(EventKind::Mac) as u64,
            total_ground_delay: log.total_ground_delay(),
            total_airborne_delay: log.total_airborne_delay(),
            total_alerts: log.total_alerts(),
            truncated: log.truncated,
        }
    }

    fn per_fh(&self, count: u64) -> f64 {
        if self.flight_hours > 0.0 {
            count as f64 / self.flight_hours
        } else {
            0.0
        }
    }

    fn per_flight(&self, total: f64) -> f64 {
        if self.flights > 0 {
            total / self.flights as f64
        } else {
            0.0
        }
    }

    fn est_mac_rate(&self, params: &RiskModelParams) -> f64 {
        if self.flight_hours > 0.0 {
            estimate_mac(self.nmac_events, self.flight_hours, params)
                .map(|e| e.rate_per_100k_fh)
                .unwrap_or(0.0)
        } else {
            0.0
        }
    }
}

/// How runs combine into a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Compute each metric per run, then average across runs (the default).
    PerRun,
    /// Pool counts and hours over all runs before dividing.
    Pooled,
}

/// A mean with a 95% confidence interval from run-level variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ci {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Ci {
    /// Sorts the values first so the result is identical under permutation
    /// of the runs.
    fn from_values(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        if v.is_empty() {
            return Self {
                mean: 0.0,
                lo: 0.0,
                hi: 0.0,
            };
        }
        // All-equal samples ask for the value itself, not an accumulated
        // mean that may differ in the last ulp.
        if v.first() == v.last() {
            return Self {
                mean: v[0],
                lo: v[0],
                hi: v[0],
            };
        }
        let mean = v.iter().sum::<f64>() / n;
        if v.len() < 2 {
            return Self {
                mean,
                lo: mean,
                hi: mean,
            };
        }
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let half = 1.96 * (var / n).sqrt();
        Self {
            mean,
            lo: mean - half,
            hi: mean + half,
        }
    }

    fn exact(value: f64) -> Self {
        Self {
            mean: value,
            lo: value,
            hi: value,
        }
    }
}

/// The aggregated safety and efficiency picture of one experiment setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub runs: u64,
    pub aggregation: Aggregation,
    pub lowc_per_fh: Ci,
    pub nmac_per_fh: Ci,
    pub est_mac_per_100k_fh: Ci,
    pub mean_ground_delay_s: Ci,
    pub mean_airborne_delay_s: Ci,
    pub mean_alerts_per_flight: Ci,
    /// Filled against a baseline report via [`MetricsReport::with_baseline`].
    pub risk_ratio: Option<f64>,
    pub truncated_runs: u64,
    pub risk_params: RiskModelParams,
}

impl MetricsReport {
    /// Sets the risk ratio of this report's estimated collision rate
    /// against an unmitigated baseline's.
    pub fn with_baseline(mut self, baseline: &MetricsReport) -> Self {
        self.risk_ratio = risk_ratio(
            self.est_mac_per_100k_fh.mean,
            baseline.est_mac_per_100k_fh.mean,
        );
        self
    }

    /// One aligned text row; pair with [`comparison_table`].
    pub fn text_columns(&self) -> Vec<String> {
        vec![
            format!("{:.1}", self.lowc_per_fh.mean),
            format!("{:.2}", self.est_mac_per_100k_fh.mean),
            self.risk_ratio
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "-".into()),
            format!("{:.1}", self.mean_alerts_per_flight.mean),
            format!("{:.1}", self.mean_airborne_delay_s.mean),
            format!("{:.1}", self.mean_ground_delay_s.mean),
        ]
    }
}

/// Aggregates per-run stats into a report.
pub fn aggregate(
    stats: &[RunStats],
    params: &RiskModelParams,
    aggregation: Aggregation,
) -> MetricsReport {
    let truncated = stats.iter().filter(|s| s.truncated).count() as u64;
    match aggregation {
        Aggregation::PerRun => {
            let collect = |f: &dyn Fn(&RunStats) -> f64| -> Vec<f64> {
                stats.iter().map(f).collect()
            };
            MetricsReport {
                runs: stats.len() as u64,
                aggregation,
                lowc_per_fh: Ci::from_values(&collect(&|s| s.per_fh(s.lowc_events))),
                nmac_per_fh: Ci::from_values(&collect(&|s| s.per_fh(s.nmac_events))),
                est_mac_per_100k_fh: Ci::from_values(&collect(&|s| s.est_mac_rate(params))),
                mean_ground_delay_s: Ci::from_values(&collect(&|s| s.per_flight(s.total_ground_delay))),
                mean_airborne_delay_s: Ci::from_values(
                    &collect(&|s| s.per_flight(s.total_airborne_delay)),
                ),
                mean_alerts_per_flight: Ci::from_values(
                    &collect(&|s| s.per_flight(s.total_alerts as f64)),
                ),
                risk_ratio: None,
                truncated_runs: truncated,
                risk_params: *params,
            }
        }
        Aggregation::Pooled => {
            let fh: f64 = stats.iter().map(|s| s.flight_hours).sum();
            let flights: u64 = stats.iter().map(|s| s.flights).sum();
            let lowc: u64 = stats.iter().map(|s| s.lowc_events).sum();
            let nmac: u64 = stats.iter().map(|s| s.nmac_events).sum();
            let ground: f64 = stats.iter().map(|s| s.total_ground_delay).sum();
            let airborne: f64 = stats.iter().map(|s| s.total_airborne_delay).sum();
            let alerts: u64 = stats.iter().map(|s| s.total_alerts).sum();
            let rate = |count: u64| if fh > 0.0 { count as f64 / fh } else { 0.0 };
            let per_flight = |total: f64| {
                if flights > 0 {
                    total / flights as f64
                } else {
                    0.0
                }
            };
            let est = if fh > 0.0 {
                estimate_mac(nmac, fh, params)
                    .map(|e| e.rate_per_100k_fh)
                    .unwrap_or(0.0)
            } else {
                0.0
            };
            MetricsReport {
                runs: stats.len() as u64,
                aggregation,
                lowc_per_fh: Ci::exact(rate(lowc)),
                nmac_per_fh: Ci::exact(rate(nmac)),
                est_mac_per_100k_fh: Ci::exact(est),
                mean_ground_delay_s: Ci::exact(per_flight(ground)),
                mean_airborne_delay_s: Ci::exact(per_flight(airborne)),
                mean_alerts_per_flight: Ci::exact(per_flight(alerts as f64)),
                risk_ratio: None,
                truncated_runs: truncated,
                risk_params: *params,
            }
        }
    }
}

/// Renders several reports as one aligned comparison table: a row per
/// labeled method, safety columns first, efficiency columns after.
pub fn comparison_table(rows: &[(String, &MetricsReport)]) -> String {
    let headers = [
        "method",
        "LoWC/fh",
        "estMAC/100kfh",
        "risk ratio",
        "alerts/flight",
        "airborne delay s",
        "ground delay s",
    ];
    let mut table: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
    for (label, report) in rows {
        let mut row = vec![label.clone()];
        row.extend(report.text_columns());
        table.push(row);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}", w = w))
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_matches_the_constant_chain() {
        let params = RiskModelParams::default();
        let e = estimate_mac(4, 10.0, &params).unwrap();
        assert_eq!(e.expected_macs, 5.038e-3 * 0.005 * 4.0);
        assert!((e.rate_per_100k_fh - 1.0076).abs() < 1e-9);
        assert_eq!(estimate_mac(0, 10.0, &params).unwrap().expected_macs, 0.0);
    }

    #[test]
    fn degenerate_beta_of_one_scales_linearly() {
        let params = RiskModelParams {
            p_mac_given_nmac: 5.038e-3,
            acasx_risk_ratio: 1.0,
        };
        let e = estimate_mac(1000, 100.0, &params).unwrap();
        assert!((e.expected_macs - 5.038).abs() < 1e-12);
    }

    #[test]
    fn zero_flight_hours_is_an_error() {
        assert!(estimate_mac(1, 0.0, &RiskModelParams::default()).is_err());
    }

    #[test]
    fn risk_ratio_matches_reference_quotient() {
        let r = risk_ratio(908.25, 205.53).unwrap();
        assert!((r - 4.419).abs() < 0.001, "got {r}");
        assert_eq!(risk_ratio(100.0, 100.0), Some(1.0));
        assert_eq!(risk_ratio(0.0, 205.53), Some(0.0));
        assert_eq!(risk_ratio(1.0, 0.0), None);
    }

    fn stats(seed: u64, fh: f64, lowc: u64, nmac: u64) -> RunStats {
        RunStats {
            run_index: seed,
            seed,
            flights: 10,
            flight_hours: fh,
            lowc_events: lowc,
            nmac_events: nmac,
            mac_events: 0,
            total_ground_delay: 100.0,
            total_airborne_delay: 50.0,
            total_alerts: 20,
            truncated: false,
        }
    }

    #[test]
    fn duplicated_runs_have_zero_width_ci() {
        let one = vec![stats(1, 2.0, 8, 2)];
        let thirty: Vec<RunStats> = (0..30).map(|_| stats(1, 2.0, 8, 2)).collect();
        let params = RiskModelParams::default();
        let a = aggregate(&one, &params, Aggregation::PerRun);
        let b = aggregate(&thirty, &params, Aggregation::PerRun);
        assert_eq!(a.lowc_per_fh.mean, b.lowc_per_fh.mean);
        assert_eq!(b.lowc_per_fh.lo, b.lowc_per_fh.hi);
        assert_eq!(b.est_mac_per_100k_fh.mean, a.est_mac_per_100k_fh.mean);
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let mut runs: Vec<RunStats> = (0..10)
            .map(|i| stats(i, 1.0 + i as f64, i, i / 2))
            .collect();
        let params = RiskModelParams::default();
        let a = aggregate(&runs, &params, Aggregation::PerRun);
        runs.reverse();
        runs.swap(0, 5);
        let b = aggregate(&runs, &params, Aggregation::PerRun);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_traffic_gives_all_zero_report() {
        let s = RunStats {
            run_index: 0,
            seed: 0,
            flights: 0,
            flight_hours: 0.0,
            lowc_events: 0,
            nmac_events: 0,
            mac_events: 0,
            total_ground_delay: 0.0,
            total_airborne_delay: 0.0,
            total_alerts: 0,
            truncated: false,
        };
        let report = aggregate(&[s], &RiskModelParams::default(), Aggregation::PerRun);
        assert_eq!(report.lowc_per_fh.mean, 0.0);
        assert_eq!(report.est_mac_per_100k_fh.mean, 0.0);
        assert_eq!(report.mean_ground_delay_s.mean, 0.0);
    }

    #[test]
    fn pipeline_identity_est_mac_vs_nmac_rate() {
        // est rate per run == p * beta * nmac_rate * 1e5, by construction.
        let params = RiskModelParams::default();
        let s = stats(3, 7.0, 12, 5);
        let report = aggregate(&[s.clone()], &params, Aggregation::PerRun);
        let expected = params.p_mac_given_nmac
            * params.acasx_risk_ratio
            * report.nmac_per_fh.mean
            * 100_000.0;
        assert!((report.est_mac_per_100k_fh.mean - expected).abs() < 1e-9);
    }

    #[test]
    fn calibration_counts_pooled_events() {
        use crate::engine::{EpisodeLog, EventKind, SeparationEvent};
        let mk = |kinds: &[EventKind]| EpisodeLog {
            seed: 0,
            flights: vec![],
            events: kinds
                .iter()
                .map(|&kind| SeparationEvent {
                    kind,
                    flight_a: "A".into(),
                    flight_b: "B".into(),
                    t_start: 0.0,
                    t_end: 1.0,
                    min_distance: 5.0,
                })
                .collect(),
            min_separation_series: vec![],
            flight_hours: 1.0,
            truncated: false,
            policy_fallbacks: 0,
            speed_trace: None,
        };
        // 1 MAC across 200 NMACs -> 0.005.
        let mut logs = vec![mk(&[EventKind::Mac, EventKind::Nmac])];
        for _ in 0..199 {
            logs.push(mk(&[EventKind::Nmac]));
        }
        let c = calibrate_p_mac_given_nmac(&logs).unwrap();
        assert_eq!(c.p, 0.005);
        assert_eq!(c.nmac_events, 200);
        assert!(c.ci_low <= c.p && c.p <= c.ci_high);
        // Zero MACs over 100 NMACs -> 0.
        let logs: Vec<EpisodeLog> = (0..100).map(|_| mk(&[EventKind::Nmac])).collect();
        assert_eq!(calibrate_p_mac_given_nmac(&logs).unwrap().p, 0.0);
        // No NMACs -> undefined.
        assert!(calibrate_p_mac_given_nmac(&[mk(&[])]).is_none());
    }
}
