//! Scratch: acceptance-predicate search (removed once constants are pinned).
use std::io::Write;
use uamflow::airspace::{FlightPlan, ScenarioConfig};
use uamflow::engine::{monte_carlo, run_plans_episode, EngineConfig, StrategicMode, TacticalMode};
use uamflow::metrics::{aggregate, capacity_sweep, Aggregation, RiskModelParams, RunStats};
use uamflow::tactical::{HoldBand, RulePolicyParams};

fn reshaped(theta_deg: f64) -> ScenarioConfig {
    let mut s = ScenarioConfig::bundled_default();
    let half = (theta_deg / 2.0).to_radians();
    let full = theta_deg.to_radians();
    for n in &mut s.nodes {
        match n.id.as_str() {
            "N-7" => { n.x = -6000.0 * half.cos(); n.y = 6000.0 * half.sin(); }
            "N-9" => { n.x = -6000.0 * half.cos(); n.y = -6000.0 * half.sin(); }
            "M-2" => { n.x = 6000.0 - 6000.0 * full.cos(); n.y = 6000.0 * full.sin(); }
            "M-4" => { n.x = 6000.0 + 6000.0 * full.cos(); n.y = -6000.0 * full.sin(); }
            _ => {}
        }
    }
    s
}

fn stats_of(logs: &[uamflow::engine::EpisodeLog]) -> Vec<RunStats> {
    logs.iter().enumerate().map(|(i, l)| RunStats::from_log(i as u64, l)).collect()
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 { 0.0 } else { cov / (vx * vy).sqrt() }
}

struct RuleHolder {
    rule: RulePolicyParams,
    thresholds: uamflow::tactical::SafetyThresholds,
}
impl uamflow::engine::AdvisoryPolicy for RuleHolder {
    fn detection_mode(&self) -> uamflow::tactical::DetectionMode {
        uamflow::tactical::DetectionMode::Forward
    }
    fn advise(&mut self, ctx: &uamflow::engine::DecisionContext<'_>) -> uamflow::tactical::Advisory {
        uamflow::tactical::rule_based_policy(ctx.obs, &self.rule, &self.thresholds)
    }
}

#[test]
#[ignore]
fn search() {
    let engine = EngineConfig::default();
    let risk = RiskModelParams::default();
    let mut out = std::fs::File::create("/tmp/search_results.txt").unwrap();
    for theta in [30.0f64, 33.0, 36.0, 40.0] {
        let scenario = reshaped(theta);
        let network = scenario.network().unwrap();
        let nodcb = scenario.with_capacity(100_000);
        let base_logs = monte_carlo(&nodcb, StrategicMode::Heuristic, &TacticalMode::None, 10, 9000, &engine, None).unwrap();
        let base = aggregate(&stats_of(&base_logs), &risk, Aggregation::PerRun);
        writeln!(out, "# theta {theta}: baseline estmac {:.2}", base.est_mac_per_100k_fh.mean).unwrap();
        out.flush().unwrap();
        for d_ls in [450.0f64, 500.0, 550.0, 600.0, 650.0, 700.0] {
            for width in [300.0f64, 400.0] {
                for band in [HoldBand::Closed, HoldBand::Open] {
                    let rule = RulePolicyParams { d_ls, d_hs: d_ls + width, hold_band: band };
                    // twin pair CPA (cheap gate)
                    let plans = vec![FlightPlan::new("R1-000", "R1", 0.0), FlightPlan::new("R2-000", "R2", 0.0)];
                    let mut h = RuleHolder { rule, thresholds: scenario.thresholds };
                    let log = run_plans_episode(&network, &scenario, plans, false, Some(&mut h), &engine, 0).unwrap();
                    let cpa = log.min_separation_series.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
                    if cpa <= 152.0 {
                        writeln!(out, "th {theta:>2.0} dls {d_ls:>3.0} w {width:>3.0} {band:?}: CPA {cpa:>5.0} FAIL-CPA").unwrap();
                        continue;
                    }
                    // no-DCB rr gate
                    let rl = monte_carlo(&nodcb, StrategicMode::Heuristic, &TacticalMode::RuleBased(rule), 10, 9000, &engine, None).unwrap();
                    let rep = aggregate(&stats_of(&rl), &risk, Aggregation::PerRun);
                    let rr = rep.est_mac_per_100k_fh.mean / base.est_mac_per_100k_fh.mean;
                    if rr <= 1.2 {
                        writeln!(out, "th {theta:>2.0} dls {d_ls:>3.0} w {width:>3.0} {band:?}: CPA {cpa:>5.0} rr {rr:>5.2} FAIL-RR").unwrap();
                        out.flush().unwrap();
                        continue;
                    }
                    // sweep
                    let sweep = capacity_sweep(&scenario, &TacticalMode::RuleBased(rule), &[1, 2, 3, 4, 5, 6, 7, 8], 12, 7000, &engine, &risk, None).unwrap();
                    let vals: Vec<f64> = sweep.rows.iter().map(|r| r.report.est_mac_per_100k_fh.mean).collect();
                    let caps: Vec<f64> = (1..=8).map(|c| c as f64).collect();
                    let rho = spearman(&caps, &vals);
                    let maxc = sweep.max_compliant_capacity;
                    let verdict = if rho >= 0.72 && matches!(maxc, Some(c) if (2..=6).contains(&c)) { "CANDIDATE" } else { "fail-sweep" };
                    writeln!(
                        out,
                        "th {theta:>2.0} dls {d_ls:>3.0} w {width:>3.0} {band:?}: CPA {cpa:>5.0} rr {rr:>5.2} rho {rho:>5.2} maxC {maxc:?} vals {:?} {verdict}",
                        vals.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
                    )
                    .unwrap();
                    out.flush().unwrap();
                }
            }
        }
    }
}
