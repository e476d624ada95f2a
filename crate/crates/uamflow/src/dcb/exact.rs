//! Exact strategic solve: branch-and-bound over per-flight departure pushes.
//!
//! Given a fixed window assignment, the cheapest feasible departure for each
//! flight is forced: the latest of its schedule, its origin predecessor plus
//! the separation, and the lower edges of its assigned windows. An optimal
//! departure therefore always sits at one of finitely many candidate times
//! (the unconstrained minimum or a window edge minus a transit time), and
//! the search enumerates exactly those, cheapest first, per flight in
//! scheduled order. A capacity-free chain relaxation of the not-yet-placed
//! flights prunes branches that cannot beat the incumbent; ties lose to the
//! first (lexicographically earliest) incumbent, which fixes the advertised
//! deterministic tie-break.

use super::{
    DcbConfig, DcbError, DcbSolution, Instance, SolveStatus, WindowAssignment,
};
use crate::airspace::{FlightPlan, Network};
use std::collections::BTreeMap;

/// Branches whose bound comes within this of the incumbent are pruned.
/// Permutations of one window set have identical true cost but sum in
/// different orders, so their float totals scatter by a few ulps; without
/// the slack the search would walk that whole plateau. Solutions are exact
/// up to this tolerance (exactly optimal when times are integer-valued).
const OPTIMALITY_EPS: f64 = 1e-6;

/// Minimizes total ground delay subject to capacity, schedule and
/// same-origin separation constraints. Deterministic for a given instance;
/// the input order of `plans` does not matter.
pub fn solve_exact(
    plans: &[FlightPlan],
    network: &Network,
    cfg: &DcbConfig,
) -> Result<DcbSolution, DcbError> {
    let instance = Instance::prepare(plans, network, cfg)?;
    if instance.flights.is_empty() {
        return Ok(DcbSolution {
            required_departures: BTreeMap::new(),
            assignment: WindowAssignment::default(),
            total_delay: 0.0,
            status: SolveStatus::Optimal,
            binding_resource: None,
        });
    }
    let mut search = Search::new(&instance, cfg);
    search.run(0, 0.0);
    Ok(search.into_solution(&instance, cfg))
}

struct Search<'a> {
    instance: &'a Instance,
    cfg: &'a DcbConfig,
    resource_names: Vec<String>,
    /// Per flight, (resource index, transit time).
    flight_resources: Vec<Vec<(usize, f64)>>,
    /// Occupancy per resource, indexed by window.
    occupancy: Vec<Vec<u32>>,
    capacities: Vec<u32>,
    n_windows: usize,
    required: Vec<f64>,
    best_required: Option<Vec<f64>>,
    best_delay: f64,
    /// Deepest point where capacity or the horizon refused a candidate.
    binding: Option<(usize, String)>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, cfg: &'a DcbConfig) -> Self {
        let mut resource_names: Vec<String> = Vec::new();
        let mut flight_resources = Vec::with_capacity(instance.flights.len());
        for f in &instance.flights {
            let mut rs = Vec::with_capacity(f.resources.len());
            for (name, t) in &f.resources {
                let idx = match resource_names.iter().position(|n| n == name) {
                    Some(i) => i,
                    None => {
                        resource_names.push(name.clone());
                        resource_names.len() - 1
                    }
                };
                rs.push((idx, *t));
            }
            flight_resources.push(rs);
        }
        let capacities: Vec<u32> = resource_names
            .iter()
            .map(|n| cfg.capacities.get(n).copied().unwrap_or(u32::MAX))
            .collect();
        let n_windows = (instance.horizon / cfg.window_length).ceil() as usize;
        Self {
            instance,
            cfg,
            occupancy: vec![vec![0; n_windows]; resource_names.len()],
            resource_names,
            flight_resources,
            capacities,
            n_windows,
            required: vec![0.0; instance.flights.len()],
            best_required: None,
            best_delay: f64::INFINITY,
            binding: None,
        }
    }

    /// Smallest admissible departure for flight `k` given what is placed.
    fn unconstrained_min(&self, k: usize) -> f64 {
        let f = &self.instance.flights[k];
        match self.instance.predecessor[k] {
            Some(p) => f
                .scheduled
                .max(self.required[p] + self.cfg.departure_separation),
            None => f.scheduled,
        }
    }

    /// Sorted departure candidates for flight `k`: the unconstrained minimum
    /// plus every window lower edge (minus transit) above it.
    fn candidates(&self, k: usize, rmin: f64) -> Vec<f64> {
        let mut cands = vec![rmin];
        for &(_, transit) in &self.flight_resources[k] {
            let first = self.cfg.window_index(rmin + transit) + 1;
            for n in first..self.n_windows as i64 {
                let cand = self.cfg.window_start(n) - transit;
                if cand > rmin {
                    cands.push(cand);
                }
            }
        }
        cands.sort_by(f64::total_cmp);
        cands.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        cands
    }

    /// Chain-minimum departures for every flight after `k`, given that `k`
    /// departs at `r_k`: each later flight is held only by its own schedule
    /// and the same-origin separation chain. Returns the per-flight minima
    /// and the summed delay they already imply.
    fn chain_minima(&self, k: usize, r_k: f64) -> (Vec<f64>, f64) {
        let n = self.instance.flights.len();
        let mut lb = vec![0.0f64; n];
        let mut extra = 0.0;
        for j in (k + 1)..n {
            let f = &self.instance.flights[j];
            let mut r = f.scheduled;
            if let Some(p) = self.instance.predecessor[j] {
                let pred_r = if p < k {
                    self.required[p]
                } else if p == k {
                    r_k
                } else {
                    lb[p]
                };
                r = r.max(pred_r + self.cfg.departure_separation);
            }
            lb[j] = r;
            extra += r - f.scheduled;
        }
        (lb, extra)
    }

    /// Capacity-aware bound on top of the chain minima: at each resource,
    /// the remaining flights' earliest arrivals must still pack into window
    /// slots the placed flights have not used, at most `capacity` per
    /// window. Packing earliest-arrival-first into the earliest free slot
    /// minimizes the summed push, and any one resource's packing cost is a
    /// valid bound on the extra delay (a single push can satisfy several
    /// resources at once, so resources cannot be summed).
    fn packing_bound(&self, k: usize, lb: &[f64], placed: &[(usize, usize)]) -> (f64, Option<usize>) {
        let n = self.instance.flights.len();
        let mut worst: f64 = 0.0;
        let mut exhausted = None;
        for res in 0..self.occupancy.len() {
            let mut arrivals: Vec<f64> = Vec::new();
            for j in (k + 1)..n {
                for &(r, transit) in &self.flight_resources[j] {
                    if r == res {
                        arrivals.push(lb[j] + transit);
                    }
                }
            }
            if arrivals.is_empty() {
                continue;
            }
            arrivals.sort_by(f64::total_cmp);
            let mut occ = self.occupancy[res].clone();
            for &(r, w) in placed {
                if r == res {
                    occ[w] += 1;
                }
            }
            let cap = self.capacities[res];
            let mut extra = 0.0;
            for &eta in &arrivals {
                let mut w = self.cfg.window_index(eta).max(0) as usize;
                while w < occ.len() && occ[w] >= cap {
                    w += 1;
                }
                if w >= occ.len() {
                    extra = f64::INFINITY;
                    exhausted = Some(res);
                    break;
                }
                occ[w] += 1;
                extra += (self.cfg.window_start(w as i64) - eta).max(0.0);
            }
            worst = worst.max(extra);
        }
        (worst, exhausted)
    }

    fn run(&mut self, k: usize, delay_so_far: f64) {
        let n = self.instance.flights.len();
        if k == n {
            if delay_so_far < self.best_delay {
                self.best_delay = delay_so_far;
                self.best_required = Some(self.required.clone());
            }
            return;
        }
        let f = &self.instance.flights[k];
        let rmin = self.unconstrained_min(k);
        for cand in self.candidates(k, rmin) {
            let cand_delay = cand - f.scheduled;
            let (chain_lb, chain_extra) = self.chain_minima(k, cand);
            if delay_so_far + cand_delay + chain_extra + OPTIMALITY_EPS >= self.best_delay {
                break; // candidates ascend, so every later one is no better
            }
            let mut windows = Vec::with_capacity(self.flight_resources[k].len());
            let mut feasible = true;
            let mut beyond_horizon = false;
            for idx in 0..self.flight_resources[k].len() {
                let (res, transit) = self.flight_resources[k][idx];
                let eta = cand + transit;
                let w = self.cfg.window_index(eta);
                if w < 0 || (w as usize) >= self.n_windows {
                    self.note_binding(k, res);
                    beyond_horizon = true;
                    break;
                }
                if self.occupancy[res][w as usize] >= self.capacities[res] {
                    self.note_binding(k, res);
                    feasible = false;
                    break;
                }
                windows.push((res, w as usize));
            }
            if beyond_horizon {
                break; // arrivals only move later from here
            }
            if !feasible {
                continue;
            }
            // The packing cost is not monotone in the candidate (a later
            // departure can free a window for a successor), so this prunes
            // the branch without breaking the loop.
            let (packed, exhausted) = self.packing_bound(k, &chain_lb, &windows);
            if let Some(res) = exhausted {
                self.note_binding(k, res);
            }
            if delay_so_far + cand_delay + chain_extra + packed + OPTIMALITY_EPS >= self.best_delay {
                continue;
            }
            for &(res, w) in &windows {
                self.occupancy[res][w] += 1;
            }
            self.required[k] = cand;
            self.run(k + 1, delay_so_far + cand_delay);
            for &(res, w) in &windows {
                self.occupancy[res][w] -= 1;
            }
        }
    }

    fn note_binding(&mut self, depth: usize, res: usize) {
        let better = match &self.binding {
            Some((d, _)) => depth >= *d,
            None => true,
        };
        if better {
            self.binding = Some((depth, self.resource_names[res].clone()));
        }
    }

    fn into_solution(self, instance: &Instance, cfg: &DcbConfig) -> DcbSolution {
        match self.best_required {
            Some(required) => {
                let mut departures = BTreeMap::new();
                let mut assignment = WindowAssignment::default();
                for (i, f) in instance.flights.iter().enumerate() {
                    departures.insert(f.flight_id.clone(), required[i]);
                    for (res, transit) in &f.resources {
                        let w = cfg.window_index(required[i] + transit);
                        assignment
                            .entries
                            .insert((res.clone(), f.flight_id.clone()), w);
                    }
                }
                DcbSolution {
                    total_delay: instance.total_delay(&departures),
                    required_departures: departures,
                    assignment,
                    status: SolveStatus::Optimal,
                    binding_resource: None,
                }
            }
            None => DcbSolution::infeasible(self.binding.map(|(_, r)| r)),
        }
    }
}
