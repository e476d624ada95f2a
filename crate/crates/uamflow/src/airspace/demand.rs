//! Seeded demand generation: per-route departure schedules with
//! beta-distributed inter-departure intervals.

use super::{AirspaceError, FlightPlan, Route};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

fn default_mean_tolerance() -> f64 {
    0.01
}

/// Statistical description of departure demand, identical on every route.
///
/// Intervals are sampled as `min + b * (max - min)` with `b ~ Beta(shape)`,
/// so the configured range and shape must place the distribution mean at
/// `mean_interval`. A degenerate range (`min == max`) yields constant
/// intervals, which is how fixed worked instances are encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    /// Target mean inter-departure interval per route, seconds.
    pub mean_interval: f64,
    pub flights_per_route: u32,
    /// Beta distribution shape parameters (alpha, beta).
    pub beta_shape: (f64, f64),
    /// The unit beta sample is mapped affinely onto this interval, seconds.
    pub interval_range: (f64, f64),
    /// Allowed relative gap between the mapped distribution mean and
    /// `mean_interval`.
    #[serde(default = "default_mean_tolerance")]
    pub mean_tolerance: f64,
}

impl DemandSpec {
    /// Symmetric-beta demand with the range `[0, 2 * mean]`, whose mean is
    /// exactly `mean_interval` for any symmetric shape.
    pub fn with_mean(mean_interval: f64, flights_per_route: u32) -> Self {
        Self {
            mean_interval,
            flights_per_route,
            beta_shape: (2.0, 2.0),
            interval_range: (0.0, 2.0 * mean_interval),
            mean_tolerance: default_mean_tolerance(),
        }
    }

    /// Rescales the interval range so the distribution mean moves to
    /// `mean_interval` while keeping its shape. Used by the demand presets.
    pub fn scaled_to_mean(&self, mean_interval: f64) -> Self {
        let factor = mean_interval / self.mean_interval;
        Self {
            mean_interval,
            interval_range: (self.interval_range.0 * factor, self.interval_range.1 * factor),
            ..self.clone()
        }
    }

    /// Mean of the mapped interval distribution: `min + E[beta] * (max - min)`.
    pub fn analytic_mean(&self) -> f64 {
        let (a, b) = self.beta_shape;
        self.interval_range.0 + a / (a + b) * (self.interval_range.1 - self.interval_range.0)
    }

    pub fn validate(&self) -> Result<(), AirspaceError> {
        let (a, b) = self.beta_shape;
        let (lo, hi) = self.interval_range;
        if !(self.mean_interval > 0.0) {
            return Err(AirspaceError::InvalidDemand(format!(
                "mean_interval must be positive, got {}",
                self.mean_interval
            )));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(AirspaceError::InvalidDemand(format!(
                "beta_shape must be positive, got ({a}, {b})"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(AirspaceError::InvalidDemand(format!(
                "interval_range must satisfy 0 <= min <= max, got ({lo}, {hi})"
            )));
        }
        let mean = self.analytic_mean();
        if (mean - self.mean_interval).abs() > self.mean_tolerance * self.mean_interval {
            return Err(AirspaceError::InvalidDemand(format!(
                "mapped interval mean {mean:.3} does not match mean_interval {} \
                 within tolerance {}",
                self.mean_interval, self.mean_tolerance
            )));
        }
        Ok(())
    }

    fn sample_interval(&self, dist: &Beta<f64>, rng: &mut impl Rng) -> f64 {
        let b = dist.sample(rng);
        let (lo, hi) = self.interval_range;
        lo + b * (hi - lo)
    }
}

/// Generates one schedule: per route, the first flight departs at t = 0 and
/// each later departure adds one sampled interval. A fixed seed fixes the
/// whole output; routes draw from independent substreams so the schedule on
/// one route does not depend on how many flights another route has.
pub fn generate_schedule(
    spec: &DemandSpec,
    routes: &[Route],
    seed: u64,
) -> Result<Vec<FlightPlan>, AirspaceError> {
    spec.validate()?;
    let dist = Beta::new(spec.beta_shape.0, spec.beta_shape.1)
        .map_err(|e| AirspaceError::InvalidDemand(e.to_string()))?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut plans = Vec::new();
    for route in routes {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let mut t = 0.0;
        for i in 0..spec.flights_per_route {
            if i > 0 {
                t += spec.sample_interval(&dist, &mut rng);
            }
            plans.push(FlightPlan::new(
                format!("{}-{:03}", route.id, i),
                route.id.clone(),
                t,
            ));
        }
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn routes(n: usize) -> Vec<Route> {
        (0..n)
            .map(|i| Route {
                id: format!("R{i}"),
                nodes: vec!["a".into(), "b".into()],
            })
            .collect()
    }

    #[test]
    fn zero_flights_gives_empty_schedule() {
        let spec = DemandSpec {
            flights_per_route: 0,
            ..DemandSpec::with_mean(30.0, 0)
        };
        let plans = generate_schedule(&spec, &routes(3), 7).unwrap();
        assert!(plans.is_empty());
    }

    #[test]
    fn degenerate_range_gives_constant_intervals() {
        let spec = DemandSpec {
            mean_interval: 30.0,
            flights_per_route: 3,
            beta_shape: (2.0, 2.0),
            interval_range: (30.0, 30.0),
            mean_tolerance: 0.01,
        };
        let plans = generate_schedule(&spec, &routes(1), 123).unwrap();
        let deps: Vec<f64> = plans.iter().map(|p| p.scheduled_departure).collect();
        assert_eq!(deps, vec![0.0, 30.0, 60.0]);
        for p in &plans {
            assert_eq!(p.required_departure, p.scheduled_departure);
        }
    }

    #[test]
    fn empirical_mean_tracks_lambda() {
        let spec = DemandSpec::with_mean(30.0, 1001);
        let plans = generate_schedule(&spec, &routes(1), 99).unwrap();
        // 1000 intervals between 1001 departures.
        let last = plans.last().unwrap().scheduled_departure;
        let mean = last / 1000.0;
        assert!(
            (mean - 30.0).abs() < 0.05 * 30.0,
            "empirical mean {mean} strays more than 5% from 30"
        );
    }

    #[test]
    fn same_seed_same_schedule() {
        let spec = DemandSpec::with_mean(45.0, 20);
        let a = generate_schedule(&spec, &routes(3), 5).unwrap();
        let b = generate_schedule(&spec, &routes(3), 5).unwrap();
        assert_eq!(a, b);
        let c = generate_schedule(&spec, &routes(3), 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn departures_strictly_increase_with_positive_min() {
        let spec = DemandSpec {
            mean_interval: 30.0,
            flights_per_route: 50,
            beta_shape: (2.0, 2.0),
            interval_range: (10.0, 50.0),
            mean_tolerance: 0.01,
        };
        let plans = generate_schedule(&spec, &routes(1), 11).unwrap();
        for w in plans.windows(2) {
            assert!(w[1].scheduled_departure > w[0].scheduled_departure);
        }
    }

    #[test]
    fn mean_mismatch_is_rejected() {
        let spec = DemandSpec {
            mean_interval: 30.0,
            flights_per_route: 3,
            beta_shape: (2.0, 2.0),
            interval_range: (0.0, 30.0), // mean 15, not 30
            mean_tolerance: 0.01,
        };
        assert!(generate_schedule(&spec, &routes(1), 1).is_err());
    }
}
