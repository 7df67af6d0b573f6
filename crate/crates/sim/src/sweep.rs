//! Many seeds of one scenario, run in parallel and reduced in seed order.

use std::ops::Range;

use frontrun_core::harness::{run_scenario, Outcome, Report, ScenarioConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: String,
    pub runs: u64,
    pub successes: u64,
    pub failures: u64,
    pub not_attempted: u64,
    /// Successes over all runs.
    pub success_rate: f64,
    /// Wilson score interval for `success_rate`.
    pub success_ci95: (f64, f64),
    /// Attacker net profit in wei.
    pub mean_profit: f64,
    pub stddev_profit: f64,
    pub victim_success_rate: Option<f64>,
}

pub fn run(config: &ScenarioConfig, seeds: Range<u64>) -> Result<Vec<Report>, Error> {
    config.validate()?;
    let mut reports = seeds.into_par_iter().map(|s| run_scenario(config, s)).collect::<Result<Vec<_>, _>>()?;
    reports.sort_by_key(|r| r.seed);
    Ok(reports)
}

/// Summary statistics; `reports` must be sorted by seed for the result to
/// be independent of scheduling.
pub fn aggregate(scenario: &str, reports: &[Report]) -> Aggregate {
    let n = reports.len() as u64;
    let count = |o: Outcome| reports.iter().filter(|r| r.outcome == o).count() as u64;
    let successes = count(Outcome::Succeeded);
    let profits: Vec<f64> = reports.iter().map(|r| r.attacker_net_profit as f64).collect();
    let mean = if n == 0 { 0.0 } else { profits.iter().sum::<f64>() / n as f64 };
    let var = if n < 2 { 0.0 } else { profits.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64 };
    let victims: Vec<bool> = reports.iter().filter_map(|r| r.victim_succeeded).collect();
    Aggregate {
        scenario: scenario.to_string(),
        runs: n,
        successes,
        failures: count(Outcome::Failed),
        not_attempted: count(Outcome::NotAttempted),
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        success_ci95: wilson(successes, n),
        mean_profit: mean,
        stddev_profit: var.sqrt(),
        victim_success_rate: (!victims.is_empty())
            .then(|| victims.iter().filter(|v| **v).count() as f64 / victims.len() as f64),
    }
}

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson(250, 500);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((hi - lo - 0.0875).abs() < 1e-3);
        assert_eq!(wilson(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson(10, 10);
        assert!((lo - 0.7225).abs() < 1e-3 && hi > 1.0 - 1e-12);
    }
}
