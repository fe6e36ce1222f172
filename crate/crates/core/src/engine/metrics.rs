//! AoI statistics: empirical CCDF, violation probability, mean AoI and
//! prediction RMSE.

use thiserror::Error;

use super::trace::SlotRecord;
use crate::linkdyn::slots_to_seconds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no AoI samples to summarize")]
    EmptyTrace,
    #[error("trace has no prediction rows")]
    NoPredictions,
}

/// Aggregated AoI statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    /// Fraction of samples with AoI strictly above the threshold.
    pub violation_probability: f64,
    /// Mean AoI (s).
    pub avg_aoi: f64,
    /// `(threshold_s, Pr[AoI > threshold])`, thresholds ascending.
    pub ccdf: Vec<(f64, f64)>,
    /// Prediction RMSE (s); `None` when the policy makes no predictions.
    pub rmse: Option<f64>,
    pub samples: u64,
    pub prediction_samples: u64,
}

impl MetricsSummary {
    /// CCDF value at a grid threshold.
    pub fn ccdf_at(&self, threshold: f64) -> Option<f64> {
        self.ccdf.iter().find(|(h, _)| *h == threshold).map(|&(_, p)| p)
    }
}

/// CCDF thresholds: `0, tau, 2 tau, ..., max_slots tau`, plus `delta`.
pub fn default_grid(tau: f64, max_slots: usize, delta: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=max_slots as u64).map(|k| slots_to_seconds(k, tau)).collect();
    if !grid.contains(&delta) {
        grid.push(delta);
        grid.sort_by(f64::total_cmp);
    }
    grid
}

/// Streaming accumulator. Merging accumulators in a fixed order is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator {
    grid: Vec<f64>,
    delta: f64,
    /// `hist[i]` counts samples with exactly `i` grid thresholds strictly below them.
    hist: Vec<u64>,
    violations: u64,
    samples: u64,
    aoi_sum: f64,
    sq_err_sum: f64,
    predictions: u64,
}

impl MetricsAccumulator {
    pub fn new(grid: Vec<f64>, delta: f64) -> Self {
        debug_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let bins = grid.len() + 1;
        Self {
            grid,
            delta,
            hist: vec![0; bins],
            violations: 0,
            samples: 0,
            aoi_sum: 0.0,
            sq_err_sum: 0.0,
            predictions: 0,
        }
    }

    pub fn add_aoi(&mut self, aoi: f64) {
        let below = self.grid.partition_point(|&h| h < aoi);
        self.hist[below] += 1;
        self.violations += (aoi > self.delta) as u64;
        self.samples += 1;
        self.aoi_sum += aoi;
    }

    pub fn add_prediction(&mut self, mu: f64, realized: f64) {
        let e = mu - realized;
        self.sq_err_sum += e * e;
        self.predictions += 1;
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        assert_eq!(self.grid, other.grid, "accumulators must share a grid");
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.violations += other.violations;
        self.samples += other.samples;
        self.aoi_sum += other.aoi_sum;
        self.sq_err_sum += other.sq_err_sum;
        self.predictions += other.predictions;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn summary(&self) -> Result<MetricsSummary, MetricsError> {
        if self.samples == 0 {
            return Err(MetricsError::EmptyTrace);
        }
        let n = self.samples as f64;
        let mut above = self.samples;
        let mut ccdf = Vec::with_capacity(self.grid.len());
        for (k, &h) in self.grid.iter().enumerate() {
            above -= self.hist[k];
            ccdf.push((h, above as f64 / n));
        }
        Ok(MetricsSummary {
            violation_probability: self.violations as f64 / n,
            avg_aoi: self.aoi_sum / n,
            ccdf,
            rmse: (self.predictions > 0).then(|| (self.sq_err_sum / self.predictions as f64).sqrt()),
            samples: self.samples,
            prediction_samples: self.predictions,
        })
    }
}

/// Summarizes the AoI samples of `rows` (all rows are used; filter first to drop warmup).
pub fn compute_metrics(rows: &[SlotRecord], delta: f64, grid: Vec<f64>) -> Result<MetricsSummary, MetricsError> {
    let mut acc = MetricsAccumulator::new(grid, delta);
    for r in rows {
        acc.add_aoi(r.aoi);
        if let Some(mu) = r.mu {
            acc.add_prediction(mu, r.next_aoi);
        }
    }
    acc.summary()
}

/// RMSE between the chosen action's predicted mean and the realized next AoI.
pub fn compute_rmse(rows: &[SlotRecord]) -> Result<f64, MetricsError> {
    let (sum, n) = rows
        .iter()
        .filter_map(|r| r.mu.map(|mu| (mu - r.next_aoi).powi(2)))
        .fold((0.0, 0u64), |(s, n), e| (s + e, n + 1));
    if n == 0 {
        return Err(MetricsError::NoPredictions);
    }
    Ok((sum / n as f64).sqrt())
}
