//! Sliding-window Bayesian ridge regression of next-slot AoI.
//!
//! Inputs are the current AoI and the power vector of the candidate action.
//! They are scaled (AoI by the threshold, powers by the maximum power) and
//! expanded into all monomials of degree one and two. With `d = B + 1` raw
//! inputs the feature dimension is `r = d + d(d+1)/2`.
//!
//! The bias is handled by centering: features and targets are centered on
//! the window means, the weights get a zero-mean Gaussian prior with
//! precision `lambda`, and
//!
//! ```text
//! Sigma_w = (lambda I + Phi~^T Phi~)^-1
//! w_hat   = Sigma_w Phi~^T y~
//! mu(x)   = w_hat^T x~ + b0
//! var(x)  = sigma2 + x~^T Sigma_w x~
//! ```
//!
//! Targets are regressed in units of `target_scale` seconds; predictions are
//! returned in seconds.

use std::collections::VecDeque;

use thiserror::Error;

use crate::policy::PowerAction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BrrError {
    #[error("cannot fit an empty window")]
    EmptyWindow,
    #[error("normal equations are not positive definite (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("feature vector has dimension {got}, posterior expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Maps (AoI, power vector) to the scaled degree-2 polynomial features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureMap {
    /// AoI scale (s); the AoI threshold.
    pub aoi_scale: f64,
    /// Power scale (W); the maximum power.
    pub power_scale: f64,
    /// Number of resource blocks.
    pub num_rbs: usize,
}

impl FeatureMap {
    pub fn raw_dim(&self) -> usize {
        self.num_rbs + 1
    }

    pub fn dim(&self) -> usize {
        feature_dim(self.raw_dim())
    }

    /// Raw input `[aoi, P_1, ..., P_B]` in seconds and watts.
    pub fn raw(&self, aoi_s: f64, action: &PowerAction) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.raw_dim());
        x.push(aoi_s);
        x.extend_from_slice(action.powers());
        x
    }

    pub fn transform_raw(&self, raw: &[f64]) -> Vec<f64> {
        debug_assert_eq!(raw.len(), self.raw_dim());
        let scaled: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 { v / self.aoi_scale } else { v / self.power_scale })
            .collect();
        polynomial2(&scaled)
    }

    pub fn transform(&self, aoi_s: f64, action: &PowerAction) -> Vec<f64> {
        self.transform_raw(&self.raw(aoi_s, action))
    }
}

pub fn feature_dim(raw_dim: usize) -> usize {
    raw_dim + raw_dim * (raw_dim + 1) / 2
}

/// All monomials of degree 1 and 2 without a constant: the inputs first,
/// then `z_i z_j` for `i <= j` in row-major order.
pub fn polynomial2(z: &[f64]) -> Vec<f64> {
    let d = z.len();
    let mut out = Vec::with_capacity(feature_dim(d));
    out.extend_from_slice(z);
    for i in 0..d {
        for j in i..d {
            out.push(z[i] * z[j]);
        }
    }
    out
}

/// One observation: raw input, its features, and the realized next AoI (s).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub raw: Vec<f64>,
    pub features: Vec<f64>,
    pub y: f64,
}

/// Bounded FIFO of the most recent samples, with running sums of the
/// quantities the fit needs. The sums are rebuilt from scratch every
/// `capacity` evictions so rounding cannot accumulate.
#[derive(Debug, Clone)]
pub struct SampleWindow {
    capacity: usize,
    dim: usize,
    samples: VecDeque<Sample>,
    sum_phi: Vec<f64>,
    /// Upper triangle of sum phi phi^T, row-major over the full square.
    sum_outer: Vec<f64>,
    sum_y: f64,
    sum_y2: f64,
    sum_y_phi: Vec<f64>,
    evictions_since_rebuild: usize,
}

impl SampleWindow {
    pub fn new(capacity: usize, dim: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            dim,
            samples: VecDeque::with_capacity(capacity + 1),
            sum_phi: vec![0.0; dim],
            sum_outer: vec![0.0; dim * dim],
            sum_y: 0.0,
            sum_y2: 0.0,
            sum_y_phi: vec![0.0; dim],
            evictions_since_rebuild: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter()
    }

    /// Appends a sample, evicting the oldest one beyond capacity.
    pub fn push(&mut self, sample: Sample) {
        assert_eq!(sample.features.len(), self.dim, "feature dimension");
        self.accumulate(&sample, 1.0);
        self.samples.push_back(sample);
        if self.samples.len() > self.capacity {
            let old = self.samples.pop_front().expect("non-empty");
            self.accumulate(&old, -1.0);
            self.evictions_since_rebuild += 1;
            if self.evictions_since_rebuild >= self.capacity {
                self.rebuild();
            }
        }
    }

    pub fn push_features(&mut self, map: &FeatureMap, raw: Vec<f64>, y: f64) {
        let features = map.transform_raw(&raw);
        self.push(Sample { raw, features, y });
    }

    fn accumulate(&mut self, s: &Sample, sign: f64) {
        let d = self.dim;
        let phi = &s.features;
        self.sum_y += sign * s.y;
        self.sum_y2 += sign * s.y * s.y;
        for i in 0..d {
            let pi = sign * phi[i];
            if pi == 0.0 {
                continue;
            }
            self.sum_phi[i] += pi;
            self.sum_y_phi[i] += pi * s.y;
            let row = &mut self.sum_outer[i * d..(i + 1) * d];
            for j in i..d {
                row[j] += pi * phi[j];
            }
        }
    }

    fn rebuild(&mut self) {
        self.sum_phi.iter_mut().for_each(|v| *v = 0.0);
        self.sum_outer.iter_mut().for_each(|v| *v = 0.0);
        self.sum_y_phi.iter_mut().for_each(|v| *v = 0.0);
        self.sum_y = 0.0;
        self.sum_y2 = 0.0;
        let samples = std::mem::take(&mut self.samples);
        for s in &samples {
            self.accumulate(s, 1.0);
        }
        self.samples = samples;
        self.evictions_since_rebuild = 0;
    }
}

/// Hyperparameters of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrrParams {
    /// Prior precision of the weights.
    pub lambda: f64,
    /// Lower bound on the noise variance (s^2).
    pub sigma2_floor: f64,
    /// Seconds per regression target unit.
    pub target_scale: f64,
}

/// Gaussian predictive distribution of the next AoI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Mean (s).
    pub mu: f64,
    /// Variance (s^2).
    pub var: f64,
}

/// A fitted posterior. Weights and covariance are in target units.
#[derive(Debug, Clone, PartialEq)]
pub struct BrrPosterior {
    w_hat: Vec<f64>,
    /// Lower Cholesky factor of `lambda I + Phi~^T Phi~`, row-major.
    chol: Vec<f64>,
    feature_mean: Vec<f64>,
    b0: f64,
    sigma2: f64,
    target_scale: f64,
    dim: usize,
}

impl BrrPosterior {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    /// Bias (s).
    pub fn b0(&self) -> f64 {
        self.b0 * self.target_scale
    }

    /// Noise variance (s^2).
    pub fn sigma2(&self) -> f64 {
        self.sigma2 * self.target_scale * self.target_scale
    }

    pub fn feature_mean(&self) -> &[f64] {
        &self.feature_mean
    }

    /// Posterior weight covariance `(lambda I + Phi~^T Phi~)^-1`, row-major.
    pub fn sigma_w(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for col in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[col] = 1.0;
            let z = forward_substitute(&self.chol, d, &e);
            let x = backward_substitute_transposed(&self.chol, d, &z);
            for row in 0..d {
                out[row * d + col] = x[row];
            }
        }
        out
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction, BrrError> {
        if features.len() != self.dim {
            return Err(BrrError::DimensionMismatch { expected: self.dim, got: features.len() });
        }
        let centered: Vec<f64> = features.iter().zip(&self.feature_mean).map(|(x, m)| x - m).collect();
        let mu = dot(&self.w_hat, &centered) + self.b0;
        let z = forward_substitute(&self.chol, self.dim, &centered);
        let var = self.sigma2 + dot(&z, &z);
        let s = self.target_scale;
        Ok(Prediction { mu: mu * s, var: var * s * s })
    }
}

/// Fits the posterior to every sample in the window.
pub fn fit_posterior(window: &SampleWindow, params: &BrrParams) -> Result<BrrPosterior, BrrError> {
    let n = window.len();
    if n == 0 {
        return Err(BrrError::EmptyWindow);
    }
    let d = window.dim;
    let nf = n as f64;
    let scale = params.target_scale;
    let mean: Vec<f64> = window.sum_phi.iter().map(|s| s / nf).collect();
    let y_mean = window.sum_y / nf;

    // lambda I + centered Gram, lower triangle filled from the upper running sums.
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let g = window.sum_outer[i * d + j] - nf * mean[i] * mean[j];
            a[i * d + j] = g;
            a[j * d + i] = g;
        }
        a[i * d + i] += params.lambda;
    }
    // Phi~^T y~ in target units.
    let rhs: Vec<f64> = (0..d).map(|i| (window.sum_y_phi[i] - nf * mean[i] * y_mean) / scale).collect();

    let chol = cholesky(a, d)?;
    let z = forward_substitute(&chol, d, &rhs);
    let w_hat = backward_substitute_transposed(&chol, d, &z);

    let b0 = y_mean / scale;
    // Residual sum of squares from the sufficient statistics, using A w = rhs.
    let syy = (window.sum_y2 - nf * y_mean * y_mean) / (scale * scale);
    let rss = (syy - dot(&w_hat, &rhs) - params.lambda * dot(&w_hat, &w_hat)).max(0.0);
    let sigma2 = (rss / nf).max(params.sigma2_floor / (scale * scale));

    Ok(BrrPosterior { w_hat, chol, feature_mean: mean, b0, sigma2, target_scale: scale, dim: d })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky(mut a: Vec<f64>, d: usize) -> Result<Vec<f64>, BrrError> {
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(BrrError::Singular { column: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        a[j * d + j] = ljj;
        for i in j + 1..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / ljj;
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            a[i * d + j] = 0.0;
        }
    }
    Ok(a)
}

/// Solves `L z = b`.
fn forward_substitute(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; d];
    for i in 0..d {
        let row = &l[i * d..i * d + i];
        let s: f64 = row.iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
        z[i] = (b[i] - s) / l[i * d + i];
    }
    z
}

/// Solves `L^T x = z`.
fn backward_substitute_transposed(l: &[f64], d: usize, z: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = z[i];
        for k in i + 1..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    x
}
