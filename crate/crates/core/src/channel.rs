//! Propagation, interference and achievable rate.
//!
//! A link gain is the product of distance-dependent path loss, a log-normal
//! shadowing term that is fixed per ordered (sensor, AP) pair for a whole
//! run, and a unit-mean Rician power gain drawn independently per slot, link
//! and RB.


use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::policy::PowerAction;
use crate::scenario::{Deployment, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("link distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
}

/// Indoor-factory line-of-sight path loss, `a + b log10(d) + c log10(f_c)`,
/// with the distance floored at 1 m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub intercept_db: f64,
    pub distance_slope: f64,
    pub frequency_slope: f64,
    pub carrier_ghz: f64,
}

impl PathLossModel {
    pub fn indoor_factory(carrier_ghz: f64) -> Self {
        Self { intercept_db: 31.84, distance_slope: 21.5, frequency_slope: 19.0, carrier_ghz }
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        Self {
            intercept_db: sc.cfg.path_loss_intercept_db,
            distance_slope: sc.cfg.path_loss_distance_slope,
            frequency_slope: sc.cfg.path_loss_frequency_slope,
            carrier_ghz: sc.cfg.carrier_freq_ghz,
        }
    }

    pub fn loss_db(&self, d: f64) -> Result<f64, ChannelError> {
        if d.is_nan() || d <= 0.0 {
            return Err(ChannelError::NonPositiveDistance(d));
        }
        Ok(self.intercept_db + self.distance_slope * d.max(1.0).log10() + self.frequency_slope * self.carrier_ghz.log10())
    }
}

/// Path loss in dB with the default indoor-factory constants.
pub fn path_loss_db(d: f64, carrier_ghz: f64) -> Result<f64, ChannelError> {
    PathLossModel::indoor_factory(carrier_ghz).loss_db(d)
}

pub fn sample_shadowing_db<R: Rng + ?Sized>(std_db: f64, rng: &mut R) -> f64 {
    std_db * rng.sample::<f64, _>(StandardNormal)
}

/// Unit-mean Rician power gain with linear K-factor `k`.
pub fn sample_rician_power_gain<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    if k.is_infinite() {
        return 1.0;
    }
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (2.0 * (k + 1.0))).sqrt();
    // The scattered part is circularly symmetric, so the LOS phase can be fixed.
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let re = los + scatter * z1;
    let im = scatter * z2;
    re * re + im * im
}

/// Static shadowing (dB) per ordered (sensor subnetwork, AP subnetwork) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Shadowing {
    n: usize,
    db: Vec<f64>,
}

impl Shadowing {
    pub fn sample<R: Rng + ?Sized>(n: usize, std_db: f64, rng: &mut R) -> Self {
        Self { n, db: (0..n * n).map(|_| sample_shadowing_db(std_db, rng)).collect() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, db: vec![0.0; n * n] }
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.db[from * self.n + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value_db: f64) {
        self.db[from * self.n + to] = value_db;
    }
}

/// Linear power gains `h[from, to, rb]` for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGainTensor {
    n: usize,
    rbs: usize,
    gains: Vec<f64>,
}

impl LinkGainTensor {
    pub fn new(n: usize, rbs: usize, gains: Vec<f64>) -> Self {
        assert_eq!(gains.len(), n * n * rbs);
        Self { n, rbs, gains }
    }

    pub fn num_subnetworks(&self) -> usize {
        self.n
    }

    pub fn num_rbs(&self) -> usize {
        self.rbs
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize, rb: usize) -> f64 {
        self.gains[(from * self.n + to) * self.rbs + rb]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }
}

/// Draws the gain tensor for one slot. Large-scale attenuation is computed
/// from the current positions; small-scale fading is drawn from `rng` in
/// (from, to, rb) order.
pub fn build_gain_tensor<R: Rng + ?Sized>(
    dep: &Deployment,
    shadowing: &Shadowing,
    sc: &Scenario,
    rng: &mut R,
) -> LinkGainTensor {
    let n = dep.len();
    let rbs = sc.cfg.num_rbs;
    let pl = PathLossModel::from_scenario(sc);
    let k = sc.rician_k_linear;
    let mut gains = Vec::with_capacity(n * n * rbs);
    for from in 0..n {
        let sensor = dep.sensor_position(from);
        for to in 0..n {
            let d = sensor.dist(dep.ap_positions[to]).max(f64::MIN_POSITIVE);
            let loss = pl.loss_db(d).expect("distance is positive") + shadowing.get(from, to);
            let large_scale = 10f64.powf(-loss / 10.0);
            for _ in 0..rbs {
                gains.push(large_scale * sample_rician_power_gain(k, rng));
            }
        }
    }
    LinkGainTensor::new(n, rbs, gains)
}

/// Interference (W) at the AP of `n` on RB `rb`.
pub fn interference(n: usize, rb: usize, actions: &[&PowerAction], gains: &LinkGainTensor) -> f64 {
    actions
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != n)
        .map(|(m, a)| a.power(rb) * gains.get(m, n, rb))
        .sum()
}

/// Interference at every (AP, RB), row-major by AP.
pub fn interference_matrix(actions: &[&PowerAction], gains: &LinkGainTensor) -> Vec<f64> {
    let (n, rbs) = (gains.num_subnetworks(), gains.num_rbs());
    let mut out = vec![0.0; n * rbs];
    for (from, a) in actions.iter().enumerate() {
        for (rb, &p) in a.powers().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for to in (0..n).filter(|&to| to != from) {
                out[to * rbs + rb] += p * gains.get(from, to, rb);
            }
        }
    }
    out
}

/// Packets per slot the sensor of `n` can deliver given the interference it sees on each RB.
pub fn rate_given_interference(n: usize, action: &PowerAction, interference_w: &[f64], gains: &LinkGainTensor, sc: &Scenario) -> f64 {
    let w = sc.cfg.rb_bandwidth_hz;
    let bits: f64 = action
        .powers()
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > 0.0)
        .map(|(rb, &p)| {
            let sinr = p * gains.get(n, n, rb) / (sc.noise_power_w + interference_w[rb]);
            w * (1.0 + sinr).log2()
        })
        .sum();
    bits * sc.cfg.slot_duration_s / sc.cfg.packet_size_bits
}

/// Achievable rate (packets per slot) of subnetwork `n` under the joint actions.
pub fn transmission_rate(n: usize, actions: &[&PowerAction], gains: &LinkGainTensor, sc: &Scenario) -> f64 {
    let interf: Vec<f64> = (0..gains.num_rbs()).map(|rb| interference(n, rb, actions, gains)).collect();
    rate_given_interference(n, actions[n], &interf, gains, sc)
}
