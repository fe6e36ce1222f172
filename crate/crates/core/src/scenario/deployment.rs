//! Initial placement of subnetworks.

use std::f64::consts::TAU;

use rand::Rng;

use super::config::Scenario;

/// A 2-D point or vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Positions and headings of every subnetwork, plus the rigid sensor offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub ap_positions: Vec<Vec2>,
    /// Unit vectors.
    pub headings: Vec<Vec2>,
    pub sensor_offsets: Vec<Vec2>,
}

impl Deployment {
    pub fn len(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ap_positions.is_empty()
    }

    pub fn sensor_position(&self, n: usize) -> Vec2 {
        self.ap_positions[n] + self.sensor_offsets[n]
    }

    /// Distance from the sensor of `from` to the AP of `to`.
    pub fn link_distance(&self, from: usize, to: usize) -> f64 {
        self.sensor_position(from).dist(self.ap_positions[to])
    }
}

/// Draws a random deployment. Deterministic for a given stream state.
pub fn init_deployment<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> Deployment {
    let n = sc.cfg.num_subnetworks;
    let (lo, hi) = (sc.margin_lo(), sc.margin_hi());
    let (d_min, r_sub) = (sc.cfg.min_sensor_distance_m, sc.cfg.subnetwork_radius_m);
    let mut dep = Deployment {
        ap_positions: Vec::with_capacity(n),
        headings: Vec::with_capacity(n),
        sensor_offsets: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let p = Vec2::new(uniform(rng, lo, hi), uniform(rng, lo, hi));
        let heading = Vec2::from_angle(rng.random::<f64>() * TAU);
        let radius = uniform(rng, d_min, r_sub);
        let offset = Vec2::from_angle(rng.random::<f64>() * TAU).scale(radius);
        dep.ap_positions.push(p);
        dep.headings.push(heading);
        dep.sensor_offsets.push(offset);
    }
    dep
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Purpose, ScenarioConfig, Streams};

    fn deploy(cfg: ScenarioConfig, seed: u64) -> Deployment {
        let sc = cfg.validate().unwrap();
        init_deployment(&sc, &mut Streams::new(seed).stream(0, Purpose::Deployment, 0))
    }

    #[test]
    fn deterministic_for_seed() {
        let a = deploy(ScenarioConfig::default(), 9);
        let b = deploy(ScenarioConfig::default(), 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert_ne!(a, deploy(ScenarioConfig::default(), 10));
    }

    #[test]
    fn placement_constraints() {
        for seed in 0..50 {
            let d = deploy(ScenarioConfig::default(), seed);
            for i in 0..d.len() {
                let p = d.ap_positions[i];
                assert!((2.0..=18.0).contains(&p.x) && (2.0..=18.0).contains(&p.y));
                let r = d.sensor_offsets[i].norm();
                assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&r), "offset {r}");
                assert!((d.headings[i].norm() - 1.0).abs() < 1e-12);
                assert!(d.link_distance(i, i) >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn single_subnetwork() {
        let d = deploy(ScenarioConfig { num_subnetworks: 1, ..Default::default() }, 3);
        assert_eq!(d.len(), 1);
    }
}
