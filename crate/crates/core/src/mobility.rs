//! Restricted random-direction mobility.
//!
//! Every subnetwork moves at constant speed along its heading. A subnetwork
//! whose tentative step would leave the interior margin, or land within the
//! proximity threshold of another subnetwork center, draws a new uniform
//! heading. Draws repeat until the step is feasible, up to
//! [`MAX_REDRAWS`] attempts, after which the subnetwork holds its position
//! for the slot.
//!
//! A step is feasible when it stays inside the margin and does not move
//! closer to any neighbor that is already within the threshold. The second
//! half of that rule lets subnetworks that start (or end up) too close
//! separate instead of freezing.
//!
//! All subnetworks move simultaneously: proximity is evaluated against the
//! start-of-slot positions.

use std::f64::consts::TAU;

use rand::Rng;

use crate::scenario::{Deployment, Scenario, Vec2};

pub const MAX_REDRAWS: usize = 16;

/// Counts of what happened during a step, mainly for tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    pub redrawn: usize,
    pub held: usize,
}

/// Advances every subnetwork by one slot.
pub fn step_positions<R: Rng + ?Sized>(dep: &mut Deployment, sc: &Scenario, rng: &mut R) -> StepReport {
    let step = sc.step_length();
    let threshold = sc.cfg.proximity_threshold_m;
    let (lo, hi) = (sc.margin_lo(), sc.margin_hi());
    let start = dep.ap_positions.clone();
    let in_bounds = |p: Vec2| p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi;
    let too_close = |n: usize, p: Vec2| start.iter().enumerate().any(|(m, &q)| m != n && p.dist(q) < threshold);
    let feasible = |n: usize, p: Vec2| {
        in_bounds(p)
            && start.iter().enumerate().all(|(m, &q)| {
                if m == n {
                    return true;
                }
                let d = p.dist(q);
                d >= threshold || d >= start[n].dist(q)
            })
    };

    let mut report = StepReport::default();
    for n in 0..dep.len() {
        let here = start[n];
        let tentative = here + dep.headings[n].scale(step);
        if in_bounds(tentative) && !too_close(n, tentative) {
            dep.ap_positions[n] = tentative;
            continue;
        }
        report.redrawn += 1;
        let mut moved = false;
        for _ in 0..MAX_REDRAWS {
            let heading = Vec2::from_angle(rng.random::<f64>() * TAU);
            let candidate = here + heading.scale(step);
            if feasible(n, candidate) {
                dep.headings[n] = heading;
                dep.ap_positions[n] = candidate;
                moved = true;
                break;
            }
        }
        if !moved {
            report.held += 1;
        }
    }
    report
}
