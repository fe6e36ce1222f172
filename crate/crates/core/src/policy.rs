//! Feasible power allocations and the three action-selection strategies.

use rand::Rng;
use libm::erfc;
use thiserror::Error;

use crate::brr::{BrrError, BrrPosterior, FeatureMap, Prediction};
use crate::scenario::{ActionSetKind, PolicyKind, Scenario};

/// Transmit power (W) on every RB for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAction {
    powers: Vec<f64>,
}

impl PowerAction {
    pub fn new(powers: Vec<f64>) -> Self {
        Self { powers }
    }

    pub fn silent(num_rbs: usize) -> Self {
        Self { powers: vec![0.0; num_rbs] }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn power(&self, rb: usize) -> f64 {
        self.powers[rb]
    }

    pub fn is_silent(&self) -> bool {
        self.powers.iter().all(|&p| p == 0.0)
    }

    pub fn active_rbs(&self) -> impl Iterator<Item = usize> + '_ {
        self.powers.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(b, _)| b)
    }
}

/// The enumerated feasible set. Index 0 is always the silent action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<PowerAction>,
}

impl ActionSet {
    /// Silence plus one action per (RB, non-zero level): `B K + 1` actions.
    pub fn single_rb(num_rbs: usize, levels_w: &[f64]) -> Self {
        let mut actions = vec![PowerAction::silent(num_rbs)];
        for rb in 0..num_rbs {
            for &p in levels_w.iter().filter(|&&p| p > 0.0) {
                let mut v = vec![0.0; num_rbs];
                v[rb] = p;
                actions.push(PowerAction::new(v));
            }
        }
        Self { actions }
    }

    /// Every per-RB level combination: `(K+1)^B` actions, silence first.
    pub fn full_product(num_rbs: usize, levels_w: &[f64]) -> Self {
        let mut actions = vec![PowerAction::silent(num_rbs)];
        let base = levels_w.len();
        let total = base.pow(num_rbs as u32);
        for code in 1..total {
            let mut c = code;
            let v = (0..num_rbs)
                .map(|_| {
                    let p = levels_w[c % base];
                    c /= base;
                    p
                })
                .collect();
            actions.push(PowerAction::new(v));
        }
        Self { actions }
    }

    pub fn for_scenario(sc: &Scenario) -> Self {
        match sc.cfg.action_set {
            ActionSetKind::SingleRb => Self::single_rb(sc.cfg.num_rbs, &sc.power_levels_w),
            ActionSetKind::FullProduct => Self::full_product(sc.cfg.num_rbs, &sc.power_levels_w),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> &PowerAction {
        &self.actions[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PowerAction> {
        self.actions.iter()
    }

    pub fn non_silent(&self) -> impl Iterator<Item = usize> + '_ {
        self.actions.iter().enumerate().filter(|(_, a)| !a.is_silent()).map(|(i, _)| i)
    }
}

/// Builds the single-RB feasible set for `B` RBs, `K` non-zero levels and
/// maximum power `p` (W).
pub fn enumerate_actions(num_rbs: usize, k: usize, max_power_w: f64) -> ActionSet {
    let levels: Vec<f64> = (0..=k).map(|i| max_power_w * i as f64 / k as f64).collect();
    ActionSet::single_rb(num_rbs, &levels)
}

/// `Pr[AoI > delta]` under the Gaussian predictive distribution.
pub fn violation_probability(pred: &Prediction, delta: f64) -> f64 {
    let z = (delta - pred.mu) / pred.var.sqrt();
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Weights of the selection objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub alpha_c: f64,
    pub alpha_i: f64,
    pub delta: f64,
    pub warmup_slots: usize,
}

impl PolicyParams {
    /// Parameters a strategy actually runs with; greedy drops the exploration weight.
    pub fn for_policy(sc: &Scenario, kind: PolicyKind) -> Self {
        Self {
            alpha_c: sc.cfg.alpha_c,
            alpha_i: if kind == PolicyKind::Greedy { 0.0 } else { sc.cfg.alpha_i },
            delta: sc.cfg.aoi_threshold_s,
            warmup_slots: sc.cfg.warmup_slots,
        }
    }

    /// `alpha_c Pr[violation] - alpha_i var`.
    pub fn objective(&self, pred: &Prediction) -> f64 {
        self.alpha_c * violation_probability(pred, self.delta) - self.alpha_i * pred.var
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Brr(#[from] BrrError),
    #[error("objective is not finite for action {0}")]
    NonFinite(usize),
}

/// A learned choice together with the prediction for the chosen action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub action: usize,
    pub prediction: Prediction,
}

/// Minimizes the objective over every action; exact ties are broken uniformly at random.
pub fn select_action_proposed<R: Rng + ?Sized>(
    posterior: &BrrPosterior,
    map: &FeatureMap,
    aoi_s: f64,
    actions: &ActionSet,
    params: &PolicyParams,
    rng: &mut R,
) -> Result<Selection, PolicyError> {
    let mut best = f64::INFINITY;
    let mut ties: Vec<(usize, Prediction)> = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        let pred = posterior.predict(&map.transform(aoi_s, a))?;
        let j = params.objective(&pred);
        if !j.is_finite() {
            return Err(PolicyError::NonFinite(i));
        }
        if j < best {
            best = j;
            ties.clear();
            ties.push((i, pred));
        } else if j == best {
            ties.push((i, pred));
        }
    }
    let (action, prediction) = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
    Ok(Selection { action, prediction })
}

/// Uniform draw over the non-silent actions.
pub fn select_action_default<R: Rng + ?Sized>(actions: &ActionSet, rng: &mut R) -> usize {
    let candidates: Vec<usize> = actions.non_silent().collect();
    assert!(!candidates.is_empty(), "action set has no transmitting action");
    candidates[rng.random_range(0..candidates.len())]
}
