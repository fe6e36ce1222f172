//! The slotted simulation loop and Monte Carlo orchestration.
//!
//! Each slot runs in five phases:
//!
//! 1. every subnetwork records its AoI and adds the previous slot's
//!    (input, outcome) pair to its learning window;
//! 2. every subnetwork picks an action from start-of-slot information only;
//! 3. gains are drawn and rates computed jointly from all actions;
//! 4. packets arrive, queues are served and AoI advances;
//! 5. subnetworks move.

mod metrics;
mod trace;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use metrics::{compute_metrics, compute_rmse, default_grid, MetricsAccumulator, MetricsError, MetricsSummary};
pub use trace::SlotRecord;

use crate::brr::{fit_posterior, BrrParams, FeatureMap, SampleWindow};
use crate::channel::{build_gain_tensor, interference_matrix, rate_given_interference, LinkGainTensor, Shadowing};
use crate::linkdyn::{generate_arrivals, slots_to_seconds, AoiState, SensorQueue};
use crate::mobility::step_positions;
use crate::policy::{select_action_default, select_action_proposed, ActionSet, PolicyParams, PowerAction};
use crate::scenario::{init_deployment, Deployment, PolicyKind, Purpose, Scenario, Streams};

/// Per-subnetwork mutable state.
#[derive(Debug, Clone)]
pub struct SubnetworkState {
    pub queue: SensorQueue,
    pub aoi: AoiState,
    pub window: SampleWindow,
    /// Raw learner input of the previous slot, waiting for its outcome.
    pending: Option<Vec<f64>>,
    pub last_action: Option<usize>,
    arrivals_rng: ChaCha8Rng,
    policy_rng: ChaCha8Rng,
}

/// What a subnetwork does in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: usize,
    /// Predicted (mean, variance) when the action came from the learner.
    pub prediction: Option<(f64, f64)>,
}

/// One independent Monte Carlo run.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    sc: &'a Scenario,
    policy: PolicyKind,
    params: PolicyParams,
    actions: ActionSet,
    map: FeatureMap,
    brr: BrrParams,
    streams: Streams,
    run: u64,
    slot: u64,
    deployment: Deployment,
    shadowing: Shadowing,
    mobility_rng: ChaCha8Rng,
    subnets: Vec<SubnetworkState>,
}

impl<'a> Simulation<'a> {
    pub fn new(sc: &'a Scenario, policy: PolicyKind, seed: u64, run: u64) -> Self {
        let streams = Streams::new(seed);
        let n = sc.cfg.num_subnetworks;
        let deployment = init_deployment(sc, &mut streams.stream(run, Purpose::Deployment, 0));
        let shadowing = Shadowing::sample(n, sc.cfg.shadow_std_db, &mut streams.stream(run, Purpose::Shadowing, 0));
        let subnets = (0..n)
            .map(|i| SubnetworkState {
                queue: SensorQueue::new(),
                aoi: AoiState::default(),
                window: SampleWindow::new(sc.cfg.window_size, sc.feature_dim),
                pending: None,
                last_action: None,
                arrivals_rng: streams.stream(run, Purpose::Arrivals, i as u64),
                policy_rng: streams.stream(run, Purpose::Policy, i as u64),
            })
            .collect();
        Self {
            sc,
            policy,
            params: PolicyParams::for_policy(sc, policy),
            actions: ActionSet::for_scenario(sc),
            map: FeatureMap { aoi_scale: sc.cfg.aoi_threshold_s, power_scale: sc.max_power_w, num_rbs: sc.cfg.num_rbs },
            brr: BrrParams { lambda: sc.cfg.ridge_lambda, sigma2_floor: sc.sigma2_floor, target_scale: sc.target_scale() },
            streams,
            run,
            slot: 0,
            deployment,
            shadowing,
            mobility_rng: streams.stream(run, Purpose::Mobility, 0),
            subnets,
        }
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn subnetworks(&self) -> &[SubnetworkState] {
        &self.subnets
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    /// Runs one slot under the configured policy.
    pub fn run_slot(&mut self) -> Vec<SlotRecord> {
        self.begin_slot();
        let decisions: Vec<Decision> = (0..self.subnets.len()).map(|n| self.decide(n)).collect();
        self.finish_slot(&decisions)
    }

    /// Runs one slot with externally chosen actions (indices into the action set).
    pub fn run_slot_with(&mut self, actions: &[usize]) -> Vec<SlotRecord> {
        assert_eq!(actions.len(), self.subnets.len());
        self.begin_slot();
        let decisions: Vec<Decision> = actions.iter().map(|&action| Decision { action, prediction: None }).collect();
        self.finish_slot(&decisions)
    }

    fn tau(&self) -> f64 {
        self.sc.cfg.slot_duration_s
    }

    /// Phase 1: files last slot's outcome into every window.
    pub fn begin_slot(&mut self) {
        let tau = self.tau();
        let map = self.map;
        for s in &mut self.subnets {
            if let Some(raw) = s.pending.take() {
                s.window.push_features(&map, raw, s.aoi.seconds(tau));
            }
        }
    }

    /// Phase 2 for one subnetwork. Reads only that subnetwork's state.
    pub fn decide(&mut self, n: usize) -> Decision {
        let aoi = self.subnets[n].aoi.seconds(self.tau());
        let learned = self.policy.is_learning()
            && self.slot >= self.params.warmup_slots as u64
            && self.subnets[n].window.len() >= self.sc.feature_dim + 3;
        let s = &mut self.subnets[n];
        if learned {
            let chosen = fit_posterior(&s.window, &self.brr)
                .map_err(Into::into)
                .and_then(|post| select_action_proposed(&post, &self.map, aoi, &self.actions, &self.params, &mut s.policy_rng));
            match chosen {
                Ok(sel) => {
                    return Decision { action: sel.action, prediction: Some((sel.prediction.mu, sel.prediction.var)) }
                }
                Err(e) => debug_assert!(false, "learner failed: {e}"),
            }
        }
        Decision { action: select_action_default(&self.actions, &mut s.policy_rng), prediction: None }
    }

    /// Phases 3 to 5: channel, queues and AoI, mobility.
    pub fn finish_slot(&mut self, decisions: &[Decision]) -> Vec<SlotRecord> {
        assert_eq!(decisions.len(), self.subnets.len());
        let sc = self.sc;
        let tau = self.tau();
        let t = self.slot;
        let rbs = sc.cfg.num_rbs;
        let chosen: Vec<&PowerAction> = decisions.iter().map(|d| self.actions.get(d.action)).collect();

        let gains: LinkGainTensor = build_gain_tensor(
            &self.deployment,
            &self.shadowing,
            sc,
            &mut self.streams.stream(self.run, Purpose::Fading, t),
        );
        let interf = interference_matrix(&chosen, &gains);

        let mut rows = Vec::with_capacity(self.subnets.len());
        for (n, (s, d)) in self.subnets.iter_mut().zip(decisions).enumerate() {
            let own_interf = &interf[n * rbs..(n + 1) * rbs];
            let rate = rate_given_interference(n, chosen[n], own_interf, &gains, sc);
            let aoi_before = s.aoi;
            let backlog_before = s.queue.len();
            let arrivals = generate_arrivals(sc.arrival_rate, t, &mut s.arrivals_rng);
            s.queue.push(arrivals);
            let delivered = s.queue.deliver(rate, sc.cfg.service_order);
            s.aoi = aoi_before.update(&delivered, t).expect("packets are never stamped in the future");
            s.pending = Some(self.map.raw(aoi_before.seconds(tau), chosen[n]));
            s.last_action = Some(d.action);
            rows.push(SlotRecord {
                run: self.run,
                slot: t,
                subnetwork: n,
                aoi: aoi_before.seconds(tau),
                action: d.action,
                mu: d.prediction.map(|p| p.0),
                var: d.prediction.map(|p| p.1),
                next_aoi: s.aoi.seconds(tau),
                rate,
                interference: own_interf.to_vec(),
                backlog_before,
                arrivals: arrivals.count,
                delivered: delivered.iter().map(|b| b.count).sum(),
                backlog_after: s.queue.len(),
                freshest_delivered: delivered.iter().map(|b| b.generation_slot).max(),
            });
        }

        step_positions(&mut self.deployment, sc, &mut self.mobility_rng);
        self.slot += 1;
        rows
    }
}

/// Result of a batch of runs.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub summary: MetricsSummary,
    /// Per-run summaries, in run order.
    pub runs: Vec<MetricsSummary>,
    /// Every slot record when requested, in (run, slot, subnetwork) order.
    pub trace: Option<Vec<SlotRecord>>,
}

/// Options for [`run_simulation`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub collect_trace: bool,
}

fn metrics_grid(sc: &Scenario) -> Vec<f64> {
    default_grid(sc.cfg.slot_duration_s, sc.cfg.ccdf_max_slots, sc.cfg.aoi_threshold_s)
}

/// Runs one Monte Carlo run, returning its accumulator and optional trace.
pub fn run_single(sc: &Scenario, policy: PolicyKind, seed: u64, run: u64, opts: RunOptions) -> (MetricsAccumulator, Option<Vec<SlotRecord>>) {
    let mut sim = Simulation::new(sc, policy, seed, run);
    let mut acc = MetricsAccumulator::new(metrics_grid(sc), sc.cfg.aoi_threshold_s);
    let mut trace = opts.collect_trace.then(Vec::new);
    let warmup = sc.cfg.warmup_slots as u64;
    for _ in 0..sc.cfg.horizon_slots {
        let rows = sim.run_slot();
        for r in &rows {
            if r.slot >= warmup {
                acc.add_aoi(r.aoi);
                if let Some(mu) = r.mu {
                    acc.add_prediction(mu, r.next_aoi);
                }
            }
        }
        if let Some(tr) = trace.as_mut() {
            tr.extend(rows);
        }
    }
    (acc, trace)
}

/// Runs `num_runs` independent runs of the configured policy and aggregates
/// metrics over every post-warmup (run, slot, subnetwork) sample.
/// Deterministic in `(scenario, seed)`; runs execute in parallel.
pub fn run_simulation(sc: &Scenario, seed: u64, opts: RunOptions) -> Result<SimulationOutput, MetricsError> {
    run_policy(sc, sc.cfg.policy, seed, opts)
}

pub fn run_policy(sc: &Scenario, policy: PolicyKind, seed: u64, opts: RunOptions) -> Result<SimulationOutput, MetricsError> {
    let results: Vec<_> = (0..sc.cfg.num_runs as u64)
        .into_par_iter()
        .map(|run| run_single(sc, policy, seed, run, opts))
        .collect();
    let mut total = MetricsAccumulator::new(metrics_grid(sc), sc.cfg.aoi_threshold_s);
    let mut runs = Vec::with_capacity(results.len());
    let mut trace = opts.collect_trace.then(Vec::new);
    for (acc, tr) in results {
        total.merge(&acc);
        runs.push(acc.summary()?);
        if let (Some(all), Some(tr)) = (trace.as_mut(), tr) {
            all.extend(tr);
        }
    }
    Ok(SimulationOutput { summary: total.summary()?, runs, trace })
}

/// Seconds for an AoI of `slots` slots, as used in every record.
pub fn aoi_seconds(sc: &Scenario, slots: u64) -> f64 {
    slots_to_seconds(slots, sc.cfg.slot_duration_s)
}
