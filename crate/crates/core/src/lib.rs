//! Discrete-time simulator of mobile in-factory subnetworks sharing a few
//! resource blocks, where each subnetwork learns its own AoI dynamics online
//! with Bayesian ridge regression and picks its RB and power to keep the
//! probability of exceeding an AoI threshold low.
//!
//! Modules follow the simulation pipeline: [`scenario`] (configuration,
//! deployment, random streams), [`mobility`], [`channel`], [`linkdyn`]
//! (queues and AoI), [`brr`] (the learner), [`policy`] (action selection) and
//! [`engine`] (slot loop and metrics).

pub mod brr;
pub mod channel;
pub mod engine;
pub mod linkdyn;
pub mod mobility;
pub mod policy;
pub mod scenario;

pub use brr::{BrrParams, BrrPosterior, FeatureMap, Prediction, SampleWindow};
pub use engine::{run_policy, run_simulation, MetricsSummary, RunOptions, SimulationOutput, SlotRecord};
pub use policy::{ActionSet, PolicyParams, PowerAction};
pub use scenario::{PolicyKind, Scenario, ScenarioConfig};
