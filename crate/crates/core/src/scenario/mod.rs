//! Configuration, deployment and the seeded-randomness contract.

mod config;
mod deployment;
mod streams;

pub use config::{
    dbm_to_watts, ActionSetKind, ConfigErrors, FieldError, LoadError, PolicyKind, Scenario, ScenarioConfig,
    ServiceOrder, TargetUnit,
};
pub use deployment::{init_deployment, Deployment, Vec2};
pub use streams::{Purpose, Streams};
