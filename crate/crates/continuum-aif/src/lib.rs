//! Discrete active-inference engine and pipeline simulator for SLO-driven
//! service management.
//!
//! The crate is organized in layers:
//!
//! - [`categorical`], [`space`], [`belief`], [`transition`]: factored
//!   categorical state spaces, mean-field beliefs, and conditional
//!   transition tables (expert or learned from Dirichlet counts).
//! - [`policy`], [`efe`]: policy enumeration and expected-free-energy
//!   scoring with softmax action selection.
//! - [`agents`]: the three shipped service agents (producer, worker,
//!   consumer) with their transition rules, preferences, and SLO checks.
//! - [`env`]: the pipeline environment the agents act in, backed either by
//!   a synthetic generator or by replayed device traces.
//! - [`harness`]: experiment orchestration, aggregation, and artifacts.

pub mod agents;
pub mod belief;
pub mod categorical;
pub mod cli;
pub mod efe;
pub mod env;
pub mod error;
pub mod harness;
pub mod labels;
pub mod policy;
pub mod space;
pub mod transition;

pub use belief::BeliefState;
pub use categorical::Categorical;
pub use efe::{ActionSelection, EfeReport, PolicyEvaluation, PreferenceModel};
pub use error::{EnvError, HarnessError, ModelError};
pub use policy::{enumerate_policies, Policy};
pub use space::{ControlSpace, FactorSpace, JointAction};
pub use transition::{DirichletCounts, FactorWiring, TransitionFactorModel};
