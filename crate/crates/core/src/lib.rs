//! Estimation toolkit for randomized trials with partial clustering:
//! dependence within intervention clusters, independence in the control arm.
//!
//! The crate provides the data model and clustering-assumption transforms
//! ([`data`]), data-generating processes for operating-characteristic studies
//! ([`dgp`]), base learners and a cluster-aware Super Learner ([`learners`],
//! [`super_learner`]), a targeted maximum likelihood estimator with
//! influence-curve inference aggregated to the effective independent units
//! ([`tmle`]), mixed-model and GEE comparators ([`classical`]), replicate
//! summaries ([`metrics`]), and a deterministic parallel simulation driver
//! ([`sim_engine`]). Brute-force reference implementations used by the test
//! suite live in [`oracles`].

pub mod classical;
pub mod data;
pub mod dgp;
pub mod dist;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod oracles;
pub mod sim_engine;
pub mod super_learner;
pub mod tmle;

pub use data::{ClusteringAssumption, OutcomeKind, ParticipantRecord, TrialDataset};
pub use error::{Error, Result};
