//! FAO-56 reference evapotranspiration toolkit and neural-network benchmark.
//!
//! The crate has two halves:
//!
//! - A daily ET₀ calculator built on the FAO-56 Penman-Monteith equation
//!   ([`pm`]), fed by validated station weather records ([`meteo`]).
//! - A from-scratch dense feed-forward network ([`nn`]) plus a
//!   cross-validated benchmark harness ([`experiment`]) that trains a grid
//!   of ANN/DNN regressors against PM-labelled data and scores them with
//!   the usual regression metrics ([`metrics`]).
//!
//! Everything is deterministic: all randomness flows from explicit seeds,
//! and repeated runs with the same inputs produce identical outputs.

pub mod experiment;
pub mod manifest;
pub mod meteo;
pub mod metrics;
pub mod nn;
pub mod pm;
pub mod seed;

pub use meteo::{MeteoRecord, StationMeta, StationProfile};
pub use nn::{ActivationKind, Hyperparams, NetworkSpec, TrainedModel};
pub use pm::{Et0Value, GammaMode, PmOptions};
