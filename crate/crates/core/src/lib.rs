//! Small area estimation under nested error regression, unit-context and
//! Fay-Herriot models.
//!
//! The crate provides five predictors of small area means (direct, EBLUP with
//! REML variance components, and observed best prediction under unit-level,
//! unit-context and area-level models) together with a seeded Monte Carlo
//! harness for studying how they behave when the working model is wrong.

// Range checks are written `!(x >= 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimators;
pub mod numerics;
pub mod simulation;

pub use data::{AreaSummary, AreaUnits, FinitePopulation, PopulationSummary, SurveyData};
pub use error::{Result, SaeError};
pub use estimators::{Estimator, FitParams, ObjectiveTrace, ObpModel, PredictionSet};
pub use numerics::{RandomStream, ScalarMinResult, SearchConfig};
