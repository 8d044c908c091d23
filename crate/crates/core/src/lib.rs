//! Statistical models of top-k partial orders.
//!
//! Two model classes are provided. Composite models multiply a length
//! distribution by a Plackett–Luce marginal (C-I, C-CI, C-LD). Augmented
//! models add an END alternative to a sequential choice process (A, A-PD,
//! A-S). Every model can be evaluated exactly, sampled, and fitted by
//! regularized maximum likelihood.

pub mod assignment;
pub mod augmented;
pub mod combinatorics;
pub mod composite;
mod error;
pub mod estimation;
pub mod eval;
pub mod io;
pub mod length;
pub mod math;
pub mod model;
pub mod order;
pub mod params;
pub mod ranking;

pub use error::{Error, Result};
pub use model::{Model, ModelKind};
pub use order::{AgentCovariates, CovariateTensor, Dataset, PartialOrder, Universe};
pub use params::ParamBlock;
