//! Causal effect estimation for exchangeable, multi-environment data.
//!
//! Data are grouped into environments; within an environment the latent
//! mechanism parameters are fixed and positions are conditionally i.i.d.
//! Interventions replace one mechanism's factor at chosen positions, and
//! post-interventional distributions follow from the exchangeable
//! truncated factorization over the full position block.
//!
//! Modules:
//! * [`table`], [`dag`], [`dataset`], [`query`]: shared domain types
//! * [`simulate`]: data generators and the causal Pólya urn
//! * [`estimate`]: histogram fitting and interventional queries
//! * [`discover`]: conditional-independence tests and bivariate discovery
//! * [`oracle`]: conjugate closed forms and quadrature ground truth
//! * [`harness`]: experiment sweeps, CSV and SVG reporting

pub mod dag;
pub mod dataset;
pub mod discover;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod oracle;
pub mod query;
pub mod rng;
pub mod simulate;
pub mod table;

pub use dag::{BivariateGraph, Dag};
pub use dataset::ExchangeableDataset;
pub use error::{Error, Result};
pub use query::{InterventionSet, Query};
pub use simulate::BetaPrior;
pub use table::{Assignment, Axis, AxisKey, JointTable};
