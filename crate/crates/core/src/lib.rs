//! Active-learning Bayesian cubature for the model evidence of Bayesian
//! model-updating problems.
//!
//! A Gaussian-process surrogate of the log-likelihood is refined one
//! evaluation at a time. The evidence is estimated by Monte Carlo over a
//! prior sample pool using only the surrogate mean and standard deviation.
//! The loop stops once the credible-bound evidences agree to a relative
//! tolerance and the plug-in estimate's Monte Carlo CoV is small enough.

pub mod acquisition;
pub mod benchmarks;
pub mod cubature;
pub mod driver;
pub mod error;
pub mod gp;
pub mod lowdisc;
pub mod normal;
pub mod optim;
pub mod points;
pub mod posterior;
pub mod prior;

pub use error::{Error, Result};
pub use points::PointSet;
pub use prior::{Bounds, MarginalPrior, PriorSpec};
pub use driver::{run, AlcConfig, IterationRecord, RunReport, TerminationReason};
