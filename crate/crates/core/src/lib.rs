//! Rule ensembles: tree-generated rules and winsorized linear terms combined
//! by a lasso fit, with importance, partial dependence and interaction tools.

pub mod bench;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod interpret;
pub mod loss;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod rulegen;
pub mod sparsefit;
pub mod tree;

pub use error::{Error, Result};

pub use model::EnsembleModel;
pub use pipeline::{fit, fit_model, RuleFitConfig, TermSet};
