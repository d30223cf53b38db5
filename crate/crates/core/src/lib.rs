//! Event-by-event simulation of the Einstein-Podolsky-Rosen-Bohm experiment
//! and its extended two-stage variant, with local photon identification,
//! plus the closed-form classical and quantum predictions used to check it.
//!
//! The guide in `book/` walks through the model; its code snippets are
//! compiled and run as doctests of this crate.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod model;
pub mod moments;
pub mod optics;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod station;

pub use config::{ConfigError, RunConfig, Topology};
pub use experiment::{
    chsh_multi_run, chsh_single_run, estimate_moments, run, run_sweep, Dataset, Geometry, MomentEstimates,
};
pub use model::{Angle, Settings, SpinValue};
pub use moments::Subset;
pub use optics::{PolarizationMode, RetardationLaw, RetardationParams};
pub use station::IdentificationRule;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/identification.md")]
    mod identification {}
    #[doc = include_str!("../../../book/src/moments.md")]
    mod moments {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
