//! Stateless optimal partial-order exploration over unfoldings.
//!
//! A [`model::SystemDef`] (guarded commands, or a Petri net compiled to them)
//! is unfolded lazily into a [`unfolding::PrefixStore`]. The
//! [`explorer`] visits every maximal configuration exactly once, optionally
//! truncating at [`cutoff`] events, and the [`oracle`] checks the result
//! against a brute-force interleaving search.
//!
//! ```
//! use unfold_dpor::{bench, explorer};
//!
//! let sys = bench::ccnf(5);
//! let run = explorer::explore(&sys, &explorer::ExploreOptions::default()).unwrap();
//! assert_eq!(run.report.max_configs, 4);
//! ```

pub mod bench;
pub mod cli;
pub mod corpus;
pub mod cutoff;
pub mod error;
pub mod explorer;
pub mod model;
pub mod oracle;
pub mod unfolding;

pub use error::LoadError;
