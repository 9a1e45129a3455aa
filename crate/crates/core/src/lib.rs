//! Synthetic transaction databases that approximately meet a set of
//! frequent-itemset support constraints.
//!
//! The pipeline is: constraints ([`ConstraintSet`]) → relaxed integer program
//! ([`formulation::build_relaxed_lp`]) → LP optimum ([`lp`]) → integer
//! solution by one of the registered rounding methods ([`rounding`]) →
//! [`TransactionDatabase`] with a [`SynthesisReport`].
//!
//! [`oracle`] solves tiny instances exactly and generates hard instances from
//! graph 3-coloring; [`privacy`] audits and scrubs support disclosures.

pub mod constraints;
pub mod database;
pub mod error;
pub mod formats;
pub mod formulation;
pub mod itemset;
pub mod lp;
pub mod miner;
pub mod oracle;
pub mod pipeline;
pub mod privacy;
pub mod report;
pub mod rounding;

pub use constraints::{ConstraintSet, ScrubMarker, SupportConstraint};
pub use database::{Transaction, TransactionDatabase};
pub use error::{Error, Result};
pub use itemset::{ItemSet, ItemUniverse};
pub use report::{deviation_report, ConstraintDeviation, SynthesisReport};
