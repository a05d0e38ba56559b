//! Fact checking for knowledge graphs with discriminative anchored predicate
//! paths.
//!
//! The pipeline for a statement `(s, p, t)`:
//!
//! 1. mask every `p` edge out of the graph ([`graph::KnowledgeGraph::masked_view`]);
//! 2. build positive and negative training pairs ([`sampling`]);
//! 3. enumerate bounded simple paths between every pair and reduce them to
//!    anchored predicate paths ([`paths`]);
//! 4. score path importance by information gain and keep the most
//!    discriminative columns ([`features`]);
//! 5. fit a logistic regression on the path counts and score the statement
//!    ([`model`]);
//! 6. rank and prune the selected paths into a readable definition
//!    ([`interpret`]).
//!
//! [`baselines`] holds untyped link-prediction scorers used for comparison.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod features;
pub mod fixture;
pub mod graph;
pub mod interpret;
pub mod model;
pub mod paths;
pub mod sampling;

pub use error::{Error, Result};
