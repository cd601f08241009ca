//! Benchmarking toolkit for next-event prediction on business-process event
//! logs.
//!
//! The pipeline: parse event logs ([`eventlog`]), encode traces into
//! fixed-window samples ([`encoding`]), train individual classifiers
//! ([`classifiers`]) or ensembles over them ([`ensembles`]), evaluate with
//! repeated holdout ([`evaluation`]) and compare classifiers with rank-based
//! significance tests ([`stats`]).

pub mod classifiers;
pub mod encoding;
pub mod error;
pub mod eventlog;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
