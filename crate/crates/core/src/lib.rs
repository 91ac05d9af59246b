//! Pool-based multi-label active learning with correlation-aware beta scoring.
//!
//! The crate is organised the way one acquisition round flows:
//!
//! - [`dataset`], [`pool`] and [`metrics`] hold labelled data, the labelled /
//!   unlabelled / validation split and the evaluation metrics.
//! - [`scoring`] implements beta-family proper scoring rules and the
//!   attention-weighted score.
//! - [`correlation`] maintains positive and negative label co-occurrence
//!   matrices over the labelled pool.
//! - [`ensemble`] trains probabilistic classifiers and performs posterior
//!   reweighting over ensemble members.
//! - [`strategy`] refines the unlabelled pool, estimates expected score
//!   increments and picks a diverse batch with k-means.
//! - [`harness`] generates synthetic imbalanced data and drives multi-seed
//!   campaigns.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod par;
pub mod pool;
pub mod rng;
pub mod scoring;
pub mod strategy;

pub use error::{Error, Result};
