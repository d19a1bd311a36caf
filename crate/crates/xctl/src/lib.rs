//! Experiment harness for the loop O(n) crate: bound checks on small
//! domains and tori, event detectors, confidence intervals, CSV reports and
//! SVG snapshots.

pub mod cli;
pub mod config;
pub mod error;
pub mod events;
pub mod experiments;
pub mod render;
pub mod report;
pub mod stats;

pub use error::{Result, XctlError};
