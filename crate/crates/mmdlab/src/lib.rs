//! File formats, configuration, caching and reporting around
//! [`mmdlab_core`].

pub mod cache;
pub mod config;
pub mod error;
pub mod exec;
pub mod export;
pub mod fmt;
pub mod mmg;
pub mod ops;
pub mod report;
pub mod scenario;

pub use error::{LabError, LabResult};
