//! File formats, run orchestration and report assembly around
//! [`teamform_core`].

pub mod formats;
pub mod report;
pub mod suite;
