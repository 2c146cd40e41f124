//! Evaluation metrics for sets of shapes and sets of tracks.
//!
//! The crate covers IoU/GIoU base distances (optionally extended with
//! confidence scores), the Hausdorff, EMD, OSPA and OSPA² set metrics, the
//! classical threshold-based criteria (F1, AP/mAP, log-AMR, MOTA, IDF1, HOTA),
//! rank-based reliability indicators, and seeded sanity-test generators.

pub mod assignment;
pub mod classic;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod io;
pub mod ranking;
pub mod report;
pub mod sanity;
pub mod setmetrics;

pub use error::{Error, Result};
