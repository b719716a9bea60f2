//! Secrecy–reliability tradeoff of direct transmission and opportunistic
//! decode-and-forward relay selection under eavesdropping.
//!
//! Closed forms live in [`analytic_dt`], [`analytic_ors`] and [`analytic_iid`];
//! [`montecarlo`] is the independent simulation engine and [`experiments`]
//! builds sweep tables and the cross-engine verification report.

pub mod analytic_dt;
pub mod analytic_iid;
pub mod analytic_ors;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod numeric;

pub use error::{Error, Result};
pub use model::{ChannelProfile, DecodingSet, IidProfile, SystemConfig, Thresholds};
