//! Loss, temperature and failure-rate evaluation of a three-level
//! neutral-point-clamped inverter under SPWM, THIPWM and SVPWM.

pub mod config;
pub mod dclink;
pub mod devices;
pub mod error;
pub mod losses;
pub mod modulation;
pub mod pipeline;
pub mod reliability;
pub mod report;
pub mod thermal;

pub use error::{Error, ErrorClass, Result};
pub use modulation::{OperatingPoint, StrategyId};
