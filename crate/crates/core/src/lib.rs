//! Free-space optical link budgets for ground, high-altitude-platform, and
//! satellite links, with teleportation, repeater, and QKD rate models built
//! on top of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmosphere;
pub mod constants;
mod error;
pub mod geometry;
pub mod link_budget;
pub mod oracle;
pub mod rates;
pub mod scenario;

pub use error::{Error, Result};
