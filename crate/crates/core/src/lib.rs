//! Memory-efficient Strassen–Winograd matrix multiplication over Z/p.
//!
//! Schedules are data ([`schedule::Schedule`]); one executor interprets them,
//! metering arithmetic and temporary memory as it goes.

pub mod algorithm;
pub mod drivers;
pub mod error;
pub mod exec;
pub mod meter;
pub mod pebble;
pub mod ring;
pub mod schedule;
