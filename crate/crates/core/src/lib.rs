//! Sizing, structural checking and command-chain simulation for the
//! pneumatic actuation of a voice-controlled upper-body exoskeleton arm.
//!
//! The crate is organised around the physical chain:
//!
//! - [`arm`]: planar quasi-static statics and kinematics of one arm.
//! - [`sizing`]: cylinder bore and stroke selection from the required force.
//! - [`structural`]: closed-form stress and factor-of-safety checks.
//! - [`sim`]: discrete-event simulation of sound sensor, latch, relay,
//!   5/2 valve and double-acting cylinder.
//! - [`config`], [`report`], [`cli`]: input documents, reports and the
//!   `exoarm` command-line tool.
//!
//! Angles are radians everywhere inside the library; configuration files,
//! reports and CSV outputs use degrees.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arm;
pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod sim;
pub mod sizing;
pub mod structural;

pub use error::{Error, Result};
