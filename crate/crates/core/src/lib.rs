//! Learned joint-space collision fields for articulated robots.
//!
//! A geometric oracle ([`collision`]) labels poses of a revolute chain
//! ([`kinematics`]); [`sampler`] turns those labels into balanced datasets;
//! [`field`] is a hierarchical network whose pre-sigmoid output is trained
//! ([`train`]) to behave like a signed distance in joint space; [`optim`]
//! uses that field to push poses and trajectories out of collision.

pub mod adam;
pub mod cli;
pub mod collision;
pub mod error;
pub mod field;
pub mod io;
pub mod kinematics;
pub mod optim;
pub mod sampler;
pub mod scenes;
pub mod train;

pub use error::{Error, Result};
