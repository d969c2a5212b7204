//! Kinematic testbed for sonar-driven reactive 3D obstacle avoidance of
//! autonomous underwater vehicles.
//!
//! The crate bundles a static obstacle world, a pivoting multibeam sonar
//! emulator, reduced vehicle kinematics, the gap/extent/convexity/pivot
//! decision policy, a short-term obstacle memory with a barrier-function
//! safety filter, two planar baseline planners, and the closed-loop harness.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod scg;
pub mod sonar;
pub mod spd2c;
pub mod stcbf;
pub mod vehicle;
pub mod world;

pub use error::{Error, Result};
