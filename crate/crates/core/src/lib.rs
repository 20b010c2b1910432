//! Kinematics, singularity analysis and base-reconfiguration planning for a
//! kinematically redundant octahedral Stewart-Gough platform.
//!
//! The mechanism is the classical octahedral hexapod (anchors coinciding in
//! pairs, equilateral anchor triangles) with one extra actuated degree of
//! freedom: the base triangle rescales equiformly, its vertices sliding on
//! radial guide rails. The crate covers:
//!
//! * [`kinematics`] — anchor layout, inverse kinematics, spear (Plücker)
//!   coordinates, the 6×6 Jacobian and the velocity relation between
//!   actuator rates and the platform screw, including the self-motion screw
//!   of the locked-leg mechanism;
//! * [`singularity`] — recovery of the determinant's quadratic dependence on
//!   the base radius, the unavoidable-singularity test (singular for *every*
//!   base radius), the 22-row classification of unavoidable strata by
//!   orientation, and closed-form factor oracles for the special families;
//! * [`planner`] — singularity/clearance fields over a motion, crossing
//!   detection at fixed base radius, and a deterministic maximin dynamic
//!   program for a reconfiguration profile `g(τ)` that avoids singularities
//!   and leg interference;
//! * [`redundant_legs`] — a platform variant with three sliding-base
//!   redundant legs and pairwise-distinct platform joints, demonstrating an
//!   unavoidable quarter-turn singularity for that architecture as well.
//!
//! Orientations are homogeneous Euler parameters ([`EulerOrientation`]);
//! poses and configurations use platform-circumradius units, so the single
//! geometric parameter left is the base circumradius `g > 0`.

#![forbid(unsafe_code)]

pub mod error;
pub mod kinematics;
pub mod orientation;
pub mod planner;
pub mod redundant_legs;
pub mod singularity;

pub use error::{Error, Result};
pub use kinematics::{Configuration, JointRates, PlatformScrew, Pose, SpearLine};
pub use orientation::EulerOrientation;
pub use planner::{GProfile, MotionPath, PlanOutcome, PlanParams, SingularityField};
pub use singularity::{SigmaCoefficients, UnavoidableStratum};
