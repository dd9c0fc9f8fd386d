//! Artificial-noise precoder design for physical-layer security in indoor
//! visible-light downlinks.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only the numerical
//! core: line-of-sight channel generation, rate / power / efficiency
//! metrics, a small dense log-barrier solver, and the three design
//! families built on top of it:
//!
//! * [`unknown_csi`]: energy-efficiency maximisation of the legitimate link
//!   (fractional programming + convex-concave procedure) plus the
//!   zero-forcing closed form,
//! * [`known_csi`]: max-min secrecy energy efficiency via bisection over
//!   convexified feasibility problems,
//! * [`kernel`]: the interior-point solver both of them call.
//!
//! IO, Monte Carlo orchestration and the CLI live in the `vlcsec` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
mod error;
pub mod kernel;
pub mod known_csi;
pub mod linalg;
mod math;
pub mod metrics;
pub mod unknown_csi;

pub use channel::{
    build_channel, channel_gain, lambertian_order, noise_variance, normalized_noise, ChannelState,
    OpticalParams, Point3, ReceiverChannel, RoomScenario, SchemeKind,
};
pub use error::{Error, Result};
pub use kernel::{ConvexProgram, SolveError, SolveReport, SolveStatus, Tolerances};

pub use known_csi::{maxmin_see, p12_feasible, MaxMinConfig, MaxMinOutcome};
pub use metrics::{PowerParams, PrecoderSolution, Receiver};
pub use unknown_csi::{DesignConfig, DesignOutcome, DesignStatus};

/// `π·e`, the constant that shows up in every amplitude-constrained rate bound.
pub const PI_E: f64 = core::f64::consts::PI * core::f64::consts::E;
