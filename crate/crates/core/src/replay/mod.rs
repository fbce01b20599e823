//! Offline reality-gap analysis.
//!
//! Recorded controls are replayed through a kinematic bicycle model and the
//! resulting trajectory is compared with the recorded one. The report gives
//! the deviations only; whether a mismatch comes from the real vehicle or
//! from the model stays a human call.

mod gap;
mod io;
mod kinematics;
mod trajectory;

use thiserror::Error;

pub use gap::{compute_gap, GapReport};
pub use io::{read_controls_csv, read_trajectory_csv};
pub use kinematics::{
    simulate_controls, step_kinematic, ControlSample, SimOptions, VehicleState, DEFAULT_DT_MAX,
};
pub use trajectory::{normalize_angle, shadow_follow, Trajectory, TrajectorySample, HEADING_GATE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("timestamps must be strictly increasing (at index {index}: {t})")]
    Unordered { index: usize, t: f64 },
    #[error("trajectory is empty")]
    Empty,
    #[error("query time {t} is outside the recorded range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("trajectories overlap in {0} sample(s); at least 2 are needed")]
    InsufficientOverlap(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("CSV error: {0}")]
    Csv(String),
}
