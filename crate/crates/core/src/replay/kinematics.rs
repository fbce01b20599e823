use serde::{Deserialize, Serialize};

use super::trajectory::{normalize_angle, Trajectory, TrajectorySample};
use super::ReplayError;
use crate::vehicle::VehicleSpec;
use crate::warning::Warning;

/// Default upper bound on a single integration step, seconds.
pub const DEFAULT_DT_MAX: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in `(-pi, pi]`.
    pub yaw: f64,
    pub v: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, yaw: f64, v: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
            v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    pub t: f64,
    /// Commanded speed, m/s.
    pub speed: f64,
    /// Commanded front-wheel angle, rad.
    pub steer: f64,
}

/// One explicit Euler step of the kinematic bicycle model (rear-axle
/// reference point). Speed tracking is instantaneous: the commanded speed
/// is the speed over the whole step. Steering is clamped to the vehicle's limit.
pub fn step_kinematic(
    s: &VehicleState,
    u: &ControlSample,
    dt: f64,
    spec: &VehicleSpec,
) -> Result<VehicleState, ReplayError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(ReplayError::NonPositiveStep(dt));
    }
    let steer = u.steer.clamp(-spec.max_steer_angle, spec.max_steer_angle);
    let v = u.speed;
    let (sin, cos) = s.yaw.sin_cos();
    Ok(VehicleState {
        x: s.x + v * cos * dt,
        y: s.y + v * sin * dt,
        yaw: normalize_angle(s.yaw + v / spec.wheelbase * steer.tan() * dt),
        v,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    /// Largest integration step.
    pub dt_max: f64,
    /// Hold the last control until this time and emit a final pose there.
    pub until: Option<f64>,
    /// Additional output times; those outside the simulated span are ignored.
    pub sample_times: Vec<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt_max: DEFAULT_DT_MAX,
            until: None,
            sample_times: Vec::new(),
        }
    }
}

/// Replays `controls` with zero-order hold: each command is held until the
/// next command's timestamp. Emits a pose at every control timestamp (plus
/// `until` and `sample_times` from `opts`), integrating with sub-steps no
/// longer than `opts.dt_max`.
pub fn simulate_controls(
    initial: &VehicleState,
    controls: &[ControlSample],
    spec: &VehicleSpec,
    opts: &SimOptions,
) -> Result<(Trajectory, Vec<Warning>), ReplayError> {
    if opts.dt_max.is_nan() || opts.dt_max <= 0.0 {
        return Err(ReplayError::NonPositiveStep(opts.dt_max));
    }
    let first = controls.first().ok_or(ReplayError::Empty)?;
    let mut warnings = Vec::new();
    for (i, c) in controls.iter().enumerate() {
        if !(c.t.is_finite() && c.speed.is_finite() && c.steer.is_finite()) {
            return Err(ReplayError::NonFinite("control sample"));
        }
        if i > 0 && c.t <= controls[i - 1].t {
            return Err(ReplayError::Unordered { index: i, t: c.t });
        }
        if c.steer.abs() > spec.max_steer_angle {
            warnings.push(Warning::new(format!(
                "control at t={} steers {} rad beyond the {} rad limit; clamped",
                c.t, c.steer, spec.max_steer_angle
            )));
        }
    }

    let last_t = controls[controls.len() - 1].t;
    let end = opts.until.filter(|u| *u > last_t).unwrap_or(last_t);
    let mut times: Vec<f64> = controls.iter().map(|c| c.t).collect();
    times.push(end);
    times.extend(
        opts.sample_times
            .iter()
            .copied()
            .filter(|t| (first.t..=end).contains(t)),
    );
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut state = VehicleState {
        v: first.speed,
        ..*initial
    };
    state.yaw = normalize_angle(state.yaw);
    let mut samples = Vec::with_capacity(times.len());
    samples.push(TrajectorySample::new(
        times[0],
        state.x,
        state.y,
        Some(state.yaw),
    ));

    let mut active = 0;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        while active + 1 < controls.len() && controls[active + 1].t <= t0 {
            active += 1;
        }
        let u = &controls[active];
        let span = t1 - t0;
        let n = (span / opts.dt_max).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            state = step_kinematic(&state, u, h, spec)?;
        }
        samples.push(TrajectorySample::new(t1, state.x, state.y, Some(state.yaw)));
    }
    Ok((Trajectory::new(samples)?, warnings))
}
