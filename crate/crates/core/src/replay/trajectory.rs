use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::ReplayError;

/// Minimum displacement (m) before a direction of motion counts as a heading.
pub const HEADING_GATE: f64 = 0.05;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: Option<f64>,
}

impl TrajectorySample {
    pub fn new(t: f64, x: f64, y: f64, yaw: Option<f64>) -> Self {
        Self { t, x, y, yaw }
    }
}

/// Time-ordered pose samples with strictly increasing timestamps.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn new(samples: Vec<TrajectorySample>) -> Result<Self, ReplayError> {
        if samples.is_empty() {
            return Err(ReplayError::Empty);
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite()
                && s.x.is_finite()
                && s.y.is_finite()
                && s.yaw.is_none_or(f64::is_finite))
            {
                return Err(ReplayError::NonFinite("trajectory sample"));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(ReplayError::Unordered { index: i, t: s.t });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Direction of motion around sample `i`: the bracketing window
    /// `[i-1, i+1]` is widened until it spans at least [`HEADING_GATE`].
    pub fn motion_heading(&self, i: usize) -> Option<f64> {
        self.heading_between(i.saturating_sub(1), i + 1)
    }

    /// Direction of motion over the window starting at `lo` and ending at
    /// `hi`, widened outward until the displacement passes the gate.
    fn heading_between(&self, lo: usize, hi: usize) -> Option<f64> {
        let n = self.samples.len();
        let (mut lo, mut hi) = (lo.min(n - 1), hi.min(n - 1));
        loop {
            let (a, b) = (&self.samples[lo], &self.samples[hi]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            if dx.hypot(dy) >= HEADING_GATE {
                return Some(dy.atan2(dx));
            }
            if lo == 0 && hi == n - 1 {
                return None;
            }
            lo = lo.saturating_sub(1);
            hi = (hi + 1).min(n - 1);
        }
    }
}

/// Linear interpolation of `recorded` at `query_times`.
///
/// Positions are interpolated linearly. Yaw is interpolated along the
/// shorter arc when the bracketing samples both carry one; otherwise it is
/// taken from the direction of motion. Queries at a recorded timestamp
/// return that sample unchanged (apart from a derived yaw when missing).
pub fn shadow_follow(
    recorded: &Trajectory,
    query_times: &[f64],
) -> Result<Trajectory, ReplayError> {
    let s = recorded.samples();
    let (start, end) = (recorded.start(), recorded.end());
    let mut out = Vec::with_capacity(query_times.len());
    for &t in query_times {
        if !(start..=end).contains(&t) {
            return Err(ReplayError::OutOfRange { t, start, end });
        }
        // First sample with time >= t.
        let hi = s.partition_point(|p| p.t < t);
        if s[hi].t == t {
            let mut sample = s[hi];
            if sample.yaw.is_none() {
                sample.yaw = recorded.heading_between(hi.saturating_sub(1), hi + 1);
            }
            out.push(sample);
            continue;
        }
        let lo = hi - 1;
        let (a, b) = (&s[lo], &s[hi]);
        let alpha = (t - a.t) / (b.t - a.t);
        let yaw = match (a.yaw, b.yaw) {
            (Some(ya), Some(yb)) => Some(normalize_angle(ya + alpha * normalize_angle(yb - ya))),
            _ => recorded.heading_between(lo, hi),
        };
        out.push(TrajectorySample {
            t,
            x: a.x + alpha * (b.x - a.x),
            y: a.y + alpha * (b.y - a.y),
            yaw,
        });
    }
    Trajectory::new(out)
}
