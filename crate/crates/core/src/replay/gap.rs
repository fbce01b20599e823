use serde::{Deserialize, Serialize};

use super::trajectory::{shadow_follow, Trajectory};
use super::ReplayError;

/// Deviation statistics between a recorded (real) and a simulated
/// trajectory, evaluated at the recorded timestamps inside the overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub rmse: f64,
    pub max_dev: f64,
    pub mean_dev: f64,
    pub final_drift: f64,
    /// Across the real heading.
    pub lateral_rmse: f64,
    /// Along the real heading.
    pub longitudinal_rmse: f64,
    /// `(t, deviation)` pairs.
    pub per_sample: Vec<(f64, f64)>,
}

impl GapReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        format!(
            "n={} rmse={:.6} max_dev={:.6} final_drift={:.6}",
            self.n, self.rmse, self.max_dev, self.final_drift
        )
    }
}

/// Compares `sim` against `real` on `real`'s timestamps within the common
/// time range; `sim` is resampled by linear interpolation.
///
/// Lateral and longitudinal components project the deviation onto the real
/// trajectory's direction of motion. Where the real vehicle is too slow for
/// a heading, its recorded yaw is used, and failing that the x axis.
pub fn compute_gap(real: &Trajectory, sim: &Trajectory) -> Result<GapReport, ReplayError> {
    let start = real.start().max(sim.start());
    let end = real.end().min(sim.end());
    let idx: Vec<usize> = real
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.t >= start && s.t <= end)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 2 {
        return Err(ReplayError::InsufficientOverlap(idx.len()));
    }
    let times: Vec<f64> = idx.iter().map(|&i| real.samples()[i].t).collect();
    let resampled = shadow_follow(sim, &times)?;

    let n = idx.len();
    let mut per_sample = Vec::with_capacity(n);
    let (mut sq, mut sum, mut max, mut lat_sq, mut lon_sq) = (0.0, 0.0, 0.0f64, 0.0, 0.0);
    for (&i, s) in idx.iter().zip(resampled.samples()) {
        let r = &real.samples()[i];
        let (dx, dy) = (s.x - r.x, s.y - r.y);
        let dev = dx.hypot(dy);
        let heading = real.motion_heading(i).or(r.yaw).unwrap_or(0.0);
        let (sin, cos) = heading.sin_cos();
        let along = dx * cos + dy * sin;
        let across = -dx * sin + dy * cos;
        sq += dx * dx + dy * dy;
        sum += dev;
        max = max.max(dev);
        lat_sq += across * across;
        lon_sq += along * along;
        per_sample.push((r.t, dev));
    }
    let nf = n as f64;
    Ok(GapReport {
        n,
        rmse: (sq / nf).sqrt(),
        max_dev: max,
        mean_dev: sum / nf,
        final_drift: per_sample[n - 1].1,
        lateral_rmse: (lat_sq / nf).sqrt(),
        longitudinal_rmse: (lon_sq / nf).sqrt(),
        per_sample,
    })
}
