use super::kinematics::ControlSample;
use super::trajectory::{Trajectory, TrajectorySample};
use super::ReplayError;
use crate::geodesy::GeoOrigin;

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn header(rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<String>, ReplayError> {
    Ok(rdr
        .headers()
        .map_err(|e| ReplayError::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect())
}

fn number(record: &csv::StringRecord, col: usize, line: u64) -> Result<f64, ReplayError> {
    let raw = record.get(col).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            ReplayError::Csv(format!(
                "line {line}: column {}: invalid number {raw:?}",
                col + 1
            ))
        })
}

/// Reads a trajectory CSV. The header selects the variant:
/// `t,x,y[,yaw]` (local meters) or `t,lat,lon[,yaw]` (geodetic, projected
/// with `origin`). An empty yaw cell means "no yaw".
pub fn read_trajectory_csv(
    text: &str,
    origin: Option<&GeoOrigin>,
) -> Result<Trajectory, ReplayError> {
    let mut rdr = reader(text);
    let header = header(&mut rdr)?;
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let (geodetic, has_yaw) = match cols.as_slice() {
        ["t", "x", "y"] => (false, false),
        ["t", "x", "y", "yaw"] => (false, true),
        ["t", "lat", "lon"] => (true, false),
        ["t", "lat", "lon", "yaw"] => (true, true),
        _ => {
            return Err(ReplayError::Csv(format!(
                "unrecognized trajectory header {:?}; expected t,x,y[,yaw] or t,lat,lon[,yaw]",
                header.join(",")
            )))
        }
    };
    if geodetic && origin.is_none() {
        return Err(ReplayError::Csv(
            "geodetic trajectory needs a world origin".into(),
        ));
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| ReplayError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let t = number(&record, 0, line)?;
        let (a, b) = (number(&record, 1, line)?, number(&record, 2, line)?);
        let (x, y) = match origin.filter(|_| geodetic) {
            Some(o) => {
                let p = o
                    .project(a, b)
                    .map_err(|e| ReplayError::Csv(format!("line {line}: {e}")))?;
                (p.x, p.y)
            }
            None => (a, b),
        };
        let yaw = match record.get(3) {
            Some(raw) if has_yaw && !raw.is_empty() => Some(number(&record, 3, line)?),
            _ => None,
        };
        samples.push(TrajectorySample::new(t, x, y, yaw));
    }
    Trajectory::new(samples)
}

/// Reads a controls CSV with header `t,speed,steer`.
pub fn read_controls_csv(text: &str) -> Result<Vec<ControlSample>, ReplayError> {
    let mut rdr = reader(text);
    let header = header(&mut rdr)?;
    if header != ["t", "speed", "steer"] {
        return Err(ReplayError::Csv(format!(
            "unrecognized controls header {:?}; expected t,speed,steer",
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| ReplayError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        out.push(ControlSample {
            t: number(&record, 0, line)?,
            speed: number(&record, 1, line)?,
            steer: number(&record, 2, line)?,
        });
    }
    if out.is_empty() {
        return Err(ReplayError::Empty);
    }
    Ok(out)
}
