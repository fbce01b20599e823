//! Equirectangular tangent-plane projection around a world origin.
//!
//! `x` points east and `y` points north, both in meters. The same origin is
//! written to the SDF `<spherical_coordinates>` element so that GPS replay in
//! the simulator agrees with the generated geometry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::osm::BoundingBox;

/// WGS84 equatorial radius in meters.
pub const EARTH_RADIUS: f64 = 6_378_137.0;

/// Latitude magnitude (degrees) at and above which an origin is rejected.
pub const MAX_ORIGIN_LAT: f64 = 89.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesyError {
    #[error("origin latitude {0} is too close to a pole (|lat| must be < 89)")]
    PolarOrigin(f64),
    #[error("origin longitude {0} is outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoOrigin {
    lat0: f64,
    lon0: f64,
}

impl GeoOrigin {
    pub fn new(lat0: f64, lon0: f64) -> Result<Self, GeodesyError> {
        if !lat0.is_finite() || !lon0.is_finite() {
            return Err(GeodesyError::NonFinite);
        }
        if lat0.abs() >= MAX_ORIGIN_LAT {
            return Err(GeodesyError::PolarOrigin(lat0));
        }
        if !(-180.0..=180.0).contains(&lon0) {
            return Err(GeodesyError::LongitudeOutOfRange(lon0));
        }
        Ok(Self { lat0, lon0 })
    }

    /// Origin at the center of `bbox`.
    pub fn of_bbox(bbox: &BoundingBox) -> Result<Self, GeodesyError> {
        Self::new(
            (bbox.min_lat() + bbox.max_lat()) / 2.0,
            (bbox.min_lon() + bbox.max_lon()) / 2.0,
        )
    }

    pub fn lat(&self) -> f64 {
        self.lat0
    }

    pub fn lon(&self) -> f64 {
        self.lon0
    }

    fn lon_scale(&self) -> f64 {
        EARTH_RADIUS * self.lat0.to_radians().cos()
    }

    pub fn project(&self, lat: f64, lon: f64) -> Result<LocalPoint, GeodesyError> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(GeodesyError::NonFinite);
        }
        Ok(LocalPoint {
            x: self.lon_scale() * (lon - self.lon0).to_radians(),
            y: EARTH_RADIUS * (lat - self.lat0).to_radians(),
        })
    }

    /// Inverse of [`GeoOrigin::project`]; returns `(lat, lon)` in degrees.
    pub fn unproject(&self, p: LocalPoint) -> Result<(f64, f64), GeodesyError> {
        if !p.is_finite() {
            return Err(GeodesyError::NonFinite);
        }
        let lat = self.lat0 + (p.y / EARTH_RADIUS).to_degrees();
        let lon = self.lon0 + (p.x / self.lon_scale()).to_degrees();
        Ok((lat, lon))
    }
}

/// Point in the local frame, meters east (`x`) and north (`y`) of the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
}

impl LocalPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &LocalPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}
