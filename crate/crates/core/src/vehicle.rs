//! Generation config: bounding box, extraction defaults and vehicles.
//!
//! The config is JSON. Every object rejects unknown keys, so a misspelled
//! parameter name fails loudly instead of silently taking its default.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::osm::BoundingBox;
use crate::world::ExtractionDefaults;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    /// Actuated Ackermann model exchanging data with the real vehicle.
    Twin,
    /// Follows the real vehicle's GPS position; no actuation.
    Shadow,
    /// A shadow that does not collide with other models.
    Ghost,
}

impl VehicleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleKind::Twin => "twin",
            VehicleKind::Shadow => "shadow",
            VehicleKind::Ghost => "ghost",
        }
    }
}

/// Spawn pose, either geodetic (projected with the world origin at emission
/// time) or already in the local frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Spawn {
    Geodetic {
        lat: f64,
        lon: f64,
        #[serde(default)]
        yaw: f64,
    },
    Local {
        x: f64,
        y: f64,
        #[serde(default)]
        yaw: f64,
    },
}

impl Default for Spawn {
    fn default() -> Self {
        Spawn::Local {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        }
    }
}

impl Spawn {
    pub fn yaw(&self) -> f64 {
        match *self {
            Spawn::Geodetic { yaw, .. } | Spawn::Local { yaw, .. } => yaw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Chassis {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for Chassis {
    fn default() -> Self {
        Self {
            length: 4.5,
            width: 1.8,
            height: 1.4,
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub name: String,
    pub kind: VehicleKind,
    #[serde(default = "VehicleSpec::default_wheelbase")]
    pub wheelbase: f64,
    #[serde(default = "VehicleSpec::default_track")]
    pub track: f64,
    #[serde(default = "VehicleSpec::default_wheel_radius")]
    pub wheel_radius: f64,
    #[serde(default = "VehicleSpec::default_max_steer_angle")]
    pub max_steer_angle: f64,
    #[serde(default)]
    pub chassis: Chassis,
    #[serde(default = "default_true")]
    pub gps: bool,
    #[serde(default)]
    pub spawn: Spawn,
}

impl VehicleSpec {
    fn default_wheelbase() -> f64 {
        2.7
    }
    fn default_track() -> f64 {
        1.5
    }
    fn default_wheel_radius() -> f64 {
        0.3
    }
    fn default_max_steer_angle() -> f64 {
        0.6
    }

    /// A spec with every optional field at its default.
    pub fn new(name: impl Into<String>, kind: VehicleKind) -> Self {
        Self {
            name: name.into(),
            kind,
            wheelbase: Self::default_wheelbase(),
            track: Self::default_track(),
            wheel_radius: Self::default_wheel_radius(),
            max_steer_angle: Self::default_max_steer_angle(),
            chassis: Chassis::default(),
            gps: true,
            spawn: Spawn::default(),
        }
    }

    /// Checks the spec invariants. `path` prefixes field names in errors.
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        let field = |f: &str| format!("{path}.{f}");
        if self.name.is_empty() {
            return Err(ConfigError::invalid(field("name"), "must not be empty"));
        }
        if !self
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(ConfigError::invalid(
                field("name"),
                "must match [A-Za-z0-9_]+",
            ));
        }
        for (name, value) in [
            ("wheelbase", self.wheelbase),
            ("track", self.track),
            ("wheel_radius", self.wheel_radius),
            ("chassis.length", self.chassis.length),
            ("chassis.width", self.chassis.width),
            ("chassis.height", self.chassis.height),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::invalid(
                    field(name),
                    "must be strictly positive",
                ));
            }
        }
        if !(self.max_steer_angle > 0.0 && self.max_steer_angle < FRAC_PI_2) {
            return Err(ConfigError::invalid(
                field("max_steer_angle"),
                "must be in (0, pi/2)",
            ));
        }
        if self.wheelbase >= self.chassis.length {
            return Err(ConfigError::invalid(
                field("wheelbase"),
                "must be shorter than chassis.length",
            ));
        }
        let finite = match self.spawn {
            Spawn::Geodetic { lat, lon, yaw } => {
                (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) && yaw.is_finite()
            }
            Spawn::Local { x, y, yaw } => x.is_finite() && y.is_finite() && yaw.is_finite(),
        };
        if !finite {
            return Err(ConfigError::invalid(
                field("spawn"),
                "coordinates out of range",
            ));
        }
        Ok(())
    }
}

fn default_sdf_version() -> String {
    "1.6".to_owned()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub bbox: BoundingBox,
    #[serde(default)]
    pub defaults: ExtractionDefaults,
    #[serde(default = "default_sdf_version")]
    pub sdf_version: String,
    #[serde(default)]
    pub vehicles: Vec<VehicleSpec>,
}

impl GenerationConfig {
    pub fn new(bbox: BoundingBox) -> Self {
        Self {
            bbox,
            defaults: ExtractionDefaults::default(),
            sdf_version: default_sdf_version(),
            vehicles: Vec::new(),
        }
    }

    pub fn vehicle(&self, name: &str) -> Option<&VehicleSpec> {
        self.vehicles.iter().find(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(f) = self.defaults.invalid_field() {
            return Err(ConfigError::invalid(
                format!("defaults.{f}"),
                "must be strictly positive",
            ));
        }
        let version_ok = !self.sdf_version.is_empty()
            && self
                .sdf_version
                .split('.')
                .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()));
        if !version_ok {
            return Err(ConfigError::invalid(
                "sdf_version",
                "must look like \"1.6\"",
            ));
        }
        let mut seen = HashSet::new();
        for (i, v) in self.vehicles.iter().enumerate() {
            let path = format!("vehicles[{i}]");
            v.validate(&path)?;
            if !seen.insert(v.name.as_str()) {
                return Err(ConfigError::invalid(
                    format!("{path}.name"),
                    format!("duplicate vehicle name {:?}", v.name),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a JSON generation config.
pub fn load_config(text: &str) -> Result<GenerationConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let config: GenerationConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::invalid(
            if path == "." {
                "<root>".to_owned()
            } else {
                path
            },
            e.into_inner().to_string(),
        )
    })?;
    config.validate()?;
    Ok(config)
}
