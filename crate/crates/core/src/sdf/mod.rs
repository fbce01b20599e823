//! SDFormat world emission and structural validation.

mod emit;
mod number;
mod validate;
mod writer;

use thiserror::Error;

pub use emit::{
    emit_building, emit_road, emit_vehicle, emit_world, spawn_local, GROUND_PLANE, WORLD_NAME,
};
pub use number::fmt_num;
pub use validate::{validate_sdf, ValidationReport, Violation};

use crate::geodesy::GeoOrigin;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdfError {
    #[error("duplicate model name {0}")]
    DuplicateModelName(String),
    #[error("cannot place vehicle: {0}")]
    Spawn(String),
}

/// One rendered `<model>` element, indented from column zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelFragment {
    pub name: String,
    pub xml: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdfWorld {
    pub version: String,
    pub origin: GeoOrigin,
    pub building_models: Vec<ModelFragment>,
    pub road_models: Vec<ModelFragment>,
    pub vehicle_models: Vec<ModelFragment>,
    pub text: String,
}

impl SdfWorld {
    /// Models other than the ground plane.
    pub fn model_count(&self) -> usize {
        self.building_models.len() + self.road_models.len() + self.vehicle_models.len()
    }
}
