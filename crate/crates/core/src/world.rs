//! Buildings and roads in the local metric frame.

use serde::{Deserialize, Serialize};

use crate::geodesy::{GeoOrigin, LocalPoint};
use crate::osm::{OsmDocument, OsmWay, Tags};
use crate::warning::Warning;

/// Points closer than this are treated as the same vertex.
pub const MIN_SEPARATION: f64 = 1e-6;

/// `highway` values extracted as roads.
pub const DRIVABLE_HIGHWAYS: &[&str] = &[
    "motorway",
    "trunk",
    "primary",
    "secondary",
    "tertiary",
    "unclassified",
    "residential",
    "service",
    "living_street",
    "motorway_link",
    "trunk_link",
    "primary_link",
    "secondary_link",
    "tertiary_link",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Building {
    pub id: i64,
    /// Closed ring stored without the repeated closing vertex.
    pub footprint: Vec<LocalPoint>,
    pub height: f64,
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Road {
    pub id: i64,
    pub centerline: Vec<LocalPoint>,
    pub width: f64,
    pub name: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionDefaults {
    pub default_building_height: f64,
    pub meters_per_level: f64,
    pub road_width: f64,
    pub road_thickness: f64,
}

impl Default for ExtractionDefaults {
    fn default() -> Self {
        Self {
            default_building_height: 10.0,
            meters_per_level: 3.0,
            road_width: 7.0,
            road_thickness: 0.1,
        }
    }
}

impl ExtractionDefaults {
    /// Returns the name of the first field that is not strictly positive.
    pub fn invalid_field(&self) -> Option<&'static str> {
        [
            ("default_building_height", self.default_building_height),
            ("meters_per_level", self.meters_per_level),
            ("road_width", self.road_width),
            ("road_thickness", self.road_thickness),
        ]
        .into_iter()
        .find(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(name, _)| name)
    }
}

fn positive_number(raw: &str) -> Option<f64> {
    let s = raw.trim();
    let s = s.strip_suffix('m').map(str::trim_end).unwrap_or(s);
    s.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0)
}

/// `height` tag (optionally suffixed with " m"), else `building:levels`
/// times the level height, else the default height.
pub fn estimate_height(tags: &Tags, defaults: &ExtractionDefaults) -> f64 {
    if let Some(h) = tags.get("height").and_then(|v| positive_number(v)) {
        return h;
    }
    if let Some(levels) = tags.get("building:levels").and_then(|v| positive_number(v)) {
        return levels * defaults.meters_per_level;
    }
    defaults.default_building_height
}

pub fn is_building(way: &OsmWay) -> bool {
    way.tag("building").is_some_and(|v| v != "no")
}

pub fn is_drivable(way: &OsmWay) -> bool {
    way.tag("highway")
        .is_some_and(|v| DRIVABLE_HIGHWAYS.contains(&v))
}

/// Projects every node of `way`, or reports the first unresolved ref.
fn resolve(
    doc: &OsmDocument,
    origin: &GeoOrigin,
    way: &OsmWay,
) -> Result<Vec<LocalPoint>, Warning> {
    way.node_refs
        .iter()
        .map(|r| {
            let node = doc.node(*r).ok_or_else(|| {
                Warning::new(format!("way {} skipped: node {r} is missing", way.id))
            })?;
            origin
                .project(node.lat, node.lon)
                .map_err(|e| Warning::new(format!("way {} skipped: {e}", way.id)))
        })
        .collect()
}

fn dedup_consecutive(points: Vec<LocalPoint>) -> Vec<LocalPoint> {
    let mut out: Vec<LocalPoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|q| q.distance(&p) > MIN_SEPARATION) {
            out.push(p);
        }
    }
    out
}

fn count_distinct(points: &[LocalPoint]) -> usize {
    let mut distinct: Vec<LocalPoint> = Vec::new();
    for p in points {
        if distinct.iter().all(|q| q.distance(p) > MIN_SEPARATION) {
            distinct.push(*p);
        }
    }
    distinct.len()
}

/// One [`Building`] per closed way tagged `building` (value other than
/// `no`) with at least three distinct vertices, in ascending way id order.
pub fn extract_buildings(
    doc: &OsmDocument,
    origin: &GeoOrigin,
    defaults: &ExtractionDefaults,
) -> (Vec<Building>, Vec<Warning>) {
    let mut buildings = Vec::new();
    let mut warnings = Vec::new();
    for way in doc.ways.values().filter(|w| is_building(w)) {
        if !way.is_closed() {
            warnings.push(Warning::new(format!(
                "building way {} skipped: not closed",
                way.id
            )));
            continue;
        }
        let mut ring = match resolve(doc, origin, way) {
            Ok(r) => dedup_consecutive(r),
            Err(w) => {
                warnings.push(w);
                continue;
            }
        };
        while ring.len() > 1 && ring[0].distance(ring.last().unwrap()) <= MIN_SEPARATION {
            ring.pop();
        }
        if count_distinct(&ring) < 3 {
            warnings.push(Warning::new(format!(
                "building way {} skipped: fewer than 3 distinct vertices",
                way.id
            )));
            continue;
        }
        buildings.push(Building {
            id: way.id,
            footprint: ring,
            height: estimate_height(&way.tags, defaults),
            name: way.tag("name").map(str::to_owned),
        });
    }
    (buildings, warnings)
}

/// One [`Road`] per way with a drivable `highway` value, in ascending way id
/// order. Every road gets the configured fixed width.
pub fn extract_roads(
    doc: &OsmDocument,
    origin: &GeoOrigin,
    defaults: &ExtractionDefaults,
) -> (Vec<Road>, Vec<Warning>) {
    let mut roads = Vec::new();
    let mut warnings = Vec::new();
    for way in doc.ways.values().filter(|w| is_drivable(w)) {
        let centerline = match resolve(doc, origin, way) {
            Ok(r) => dedup_consecutive(r),
            Err(w) => {
                warnings.push(w);
                continue;
            }
        };
        if centerline.len() < 2 {
            warnings.push(Warning::new(format!(
                "road way {} skipped: fewer than 2 distinct points",
                way.id
            )));
            continue;
        }
        roads.push(Road {
            id: way.id,
            centerline,
            width: defaults.road_width,
            name: way.tag("name").map(str::to_owned),
        });
    }
    (roads, warnings)
}
