//! OpenStreetMap XML ingestion: nodes, ways and their tags.

mod overpass;
mod parse;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use overpass::{fetch_overpass, overpass_query};
pub use parse::parse_osm;

use crate::warning::Warning;

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid bounding box: {0}")]
    InvalidBbox(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("remote error: HTTP {status}: {excerpt}")]
    Remote { status: u16, excerpt: String },
    #[error("response is not OSM XML: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OsmNode {
    pub id: i64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: Tags,
}

impl OsmWay {
    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.get(key).map(String::as_str)
    }

    pub fn is_closed(&self) -> bool {
        self.node_refs.len() > 1 && self.node_refs.first() == self.node_refs.last()
    }
}

/// Parsed map primitives, indexed by id. Iteration order is ascending id.
///
/// Ways keep node refs that do not resolve to a node in the document; those
/// are reported when geometry is extracted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OsmDocument {
    pub nodes: BTreeMap<i64, OsmNode>,
    pub ways: BTreeMap<i64, OsmWay>,
}

impl OsmDocument {
    pub fn node(&self, id: i64) -> Option<&OsmNode> {
        self.nodes.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.ways.is_empty()
    }

    /// Keeps every node inside `bbox`, every way with at least one node
    /// inside, and every node those ways reference. Ways are not clipped.
    pub fn filter_bbox(&self, bbox: &BoundingBox) -> OsmDocument {
        let inside: BTreeSet<i64> = self
            .nodes
            .values()
            .filter(|n| bbox.contains(n.lat, n.lon))
            .map(|n| n.id)
            .collect();

        let ways: BTreeMap<i64, OsmWay> = self
            .ways
            .values()
            .filter(|w| w.node_refs.iter().any(|r| inside.contains(r)))
            .map(|w| (w.id, w.clone()))
            .collect();

        let mut keep = inside;
        keep.extend(ways.values().flat_map(|w| w.node_refs.iter().copied()));
        let nodes = keep
            .into_iter()
            .filter_map(|id| self.nodes.get(&id).map(|n| (id, *n)))
            .collect();

        OsmDocument { nodes, ways }
    }
}

/// Parse result with the warnings accumulated along the way.
#[derive(Clone, Debug, Default)]
pub struct ParsedOsm {
    pub document: OsmDocument,
    pub warnings: Vec<Warning>,
}

/// Geodetic bounding box. Boxes crossing the antimeridian are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBbox", into = "RawBbox")]
pub struct BoundingBox {
    min_lat: f64,
    min_lon: f64,
    max_lat: f64,
    max_lon: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBbox {
    min_lat: f64,
    min_lon: f64,
    max_lat: f64,
    max_lon: f64,
}

impl TryFrom<RawBbox> for BoundingBox {
    type Error = OsmError;

    fn try_from(r: RawBbox) -> Result<Self, Self::Error> {
        BoundingBox::new(r.min_lat, r.min_lon, r.max_lat, r.max_lon)
    }
}

impl From<BoundingBox> for RawBbox {
    fn from(b: BoundingBox) -> Self {
        RawBbox {
            min_lat: b.min_lat,
            min_lon: b.min_lon,
            max_lat: b.max_lat,
            max_lon: b.max_lon,
        }
    }
}

impl BoundingBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, OsmError> {
        let all = [min_lat, min_lon, max_lat, max_lon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(OsmError::InvalidBbox("non-finite coordinate".into()));
        }
        if !(-90.0..=90.0).contains(&min_lat) || !(-90.0..=90.0).contains(&max_lat) {
            return Err(OsmError::InvalidBbox("latitude outside [-90, 90]".into()));
        }
        if !(-180.0..=180.0).contains(&min_lon) || !(-180.0..=180.0).contains(&max_lon) {
            return Err(OsmError::InvalidBbox(
                "longitude outside [-180, 180]".into(),
            ));
        }
        if min_lat >= max_lat {
            return Err(OsmError::InvalidBbox(format!(
                "min_lat {min_lat} must be below max_lat {max_lat}"
            )));
        }
        if min_lon >= max_lon {
            return Err(OsmError::InvalidBbox(format!(
                "min_lon {min_lon} must be below max_lon {max_lon} (antimeridian crossing is not supported)"
            )));
        }
        Ok(Self {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        })
    }

    pub fn min_lat(&self) -> f64 {
        self.min_lat
    }
    pub fn min_lon(&self) -> f64 {
        self.min_lon
    }
    pub fn max_lat(&self) -> f64 {
        self.max_lat
    }
    pub fn max_lon(&self) -> f64 {
        self.max_lon
    }

    /// Boundary-inclusive membership test.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(nodes: &[(i64, f64, f64)], ways: &[(i64, &[i64])]) -> OsmDocument {
        OsmDocument {
            nodes: nodes
                .iter()
                .map(|&(id, lat, lon)| (id, OsmNode { id, lat, lon }))
                .collect(),
            ways: ways
                .iter()
                .map(|&(id, refs)| {
                    (
                        id,
                        OsmWay {
                            id,
                            node_refs: refs.to_vec(),
                            tags: Tags::new(),
                        },
                    )
                })
                .collect(),
        }
    }

    fn unit_box() -> BoundingBox {
        BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn bbox_rejects_inverted_and_antimeridian() {
        assert!(BoundingBox::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 179.0, 1.0, -179.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(-91.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bbox_is_boundary_inclusive() {
        let b = unit_box();
        assert!(b.contains(0.0, 0.0));
        assert!(b.contains(1.0, 1.0));
        assert!(!b.contains(1.0000001, 0.5));
    }

    #[test]
    fn filter_identity_when_everything_inside() {
        let d = doc(&[(1, 0.1, 0.1), (2, 0.2, 0.2)], &[(10, &[1, 2])]);
        assert_eq!(d.filter_bbox(&unit_box()), d);
    }

    #[test]
    fn filter_empty_when_nothing_inside() {
        let d = doc(&[(1, 5.0, 5.0), (2, 6.0, 6.0)], &[(10, &[1, 2])]);
        assert!(d.filter_bbox(&unit_box()).is_empty());
    }

    #[test]
    fn partially_inside_way_is_kept_whole() {
        // Only node 1 lies inside; nodes 2..4 are outside but referenced by way 10.
        let d = doc(
            &[
                (1, 0.5, 0.5),
                (2, 2.0, 0.5),
                (3, 2.0, 2.0),
                (4, 0.5, 2.0),
                (5, 3.0, 3.0),
            ],
            &[(10, &[1, 2, 3, 4]), (11, &[5, 3])],
        );
        let f = d.filter_bbox(&unit_box());
        assert_eq!(f.ways.keys().copied().collect::<Vec<_>>(), vec![10]);
        assert_eq!(
            f.nodes.keys().copied().collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
        assert_eq!(f.ways[&10].node_refs, vec![1, 2, 3, 4]);
    }

    #[test]
    fn filter_keeps_dangling_refs() {
        let d = doc(&[(1, 0.5, 0.5)], &[(10, &[1, 99])]);
        let f = d.filter_bbox(&unit_box());
        assert_eq!(f.ways[&10].node_refs, vec![1, 99]);
        assert_eq!(f.nodes.len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_doc() -> impl Strategy<Value = OsmDocument> {
            (
                prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..30),
                prop::collection::vec(prop::collection::vec(0usize..40, 1..6), 0..10),
            )
                .prop_map(|(pts, ways)| {
                    let nodes: Vec<(i64, f64, f64)> = pts
                        .iter()
                        .enumerate()
                        .map(|(i, &(lat, lon))| (i as i64, lat, lon))
                        .collect();
                    let ways: Vec<(i64, Vec<i64>)> = ways
                        .into_iter()
                        .enumerate()
                        .map(|(i, r)| (1000 + i as i64, r.into_iter().map(|x| x as i64).collect()))
                        .collect();
                    let way_refs: Vec<(i64, &[i64])> =
                        ways.iter().map(|(id, r)| (*id, r.as_slice())).collect();
                    doc(&nodes, &way_refs)
                })
        }

        fn arb_bbox() -> impl Strategy<Value = (BoundingBox, BoundingBox)> {
            (
                0.0f64..1.0,
                0.0f64..1.0,
                0.01f64..1.0,
                0.01f64..1.0,
                0.0f64..0.5,
            )
                .prop_map(|(lat, lon, h, w, grow)| {
                    let small = BoundingBox::new(lat, lon, lat + h, lon + w).unwrap();
                    let big =
                        BoundingBox::new(lat - grow, lon - grow, lat + h + grow, lon + w + grow)
                            .unwrap();
                    (small, big)
                })
        }

        proptest! {
            #[test]
            fn filter_is_idempotent(d in arb_doc(), (b, _) in arb_bbox()) {
                let once = d.filter_bbox(&b);
                prop_assert_eq!(once.filter_bbox(&b), once);
            }

            #[test]
            fn filter_is_monotone(d in arb_doc(), (small, big) in arb_bbox()) {
                let s = d.filter_bbox(&small);
                let l = d.filter_bbox(&big);
                prop_assert!(s.nodes.keys().all(|k| l.nodes.contains_key(k)));
                prop_assert!(s.ways.keys().all(|k| l.ways.contains_key(k)));
            }

            #[test]
            fn filter_matches_brute_force(d in arb_doc(), (b, _) in arb_bbox()) {
                let f = d.filter_bbox(&b);
                for w in d.ways.values() {
                    let any_inside = w.node_refs.iter().any(|r| {
                        d.nodes.get(r).map(|n| b.contains(n.lat, n.lon)).unwrap_or(false)
                    });
                    prop_assert_eq!(f.ways.contains_key(&w.id), any_inside);
                }
                for n in d.nodes.values() {
                    let wanted = b.contains(n.lat, n.lon)
                        || f.ways.values().any(|w| w.node_refs.contains(&n.id));
                    prop_assert_eq!(f.nodes.contains_key(&n.id), wanted);
                }
            }
        }
    }
}
