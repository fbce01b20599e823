use std::collections::btree_map::Entry;

use super::{OsmDocument, OsmError, OsmNode, OsmWay, ParsedOsm, Tags};
use crate::warning::Warning;
use crate::xml::{parse_tree, Element};

/// Parses OSM XML v0.6. Only `<node>` and `<way>` children of the root are
/// read; relations and anything else are skipped.
///
/// Defective elements (missing attributes, out-of-range coordinates,
/// duplicate ids, ways without refs) are dropped and reported as warnings.
pub fn parse_osm(xml_text: &str) -> Result<ParsedOsm, OsmError> {
    let root = parse_tree(xml_text).map_err(|e| OsmError::Xml {
        line: e.line,
        column: e.column,
        message: e.message,
    })?;

    let mut out = ParsedOsm::default();
    for el in &root.children {
        match el.name.as_str() {
            "node" => read_node(el, &mut out.document, &mut out.warnings),
            "way" => read_way(el, &mut out.document, &mut out.warnings),
            _ => {}
        }
    }
    Ok(out)
}

fn parse_attr<T: std::str::FromStr>(el: &Element, key: &str) -> Option<T> {
    el.attr(key).and_then(|v| v.trim().parse().ok())
}

fn read_node(el: &Element, doc: &mut OsmDocument, warnings: &mut Vec<Warning>) {
    let Some(id) = parse_attr::<i64>(el, "id") else {
        warnings.push(Warning::new("node without a valid id skipped"));
        return;
    };
    let (Some(lat), Some(lon)) = (parse_attr::<f64>(el, "lat"), parse_attr::<f64>(el, "lon"))
    else {
        warnings.push(Warning::new(format!(
            "node {id} skipped: missing or invalid lat/lon"
        )));
        return;
    };
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        warnings.push(Warning::new(format!(
            "node {id} skipped: coordinates ({lat}, {lon}) out of range"
        )));
        return;
    }
    match doc.nodes.entry(id) {
        Entry::Occupied(_) => warnings.push(Warning::new(format!(
            "duplicate node id {id}; keeping the first"
        ))),
        Entry::Vacant(slot) => {
            slot.insert(OsmNode { id, lat, lon });
        }
    }
}

fn read_way(el: &Element, doc: &mut OsmDocument, warnings: &mut Vec<Warning>) {
    let Some(id) = parse_attr::<i64>(el, "id") else {
        warnings.push(Warning::new("way without a valid id skipped"));
        return;
    };
    let mut node_refs = Vec::new();
    let mut tags = Tags::new();
    for child in &el.children {
        match child.name.as_str() {
            "nd" => match parse_attr::<i64>(child, "ref") {
                Some(r) => node_refs.push(r),
                None => warnings.push(Warning::new(format!(
                    "way {id}: <nd> without a valid ref ignored"
                ))),
            },
            "tag" => {
                let (Some(k), Some(v)) = (child.attr("k"), child.attr("v")) else {
                    warnings.push(Warning::new(format!("way {id}: <tag> without k/v ignored")));
                    continue;
                };
                if tags.contains_key(k) {
                    warnings.push(Warning::new(format!(
                        "way {id}: duplicate tag key {k:?}; keeping the first"
                    )));
                } else {
                    tags.insert(k.to_owned(), v.to_owned());
                }
            }
            _ => {}
        }
    }
    if node_refs.is_empty() {
        warnings.push(Warning::new(format!("way {id} skipped: no node refs")));
        return;
    }
    match doc.ways.entry(id) {
        Entry::Occupied(_) => warnings.push(Warning::new(format!(
            "duplicate way id {id}; keeping the first"
        ))),
        Entry::Vacant(slot) => {
            slot.insert(OsmWay {
                id,
                node_refs,
                tags,
            });
        }
    }
}
