use std::collections::HashSet;
use std::fmt;

use crate::xml::{parse_tree, Element};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// XPath-like location, e.g. `/sdf/world[@name='w']/model[@name='a']/pose`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

fn step(parent: &str, el: &Element) -> String {
    match el.attr("name") {
        Some(name) => format!("{parent}/{}[@name='{name}']", el.name),
        None => format!("{parent}/{}", el.name),
    }
}

fn numbers(text: &str) -> Option<Vec<f64>> {
    text.split_whitespace()
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

/// Structural checks on an SDF world document. Violations are data; this
/// never fails.
pub fn validate_sdf(text: &str) -> ValidationReport {
    let mut report = ValidationReport::default();
    let root = match parse_tree(text) {
        Ok(r) => r,
        Err(e) => {
            report.push(
                format!("line {}, column {}", e.line, e.column),
                format!("malformed XML: {}", e.message),
            );
            return report;
        }
    };

    if root.name != "sdf" {
        report.push(format!("/{}", root.name), "root element must be <sdf>");
        return report;
    }
    match root.attr("version") {
        None => report.push("/sdf", "missing version attribute"),
        Some(v) if v.trim().is_empty() => report.push("/sdf", "empty version attribute"),
        Some(_) => {}
    }

    let worlds: Vec<&Element> = root.children_named("world").collect();
    if worlds.len() != 1 {
        report.push(
            "/sdf",
            format!("expected exactly one <world>, found {}", worlds.len()),
        );
    }
    for world in worlds {
        let path = step("/sdf", world);
        check_spherical(&mut report, &path, world);
        let mut names = HashSet::new();
        for model in world.children_named("model") {
            match model.attr("name") {
                None => report.push(step(&path, model), "model without a name"),
                Some(name) => {
                    if !names.insert(name) {
                        report.push(step(&path, model), format!("duplicate model name {name}"));
                    }
                }
            }
        }
        walk(&mut report, &path, world);
    }
    // Poses and polylines outside the world still count.
    for other in root.children.iter().filter(|c| c.name != "world") {
        walk(&mut report, "/sdf", other);
    }
    report
}

fn check_spherical(report: &mut ValidationReport, path: &str, world: &Element) {
    let Some(sc) = world.child("spherical_coordinates") else {
        report.push(path, "missing <spherical_coordinates>");
        return;
    };
    let sc_path = format!("{path}/spherical_coordinates");
    for key in ["latitude_deg", "longitude_deg"] {
        let ok = sc
            .child(key)
            .and_then(|e| e.text.trim().parse::<f64>().ok())
            .is_some_and(f64::is_finite);
        if !ok {
            report.push(&sc_path, format!("missing or non-numeric <{key}>"));
        }
    }
}

fn walk(report: &mut ValidationReport, parent: &str, el: &Element) {
    let path = step(parent, el);
    match el.name.as_str() {
        "pose" => match numbers(&el.text) {
            Some(v) if v.len() == 6 => {}
            _ => report.push(&path, "pose must contain 6 finite numbers"),
        },
        "polyline" => check_polyline(report, &path, el),
        _ => {}
    }
    for child in &el.children {
        walk(report, &path, child);
    }
}

fn check_polyline(report: &mut ValidationReport, path: &str, el: &Element) {
    let points: Vec<&Element> = el.children_named("point").collect();
    if points.len() < 3 {
        report.push(
            path,
            format!("polyline has {} points, needs at least 3", points.len()),
        );
    }
    for p in points {
        if !numbers(&p.text).is_some_and(|v| v.len() == 2) {
            report.push(
                format!("{path}/point"),
                "point must contain 2 finite numbers",
            );
        }
    }
    match el.child("height").map(|h| h.text.trim().parse::<f64>()) {
        Some(Ok(h)) if h.is_finite() && h > 0.0 => {}
        Some(Ok(_)) => report.push(format!("{path}/height"), "non-positive polyline height"),
        Some(Err(_)) => report.push(format!("{path}/height"), "non-numeric polyline height"),
        None => report.push(path, "polyline without <height>"),
    }
}
