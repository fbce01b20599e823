use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use super::number::fmt_num;
use super::writer::XmlOut;
use super::{ModelFragment, SdfError, SdfWorld};
use crate::geodesy::{GeoOrigin, LocalPoint};
use crate::osm::BoundingBox;
use crate::vehicle::{GenerationConfig, Spawn, VehicleKind, VehicleSpec};
use crate::warning::Warning;
use crate::world::{Building, Road};

pub const WORLD_NAME: &str = "generated";
pub const GROUND_PLANE: &str = "ground_plane";

const BUILDING_COLOR: &str = "0.75 0.72 0.68 1";
const ROAD_COLOR: &str = "0.2 0.2 0.2 1";
const CHASSIS_COLOR: &str = "0.1 0.4 0.8 1";
const WHEEL_COLOR: &str = "0.05 0.05 0.05 1";
const GROUND_COLOR: &str = "0.5 0.6 0.45 1";

const WHEEL_WIDTH: f64 = 0.2;
const CHASSIS_MASS: f64 = 1300.0;
const WHEEL_MASS: f64 = 11.0;
const HUB_MASS: f64 = 1.0;
/// Effectively unlimited revolute joint range.
const FREE_SPIN: f64 = 1e16;
const GPS_UPDATE_RATE: f64 = 10.0;

pub(crate) fn pose(values: [f64; 6]) -> String {
    values.map(fmt_num).join(" ")
}

fn material(out: &mut XmlOut, color: &str) {
    out.open("material", &[])
        .leaf("ambient", color)
        .leaf("diffuse", color)
        .close("material");
}

fn box_inertial(out: &mut XmlOut, mass: f64, sx: f64, sy: f64, sz: f64) {
    let k = mass / 12.0;
    out.open("inertial", &[])
        .leaf("mass", &fmt_num(mass))
        .open("inertia", &[])
        .leaf("ixx", &fmt_num(k * (sy * sy + sz * sz)))
        .leaf("ixy", "0")
        .leaf("ixz", "0")
        .leaf("iyy", &fmt_num(k * (sx * sx + sz * sz)))
        .leaf("iyz", "0")
        .leaf("izz", &fmt_num(k * (sx * sx + sy * sy)))
        .close("inertia")
        .close("inertial");
}

fn cylinder_inertial(out: &mut XmlOut, mass: f64, radius: f64, length: f64) {
    let axial = mass * radius * radius / 2.0;
    let radial = mass * (3.0 * radius * radius + length * length) / 12.0;
    out.open("inertial", &[])
        .leaf("mass", &fmt_num(mass))
        .open("inertia", &[])
        .leaf("ixx", &fmt_num(radial))
        .leaf("ixy", "0")
        .leaf("ixz", "0")
        .leaf("iyy", &fmt_num(radial))
        .leaf("iyz", "0")
        .leaf("izz", &fmt_num(axial))
        .close("inertia")
        .close("inertial");
}

fn polyline(out: &mut XmlOut, footprint: &[LocalPoint], height: f64) {
    out.open("geometry", &[]).open("polyline", &[]);
    for p in footprint {
        out.leaf("point", &format!("{} {}", fmt_num(p.x), fmt_num(p.y)));
    }
    out.leaf("height", &fmt_num(height))
        .close("polyline")
        .close("geometry");
}

fn box_geometry(out: &mut XmlOut, sx: f64, sy: f64, sz: f64) {
    out.open("geometry", &[])
        .open("box", &[])
        .leaf(
            "size",
            &format!("{} {} {}", fmt_num(sx), fmt_num(sy), fmt_num(sz)),
        )
        .close("box")
        .close("geometry");
}

fn cylinder_geometry(out: &mut XmlOut, radius: f64, length: f64) {
    out.open("geometry", &[])
        .open("cylinder", &[])
        .leaf("radius", &fmt_num(radius))
        .leaf("length", &fmt_num(length))
        .close("cylinder")
        .close("geometry");
}

/// Static model `building_<id>` extruding the footprint polyline to the
/// building height.
pub fn emit_building(b: &Building) -> ModelFragment {
    let name = format!("building_{}", b.id);
    let mut out = XmlOut::new();
    out.open("model", &[("name", &name)])
        .leaf("static", "true")
        .open("link", &[("name", "link")])
        .open("collision", &[("name", "collision")]);
    polyline(&mut out, &b.footprint, b.height);
    out.close("collision").open("visual", &[("name", "visual")]);
    polyline(&mut out, &b.footprint, b.height);
    material(&mut out, BUILDING_COLOR);
    out.close("visual").close("link").close("model");
    ModelFragment {
        name,
        xml: out.finish(),
    }
}

/// Static model `road_<id>` with one thin box link per centerline segment.
pub fn emit_road(r: &Road, thickness: f64) -> ModelFragment {
    let name = format!("road_{}", r.id);
    let mut out = XmlOut::new();
    out.open("model", &[("name", &name)]).leaf("static", "true");
    for (i, seg) in r.centerline.windows(2).enumerate() {
        let (a, b) = (seg[0], seg[1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let length = dx.hypot(dy);
        let yaw = dy.atan2(dx);
        let link = format!("segment_{i}");
        out.open("link", &[("name", &link)]).leaf(
            "pose",
            &pose([
                (a.x + b.x) / 2.0,
                (a.y + b.y) / 2.0,
                thickness / 2.0,
                0.0,
                0.0,
                yaw,
            ]),
        );
        out.open("collision", &[("name", "collision")]);
        box_geometry(&mut out, length, r.width, thickness);
        out.close("collision").open("visual", &[("name", "visual")]);
        box_geometry(&mut out, length, r.width, thickness);
        material(&mut out, ROAD_COLOR);
        out.close("visual").close("link");
    }
    out.close("model");
    ModelFragment {
        name,
        xml: out.finish(),
    }
}

struct Wheel {
    prefix: &'static str,
    front: bool,
    x: f64,
    y: f64,
}

fn wheels(spec: &VehicleSpec) -> [Wheel; 4] {
    let (hx, hy) = (spec.wheelbase / 2.0, spec.track / 2.0);
    [
        Wheel {
            prefix: "front_left",
            front: true,
            x: hx,
            y: hy,
        },
        Wheel {
            prefix: "front_right",
            front: true,
            x: hx,
            y: -hy,
        },
        Wheel {
            prefix: "rear_left",
            front: false,
            x: -hx,
            y: hy,
        },
        Wheel {
            prefix: "rear_right",
            front: false,
            x: -hx,
            y: -hy,
        },
    ]
}

/// Spawn pose in the local frame as `(x, y, yaw)`.
pub fn spawn_local(spawn: &Spawn, origin: &GeoOrigin) -> Result<(f64, f64, f64), SdfError> {
    match *spawn {
        Spawn::Local { x, y, yaw } => Ok((x, y, yaw)),
        Spawn::Geodetic { lat, lon, yaw } => {
            let p = origin
                .project(lat, lon)
                .map_err(|e| SdfError::Spawn(e.to_string()))?;
            Ok((p.x, p.y, yaw))
        }
    }
}

fn spawn_inside(spawn: &Spawn, local: (f64, f64), origin: &GeoOrigin, bbox: &BoundingBox) -> bool {
    match *spawn {
        Spawn::Geodetic { lat, lon, .. } => bbox.contains(lat, lon),
        Spawn::Local { .. } => {
            let (Ok(lo), Ok(hi)) = (
                origin.project(bbox.min_lat(), bbox.min_lon()),
                origin.project(bbox.max_lat(), bbox.max_lon()),
            ) else {
                return false;
            };
            (lo.x..=hi.x).contains(&local.0) && (lo.y..=hi.y).contains(&local.1)
        }
    }
}

/// Vehicle model named after the spec.
///
/// All kinds share a chassis box link and four cylinder wheel links. A twin
/// adds steering hubs, revolute steer and spin joints and the Ackermann
/// drive plugin. Shadows and ghosts have no joints; their links are
/// kinematic so that an external pose stream moves them as one body. Ghosts
/// carry no collision elements.
pub fn emit_vehicle(
    spec: &VehicleSpec,
    origin: &GeoOrigin,
    bbox: &BoundingBox,
) -> Result<(ModelFragment, Vec<Warning>), SdfError> {
    let mut warnings = Vec::new();
    let (x, y, yaw) = spawn_local(&spec.spawn, origin)?;
    if !spawn_inside(&spec.spawn, (x, y), origin, bbox) {
        warnings.push(Warning::new(format!(
            "vehicle {} spawns outside the bounding box",
            spec.name
        )));
    }

    let twin = spec.kind == VehicleKind::Twin;
    let collide = spec.kind != VehicleKind::Ghost;
    let r = spec.wheel_radius;
    let c = spec.chassis;

    let mut out = XmlOut::new();
    out.open("model", &[("name", &spec.name)])
        .leaf("pose", &pose([x, y, 0.0, 0.0, 0.0, yaw]));

    out.open("link", &[("name", "chassis")])
        .leaf("pose", &pose([0.0, 0.0, r + c.height / 2.0, 0.0, 0.0, 0.0]));
    if !twin {
        out.leaf("kinematic", "true");
    }
    box_inertial(&mut out, CHASSIS_MASS, c.length, c.width, c.height);
    if collide {
        out.open("collision", &[("name", "collision")]);
        box_geometry(&mut out, c.length, c.width, c.height);
        out.close("collision");
    }
    out.open("visual", &[("name", "visual")]);
    box_geometry(&mut out, c.length, c.width, c.height);
    material(&mut out, CHASSIS_COLOR);
    out.close("visual");
    if spec.gps {
        out.open("sensor", &[("name", "gps"), ("type", "gps")])
            .leaf("always_on", "true")
            .leaf("update_rate", &fmt_num(GPS_UPDATE_RATE))
            .leaf("pose", &pose([0.0; 6]))
            .close("sensor");
    }
    out.close("link");

    let wheels = wheels(spec);
    for w in &wheels {
        if twin && w.front {
            out.open("link", &[("name", &format!("{}_steering_hub", w.prefix))])
                .leaf("pose", &pose([w.x, w.y, r, 0.0, 0.0, 0.0]));
            box_inertial(&mut out, HUB_MASS, 0.1, 0.1, 0.1);
            out.close("link");
        }
        out.open("link", &[("name", &format!("{}_wheel", w.prefix))])
            .leaf("pose", &pose([w.x, w.y, r, FRAC_PI_2, 0.0, 0.0]));
        if !twin {
            out.leaf("kinematic", "true");
        }
        cylinder_inertial(&mut out, WHEEL_MASS, r, WHEEL_WIDTH);
        if collide {
            out.open("collision", &[("name", "collision")]);
            cylinder_geometry(&mut out, r, WHEEL_WIDTH);
            out.close("collision");
        }
        out.open("visual", &[("name", "visual")]);
        cylinder_geometry(&mut out, r, WHEEL_WIDTH);
        material(&mut out, WHEEL_COLOR);
        out.close("visual").close("link");
    }

    if twin {
        let steer = fmt_num(spec.max_steer_angle);
        let neg_steer = fmt_num(-spec.max_steer_angle);
        for w in &wheels {
            let wheel = format!("{}_wheel", w.prefix);
            if w.front {
                let hub = format!("{}_steering_hub", w.prefix);
                revolute(
                    &mut out,
                    &format!("{}_steer_joint", w.prefix),
                    "chassis",
                    &hub,
                    "0 0 1",
                    (&neg_steer, &steer),
                );
                revolute(
                    &mut out,
                    &format!("{}_wheel_joint", w.prefix),
                    &hub,
                    &wheel,
                    "0 1 0",
                    (&fmt_num(-FREE_SPIN), &fmt_num(FREE_SPIN)),
                );
            } else {
                revolute(
                    &mut out,
                    &format!("{}_wheel_joint", w.prefix),
                    "chassis",
                    &wheel,
                    "0 1 0",
                    (&fmt_num(-FREE_SPIN), &fmt_num(FREE_SPIN)),
                );
            }
        }
        let plugin_name = format!("{}_ackermann_drive", spec.name);
        out.open(
            "plugin",
            &[
                ("name", &plugin_name),
                ("filename", "libgazebo_ros_ackermann_drive.so"),
            ],
        )
        .leaf("front_left_joint", "front_left_wheel_joint")
        .leaf("front_right_joint", "front_right_wheel_joint")
        .leaf("rear_left_joint", "rear_left_wheel_joint")
        .leaf("rear_right_joint", "rear_right_wheel_joint")
        .leaf("left_steering_joint", "front_left_steer_joint")
        .leaf("right_steering_joint", "front_right_steer_joint")
        .leaf("wheelbase", &fmt_num(spec.wheelbase))
        .leaf("track", &fmt_num(spec.track))
        .leaf("wheel_radius", &fmt_num(spec.wheel_radius))
        .leaf("max_steer", &fmt_num(spec.max_steer_angle))
        .close("plugin");
    }
    out.close("model");

    Ok((
        ModelFragment {
            name: spec.name.clone(),
            xml: out.finish(),
        },
        warnings,
    ))
}

fn revolute(
    out: &mut XmlOut,
    name: &str,
    parent: &str,
    child: &str,
    axis: &str,
    limit: (&str, &str),
) {
    out.open("joint", &[("name", name), ("type", "revolute")])
        .leaf("parent", parent)
        .leaf("child", child)
        .open("axis", &[])
        .leaf("xyz", axis)
        .leaf("use_parent_model_frame", "true")
        .open("limit", &[])
        .leaf("lower", limit.0)
        .leaf("upper", limit.1)
        .close("limit")
        .close("axis")
        .close("joint");
}

fn ground_plane(size: f64) -> String {
    let size = format!("{} {}", fmt_num(size), fmt_num(size));
    let mut out = XmlOut::new();
    out.open("model", &[("name", GROUND_PLANE)])
        .leaf("static", "true")
        .open("link", &[("name", "link")])
        .open("collision", &[("name", "collision")])
        .open("geometry", &[])
        .open("plane", &[])
        .leaf("normal", "0 0 1")
        .leaf("size", &size)
        .close("plane")
        .close("geometry")
        .close("collision")
        .open("visual", &[("name", "visual")])
        .open("geometry", &[])
        .open("plane", &[])
        .leaf("normal", "0 0 1")
        .leaf("size", &size)
        .close("plane")
        .close("geometry");
    material(&mut out, GROUND_COLOR);
    out.close("visual").close("link").close("model");
    out.finish()
}

fn sun() -> String {
    let mut out = XmlOut::new();
    out.open("light", &[("name", "sun"), ("type", "directional")])
        .leaf("cast_shadows", "true")
        .leaf("pose", &pose([0.0, 0.0, 10.0, 0.0, 0.0, 0.0]))
        .leaf("diffuse", "0.8 0.8 0.8 1")
        .leaf("specular", "0.2 0.2 0.2 1")
        .open("attenuation", &[])
        .leaf("range", "1000")
        .leaf("constant", "0.9")
        .leaf("linear", "0.01")
        .leaf("quadratic", "0.001")
        .close("attenuation")
        .leaf("direction", "-0.5 0.1 -0.9")
        .close("light");
    out.finish()
}

/// Side length of the visual ground plane: the projected bbox plus a margin.
fn ground_size(origin: &GeoOrigin, bbox: &BoundingBox) -> f64 {
    let lo = origin.project(bbox.min_lat(), bbox.min_lon());
    let hi = origin.project(bbox.max_lat(), bbox.max_lon());
    match (lo, hi) {
        (Ok(lo), Ok(hi)) => ((hi.x - lo.x).max(hi.y - lo.y) + 200.0).ceil(),
        _ => 1000.0,
    }
}

/// Assembles the world: ground plane, sun, spherical coordinates, then
/// buildings, roads and vehicles. Identical inputs give identical bytes.
pub fn emit_world(
    buildings: &[Building],
    roads: &[Road],
    vehicles: &[VehicleSpec],
    origin: &GeoOrigin,
    config: &GenerationConfig,
) -> Result<(SdfWorld, Vec<Warning>), SdfError> {
    let mut warnings = Vec::new();
    let building_models: Vec<ModelFragment> = buildings.iter().map(emit_building).collect();
    let road_models: Vec<ModelFragment> = roads
        .iter()
        .map(|r| emit_road(r, config.defaults.road_thickness))
        .collect();
    let mut vehicle_models = Vec::with_capacity(vehicles.len());
    for v in vehicles {
        let (fragment, w) = emit_vehicle(v, origin, &config.bbox)?;
        vehicle_models.push(fragment);
        warnings.extend(w);
    }

    let mut names = HashSet::from([GROUND_PLANE]);
    for m in building_models
        .iter()
        .chain(&road_models)
        .chain(&vehicle_models)
    {
        if !names.insert(m.name.as_str()) {
            return Err(SdfError::DuplicateModelName(m.name.clone()));
        }
    }

    let mut out = XmlOut::new();
    out.raw("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n")
        .open("sdf", &[("version", &config.sdf_version)])
        .open("world", &[("name", WORLD_NAME)])
        .block(&ground_plane(ground_size(origin, &config.bbox)))
        .block(&sun())
        .open("spherical_coordinates", &[])
        .leaf("surface_model", "EARTH_WGS84")
        // Shortest round-trip form so the origin survives exactly.
        .leaf("latitude_deg", &origin.lat().to_string())
        .leaf("longitude_deg", &origin.lon().to_string())
        .leaf("elevation", "0")
        .leaf("heading_deg", "0")
        .close("spherical_coordinates");
    for m in building_models
        .iter()
        .chain(&road_models)
        .chain(&vehicle_models)
    {
        out.block(&m.xml);
    }
    out.close("world").close("sdf");

    Ok((
        SdfWorld {
            version: config.sdf_version.clone(),
            origin: *origin,
            building_models,
            road_models,
            vehicle_models,
            text: out.finish(),
        },
        warnings,
    ))
}
