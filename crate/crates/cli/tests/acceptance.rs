//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use dtgen_cli::{cmd_validate, run_from_args, EXIT_OK};
use dtgen_core::replay::{
    compute_gap, simulate_controls, ControlSample, SimOptions, Trajectory, TrajectorySample,
    VehicleState,
};
use dtgen_core::{GeoOrigin, VehicleKind, VehicleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

/// (osm fixture, config fixture)
const CORPUS: &[(&str, &str)] = &[
    ("empty.osm", "minimal.json"),
    ("buildings_only.osm", "shadow.json"),
    ("roads_only.osm", "ghost.json"),
    ("mixed.osm", "all_kinds.json"),
    ("mixed.osm", "minimal.json"),
    ("track.osm", "track.json"),
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn generate(osm: &str, config: &str, out: &Path) -> i32 {
    let (osm, config) = (fixture(osm), fixture(config));
    run_from_args([
        "dtgen".as_ref(),
        "generate".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--osm".as_ref(),
        osm.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ])
    .exit_code
}

fn binary_generate(osm: &str, config: &str, out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_dtgen"))
        .arg("generate")
        .arg("--config")
        .arg(fixture(config))
        .arg("--osm")
        .arg(fixture(osm))
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn generation_speed(dir: &Path) -> Outcome {
    let out = dir.join("speed.sdf");
    let mut times = Vec::new();
    for _ in 0..5 {
        let t0 = Instant::now();
        if !binary_generate("track.osm", "track.json", &out) {
            return Err("dtgen generate failed".into());
        }
        times.push(t0.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let median = times[2];
    let detail = format!("median {:.3} s over 5 runs (limit 1 s)", median);
    if median < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closure(dir: &Path) -> Outcome {
    for (i, (osm, cfg)) in CORPUS.iter().enumerate() {
        let out = dir.join(format!("closure_{i}.sdf"));
        let code = generate(osm, cfg, &out);
        if code != EXIT_OK {
            return Err(format!("{osm} + {cfg}: generate exited {code}"));
        }
        let v = cmd_validate(&out);
        if v.exit_code != EXIT_OK {
            return Err(format!("{osm} + {cfg}: {} violation(s)", v.messages.len()));
        }
    }
    Ok(format!("{} fixture pairs, zero violations", CORPUS.len()))
}

/// Line-oriented scan of a fixture, independent of the XML parser.
struct Scan {
    nodes: BTreeMap<i64, (f64, f64)>,
    ways: Vec<(Vec<i64>, BTreeMap<String, String>)>,
}

fn scan(text: &str) -> Scan {
    let node = Regex::new(r#"<node id="(-?\d+)" lat="([-0-9.]+)" lon="([-0-9.]+)""#).unwrap();
    let way = Regex::new(r#"<way id="(-?\d+)""#).unwrap();
    let nd = Regex::new(r#"<nd ref="(-?\d+)""#).unwrap();
    let tag = Regex::new(r#"<tag k="([^"]*)" v="([^"]*)""#).unwrap();
    let mut s = Scan {
        nodes: BTreeMap::new(),
        ways: Vec::new(),
    };
    for line in text.lines() {
        if let Some(c) = node.captures(line) {
            s.nodes.insert(
                c[1].parse().unwrap(),
                (c[2].parse().unwrap(), c[3].parse().unwrap()),
            );
        } else if way.is_match(line) {
            s.ways.push((Vec::new(), BTreeMap::new()));
        } else if let Some(c) = nd.captures(line) {
            s.ways.last_mut().unwrap().0.push(c[1].parse().unwrap());
        } else if let Some(c) = tag.captures(line) {
            s.ways
                .last_mut()
                .unwrap()
                .1
                .entry(c[1].to_string())
                .or_insert(c[2].to_string());
        }
    }
    s
}

const DRIVABLE: [&str; 14] = [
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

fn expected_counts(osm: &str, bbox: (f64, f64, f64, f64)) -> (usize, usize) {
    let s = scan(&std::fs::read_to_string(fixture(osm)).unwrap());
    let inside =
        |&(lat, lon): &(f64, f64)| lat >= bbox.0 && lat <= bbox.2 && lon >= bbox.1 && lon <= bbox.3;
    let (mut buildings, mut roads) = (0, 0);
    for (refs, tags) in &s.ways {
        let Some(pts) = refs
            .iter()
            .map(|r| s.nodes.get(r).copied())
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        if !pts.iter().any(inside) {
            continue;
        }
        let distinct: BTreeSet<(u64, u64)> =
            pts.iter().map(|p| (p.0.to_bits(), p.1.to_bits())).collect();
        if tags.get("building").is_some_and(|v| v != "no")
            && refs.len() > 1
            && refs.first() == refs.last()
            && distinct.len() >= 3
        {
            buildings += 1;
        }
        if tags
            .get("highway")
            .is_some_and(|v| DRIVABLE.contains(&v.as_str()))
            && distinct.len() >= 2
        {
            roads += 1;
        }
    }
    (buildings, roads)
}

fn extraction_counts(dir: &Path) -> Outcome {
    let bbox = (48.0, 8.0, 48.01, 8.01);
    let mut detail = Vec::new();
    for (i, (osm, cfg)) in CORPUS.iter().enumerate() {
        let out = dir.join(format!("counts_{i}.sdf"));
        if generate(osm, cfg, &out) != EXIT_OK {
            return Err(format!("{osm}: generate failed"));
        }
        let sdf = std::fs::read_to_string(&out).unwrap();
        let got = (
            sdf.matches("<model name=\"building_").count(),
            sdf.matches("<model name=\"road_").count(),
        );
        let want = expected_counts(osm, bbox);
        if got != want {
            return Err(format!(
                "{osm}: generated {got:?} (buildings, roads), scan expects {want:?}"
            ));
        }
        detail.push(format!("{osm} {}/{}", want.0, want.1));
    }
    Ok(detail.join(", "))
}

fn model_block<'a>(sdf: &'a str, name: &str) -> &'a str {
    let open = format!("    <model name=\"{name}\">");
    let start = sdf.find(&open).expect("model present");
    let end = sdf[start..].find("\n    </model>").expect("model closed");
    &sdf[start..start + end]
}

fn vehicle_kinds(dir: &Path) -> Outcome {
    let out = dir.join("kinds.sdf");
    if generate("mixed.osm", "all_kinds.json", &out) != EXIT_OK {
        return Err("generate failed".into());
    }
    let sdf = std::fs::read_to_string(&out).unwrap();
    let gps = "<sensor name=\"gps\" type=\"gps\">";

    let ghost = model_block(&sdf, "phantom");
    if ghost.contains("<collision") {
        return Err("ghost has collision elements".into());
    }
    let shadow = model_block(&sdf, "follower");
    if !shadow.contains("<collision") || !shadow.contains(gps) || shadow.contains("<plugin") {
        return Err("shadow lacks collisions or GPS, or carries a plugin".into());
    }
    let twin = model_block(&sdf, "ego");
    let joint = Regex::new(r#"(?s)<joint name="[^"]*_steer_joint" type="revolute">.*?<lower>([^<]+)</lower>\s*<upper>([^<]+)</upper>"#).unwrap();
    let limits: Vec<(f64, f64)> = joint
        .captures_iter(twin)
        .map(|c| (c[1].parse().unwrap(), c[2].parse().unwrap()))
        .collect();
    if limits.len() != 2 || limits.iter().any(|&(lo, hi)| lo != -0.55 || hi != 0.55) {
        return Err(format!(
            "twin steer joint limits {limits:?}, expected two of ±0.55"
        ));
    }
    if !twin.contains(gps) {
        return Err("twin lacks GPS".into());
    }
    Ok(
        "ghost 0 collisions; shadow collisions+GPS, no plugin; twin 2 steer joints ±0.55 + GPS"
            .into(),
    )
}

fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let r = 6_378_137.0;
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let (dp, dl) = (p2 - p1, (b.1 - a.1).to_radians());
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().asin()
}

fn projection(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut worst_rel, mut worst_rt, mut pairs) = (0.0f64, 0.0f64, 0);
    while pairs < 1000 {
        let a = (rng.gen_range(-70.0..=70.0), rng.gen_range(-180.0..180.0));
        // Second point within ~4.5 km; max offset per axis is 0.03 deg of lat.
        let b = (
            (a.0 + rng.gen_range(-0.03..0.03f64)).clamp(-70.0, 70.0),
            a.1 + rng.gen_range(-0.03..0.03) / a.0.to_radians().cos().max(0.34),
        );
        let d = haversine(a, b);
        if !(1.0..5000.0).contains(&d) {
            continue;
        }
        pairs += 1;
        let origin = GeoOrigin::new((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0).unwrap();
        let (pa, pb) = (
            origin.project(a.0, a.1).unwrap(),
            origin.project(b.0, b.1).unwrap(),
        );
        worst_rel = worst_rel.max((pa.distance(&pb) - d).abs() / d);
        for (p, g) in [(pa, a), (pb, b)] {
            let (lat, lon) = origin.unproject(p).unwrap();
            worst_rt = worst_rt.max((lat - g.0).abs()).max((lon - g.1).abs());
        }
    }
    let detail = format!("{pairs} pairs, max relative error {:.3e} (limit 5e-3), max round-trip {:.3e} deg (limit 1e-9)", worst_rel, worst_rt);
    if worst_rel < 5e-3 && worst_rt < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn circumradius(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    let (a, b, c) = (
        (q.0 - r.0).hypot(q.1 - r.1),
        (p.0 - r.0).hypot(p.1 - r.1),
        (p.0 - q.0).hypot(p.1 - q.1),
    );
    let area2 = ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)).abs();
    a * b * c / (2.0 * area2)
}

fn kinematics() -> Outcome {
    let mut spec = VehicleSpec::new("k", VehicleKind::Twin);
    spec.wheelbase = 2.7;
    let steer: f64 = 0.25;
    let expected = spec.wheelbase / steer.tan();
    let controls = [
        ControlSample {
            t: 0.0,
            speed: 4.0,
            steer,
        },
        ControlSample {
            t: 30.0,
            speed: 4.0,
            steer,
        },
    ];
    let opts = SimOptions {
        dt_max: 1e-3,
        sample_times: vec![7.0, 14.0],
        ..SimOptions::default()
    };
    let (traj, _) = simulate_controls(
        &VehicleState::new(0.0, 0.0, 0.0, 4.0),
        &controls,
        &spec,
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let at = |t: f64| {
        let s = traj.samples().iter().find(|s| s.t == t).expect("sample");
        (s.x, s.y)
    };
    let radius = circumradius(at(0.0), at(7.0), at(14.0));
    let rel = (radius - expected).abs() / expected;

    let (x0, y0, yaw, v, t): (f64, f64, f64, f64, f64) = (1.5, -2.0, 0.7, 3.0, 5.0);
    let line = [
        ControlSample {
            t: 0.0,
            speed: v,
            steer: 0.0,
        },
        ControlSample {
            t,
            speed: v,
            steer: 0.0,
        },
    ];
    let (traj, _) = simulate_controls(
        &VehicleState::new(x0, y0, yaw, v),
        &line,
        &spec,
        &SimOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let last = traj.samples().last().unwrap();
    let err = (last.x - (x0 + v * t * yaw.cos())).hypot(last.y - (y0 + v * t * yaw.sin()));

    let detail = format!("radius {radius:.6} vs {expected:.6} (rel {rel:.2e}, limit 1e-3); straight-line error {err:.2e} m (limit 1e-9)");
    if rel < 1e-3 && err < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_traj(rng: &mut ChaCha8Rng, t0: f64, dt: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let (mut x, mut y) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
    (0..n)
        .map(|i| {
            x += rng.gen_range(-2.0..2.0);
            y += rng.gen_range(-2.0..2.0);
            (t0 + i as f64 * dt, x, y)
        })
        .collect()
}

fn to_traj(pts: &[(f64, f64, f64)]) -> Trajectory {
    Trajectory::new(
        pts.iter()
            .map(|&(t, x, y)| TrajectorySample::new(t, x, y, None))
            .collect(),
    )
    .unwrap()
}

/// Direct summation over real timestamps inside the overlap.
fn direct(real: &[(f64, f64, f64)], sim: &[(f64, f64, f64)]) -> (f64, f64, f64, f64) {
    let (lo, hi) = (sim[0].0, sim[sim.len() - 1].0);
    let devs: Vec<f64> = real
        .iter()
        .filter(|p| p.0 >= lo.max(real[0].0) && p.0 <= hi)
        .map(|&(t, x, y)| {
            let k = sim
                .windows(2)
                .position(|w| w[0].0 <= t && t <= w[1].0)
                .unwrap();
            let (a, b) = (sim[k], sim[k + 1]);
            let (sx, sy) = if t == a.0 {
                (a.1, a.2)
            } else if t == b.0 {
                (b.1, b.2)
            } else {
                let u = (t - a.0) / (b.0 - a.0);
                (a.1 + u * (b.1 - a.1), a.2 + u * (b.2 - a.2))
            };
            (sx - x).hypot(sy - y)
        })
        .collect();
    let n = devs.len() as f64;
    let rmse = (devs.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let max = devs.iter().copied().fold(0.0, f64::max);
    let mean = devs.iter().sum::<f64>() / n;
    (rmse, max, mean, *devs.last().unwrap())
}

fn gap_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = rng.gen_range(5..60);
        let real = random_traj(rng, 0.0, 0.1, n);
        let sim = if k % 2 == 0 {
            random_traj(rng, 0.0, 0.1, n)
        } else {
            let (t0, dt, m) = (
                rng.gen_range(-0.5..0.3),
                rng.gen_range(0.03..0.2),
                rng.gen_range(20..80),
            );
            random_traj(rng, t0, dt, m)
        };
        let r =
            compute_gap(&to_traj(&real), &to_traj(&sim)).map_err(|e| format!("pair {k}: {e}"))?;
        let (rmse, max, mean, fin) = direct(&real, &sim);
        for (a, b) in [
            (r.rmse, rmse),
            (r.max_dev, max),
            (r.mean_dev, mean),
            (r.final_drift, fin),
        ] {
            worst = worst.max((a - b).abs());
        }
    }

    let real = random_traj(rng, 0.0, 0.1, 50);
    let id = compute_gap(&to_traj(&real), &to_traj(&real)).map_err(|e| e.to_string())?;
    let zero = [
        id.rmse,
        id.max_dev,
        id.mean_dev,
        id.final_drift,
        id.lateral_rmse,
        id.longitudinal_rmse,
    ]
    .iter()
    .all(|&v| v == 0.0);

    let (ox, oy) = (0.6, -0.8);
    let shifted: Vec<_> = real.iter().map(|&(t, x, y)| (t, x + ox, y + oy)).collect();
    let off = compute_gap(&to_traj(&real), &to_traj(&shifted)).map_err(|e| e.to_string())?;
    let off_err = (off.rmse - 1.0).abs();

    let detail = format!("max |diff| vs direct summation {worst:.2e} m (limit 1e-12); identity zero: {zero}; offset rmse error {off_err:.2e}");
    if worst <= 1e-12 && zero && off_err <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism(dir: &Path) -> Outcome {
    for (i, (osm, cfg)) in CORPUS.iter().enumerate() {
        let (a, b) = (
            dir.join(format!("det_{i}_a.sdf")),
            dir.join(format!("det_{i}_b.sdf")),
        );
        if !binary_generate(osm, cfg, &a) || !binary_generate(osm, cfg, &b) {
            return Err(format!("{osm}: generate failed"));
        }
        if std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            return Err(format!("{osm} + {cfg}: outputs differ"));
        }
    }
    Ok(format!(
        "{} fixture pairs byte-identical across two runs",
        CORPUS.len()
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let criteria: Vec<(&str, Check)> = vec![
        ("generation speed", Box::new(|| generation_speed(d))),
        ("generation/validation closure", Box::new(|| closure(d))),
        ("extraction count oracle", Box::new(|| extraction_counts(d))),
        ("vehicle-kind semantics", Box::new(|| vehicle_kinds(d))),
        (
            "projection accuracy",
            Box::new(|| projection(&mut ChaCha8Rng::seed_from_u64(1))),
        ),
        ("kinematic oracle", Box::new(kinematics)),
        ("gap-metric oracle", Box::new(move || gap_oracle(&mut rng))),
        ("determinism", Box::new(|| determinism(d))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
