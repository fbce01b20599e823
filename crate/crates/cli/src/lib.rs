//! Commands behind the `dtgen` binary.
//!
//! Every command returns a [`CommandOutcome`] instead of printing or
//! exiting, so the binary stays a thin shell and the commands can be driven
//! directly from tests.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand};
use dtgen_core::osm::{fetch_overpass, parse_osm, OsmError};
use dtgen_core::replay::{
    compute_gap, read_controls_csv, read_trajectory_csv, shadow_follow, simulate_controls,
    ReplayError, SimOptions, Trajectory, VehicleState,
};
use dtgen_core::sdf::{emit_world, validate_sdf};
use dtgen_core::vehicle::load_config;
use dtgen_core::world::{extract_buildings, extract_roads};
use dtgen_core::{GenerationConfig, GeoOrigin, Warning};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const ENDPOINT_ENV: &str = "DTGEN_OVERPASS_ENDPOINT";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub warnings: Vec<String>,
    /// Files written by the command.
    pub outputs: Vec<PathBuf>,
    /// Diagnostic lines for standard error.
    pub messages: Vec<String>,
    /// Machine-readable lines for standard output.
    pub stdout: Vec<String>,
}

impl CommandOutcome {
    fn fail(exit_code: i32, message: impl Into<String>) -> Self {
        Self {
            exit_code,
            messages: vec![format!("error: {}", message.into())],
            ..Self::default()
        }
    }

    fn warn(&mut self, warnings: impl IntoIterator<Item = Warning>) {
        self.warnings
            .extend(warnings.into_iter().map(|w| w.message));
    }

    fn failed(mut self, exit_code: i32, message: impl Into<String>) -> Self {
        self.exit_code = exit_code;
        self.messages.push(format!("error: {}", message.into()));
        self
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dtgen",
    version,
    about = "Generate SDFormat digital-twin worlds from OpenStreetMap data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an SDF world from OSM data and a generation config.
    Generate(GenerateArgs),
    /// Check an SDF world file for structural problems.
    Validate(ValidateArgs),
    /// Compare a recorded trajectory with a simulated one.
    Gap(GapArgs),
    /// Download OSM XML for the config's bounding box.
    Fetch(FetchArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["osm", "fetch"])))]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// OSM XML file.
    #[arg(long)]
    pub osm: Option<PathBuf>,
    /// Fetch OSM data from the Overpass endpoint instead of reading a file.
    #[arg(long)]
    pub fetch: bool,
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
    /// Network timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("simulated").required(true).args(["controls", "sim"])))]
pub struct GapArgs {
    /// Recorded trajectory CSV (`t,x,y[,yaw]` or `t,lat,lon[,yaw]`).
    #[arg(long)]
    pub recorded: PathBuf,
    /// Controls CSV (`t,speed,steer`) replayed through the vehicle model.
    #[arg(long)]
    pub controls: Option<PathBuf>,
    /// Already simulated trajectory CSV.
    #[arg(long)]
    pub sim: Option<PathBuf>,
    #[arg(long)]
    pub config: PathBuf,
    /// Vehicle whose parameters drive the replay.
    #[arg(long)]
    pub vehicle: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: String,
    /// Network timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let mut out = CommandOutcome {
                exit_code: code,
                ..CommandOutcome::default()
            };
            if code == EXIT_OK {
                out.stdout.push(text.trim_end().to_owned());
            } else {
                out.messages.push(text.trim_end().to_owned());
            }
            out
        }
    }
}

pub fn run(cli: &Cli) -> CommandOutcome {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Validate(a) => cmd_validate(&a.path),
        Command::Gap(a) => cmd_gap(a),
        Command::Fetch(a) => cmd_fetch(a),
    }
}

fn read(path: &Path) -> Result<String, CommandOutcome> {
    fs::read_to_string(path)
        .map_err(|e| CommandOutcome::fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Refuses an output path that points at one of the inputs.
fn guard_output(out: &Path, inputs: &[&Path]) -> Result<(), CommandOutcome> {
    match inputs.iter().find(|i| same_file(out, i)) {
        Some(i) => Err(CommandOutcome::fail(
            EXIT_USAGE,
            format!("--out would overwrite input {}", i.display()),
        )),
        None => Ok(()),
    }
}

fn load(path: &Path) -> Result<GenerationConfig, CommandOutcome> {
    let text = read(path)?;
    load_config(&text)
        .map_err(|e| CommandOutcome::fail(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn timeout(secs: f64) -> Result<Duration, CommandOutcome> {
    Duration::try_from_secs_f64(secs)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CommandOutcome::fail(EXIT_USAGE, format!("invalid --timeout {secs}")))
}

fn fetch_error(e: OsmError) -> CommandOutcome {
    CommandOutcome::fail(EXIT_IO, e.to_string())
}

pub fn cmd_generate(args: &GenerateArgs) -> CommandOutcome {
    generate(args).unwrap_or_else(|e| e)
}

fn generate(args: &GenerateArgs) -> Result<CommandOutcome, CommandOutcome> {
    let mut inputs: Vec<&Path> = vec![&args.config];
    inputs.extend(args.osm.as_deref());
    guard_output(&args.out, &inputs)?;
    let config = load(&args.config)?;

    let xml = match (&args.osm, args.fetch) {
        (Some(path), false) => read(path)?,
        (None, true) => {
            let endpoint = args.endpoint.as_deref().ok_or_else(|| {
                CommandOutcome::fail(
                    EXIT_USAGE,
                    format!("--fetch needs --endpoint or {ENDPOINT_ENV}"),
                )
            })?;
            fetch_overpass(&config.bbox, endpoint, timeout(args.timeout)?).map_err(fetch_error)?
        }
        _ => {
            return Err(CommandOutcome::fail(
                EXIT_USAGE,
                "give exactly one of --osm or --fetch",
            ))
        }
    };

    let mut outcome = CommandOutcome::default();
    let parsed = parse_osm(&xml).map_err(|e| CommandOutcome::fail(EXIT_INVALID, e.to_string()))?;
    outcome.warn(parsed.warnings);

    let doc = parsed.document.filter_bbox(&config.bbox);
    let origin = GeoOrigin::of_bbox(&config.bbox)
        .map_err(|e| CommandOutcome::fail(EXIT_INVALID, e.to_string()))?;
    let (buildings, w) = extract_buildings(&doc, &origin, &config.defaults);
    outcome.warn(w);
    let (roads, w) = extract_roads(&doc, &origin, &config.defaults);
    outcome.warn(w);

    let (world, w) = emit_world(&buildings, &roads, &config.vehicles, &origin, &config)
        .map_err(|e| CommandOutcome::fail(EXIT_INVALID, e.to_string()))?;
    outcome.warn(w);

    let report = validate_sdf(&world.text);
    if !report.is_valid() {
        for v in &report.violations {
            outcome.messages.push(format!("violation: {v}"));
        }
        return Err(outcome.failed(
            EXIT_INVALID,
            format!(
                "generated world has {} violation(s); nothing written",
                report.violations.len()
            ),
        ));
    }

    write(&args.out, &world.text).map_err(|e| outcome.clone().failed(EXIT_IO, e))?;
    outcome.outputs.push(args.out.clone());
    outcome
        .messages
        .push(format!("{} warning(s)", outcome.warnings.len()));
    outcome.messages.push(format!(
        "models: {} building(s), {} road(s), {} vehicle(s)",
        world.building_models.len(),
        world.road_models.len(),
        world.vehicle_models.len()
    ));
    Ok(outcome)
}

pub fn cmd_validate(path: &Path) -> CommandOutcome {
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return e,
    };
    let report = validate_sdf(&text);
    let mut outcome = CommandOutcome::default();
    if !report.is_valid() {
        outcome.exit_code = EXIT_INVALID;
        outcome.messages = report.violations.iter().map(ToString::to_string).collect();
    }
    outcome
}

fn replay_error(e: ReplayError) -> CommandOutcome {
    CommandOutcome::fail(EXIT_INVALID, e.to_string())
}

pub fn cmd_gap(args: &GapArgs) -> CommandOutcome {
    gap(args).unwrap_or_else(|e| e)
}

/// Initial state for a replay starting at `t`: the recorded pose there (or
/// at the first recorded sample when `t` precedes the recording).
fn initial_state(recorded: &Trajectory, t: f64) -> Result<VehicleState, ReplayError> {
    let t = t.clamp(recorded.start(), recorded.end());
    let s = shadow_follow(recorded, &[t])?.samples()[0];
    Ok(VehicleState::new(s.x, s.y, s.yaw.unwrap_or(0.0), 0.0))
}

fn gap(args: &GapArgs) -> Result<CommandOutcome, CommandOutcome> {
    let mut inputs: Vec<&Path> = vec![&args.config, &args.recorded];
    inputs.extend(args.controls.as_deref());
    inputs.extend(args.sim.as_deref());
    guard_output(&args.out, &inputs)?;

    let config = load(&args.config)?;
    let spec = match &args.vehicle {
        Some(name) => Some(config.vehicle(name).ok_or_else(|| {
            CommandOutcome::fail(
                EXIT_USAGE,
                format!("vehicle {name:?} is not in {}", args.config.display()),
            )
        })?),
        None => None,
    };
    let origin = GeoOrigin::of_bbox(&config.bbox)
        .map_err(|e| CommandOutcome::fail(EXIT_INVALID, e.to_string()))?;
    let recorded = read_trajectory_csv(&read(&args.recorded)?, Some(&origin)).map_err(|e| {
        CommandOutcome::fail(EXIT_INVALID, format!("{}: {e}", args.recorded.display()))
    })?;

    let mut outcome = CommandOutcome::default();
    let sim = match (&args.controls, &args.sim) {
        (Some(path), None) => {
            let spec =
                spec.ok_or_else(|| CommandOutcome::fail(EXIT_USAGE, "--controls needs --vehicle"))?;
            let controls = read_controls_csv(&read(path)?).map_err(|e| {
                CommandOutcome::fail(EXIT_INVALID, format!("{}: {e}", path.display()))
            })?;
            let initial = initial_state(&recorded, controls[0].t).map_err(replay_error)?;
            let opts = SimOptions {
                until: Some(recorded.end()),
                sample_times: recorded.samples().iter().map(|s| s.t).collect(),
                ..SimOptions::default()
            };
            let (traj, w) =
                simulate_controls(&initial, &controls, spec, &opts).map_err(replay_error)?;
            outcome.warn(w);
            traj
        }
        (None, Some(path)) => read_trajectory_csv(&read(path)?, Some(&origin))
            .map_err(|e| CommandOutcome::fail(EXIT_INVALID, format!("{}: {e}", path.display())))?,
        _ => {
            return Err(CommandOutcome::fail(
                EXIT_USAGE,
                "give exactly one of --controls or --sim",
            ))
        }
    };

    let report = compute_gap(&recorded, &sim).map_err(replay_error)?;
    write(&args.out, &report.to_json()).map_err(|e| outcome.clone().failed(EXIT_IO, e))?;
    outcome.outputs.push(args.out.clone());
    outcome.stdout.push(report.summary());
    Ok(outcome)
}

pub fn cmd_fetch(args: &FetchArgs) -> CommandOutcome {
    fetch(args).unwrap_or_else(|e| e)
}

fn fetch(args: &FetchArgs) -> Result<CommandOutcome, CommandOutcome> {
    guard_output(&args.out, &[&args.config])?;
    let config = load(&args.config)?;
    let xml = fetch_overpass(&config.bbox, &args.endpoint, timeout(args.timeout)?)
        .map_err(fetch_error)?;
    write(&args.out, &xml).map_err(|e| CommandOutcome::fail(EXIT_IO, e))?;
    Ok(CommandOutcome {
        outputs: vec![args.out.clone()],
        ..CommandOutcome::default()
    })
}
