//! Batch front end: read a config, run one experiment or a sweep over one
//! numeric key, and write CSVs, an optional SVG plot and `manifest.jsonl`.
//!
//! Exit codes: 0 on success, 2 for configuration errors (nothing is written),
//! 3 for failures while running.

pub mod config;
pub mod plan;
pub mod plot;
pub mod run;

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use config::{Config, Source};
use plan::prepare;
use plot::{render_svg, Plot, Series};
use run::{execute, Artifact, RunOutput};

use crate::error::Error;
use crate::report::quote;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    CapacityGp,
    CapacityDp,
    SimulateGp,
    SimulateDp,
    Lemmas,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::CapacityGp, Mode::CapacityDp, Mode::SimulateGp, Mode::SimulateDp, Mode::Lemmas];

    pub fn name(self) -> &'static str {
        match self {
            Mode::CapacityGp => "capacity-gp",
            Mode::CapacityDp => "capacity-dp",
            Mode::SimulateGp => "simulate-gp",
            Mode::SimulateDp => "simulate-dp",
            Mode::Lemmas => "lemmas",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Mode::CapacityGp | Mode::SimulateGp)
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!("unknown mode '{s}' (capacity-gp, capacity-dp, simulate-gp, simulate-dp, lemmas)"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Capacity,
    SimulateGp,
    SimulateDp,
    Lemmas,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Capacity => "capacity",
            Command::SimulateGp => "simulate-gp",
            Command::SimulateDp => "simulate-dp",
            Command::Lemmas => "lemmas",
            Command::Sweep => "sweep",
        }
    }
}

/// Command-line flags that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub jobs: Option<usize>,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    Config(String),
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn config_error(e: Error) -> RunError {
    match e {
        Error::Config(m) => RunError::Config(m),
        other => RunError::Config(other.to_string()),
    }
}

fn runtime_error(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

/// What a successful invocation wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Read the config file (if any), apply flag overrides and fill defaults.
pub fn load_config(overrides: &Overrides) -> Result<(Config, String), RunError> {
    let text = match &overrides.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| RunError::Config(format!("cannot read config '{}': {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = Config::parse(&text).map_err(config_error)?;
    if let Some(seed) = overrides.seed {
        cfg.set("seed", &seed.to_string(), Source::Flag).map_err(config_error)?;
    }
    if let Some(trials) = overrides.trials {
        cfg.set("trials", &trials.to_string(), Source::Flag).map_err(config_error)?;
    }
    if let Some(out) = &overrides.out {
        cfg.set("out", &out.to_string_lossy(), Source::Flag).map_err(config_error)?;
    }
    cfg.fill_defaults();
    Ok((cfg, sha256_hex(text.as_bytes())))
}

/// Mode for a command. `capacity` picks the discrete solver when the config
/// says `mode = capacity-gp` or `[channel] kind = discrete`.
pub fn resolve_mode(command: Command, cfg: &Config) -> Result<Mode, RunError> {
    let from_config = cfg.opt_text("mode").map(Mode::parse).transpose().map_err(config_error)?;
    let mode = match command {
        Command::Capacity => match (from_config, cfg.opt_text("channel.kind")) {
            (Some(m), _) => m,
            (None, Some("discrete")) => Mode::CapacityGp,
            (None, Some("gaussian") | None) => Mode::CapacityDp,
            (None, Some(k)) => {
                return Err(RunError::Config(format!("unknown channel.kind '{k}' (gaussian, discrete)")))
            }
        },
        Command::SimulateGp => Mode::SimulateGp,
        Command::SimulateDp => Mode::SimulateDp,
        Command::Lemmas => Mode::Lemmas,
        Command::Sweep => from_config.ok_or_else(|| RunError::Config("sweep needs a top-level 'mode'".into()))?,
    };
    if let Some(m) = from_config.filter(|m| *m != mode) {
        return Err(RunError::Config(format!(
            "config mode '{}' does not match the '{}' command",
            m.name(),
            command.name()
        )));
    }
    if command == Command::Capacity && !matches!(mode, Mode::CapacityDp | Mode::CapacityGp) {
        return Err(RunError::Config(format!("mode '{}' is not a capacity mode", mode.name())));
    }
    Ok(mode)
}

fn parameters(cfg: &Config) -> Value {
    let mut m = Map::new();
    for (k, e) in cfg.entries() {
        let value = if e.values.len() == 1 { json!(e.values[0]) } else { json!(e.values) };
        m.insert(k.clone(), json!({ "value": value, "source": e.source.to_string() }));
    }
    Value::Object(m)
}

fn manifest_header(command: Command, mode: Mode, cfg: &Config, config_hash: &str, overrides: &Overrides) -> Value {
    json!({
        "kind": "run",
        "command": command.name(),
        "mode": mode.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_hash,
        "seed": cfg.u64("seed").ok(),
        "trials": cfg.u64("trials").ok(),
        "jobs": overrides.jobs,
        "parameters": parameters(cfg),
    })
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(RunError::Config("--jobs must be positive".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(j).build().map_err(runtime_error)?;
            Ok(pool.install(f))
        }
    }
}

/// Write artifacts and the manifest. Files are written in order; the
/// manifest last, listing the hash of each artifact.
fn write_outputs(out_dir: &Path, artifacts: &[Artifact], mut manifest: Vec<Value>) -> Result<Outcome, RunError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Runtime(format!("cannot create '{}': {e}", out_dir.display())))?;
    let mut files = Vec::new();
    for a in artifacts {
        std::fs::write(out_dir.join(&a.name), &a.contents)
            .map_err(|e| RunError::Runtime(format!("cannot write '{}': {e}", a.name)))?;
        files.push(a.name.clone());
    }
    let listing: Vec<Value> =
        artifacts.iter().map(|a| json!({ "file": a.name, "sha256": sha256_hex(a.contents.as_bytes()) })).collect();
    manifest.push(json!({ "kind": "outputs", "files": listing }));
    let mut text = String::new();
    for line in &manifest {
        text.push_str(&line.to_string());
        text.push('\n');
    }
    std::fs::write(out_dir.join("manifest.jsonl"), text)
        .map_err(|e| RunError::Runtime(format!("cannot write manifest: {e}")))?;
    files.push("manifest.jsonl".into());
    Ok(Outcome { out_dir: out_dir.to_path_buf(), files })
}

/// Run one subcommand end to end.
pub fn run(command: Command, overrides: &Overrides) -> Result<Outcome, RunError> {
    let (mut cfg, hash) = load_config(overrides)?;
    let mode = resolve_mode(command, &cfg)?;
    if command == Command::Sweep {
        return sweep(cfg, mode, &hash, overrides);
    }
    let exp = prepare(&mut cfg, mode).map_err(config_error)?;
    let out_dir = PathBuf::from(cfg.text("out").map_err(config_error)?);
    let header = manifest_header(command, mode, &cfg, &hash, overrides);
    let output = with_pool(overrides.jobs, || execute(&exp))?.map_err(runtime_error)?;
    let mut artifacts = output.artifacts.clone();
    if overrides.plot {
        if let Some(p) = &output.plot {
            artifacts.push(Artifact { name: "plot.svg".into(), contents: render_svg(p) });
        }
    }
    let mut manifest = vec![header];
    manifest.extend(output.derived);
    write_outputs(&out_dir, &artifacts, manifest)
}

/// The value of one sweep point as it is written into the config.
fn point_value(v: f64) -> String {
    format!("{v}")
}

fn sweep(base: Config, mode: Mode, hash: &str, overrides: &Overrides) -> Result<Outcome, RunError> {
    let axis = base.text("sweep.axis").map_err(config_error)?.to_string();
    let spec =
        config::lookup(&axis).ok_or_else(|| RunError::Config(format!("sweep axis '{axis}' is not a config key")))?;
    if !spec.kind.is_numeric() || spec.section == "sweep" {
        return Err(RunError::Config(format!("sweep axis '{axis}' is not a numeric field")));
    }
    let values = base.f64s("sweep.values").map_err(config_error)?;
    if values.is_empty() {
        return Err(RunError::Config("sweep.values is empty".into()));
    }
    // the unmodified config must itself be valid
    let mut checked = base.clone();
    prepare(&mut checked, mode).map_err(config_error)?;
    let out_dir = PathBuf::from(base.text("out").map_err(config_error)?);

    let mut manifest = vec![manifest_header(Command::Sweep, mode, &checked, hash, overrides)];
    let mut points: Vec<(String, Result<RunOutput, String>)> = Vec::new();
    for &v in &values {
        let value = point_value(v);
        let mut cfg = base.clone();
        let result = match cfg.set(&axis, &value, Source::Flag).and_then(|_| prepare(&mut cfg, mode)) {
            Ok(exp) => with_pool(overrides.jobs, || execute(&exp))?.map_err(|e| e.to_string()),
            Err(e) => Err(config_error(e).to_string()),
        };
        let mut line = json!({ "kind": "sweep_point", "axis": axis, "value": value });
        match &result {
            Ok(out) => {
                line["status"] = json!("ok");
                if !out.derived.is_empty() {
                    line["derived"] = Value::Array(out.derived.clone());
                }
            }
            Err(msg) => {
                line["status"] = json!("failed");
                line["error"] = json!(msg);
            }
        }
        manifest.push(line);
        points.push((value, result));
    }

    let header = points.iter().find_map(|(_, r)| r.as_ref().ok().map(|o| o.summary_header.clone()));
    let width = header.as_ref().map_or(0, |h| h.split(',').count());
    let mut csv = match &header {
        Some(h) => format!("axis,value,status,error,{h}\n"),
        None => "axis,value,status,error\n".to_string(),
    };
    let mut series: Vec<Series> = Vec::new();
    for ((value, result), &v) in points.iter().zip(&values) {
        let axis_field = quote(&axis);
        match result {
            Ok(out) => {
                for r in &out.summary_rows {
                    csv.push_str(&format!("{axis_field},{value},ok,,{r}\n"));
                }
                for (label, y) in &out.metrics {
                    match series.iter_mut().find(|s| &s.label == label) {
                        Some(s) => s.points.push((v, *y)),
                        None => series.push(Series { label: label.clone(), points: vec![(v, *y)] }),
                    }
                }
            }
            // failed points keep their place with empty metric columns
            Err(msg) => csv.push_str(&format!("{axis_field},{value},failed,{}{}\n", quote(msg), ",".repeat(width))),
        }
    }
    let mut artifacts = vec![Artifact { name: "sweep.csv".into(), contents: csv }];
    if overrides.plot {
        let y_label = match mode {
            Mode::CapacityDp | Mode::CapacityGp => "capacity (bits)",
            Mode::Lemmas => "estimated probability",
            _ => "error rate",
        };
        let p =
            Plot { title: format!("{} sweep", mode.name()), x_label: axis.clone(), y_label: y_label.into(), series };
        artifacts.push(Artifact { name: "sweep.svg".into(), contents: render_svg(&p) });
    }
    write_outputs(&out_dir, &artifacts, manifest)
}
