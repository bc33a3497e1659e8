use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::kernel::{init_simulation, step, ModelDefinition, SimulationState};
use crate::models;
use crate::observation::{export_csv, ProbeSeriesSet};
use crate::space::{apply_layer, import_ascii_grid, AffineTransform};
use crate::timetravel::Timeline;
use crate::value::Params;

use super::{CliError, RunArgs};

/// Binds a raster file to a real-valued patch attribute.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerBinding {
    pub attr: String,
    pub path: PathBuf,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
    /// Clamp to the attribute's declared range.
    #[serde(default)]
    pub clamp: bool,
}

fn unit() -> f64 {
    1.0
}

impl LayerBinding {
    /// `attr=path[,scale=S][,offset=O][,clamp]`
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::Config(format!("layer `{text}`: {m}"));
        let mut parts = text.split(',');
        let head = parts.next().unwrap_or_default();
        let (attr, path) = head.split_once('=').ok_or_else(|| bad("expected attr=path"))?;
        let mut b = LayerBinding {
            attr: attr.to_owned(),
            path: PathBuf::from(path),
            scale: 1.0,
            offset: 0.0,
            clamp: false,
        };
        for opt in parts {
            match opt.split_once('=') {
                Some(("scale", v)) => b.scale = v.parse().map_err(|_| bad("bad scale"))?,
                Some(("offset", v)) => b.offset = v.parse().map_err(|_| bad("bad offset"))?,
                None if opt == "clamp" => b.clamp = true,
                _ => return Err(bad(&format!("unknown option `{opt}`"))),
            }
        }
        Ok(b)
    }
}

/// Run file: the same single-object JSON encoding as wire bodies.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub model: Option<String>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub steps: Option<u64>,
    pub out: Option<String>,
    #[serde(default)]
    pub layers: Vec<LayerBinding>,
    pub timeline: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: String,
    pub params: Params,
    pub seeds: Vec<u64>,
    pub steps: u64,
    pub out: String,
    pub layers: Vec<LayerBinding>,
    pub timeline: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<RunFile>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunFile::default(),
        };
        let model = args
            .model
            .clone()
            .or(file.model)
            .ok_or_else(|| CliError::Config("no model given (use --model)".into()))?;
        let m = models::lookup(&model)?;
        let mut params = models::params_from_json(&file.params)?;
        params.extend(models::params_from_pairs(m.as_ref(), &args.params)?);
        let mut seeds = if args.seeds.is_empty() { file.seeds } else { args.seeds.clone() };
        if seeds.is_empty() {
            seeds.push(0);
        }
        let mut layers = file.layers;
        for l in &args.layers {
            layers.push(LayerBinding::parse(l)?);
        }
        Ok(RunConfig {
            out: args.out.clone().or(file.out).unwrap_or_else(|| m.name().to_owned()),
            model,
            params,
            seeds,
            steps: args.steps.or(file.steps).unwrap_or(100),
            layers,
            timeline: args.timeline.clone().or(file.timeline),
        })
    }
}

/// Builds the tick-0 state for `seed`, with raster layers applied.
fn initial_state(def: &ModelDefinition, layers: &[LayerBinding], seed: u64) -> Result<SimulationState, CliError> {
    let mut state = init_simulation(def, seed)?;
    for b in layers {
        let text = fs::read_to_string(&b.path).map_err(|e| CliError::Config(format!("{}: {e}", b.path.display())))?;
        let layer = import_ascii_grid(&b.attr, &text)?;
        let clamp = if b.clamp {
            let (_, spec) = def.patch_attr(&b.attr).ok_or_else(|| {
                CliError::Config(format!("model has no patch attribute `{}`", b.attr))
            })?;
            Some((spec.min.unwrap_or(f64::NEG_INFINITY), spec.max.unwrap_or(f64::INFINITY)))
        } else {
            None
        };
        let t = AffineTransform {
            scale: b.scale,
            offset: b.offset,
        };
        state = apply_layer(def, &state, &layer, &b.attr, t, clamp)?;
    }
    Ok(state)
}

/// Runs one seed and returns its probe CSV and, if asked, the full timeline.
pub fn run_seed(
    def: &ModelDefinition,
    layers: &[LayerBinding],
    steps: u64,
    seed: u64,
    keep_timeline: bool,
) -> Result<(String, Option<Timeline>), CliError> {
    let mut state = initial_state(def, layers, seed)?;
    let mut probes = ProbeSeriesSet::new(&def.probe_names());
    let mut timeline = if keep_timeline { Some(Timeline::starting_at(&state)?) } else { None };
    probes.record(&state, &def.probes);
    for _ in 0..steps {
        state = step(def, &state);
        probes.record(&state, &def.probes);
        if let Some(t) = timeline.as_mut() {
            t.record(&state).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    let csv = export_csv(&probes.series).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((csv, timeline))
}

pub fn seed_csv_path(prefix: &str, seed: u64) -> PathBuf {
    PathBuf::from(format!("{prefix}_seed{seed}.csv"))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Runs every seed in order and writes one CSV per seed. Returns the paths.
pub fn execute_run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let def = models::definition(&cfg.model, &cfg.params)?;
    let mut written = Vec::new();
    for &seed in &cfg.seeds {
        log::info!("{} seed {seed}: {} steps", def.name(), cfg.steps);
        let (csv, timeline) = run_seed(&def, &cfg.layers, cfg.steps, seed, cfg.timeline.is_some())?;
        let path = seed_csv_path(&cfg.out, seed);
        write(&path, &csv)?;
        if let (Some(dir), Some(t)) = (&cfg.timeline, timeline) {
            let dir = dir.join(format!("seed{seed}"));
            t.export(&dir)
                .map_err(|e| CliError::Runtime(format!("cannot export timeline to {}: {e}", dir.display())))?;
        }
        written.push(path);
    }
    Ok(written)
}
