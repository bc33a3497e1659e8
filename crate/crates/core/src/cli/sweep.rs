use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::kernel::{init_simulation, run, ModelDefinition};
use crate::models;
use crate::observation::sample_probes;
use crate::value::{Params, Value};

use super::CliError;

/// Sweep file. `grid` maps parameter names to the values to try; the
/// cartesian product runs once per seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: String,
    pub steps: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub base: serde_json::Map<String, serde_json::Value>,
    pub grid: BTreeMap<String, Vec<serde_json::Value>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub combination: usize,
    /// Grid values, in `SweepTable::params` order.
    pub values: Vec<Value>,
    pub seed: u64,
    /// Probe readings at the final tick; NaN if a probe failed.
    pub finals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub params: Vec<String>,
    pub probes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Header `combination,<grid params...>,seed,<probes...>`, one row per
    /// (combination, seed).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("combination");
        for p in self.params.iter().chain(std::iter::once(&"seed".to_owned())).chain(&self.probes) {
            out.push(',');
            out.push_str(p);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.combination.to_string());
            for v in &r.values {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push(',');
            out.push_str(&r.seed.to_string());
            for f in &r.finals {
                out.push(',');
                out.push_str(&f.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Final values of `probe` grouped by the value of grid parameter `param`.
    pub fn finals_by(&self, param: &str, probe: &str) -> Option<Vec<(Value, Vec<(u64, f64)>)>> {
        let pi = self.params.iter().position(|p| p == param)?;
        let qi = self.probes.iter().position(|p| p == probe)?;
        let mut groups: Vec<(Value, Vec<(u64, f64)>)> = Vec::new();
        for r in &self.rows {
            let v = &r.values[pi];
            match groups.iter_mut().find(|(g, _)| g == v) {
                Some((_, xs)) => xs.push((r.seed, r.finals[qi])),
                None => groups.push((v.clone(), vec![(r.seed, r.finals[qi])])),
            }
        }
        Some(groups)
    }
}

/// Grid combinations in lexicographic order: parameters sorted by name, the
/// last one varying fastest.
fn combinations(grid: &BTreeMap<String, Vec<Value>>) -> Vec<Vec<Value>> {
    let mut combos = vec![Vec::new()];
    for values in grid.values() {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    combos
}

/// Validates the spec, then runs every (combination, seed) pair in parallel.
/// Rows come back in combination-major, seed-minor order regardless of
/// scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable, CliError> {
    if spec.grid.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    if spec.seeds.is_empty() {
        return Err(CliError::Config("sweep needs at least one seed".into()));
    }
    let model = models::lookup(&spec.model)?;
    let specs = model.param_specs();
    let mut grid = BTreeMap::new();
    for (name, raw) in &spec.grid {
        if !specs.iter().any(|s| &s.name == name) {
            return Err(CliError::Config(format!("unknown parameter `{name}` in grid")));
        }
        if raw.is_empty() {
            return Err(CliError::Config(format!("grid parameter `{name}` has no values")));
        }
        let mut obj = serde_json::Map::new();
        let vals = raw
            .iter()
            .map(|v| {
                obj.insert(name.clone(), v.clone());
                models::params_from_json(&obj).map(|p| p[name].clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        grid.insert(name.clone(), vals);
    }
    let base = models::params_from_json(&spec.base)?;
    let defs = combinations(&grid)
        .into_iter()
        .map(|combo| {
            let mut p: Params = base.clone();
            p.extend(grid.keys().cloned().zip(combo.iter().cloned()));
            Ok((combo, models::definition(&spec.model, &p)?))
        })
        .collect::<Result<Vec<(Vec<Value>, ModelDefinition)>, CliError>>()?;
    let probes = defs[0].1.probe_names();
    let jobs: Vec<(usize, u64)> = (0..defs.len())
        .flat_map(|c| spec.seeds.iter().map(move |s| (c, *s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let (combo, def) = &defs[c];
            let s0 = init_simulation(def, seed)?;
            let last = run(def, &s0, spec.steps);
            let finals = sample_probes(&last, &def.probes)
                .into_iter()
                .map(|r| r.value.unwrap_or(f64::NAN))
                .collect();
            Ok(SweepRow {
                combination: c,
                values: combo.clone(),
                seed,
                finals,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepTable {
        params: grid.keys().cloned().collect(),
        probes,
        rows,
    })
}

/// Reads a sweep file, runs it and writes the summary CSV.
pub fn execute_sweep(spec_path: &Path, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(spec_path).map_err(|e| CliError::Config(format!("{}: {e}", spec_path.display())))?;
    let spec: SweepSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", spec_path.display())))?;
    let path = out
        .map(Path::to_path_buf)
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}_sweep.csv", spec.model)));
    let table = sweep(&spec)?;
    fs::write(&path, table.to_csv()).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
