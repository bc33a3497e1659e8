//! ESRI ASCII grid layers.
//!
//! Header keys (`ncols`, `nrows`, `xllcorner`, `yllcorner`, `cellsize`,
//! optional `NODATA_value`) are matched case-insensitively. Values follow as
//! whitespace-separated numbers, first row northmost.

use std::fmt::Write as _;

use crate::error::{Result, SimError};
use crate::kernel::{ModelDefinition, SimulationState};
use crate::value::{AttrType, Value};

pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RasterLayer {
    pub name: String,
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nodata: f64,
    /// Row-major, `nrows * ncols` entries.
    pub values: Vec<f64>,
}

impl RasterLayer {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        self.get(row, col) == self.nodata
    }

    /// Canonical text: header keys in fixed order, one grid row per line,
    /// shortest round-trip number formatting.
    pub fn to_ascii_grid(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.ncols);
        let _ = writeln!(out, "nrows {}", self.nrows);
        let _ = writeln!(out, "xllcorner {}", self.xllcorner);
        let _ = writeln!(out, "yllcorner {}", self.yllcorner);
        let _ = writeln!(out, "cellsize {}", self.cellsize);
        let _ = writeln!(out, "NODATA_value {}", self.nodata);
        for row in self.values.chunks(self.ncols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

const KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

pub fn import_ascii_grid(name: &str, text: &str) -> Result<RasterLayer> {
    let bad = |msg: String| SimError::Invalid(format!("raster `{name}`: {msg}"));
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut tokens = text.split_whitespace().peekable();

    while let Some(tok) = tokens.peek() {
        if !tok.starts_with(|c: char| c.is_ascii_alphabetic()) {
            break;
        }
        let key = tok.to_ascii_lowercase();
        tokens.next();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| bad(format!("unknown header key `{key}`")))?;
        if header[slot].is_some() {
            return Err(bad(format!("duplicate header key `{key}`")));
        }
        let raw = tokens
            .next()
            .ok_or_else(|| bad(format!("header key `{key}` has no value")))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| bad(format!("header `{key}` value `{raw}` is not numeric")))?;
        header[slot] = Some(v);
    }

    for (slot, key) in KEYS.iter().enumerate().take(5) {
        if header[slot].is_none() {
            return Err(bad(format!("missing header key `{key}`")));
        }
    }
    let dim = |slot: usize| -> Result<usize> {
        let v = header[slot].unwrap_or_default();
        if v < 1.0 || v.fract() != 0.0 {
            return Err(bad(format!("`{}` must be a positive integer, got {v}", KEYS[slot])));
        }
        Ok(v as usize)
    };
    let ncols = dim(0)?;
    let nrows = dim(1)?;
    let cellsize = header[4].unwrap_or_default();
    if cellsize <= 0.0 {
        return Err(bad(format!("cellsize must be positive, got {cellsize}")));
    }

    let values = tokens
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("non-numeric token `{t}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != ncols * nrows {
        return Err(bad(format!(
            "expected {} values for {ncols}x{nrows}, found {}",
            ncols * nrows,
            values.len()
        )));
    }

    Ok(RasterLayer {
        name: name.to_owned(),
        ncols,
        nrows,
        xllcorner: header[2].unwrap_or_default(),
        yllcorner: header[3].unwrap_or_default(),
        cellsize,
        nodata: header[5].unwrap_or(DEFAULT_NODATA),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub scale: f64,
    pub offset: f64,
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Writes `clamp(scale * value + offset)` into a real-valued patch attribute.
/// Nodata cells keep their current value.
pub fn apply_layer(
    def: &ModelDefinition,
    state: &SimulationState,
    layer: &RasterLayer,
    attr: &str,
    transform: AffineTransform,
    clamp: Option<(f64, f64)>,
) -> Result<SimulationState> {
    let grid = &state.grid;
    if layer.ncols != grid.width as usize || layer.nrows != grid.height as usize {
        return Err(SimError::DimensionMismatch {
            layer_cols: layer.ncols,
            layer_rows: layer.nrows,
            grid_cols: grid.width as usize,
            grid_rows: grid.height as usize,
        });
    }
    let (slot, spec) = def
        .patch_attr(attr)
        .ok_or_else(|| SimError::UnknownAttribute {
            kind: "patch".into(),
            attr: attr.into(),
        })?;
    if spec.ty != AttrType::Real {
        return Err(SimError::TypeMismatch {
            attr: attr.into(),
            expected: "real",
            got: spec.ty.name(),
        });
    }
    let mut next = state.clone();
    for (i, record) in next.grid.cells.iter_mut().enumerate() {
        let raw = layer.values[i];
        if raw == layer.nodata {
            continue;
        }
        let mut v = transform.apply(raw);
        if let Some((lo, hi)) = clamp {
            v = v.clamp(lo, hi);
        }
        record[slot] = spec.check(&Value::Real(v))?;
    }
    Ok(next)
}
