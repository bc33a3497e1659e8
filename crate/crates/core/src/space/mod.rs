//! Grid topology, neighborhoods and raster layers.

mod raster;

pub use raster::{apply_layer, import_ascii_grid, AffineTransform, RasterLayer, DEFAULT_NODATA};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[default]
    Bounded,
    Torus,
}

impl Topology {
    pub fn parse(s: &str) -> Option<Topology> {
        match s {
            "bounded" => Some(Topology::Bounded),
            "torus" => Some(Topology::Torus),
            _ => None,
        }
    }
}

/// A grid position. Rows grow downwards, columns to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub const fn new(row: u32, col: u32) -> Self {
        Cell { row, col }
    }
}

/// The patch lattice. `cells` holds one attribute record per patch, row-major,
/// with values in the order of the model's patch schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub width: u32,
    pub height: u32,
    pub topology: Topology,
    pub cells: Vec<Vec<Value>>,
}

impl Grid {
    /// Builds a `width x height` grid where every patch carries `record`.
    pub fn filled(width: i64, height: i64, topology: Topology, record: Vec<Value>) -> Result<Grid> {
        if width < 1 || height < 1 || width > i64::from(u32::MAX) || height > i64::from(u32::MAX) {
            return Err(SimError::BadDimensions { width, height });
        }
        let n = (width * height) as usize;
        Ok(Grid {
            width: width as u32,
            height: height as u32,
            topology,
            cells: vec![record; n],
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width as usize + cell.col as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index / w) as u32, (index % w) as u32)
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && row < i64::from(self.height) && col < i64::from(self.width)
    }

    /// Resolves signed coordinates against the topology: wrapped on a torus,
    /// rejected when off-edge on a bounded grid.
    pub fn resolve(&self, row: i64, col: i64) -> Option<Cell> {
        match self.topology {
            Topology::Torus => Some(Cell::new(
                row.rem_euclid(i64::from(self.height)) as u32,
                col.rem_euclid(i64::from(self.width)) as u32,
            )),
            Topology::Bounded => self
                .contains(row, col)
                .then(|| Cell::new(row as u32, col as u32)),
        }
    }

    pub fn check(&self, row: i64, col: i64) -> Result<Cell> {
        if self.contains(row, col) {
            Ok(Cell::new(row as u32, col as u32))
        } else {
            Err(SimError::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            })
        }
    }

    pub fn patch(&self, cell: Cell) -> &[Value] {
        &self.cells[self.index(cell)]
    }

    pub fn patch_mut(&mut self, cell: Cell) -> &mut Vec<Value> {
        let i = self.index(cell);
        &mut self.cells[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodKind {
    Moore,
    VonNeumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighborhood {
    pub kind: NeighborhoodKind,
    pub radius: u32,
}

impl Neighborhood {
    pub const MOORE: Neighborhood = Neighborhood {
        kind: NeighborhoodKind::Moore,
        radius: 1,
    };
    pub const VON_NEUMANN: Neighborhood = Neighborhood {
        kind: NeighborhoodKind::VonNeumann,
        radius: 1,
    };

    fn includes(&self, dr: i64, dc: i64) -> bool {
        if dr == 0 && dc == 0 {
            return false;
        }
        let r = i64::from(self.radius);
        match self.kind {
            NeighborhoodKind::Moore => dr.abs() <= r && dc.abs() <= r,
            NeighborhoodKind::VonNeumann => dr.abs() + dc.abs() <= r,
        }
    }
}

/// Neighbors of `cell` in row-major scan order of the offset window.
///
/// Off-edge offsets are dropped on bounded grids and wrapped on a torus. On a
/// torus smaller than the window the same cell may appear more than once (or
/// the center itself); each offset contributes exactly one entry.
pub fn neighbors(grid: &Grid, cell: Cell, nb: Neighborhood) -> Result<Vec<Cell>> {
    grid.check(i64::from(cell.row), i64::from(cell.col))?;
    let r = i64::from(nb.radius);
    let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1) - 1) as usize);
    for dr in -r..=r {
        for dc in -r..=r {
            if !nb.includes(dr, dc) {
                continue;
            }
            if let Some(c) = grid.resolve(i64::from(cell.row) + dr, i64::from(cell.col) + dc) {
                out.push(c);
            }
        }
    }
    Ok(out)
}
