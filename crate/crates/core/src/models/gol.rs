//! Conway's Game of Life (B3/S23) on a patch grid.

use crate::error::Result;
use crate::kernel::{Model, ModelDefinition, Schema, SimulationState};
use crate::observation::{PointOfView, ProbeDef, Rgb};
use crate::space::{Grid, Neighborhood, Topology};
use crate::value::{AttrSpec, Params, ParamsExt, Value};

pub struct GameOfLife;

/// B3/S23: a dead cell with three live neighbors is born, a live cell with two
/// or three survives.
pub fn next_cell(alive: bool, live_neighbors: u8) -> bool {
    live_neighbors == 3 || (alive && live_neighbors == 2)
}

fn alive_count(s: &SimulationState) -> usize {
    s.grid.cells.iter().filter(|c| c[0].as_bool()).count()
}

impl Model for GameOfLife {
    fn name(&self) -> &'static str {
        "gol"
    }

    fn param_specs(&self) -> Vec<AttrSpec> {
        vec![
            AttrSpec::int("width", 16).range(1.0, 4096.0).doc("grid columns"),
            AttrSpec::int("height", 16).range(1.0, 4096.0).doc("grid rows"),
            AttrSpec::symbol("topology", "torus", &["bounded", "torus"]),
            AttrSpec::real("density", 0.0)
                .range(0.0, 1.0)
                .doc("probability a cell starts alive; 0 gives an all-dead board"),
        ]
    }

    fn schema(&self, _params: &Params) -> Schema {
        Schema {
            patch: vec![AttrSpec::boolean("alive", false)],
            agents: Vec::new(),
        }
    }

    fn grid_shape(&self, p: &Params) -> (i64, i64, Topology) {
        (
            p.int("width"),
            p.int("height"),
            Topology::parse(p.symbol("topology")).unwrap_or_default(),
        )
    }

    fn populate(&self, _def: &ModelDefinition, state: &mut SimulationState) -> Result<()> {
        let density = state.params.real("density");
        if density > 0.0 {
            for i in 0..state.grid.len() {
                let alive = state.rng.chance(density);
                state.grid.cells[i][0] = Value::Bool(alive);
            }
        }
        Ok(())
    }

    fn patch_phase(&self, prev: &SimulationState, next: &mut Grid) {
        let g = &prev.grid;
        for i in 0..g.len() {
            let cell = g.cell_at(i);
            let n = crate::space::neighbors(g, cell, Neighborhood::MOORE)
                .unwrap_or_default()
                .into_iter()
                .filter(|c| g.patch(*c)[0].as_bool())
                .count() as u8;
            next.cells[i][0] = Value::Bool(next_cell(g.cells[i][0].as_bool(), n));
        }
    }

    fn probes(&self, _params: &Params) -> Vec<ProbeDef> {
        vec![
            ProbeDef::total("alive", |s| alive_count(s) as f64),
            ProbeDef::total("dead", |s| (s.grid.len() - alive_count(s)) as f64),
        ]
    }

    fn povs(&self, _params: &Params) -> Vec<PointOfView> {
        vec![PointOfView::new("life", |rec| {
            if rec[0].as_bool() {
                Rgb::GREEN
            } else {
                Rgb::BLACK
            }
        })]
    }
}
