use crate::comms;
use crate::error::Result;
use crate::rng::SimRng;
use crate::space::Grid;

use super::{AgentCtx, AgentId, ModelDefinition, SimulationState};

/// Builds the tick-0 state. Equal `(def, seed)` always yields byte-identical states.
pub fn init_simulation(def: &ModelDefinition, seed: u64) -> Result<SimulationState> {
    let (w, h, topology) = def.model().grid_shape(&def.params);
    let grid = Grid::filled(w, h, topology, def.default_patch())?;
    let mut state = SimulationState::new(def.name(), def.params.clone(), grid, seed);
    def.model().populate(def, &mut state)?;
    Ok(state)
}

/// Seeded Fisher–Yates permutation of the live agents, starting from id order.
/// Consumes `n - 1` draws for `n` live agents.
pub fn activation_order(state: &SimulationState, rng: &mut SimRng) -> Vec<AgentId> {
    let mut ids: Vec<AgentId> = state.live_agents().map(|a| a.id).collect();
    rng.shuffle(&mut ids);
    ids
}

/// Executes one tick and returns the successor state.
pub fn step(def: &ModelDefinition, state: &SimulationState) -> SimulationState {
    let mut next = state.clone();

    comms::deliver_in_place(&mut next);

    let mut grid = next.grid.clone();
    def.model().patch_phase(&next, &mut grid);
    next.grid = grid;

    let mut rng = next.rng.clone();
    let order = activation_order(&next, &mut rng);
    next.rng = rng;
    for id in order {
        if !next.agent(id).is_some_and(|a| a.alive) {
            continue;
        }
        let mut ctx = AgentCtx {
            def,
            state: &mut next,
            me: id,
        };
        def.model().agent_step(&mut ctx);
    }

    next.remove_dead();
    next.tick += 1;
    next
}

pub fn run(def: &ModelDefinition, state: &SimulationState, n: u64) -> SimulationState {
    let mut s = state.clone();
    for _ in 0..n {
        s = step(def, &s);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::EntityId;
    use crate::models;
    use crate::value::{Params, Value};

    fn gol(w: i64, h: i64, topology: &str, density: f64) -> ModelDefinition {
        let mut p = Params::new();
        p.insert("width".into(), Value::Int(w));
        p.insert("height".into(), Value::Int(h));
        p.insert("topology".into(), Value::Symbol(topology.into()));
        p.insert("density".into(), Value::Real(density));
        models::definition("gol", &p).unwrap()
    }

    fn alive_cells(s: &SimulationState) -> Vec<usize> {
        (0..s.grid.len()).filter(|&i| s.grid.cells[i][0].as_bool()).collect()
    }

    fn set_alive(def: &ModelDefinition, s: &SimulationState, cells: &[usize]) -> SimulationState {
        let mut s = s.clone();
        for &i in cells {
            s = crate::kernel::set_attribute(def, &s, &EntityId::patch(i as u64), "alive", Value::Bool(true))
                .unwrap();
        }
        s
    }

    #[test]
    fn all_dead_init_and_step() {
        let def = gol(4, 4, "bounded", 0.0);
        let s = init_simulation(&def, 1).unwrap();
        assert_eq!(s.tick, 0);
        assert_eq!(s.grid.len(), 16);
        assert!(alive_cells(&s).is_empty());
        let s1 = step(&def, &s);
        assert_eq!(s1.tick, 1);
        assert!(alive_cells(&s1).is_empty());
    }

    #[test]
    fn blinker_flips_and_has_period_two() {
        let def = gol(5, 5, "bounded", 0.0);
        let s0 = init_simulation(&def, 1).unwrap();
        // vertical column at col 2, rows 1..=3
        let vertical = set_alive(&def, &s0, &[7, 12, 17]);
        let s1 = step(&def, &vertical);
        assert_eq!(alive_cells(&s1), vec![11, 12, 13]);
        let s2 = run(&def, &vertical, 2);
        assert_eq!(s2.grid, vertical.grid);
    }

    #[test]
    fn run_zero_is_identity_and_run_composes() {
        let def = gol(8, 8, "torus", 0.4);
        let s = init_simulation(&def, 5).unwrap();
        assert_eq!(run(&def, &s, 0), s);
        let mut manual = s.clone();
        for _ in 0..5 {
            manual = step(&def, &manual);
        }
        assert_eq!(run(&def, &s, 5).to_canonical_bytes(), manual.to_canonical_bytes());
    }

    #[test]
    fn step_does_not_mutate_input() {
        let def = models::definition("pastoral", &Params::new()).unwrap();
        let s = init_simulation(&def, 3).unwrap();
        let before = s.to_canonical_bytes();
        let _ = step(&def, &s);
        assert_eq!(s.to_canonical_bytes(), before);
    }

    #[test]
    fn init_is_deterministic() {
        let def = gol(16, 16, "torus", 0.5);
        let a = init_simulation(&def, 42).unwrap();
        let b = init_simulation(&def, 42).unwrap();
        assert_eq!(a.to_canonical_bytes(), b.to_canonical_bytes());
        let c = init_simulation(&def, 43).unwrap();
        assert_ne!(a.grid, c.grid);
    }

    #[test]
    fn bad_dimensions_are_rejected() {
        let mut p = Params::new();
        p.insert("width".into(), Value::Int(0));
        assert!(models::definition("gol", &p).is_err());
    }

    #[test]
    fn activation_order_edge_cases() {
        let def = models::definition("pastoral", &Params::new()).unwrap();
        let s = init_simulation(&def, 3).unwrap();
        let mut r1 = s.rng.clone();
        let mut r2 = s.rng.clone();
        let o1 = activation_order(&s, &mut r1);
        assert_eq!(o1, activation_order(&s, &mut r2));
        assert_eq!(r1, r2);
        let mut sorted = o1.clone();
        sorted.sort();
        assert_eq!(sorted, s.agents.iter().map(|a| a.id).collect::<Vec<_>>());

        let empty = init_simulation(&gol(3, 3, "bounded", 0.0), 1).unwrap();
        let mut r = empty.rng.clone();
        assert!(activation_order(&empty, &mut r).is_empty());
        assert_eq!(r, empty.rng, "no draws for zero agents");

        let mut one = empty.clone();
        let id = one.spawn_agent("x", crate::space::Cell::new(0, 0), vec![]);
        let mut r = one.rng.clone();
        assert_eq!(activation_order(&one, &mut r), vec![id]);
        assert_eq!(r, one.rng, "no draws for a single agent");
    }
}
