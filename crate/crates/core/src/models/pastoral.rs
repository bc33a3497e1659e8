//! Pastoral unit: ground water, fresh and dry grass on patches; cows (or
//! whole herds) that graze; trees that draw water.
//!
//! One tick is about one week. Every constant lives in [`PastoralParams`],
//! whose defaults form the parameter table shipped in `models/pastoral/`.
//!
//! Patch update, in order: water, then grass using the new humidity.
//!
//! ```text
//! rain   = r0 if tick mod S < W else 0
//! h'     = clamp(h + rain - e0 - u_tree * trees_on_patch, 0, 1)
//! growth = g0 * h' * (1 - f - d)
//! dryout = delta * f  if h' < h_dry  else 0
//! f'     = clamp(f + growth - dryout, 0, 1)
//! d'     = min(clamp(d + dryout - mu * d, 0, 1), 1 - f')
//! ```

use crate::error::{Result, SimError};
use crate::kernel::{AgentClass, AgentCtx, Model, ModelDefinition, Schema, SimulationState};
use crate::observation::{ramp, PointOfView, ProbeDef, Rgb, VisualAttrs};
use crate::space::{Grid, Neighborhood, Topology};
use crate::value::{AttrSpec, Params, ParamsExt, Value};

pub const HUMIDITY: usize = 0;
pub const FRESH: usize = 1;
pub const DRY: usize = 2;

pub const COW: &str = "cow";
pub const TREE: &str = "tree";
pub const ENERGY: usize = 0;
pub const BIOMASS: usize = 0;

/// Biomass gained per tick per unit of humidity.
pub const TREE_GROWTH: f64 = 0.1;
pub const COW_SIZE: f64 = 0.6;
pub const TREE_SIZE: f64 = 0.5;

/// Typed view of the pastoral parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PastoralParams {
    pub season_length: u64,
    pub wet_season: u64,
    pub rain: f64,
    pub evaporation: f64,
    pub tree_uptake: f64,
    pub grass_growth: f64,
    pub drying_threshold: f64,
    pub drying_rate: f64,
    pub dry_decay: f64,
    pub bite: f64,
    pub energy_yield: f64,
    pub move_cost: f64,
    pub metabolism: f64,
    pub herd_scale: f64,
}

impl Default for PastoralParams {
    fn default() -> Self {
        PastoralParams {
            season_length: 52,
            wet_season: 16,
            rain: 0.08,
            evaporation: 0.02,
            tree_uptake: 0.05,
            grass_growth: 0.25,
            drying_threshold: 0.15,
            drying_rate: 0.2,
            dry_decay: 0.05,
            bite: 0.3,
            energy_yield: 1.0,
            move_cost: 0.1,
            metabolism: 0.05,
            herd_scale: 1.0,
        }
    }
}

impl PastoralParams {
    pub fn from_params(p: &Params) -> Self {
        PastoralParams {
            season_length: p.int("season_length") as u64,
            wet_season: p.int("wet_season") as u64,
            rain: p.real("rain"),
            evaporation: p.real("evaporation"),
            tree_uptake: p.real("tree_uptake"),
            grass_growth: p.real("grass_growth"),
            drying_threshold: p.real("drying_threshold"),
            drying_rate: p.real("drying_rate"),
            dry_decay: p.real("dry_decay"),
            bite: p.real("bite"),
            energy_yield: p.real("energy_yield"),
            move_cost: p.real("move_cost"),
            metabolism: p.real("metabolism"),
            herd_scale: p.real("herd_scale"),
        }
    }

    pub fn rain_at(&self, tick: u64) -> f64 {
        if tick % self.season_length < self.wet_season {
            self.rain
        } else {
            0.0
        }
    }
}

pub fn water_update(h: f64, tick: u64, n_trees: usize, p: &PastoralParams) -> f64 {
    (h + p.rain_at(tick) - p.evaporation - p.tree_uptake * n_trees as f64).clamp(0.0, 1.0)
}

pub fn grass_update(fresh: f64, dry: f64, h: f64, p: &PastoralParams) -> (f64, f64) {
    let growth = p.grass_growth * h * (1.0 - fresh - dry).max(0.0);
    let dryout = if h < p.drying_threshold {
        p.drying_rate * fresh
    } else {
        0.0
    };
    let f = (fresh + growth - dryout).clamp(0.0, 1.0);
    let d = (dry + dryout - p.dry_decay * dry).clamp(0.0, 1.0).min(1.0 - f);
    (f, d)
}

pub struct Pastoral;

impl Model for Pastoral {
    fn name(&self) -> &'static str {
        "pastoral"
    }

    fn param_specs(&self) -> Vec<AttrSpec> {
        let d = PastoralParams::default();
        let rate = |name: &str, v: f64, doc: &'static str| AttrSpec::real(name, v).range(0.0, 1.0).doc(doc);
        vec![
            AttrSpec::int("width", 20).range(1.0, 1024.0),
            AttrSpec::int("height", 20).range(1.0, 1024.0),
            AttrSpec::symbol("topology", "bounded", &["bounded", "torus"]),
            AttrSpec::int("season_length", d.season_length as i64)
                .range(1.0, 1e6)
                .doc("ticks per seasonal cycle"),
            AttrSpec::int("wet_season", d.wet_season as i64)
                .range(0.0, 1e6)
                .doc("rainy ticks at the start of each cycle"),
            rate("rain", d.rain, "humidity added per rainy tick"),
            rate("evaporation", d.evaporation, "humidity lost per tick"),
            rate("tree_uptake", d.tree_uptake, "humidity drawn per tree per tick"),
            rate("grass_growth", d.grass_growth, "logistic grass growth rate"),
            rate("drying_threshold", d.drying_threshold, "humidity below which fresh grass dries"),
            rate("drying_rate", d.drying_rate, "fraction of fresh grass drying per tick"),
            rate("dry_decay", d.dry_decay, "fraction of dry grass lost per tick"),
            rate("bite", d.bite, "maximum grass eaten per cow per tick"),
            rate("energy_yield", d.energy_yield, "energy per unit of grass eaten"),
            rate("move_cost", d.move_cost, "energy spent when moving"),
            rate("metabolism", d.metabolism, "energy spent every tick"),
            AttrSpec::real("herd_scale", d.herd_scale)
                .range(0.0, 1000.0)
                .doc("multiplies bite and metabolism; >1 models whole herds"),
            AttrSpec::real("initial_energy", 1.0).range(1e-9, 1e6),
            AttrSpec::int("cows", 10).range(0.0, 100_000.0),
            AttrSpec::int("trees", 15).range(0.0, 100_000.0),
            rate("initial_humidity", 0.5, "mean humidity at tick 0"),
            rate("initial_fresh", 0.3, "mean fresh grass at tick 0"),
            rate("initial_dry", 0.1, "mean dry grass at tick 0"),
            rate("initial_spread", 0.2, "half-width of the uniform jitter around the means"),
        ]
    }

    fn validate(&self, p: &Params) -> Result<()> {
        if p.int("wet_season") > p.int("season_length") {
            return Err(SimError::BadParameter {
                name: "wet_season".into(),
                reason: "must not exceed season_length".into(),
            });
        }
        Ok(())
    }

    fn schema(&self, _params: &Params) -> Schema {
        Schema {
            patch: vec![
                AttrSpec::real("humidity", 0.0).range(0.0, 1.0),
                AttrSpec::real("fresh_grass", 0.0).range(0.0, 1.0),
                AttrSpec::real("dry_grass", 0.0).range(0.0, 1.0),
            ],
            agents: vec![
                AgentClass {
                    name: COW.into(),
                    attrs: vec![AttrSpec::real("energy", 1.0).range(0.0, 1e6)],
                },
                AgentClass {
                    name: TREE.into(),
                    attrs: vec![AttrSpec::real("biomass", 0.0).range(0.0, 1e12)],
                },
            ],
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
        let p = state.params.clone();
        let spread = p.real("initial_spread");
        let (h0, f0, d0) = (p.real("initial_humidity"), p.real("initial_fresh"), p.real("initial_dry"));
        for i in 0..state.grid.len() {
            let mut jitter = |mean: f64| (mean + spread * (2.0 * state.rng.uniform() - 1.0)).clamp(0.0, 1.0);
            let h = jitter(h0);
            let f = jitter(f0);
            let d = jitter(d0).min(1.0 - f);
            state.grid.cells[i] = vec![Value::Real(h), Value::Real(f), Value::Real(d)];
        }
        let n = state.grid.len() as u64;
        for _ in 0..p.int("trees") {
            let cell = state.grid.cell_at(state.rng.below(n) as usize);
            state.spawn_agent(TREE, cell, vec![Value::Real(0.0)]);
        }
        for _ in 0..p.int("cows") {
            let cell = state.grid.cell_at(state.rng.below(n) as usize);
            state.spawn_agent(COW, cell, vec![Value::Real(p.real("initial_energy"))]);
        }
        Ok(())
    }

    fn patch_phase(&self, prev: &SimulationState, next: &mut Grid) {
        let p = PastoralParams::from_params(&prev.params);
        for (i, rec) in next.cells.iter_mut().enumerate() {
            let cell = prev.grid.cell_at(i);
            let trees = prev
                .occupants(cell)
                .iter()
                .filter(|id| prev.agent(**id).is_some_and(|a| a.alive && a.class == TREE))
                .count();
            let h = water_update(rec[HUMIDITY].as_real(), prev.tick, trees, &p);
            let (f, d) = grass_update(rec[FRESH].as_real(), rec[DRY].as_real(), h, &p);
            *rec = vec![Value::Real(h), Value::Real(f), Value::Real(d)];
        }
    }

    fn agent_step(&self, ctx: &mut AgentCtx<'_>) {
        let p = PastoralParams::from_params(ctx.params());
        match ctx.class() {
            COW => cow_step(ctx, &p),
            TREE => tree_step(ctx),
            _ => {}
        }
    }

    fn probes(&self, _params: &Params) -> Vec<ProbeDef> {
        let sum = |slot: usize| move |s: &SimulationState| s.grid.cells.iter().map(|c| c[slot].as_real()).sum::<f64>();
        vec![
            ProbeDef::total("total_fresh_grass", sum(FRESH)),
            ProbeDef::total("total_dry_grass", sum(DRY)),
            ProbeDef::total("mean_humidity", move |s| sum(HUMIDITY)(s) / s.grid.len() as f64),
            ProbeDef::total("cows", |s| s.live_agents().filter(|a| a.class == COW).count() as f64),
            ProbeDef::total("mean_cow_energy", |s| {
                let (n, e) = s
                    .live_agents()
                    .filter(|a| a.class == COW)
                    .fold((0usize, 0.0), |(n, e), a| (n + 1, e + a.attrs[ENERGY].as_real()));
                if n == 0 {
                    0.0
                } else {
                    e / n as f64
                }
            }),
            ProbeDef::total("tree_biomass", |s| {
                s.live_agents()
                    .filter(|a| a.class == TREE)
                    .map(|a| a.attrs[BIOMASS].as_real())
                    .sum()
            }),
        ]
    }

    fn povs(&self, _params: &Params) -> Vec<PointOfView> {
        let cow = |_: &crate::kernel::Agent| VisualAttrs::circle(Rgb::RED, COW_SIZE);
        let tree = |_: &crate::kernel::Agent| VisualAttrs::circle(Rgb::PINK, TREE_SIZE);
        vec![
            PointOfView::new("grass", |rec| grass_color(rec[FRESH].as_real(), rec[DRY].as_real()))
                .agent(COW, cow)
                .agent(TREE, tree),
            PointOfView::new("humidity", |rec| ramp(Rgb::WHITE, Rgb::BLUE, rec[HUMIDITY].as_real()))
                .agent(COW, cow)
                .agent(TREE, tree),
        ]
    }
}

/// White where bare, mixing towards green by the fresh share and towards
/// yellow by the dry share.
pub fn grass_color(fresh: f64, dry: f64) -> Rgb {
    let f = fresh.clamp(0.0, 1.0);
    let d = dry.clamp(0.0, 1.0 - f);
    let ch = |x: f64| (255.0 * x).round().clamp(0.0, 255.0) as u8;
    Rgb(ch(1.0 - f), 255, ch(1.0 - f - d))
}

/// Graze: pick the richest cell among here and the Moore neighbors (ties to
/// the lowest row-major index), eat fresh grass then dry grass, pay
/// metabolism and any move cost, die at zero energy.
pub fn cow_step(ctx: &mut AgentCtx<'_>, p: &PastoralParams) {
    let here = ctx.cell();
    let mut candidates = ctx.neighbors(Neighborhood::MOORE);
    candidates.push(here);
    let grid = ctx.grid();
    let best = candidates
        .iter()
        .copied()
        .max_by(|a, b| {
            let fa = grid.patch(*a)[FRESH].as_real();
            let fb = grid.patch(*b)[FRESH].as_real();
            fa.total_cmp(&fb).then_with(|| grid.index(*b).cmp(&grid.index(*a)))
        })
        .unwrap_or(here);

    let moved = best != here;
    if moved {
        let _ = ctx.move_to(best);
    }

    let bite = p.bite * p.herd_scale;
    let metabolism = p.metabolism * p.herd_scale;
    let eaten = graze(ctx.patch_mut(best), bite);

    let mut energy = ctx.attr(ENERGY).as_real() + p.energy_yield * eaten - metabolism;
    if moved {
        energy -= p.move_cost;
    }
    ctx.set_attr(ENERGY, Value::Real(energy.max(0.0)));
    if energy <= 0.0 {
        ctx.die();
    }
}

/// Removes up to `bite` from fresh grass, then the shortfall from dry grass.
fn graze(rec: &mut [Value], bite: f64) -> f64 {
    let fresh = rec[FRESH].as_real();
    let from_fresh = bite.min(fresh);
    rec[FRESH] = Value::Real(fresh - from_fresh);
    let mut eaten = from_fresh;
    if from_fresh < bite {
        let dry = rec[DRY].as_real();
        let from_dry = (bite - from_fresh).min(dry);
        rec[DRY] = Value::Real(dry - from_dry);
        eaten += from_dry;
    }
    eaten
}

pub fn tree_step(ctx: &mut AgentCtx<'_>) {
    let h = ctx.patch(ctx.cell())[HUMIDITY].as_real();
    let b = ctx.attr(BIOMASS).as_real();
    ctx.set_attr(BIOMASS, Value::Real(b + TREE_GROWTH * h));
}
