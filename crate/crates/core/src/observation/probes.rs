use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use crate::kernel::SimulationState;

type ProbeFn = dyn Fn(&SimulationState) -> Result<f64, String> + Send + Sync;

/// A named pure measurement of a state. Probes never draw from the rng.
#[derive(Clone)]
pub struct ProbeDef {
    pub name: String,
    eval: Arc<ProbeFn>,
}

impl ProbeDef {
    pub fn new(name: &str, f: impl Fn(&SimulationState) -> Result<f64, String> + Send + Sync + 'static) -> Self {
        ProbeDef {
            name: name.to_owned(),
            eval: Arc::new(f),
        }
    }

    /// Shorthand for probes that cannot fail.
    pub fn total(name: &str, f: impl Fn(&SimulationState) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |s| Ok(f(s)))
    }

    /// Evaluates the probe; a panicking expression becomes an error value.
    pub fn eval(&self, state: &SimulationState) -> Result<f64, String> {
        catch_unwind(AssertUnwindSafe(|| (self.eval)(state)))
            .unwrap_or_else(|_| Err(format!("probe `{}` panicked", self.name)))
    }
}

impl fmt::Debug for ProbeDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProbeDef").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReading {
    pub name: String,
    pub value: Result<f64, String>,
}

/// Evaluates every probe on the same state, in definition order.
pub fn sample_probes(state: &SimulationState, defs: &[ProbeDef]) -> Vec<ProbeReading> {
    defs.iter()
        .map(|d| ProbeReading {
            name: d.name.clone(),
            value: d.eval(state),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub name: String,
    /// Strictly increasing ticks. Failed samples are stored as NaN.
    pub samples: Vec<(u64, f64)>,
}

/// Series for a fixed probe list, appended one tick at a time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeSeriesSet {
    pub series: Vec<ProbeSeries>,
}

impl ProbeSeriesSet {
    pub fn new(names: &[String]) -> Self {
        ProbeSeriesSet {
            series: names
                .iter()
                .map(|n| ProbeSeries {
                    name: n.clone(),
                    samples: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn record(&mut self, state: &SimulationState, defs: &[ProbeDef]) {
        for (series, reading) in self.series.iter_mut().zip(sample_probes(state, defs)) {
            series.samples.push((state.tick, reading.value.unwrap_or(f64::NAN)));
        }
    }

    /// Last recorded value of each series.
    pub fn last(&self) -> Vec<(String, f64)> {
        self.series
            .iter()
            .map(|s| (s.name.clone(), s.samples.last().map_or(f64::NAN, |x| x.1)))
            .collect()
    }
}
