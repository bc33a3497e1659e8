//! Per-tick snapshots with rewind, truncate-on-edit and replay verification.
//!
//! The timeline stores a full canonical snapshot for every tick `0..=max`.
//! Rewinding only moves the cursor. Stepping forward from a rewound cursor
//! keeps the recorded future as long as the new state hashes equal to the
//! recorded one; an edit (or any divergent step) discards every snapshot after
//! the cursor and bumps `branch_count`.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Result, SimError};
use crate::kernel::{step, ModelDefinition, SimulationState};

/// XXH3-64 of a canonical payload.
pub fn payload_hash(payload: &[u8]) -> u64 {
    xxhash_rust::xxh3::xxh3_64(payload)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tick: u64,
    pub hash: u64,
    payload: Arc<[u8]>,
}

impl Snapshot {
    pub fn capture(state: &SimulationState) -> Self {
        let payload: Arc<[u8]> = state.to_canonical_bytes().into();
        Snapshot {
            tick: state.tick,
            hash: payload_hash(&payload),
            payload,
        }
    }

    /// Rebuilds a snapshot from stored parts without checking them; use
    /// [`Snapshot::is_intact`] or [`Timeline::verify_replay`] to audit.
    pub fn from_parts(tick: u64, payload: Vec<u8>, hash: u64) -> Self {
        Snapshot {
            tick,
            hash,
            payload: payload.into(),
        }
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn is_intact(&self) -> bool {
        payload_hash(&self.payload) == self.hash
    }

    pub fn restore(&self) -> Result<SimulationState> {
        let s = SimulationState::from_canonical_bytes(&self.payload)?;
        if s.tick != self.tick {
            return Err(SimError::Decode(format!(
                "snapshot labelled tick {} holds tick {}",
                self.tick, s.tick
            )));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Timeline {
    snapshots: Vec<Snapshot>,
    current: u64,
    branch_count: u64,
}

impl Timeline {
    pub fn new() -> Self {
        Self::default()
    }

    /// Timeline holding just `initial`.
    pub fn starting_at(initial: &SimulationState) -> Result<Self> {
        let mut t = Timeline::new();
        t.record(initial)?;
        Ok(t)
    }

    /// Rebuilds a timeline from stored snapshots (ticks must run `0..n`).
    pub fn from_snapshots(snapshots: Vec<Snapshot>, current: u64, branch_count: u64) -> Result<Self> {
        for (i, s) in snapshots.iter().enumerate() {
            if s.tick != i as u64 {
                return Err(SimError::NonContiguous {
                    expected: i as u64,
                    got: s.tick,
                });
            }
        }
        if snapshots.is_empty() || current >= snapshots.len() as u64 {
            return Err(SimError::BadTick {
                tick: current,
                max: (snapshots.len() as u64).saturating_sub(1),
            });
        }
        Ok(Timeline {
            snapshots,
            current,
            branch_count,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Highest recorded tick; 0 when empty.
    pub fn max(&self) -> u64 {
        (self.snapshots.len() as u64).saturating_sub(1)
    }

    pub fn current(&self) -> u64 {
        self.current
    }

    pub fn branch_count(&self) -> u64 {
        self.branch_count
    }

    pub fn snapshot(&self, tick: u64) -> Option<&Snapshot> {
        self.snapshots.get(usize::try_from(tick).ok()?)
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn current_state(&self) -> Result<SimulationState> {
        self.snapshot(self.current)
            .ok_or(SimError::BadTick {
                tick: self.current,
                max: self.max(),
            })?
            .restore()
    }

    /// Total bytes held in snapshot payloads.
    pub fn payload_bytes(&self) -> usize {
        self.snapshots.iter().map(|s| s.payload.len()).sum()
    }

    /// Appends `state`, which must be the tick right after the last recorded one.
    pub fn record(&mut self, state: &SimulationState) -> Result<()> {
        let expected = if self.is_empty() { 0 } else { self.max() + 1 };
        if state.tick != expected {
            return Err(SimError::NonContiguous {
                expected,
                got: state.tick,
            });
        }
        self.snapshots.push(Snapshot::capture(state));
        self.current = state.tick;
        Ok(())
    }

    /// Accepts the state produced by stepping from the cursor. Returns `true`
    /// when the recorded future had to be discarded because it diverged.
    pub fn advance(&mut self, state: &SimulationState) -> Result<bool> {
        let expected = self.current + 1;
        if self.is_empty() || state.tick != expected {
            return Err(SimError::NonContiguous {
                expected,
                got: state.tick,
            });
        }
        if expected <= self.max() {
            let snap = Snapshot::capture(state);
            if self.snapshots[expected as usize].hash == snap.hash {
                self.current = expected;
                return Ok(false);
            }
            self.snapshots.truncate(expected as usize);
            self.branch_count += 1;
            self.snapshots.push(snap);
            self.current = expected;
            return Ok(true);
        }
        self.record(state)?;
        Ok(false)
    }

    /// Moves the cursor to `tick` and returns that state. Later snapshots stay.
    pub fn rewind(&mut self, tick: u64) -> Result<SimulationState> {
        let snap = self.snapshot(tick).ok_or(SimError::BadTick { tick, max: self.max() })?;
        let state = snap.restore()?;
        self.current = tick;
        Ok(state)
    }

    /// Continues from the cursor, optionally replacing its state with an
    /// edited one. A replacement that hashes differently truncates the future.
    pub fn resume(&mut self, edited: Option<&SimulationState>) -> Result<()> {
        let Some(edited) = edited else {
            return Ok(());
        };
        if edited.tick != self.current {
            return Err(SimError::NonContiguous {
                expected: self.current,
                got: edited.tick,
            });
        }
        let snap = Snapshot::capture(edited);
        let at = self.current as usize;
        if self.snapshots.get(at).is_some_and(|s| s.hash == snap.hash) {
            return Ok(());
        }
        self.snapshots.truncate(at);
        self.snapshots.push(snap);
        self.branch_count += 1;
        Ok(())
    }

    /// Re-simulates from snapshot `t1` and checks every tick through `t2`
    /// against the stored payloads. Any decode failure or corrupted snapshot
    /// counts as a mismatch.
    pub fn verify_replay(&self, def: &ModelDefinition, t1: u64, t2: u64) -> Result<bool> {
        if t1 >= t2 || t2 > self.max() || self.is_empty() {
            return Err(SimError::Invalid(format!(
                "verify_replay needs t1 < t2 <= {}, got {t1}..{t2}",
                self.max()
            )));
        }
        let start = &self.snapshots[t1 as usize];
        if !start.is_intact() {
            return Ok(false);
        }
        let Ok(mut state) = start.restore() else {
            return Ok(false);
        };
        for t in t1 + 1..=t2 {
            state = step(def, &state);
            let stored = &self.snapshots[t as usize];
            if !stored.is_intact() || state.digest() != stored.hash {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Writes `index.csv` (`tick,hash` with 16-digit hex) and one
    /// `snapshots/<tick>.json` payload per tick into `dir`.
    pub fn export(&self, dir: &Path) -> io::Result<()> {
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps)?;
        let mut index = String::from("tick,hash\n");
        for s in &self.snapshots {
            index.push_str(&format!("{},{:016x}\n", s.tick, s.hash));
            fs::write(snaps.join(format!("{:06}.json", s.tick)), s.payload())?;
        }
        fs::write(dir.join("index.csv"), index)
    }

    /// Reads an exported timeline back; the cursor is placed at the last tick.
    pub fn import(dir: &Path) -> Result<Self> {
        let io_err = |e: io::Error| SimError::Decode(e.to_string());
        let index = fs::read_to_string(dir.join("index.csv")).map_err(io_err)?;
        let mut snapshots = Vec::new();
        for line in index.lines().skip(1) {
            let (tick, hash) = line
                .split_once(',')
                .ok_or_else(|| SimError::Decode(format!("bad index line `{line}`")))?;
            let tick: u64 = tick.parse().map_err(|_| SimError::Decode(format!("bad tick `{tick}`")))?;
            let hash = u64::from_str_radix(hash, 16).map_err(|_| SimError::Decode(format!("bad hash `{hash}`")))?;
            let payload = fs::read(dir.join("snapshots").join(format!("{tick:06}.json"))).map_err(io_err)?;
            snapshots.push(Snapshot::from_parts(tick, payload, hash));
        }
        let last = (snapshots.len() as u64).saturating_sub(1);
        Timeline::from_snapshots(snapshots, last, 0)
    }
}
