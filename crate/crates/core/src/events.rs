//! Spike events, trains, and rasters — the shared vocabulary every model and
//! the engine emit into.
//!
//! Raster timestamps are quantized to microsecond resolution (the CSV column
//! carries six decimals), which makes `write_csv` followed by `read_csv` the
//! identity.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A point in simulation time, in milliseconds. Finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TimeMs(f64);

impl TimeMs {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::argument(format!(
                "time must be finite and non-negative, got {value}"
            )));
        }
        Ok(TimeMs(value))
    }

    /// Zero milliseconds.
    pub const ZERO: TimeMs = TimeMs(0.0);

    pub fn ms(self) -> f64 {
        self.0
    }
}

/// One neuron firing once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub neuron_id: usize,
    pub t: TimeMs,
}

/// All firings of a single neuron, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    neuron_id: usize,
    times: Vec<TimeMs>,
}

impl SpikeTrain {
    pub fn new(neuron_id: usize, times: Vec<TimeMs>) -> Result<Self> {
        for pair in times.windows(2) {
            if pair[1].ms() <= pair[0].ms() {
                return Err(Error::argument(format!(
                    "spike times must be strictly increasing, got {} then {}",
                    pair[0].ms(),
                    pair[1].ms()
                )));
            }
        }
        Ok(SpikeTrain { neuron_id, times })
    }

    pub fn empty(neuron_id: usize) -> Self {
        SpikeTrain {
            neuron_id,
            times: Vec::new(),
        }
    }

    pub fn neuron_id(&self) -> usize {
        self.neuron_id
    }

    pub fn times(&self) -> &[TimeMs] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Number of spikes in the half-open window `[t0, t1)`.
///
/// Half-open windows tile: counts over adjacent windows add up without
/// double-counting the seam.
pub fn spike_count(train: &SpikeTrain, t0: TimeMs, t1: TimeMs) -> Result<usize> {
    if t0.ms() > t1.ms() {
        return Err(Error::argument(format!(
            "window start {} exceeds end {}",
            t0.ms(),
            t1.ms()
        )));
    }
    Ok(train
        .times
        .iter()
        .filter(|t| t.ms() >= t0.ms() && t.ms() < t1.ms())
        .count())
}

/// Consecutive inter-spike intervals, in ms. Empty for fewer than two spikes.
pub fn isi_sequence(train: &SpikeTrain) -> Vec<f64> {
    train
        .times
        .windows(2)
        .map(|pair| pair[1].ms() - pair[0].ms())
        .collect()
}

/// The full spike record of a run, sorted by `(t, neuron_id)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Raster {
    events: Vec<SpikeEvent>,
}

/// Quantize to the 1e-6 ms resolution the CSV column carries.
fn quantize(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

impl Raster {
    pub fn new() -> Self {
        Raster::default()
    }

    pub fn from_events(events: impl IntoIterator<Item = SpikeEvent>) -> Self {
        let mut raster = Raster::new();
        for ev in events {
            raster.push(ev);
        }
        raster.sort();
        raster
    }

    /// Append an event; callers that push out of order must `sort` afterwards.
    pub fn push(&mut self, ev: SpikeEvent) {
        let t = TimeMs(quantize(ev.t.ms()));
        self.events.push(SpikeEvent {
            neuron_id: ev.neuron_id,
            t,
        });
    }

    pub fn sort(&mut self) {
        self.events.sort_by(|a, b| {
            a.t.ms()
                .partial_cmp(&b.t.ms())
                .expect("spike times are finite")
                .then(a.neuron_id.cmp(&b.neuron_id))
        });
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The spikes of one neuron as a train.
    pub fn train_of(&self, neuron_id: usize) -> SpikeTrain {
        let times = self
            .events
            .iter()
            .filter(|ev| ev.neuron_id == neuron_id)
            .map(|ev| ev.t)
            .collect();
        SpikeTrain::new(neuron_id, times).expect("raster order implies increasing per-neuron times")
    }

    /// Ids present in the raster, ascending, deduplicated.
    pub fn neuron_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.events.iter().map(|ev| ev.neuron_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// CSV with header `t_ms,neuron_id`, times at fixed six decimals, rows in
    /// `(t, neuron_id)` order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ms,neuron_id\n");
        for ev in &self.events {
            let _ = writeln!(out, "{:.6},{}", ev.t.ms(), ev.neuron_id);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("t_ms,neuron_id") => {}
            other => {
                return Err(Error::format(format!(
                    "expected raster header 't_ms,neuron_id', got {other:?}"
                )))
            }
        }
        let mut events = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (t_str, id_str) = line.split_once(',').ok_or_else(|| {
                Error::format(format!("raster row {} has no comma: {line:?}", idx + 2))
            })?;
            let t: f64 = t_str
                .parse()
                .map_err(|_| Error::format(format!("bad time {t_str:?} on row {}", idx + 2)))?;
            let neuron_id: usize = id_str
                .parse()
                .map_err(|_| Error::format(format!("bad neuron id {id_str:?} on row {}", idx + 2)))?;
            events.push(SpikeEvent {
                neuron_id,
                t: TimeMs::new(t)?,
            });
        }
        Ok(Raster::from_events(events))
    }
}
