//! External drive: piecewise-constant injected currents and Poisson spike
//! sources.

use crate::error::{Error, Result};
use crate::plasticity::AlphaKernel;

/// Constant current over the half-open window `[t0, t1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSegment {
    pub t0_ms: f64,
    pub t1_ms: f64,
    pub amplitude: f64,
}

/// A seeded Poisson spike generator feeding one neuron through a PSP kernel.
/// The weight's sign decides whether the drive excites or inhibits.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSource {
    pub neuron: usize,
    pub rate_hz: f64,
    pub weight: f64,
    pub kernel: AlphaKernel,
}

/// Per-neuron stimulus schedule for one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StimulusProgram {
    /// `(neuron, segments)` with segments sorted and non-overlapping.
    currents: Vec<(usize, Vec<CurrentSegment>)>,
    pub poisson: Vec<PoissonSource>,
}

impl StimulusProgram {
    pub fn new() -> Self {
        StimulusProgram::default()
    }

    /// Add one constant-current segment for a neuron. Segments of one neuron
    /// must not overlap.
    pub fn add_current(&mut self, neuron: usize, t0_ms: f64, t1_ms: f64, amplitude: f64) -> Result<()> {
        if !(t0_ms >= 0.0 && t1_ms >= t0_ms && t1_ms.is_finite()) {
            return Err(Error::argument(format!(
                "bad current segment [{t0_ms}, {t1_ms})"
            )));
        }
        let seg = CurrentSegment { t0_ms, t1_ms, amplitude };
        let entry = match self.currents.iter_mut().find(|(id, _)| *id == neuron) {
            Some((_, segs)) => segs,
            None => {
                self.currents.push((neuron, Vec::new()));
                &mut self.currents.last_mut().unwrap().1
            }
        };
        for existing in entry.iter() {
            if seg.t0_ms < existing.t1_ms && existing.t0_ms < seg.t1_ms {
                return Err(Error::argument(format!(
                    "segment [{}, {}) overlaps [{}, {}) on neuron {neuron}",
                    seg.t0_ms, seg.t1_ms, existing.t0_ms, existing.t1_ms
                )));
            }
        }
        entry.push(seg);
        entry.sort_by(|a, b| a.t0_ms.partial_cmp(&b.t0_ms).expect("finite times"));
        Ok(())
    }

    pub fn add_poisson(&mut self, source: PoissonSource) -> Result<()> {
        if !(source.rate_hz > 0.0 && source.rate_hz.is_finite()) {
            return Err(Error::argument(format!(
                "Poisson rate must be positive, got {}",
                source.rate_hz
            )));
        }
        self.poisson.push(source);
        Ok(())
    }

    /// Injected current for `neuron` at time `t` (half-open segments).
    pub fn current_at(&self, neuron: usize, t_ms: f64) -> f64 {
        self.currents
            .iter()
            .find(|(id, _)| *id == neuron)
            .map(|(_, segs)| {
                segs.iter()
                    .filter(|s| t_ms >= s.t0_ms && t_ms < s.t1_ms)
                    .map(|s| s.amplitude)
                    .sum()
            })
            .unwrap_or(0.0)
    }

    /// Largest neuron id referenced, if any.
    pub fn max_neuron(&self) -> Option<usize> {
        let per_current = self.currents.iter().map(|(id, _)| *id);
        let per_poisson = self.poisson.iter().map(|p| p.neuron);
        per_current.chain(per_poisson).max()
    }

    pub fn is_empty(&self) -> bool {
        self.currents.is_empty() && self.poisson.is_empty()
    }
}
