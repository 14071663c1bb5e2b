//! McGregor's integrate-and-fire model with potassium-mediated refractoriness
//! and an adapting threshold.
//!
//! All potentials are transmembrane offsets from rest (`E = V - Vr`), and the
//! conductances are normalized by the resting membrane conductance.
//!
//! ```text
//! dE/dt  = (-E + GK (EK - E) + Ge (Ee - E) + Gi (Ei - E) + SCN) / Tmem
//! dGK/dt = (-GK + B S) / TGK
//! dTh/dt = (-(Th - Th0) + c E) / TTh
//! S      = 1 on the step after an upward crossing of E through Th, else 0
//! ```

use crate::error::{Error, Result};
use crate::integrators::{self, Method, StepSize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McGregorParams {
    /// Membrane time constant, ms.
    pub t_mem: f64,
    /// Potassium conductance decay constant, ms.
    pub t_gk: f64,
    /// Threshold decay constant, ms.
    pub t_th: f64,
    /// Post-firing potassium increment.
    pub b: f64,
    /// Threshold rise coefficient, in [0, 1].
    pub c: f64,
    /// Resting threshold, mV.
    pub th0: f64,
    /// Potassium reversal offset, mV.
    pub e_k: f64,
    /// Excitatory reversal offset, mV.
    pub e_e: f64,
    /// Inhibitory reversal offset, mV.
    pub e_i: f64,
}

impl Default for McGregorParams {
    fn default() -> Self {
        McGregorParams {
            t_mem: 10.0,
            t_gk: 3.0,
            t_th: 25.0,
            b: 20.0,
            c: 0.3,
            th0: 10.0,
            e_k: -10.0,
            e_e: 70.0,
            e_i: -10.0,
        }
    }
}

impl McGregorParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_mem <= 0.0 || self.t_gk <= 0.0 || self.t_th <= 0.0 {
            return Err(Error::argument("McGregor time constants must be positive"));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(Error::argument(format!(
                "threshold rise coefficient must be in [0,1], got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McGregorState {
    /// Transmembrane potential offset, mV.
    pub e: f64,
    /// Normalized potassium conductance.
    pub gk: f64,
    /// Current threshold, mV.
    pub th: f64,
    /// S flag: the neuron crossed threshold on the previous step.
    pub fired_last_step: bool,
}

impl McGregorState {
    pub fn rest(p: &McGregorParams) -> Self {
        McGregorState {
            e: 0.0,
            gk: 0.0,
            th: p.th0,
            fired_last_step: false,
        }
    }
}

pub const MAX_DT_MS: f64 = 0.5;

/// Time derivatives of `(E, GK, Th)` given synaptic conductances and the
/// normalized injected current `scn`. `S` comes from the previous step.
pub fn mcgregor_derivatives(
    s: &McGregorState,
    p: &McGregorParams,
    ge: f64,
    gi: f64,
    scn: f64,
) -> Result<[f64; 3]> {
    if ge < 0.0 || gi < 0.0 {
        return Err(Error::argument(format!(
            "synaptic conductances must be non-negative, got Ge={ge}, Gi={gi}"
        )));
    }
    let s_flag = f64::from(s.fired_last_step);
    Ok([
        (-s.e + s.gk * (p.e_k - s.e) + ge * (p.e_e - s.e) + gi * (p.e_i - s.e) + scn) / p.t_mem,
        (-s.gk + p.b * s_flag) / p.t_gk,
        (-(s.th - p.th0) + p.c * s.e) / p.t_th,
    ])
}

/// Advance one step. A spike is an upward crossing of `E` through `Th`
/// (edge-triggered); the `S` flag is then held at 1 for exactly the next
/// step so the `B*S` surge enters `dGK` once.
pub fn mcgregor_step(
    s: &McGregorState,
    p: &McGregorParams,
    ge: f64,
    gi: f64,
    scn: f64,
    dt: StepSize,
    method: Method,
) -> Result<(McGregorState, bool)> {
    if dt.ms() > MAX_DT_MS {
        return Err(Error::argument(format!(
            "McGregor needs dt <= {MAX_DT_MS} ms, got {}",
            dt.ms()
        )));
    }
    // Validate conductances once; the closure can then assume them.
    mcgregor_derivatives(s, p, ge, gi, scn)?;

    let was_above = s.e >= s.th;
    let fired = s.fired_last_step;
    let sys = |_t: f64, y: &[f64; 3]| {
        let state = McGregorState {
            e: y[0],
            gk: y[1],
            th: y[2],
            fired_last_step: fired,
        };
        mcgregor_derivatives(&state, p, ge, gi, scn).expect("conductances validated")
    };
    let y = integrators::step(&sys, 0.0, &[s.e, s.gk, s.th], dt, method)?;
    if !y[0].is_finite() || y[0].abs() > 500.0 {
        return Err(Error::Instability {
            var: "E",
            value: y[0],
            dt_ms: dt.ms(),
            t_ms: 0.0,
            neuron: None,
        });
    }
    let now_above = y[0] >= y[2];
    let spiked = now_above && !was_above;
    Ok((
        McGregorState {
            e: y[0],
            gk: y[1].max(0.0),
            th: y[2],
            fired_last_step: spiked,
        },
        spiked,
    ))
}
