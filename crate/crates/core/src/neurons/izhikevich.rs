//! Izhikevich's two-variable spiking model, plus the refractory-bounded
//! variant that refuses to reset again inside an absolute refractory window.
//!
//! ```text
//! v' = 0.04 v^2 + 5 v + 140 - u + I
//! u' = a (b v - u)
//! original: if v > 30         -> v = c, u = u + d, spike
//! bounded:  if v > 30 and the last spike is older than dt_min
//!                             -> v = c, u = u + d, spike
//!           if v > 30 otherwise -> v = 30, no spike, u untouched
//! ```
//!
//! Integrated with plain Euler: the hard reset makes higher-order schemes
//! meaningless across the discontinuity.

use rand::Rng;

use crate::error::{Error, Result};
use crate::integrators::StepSize;
use crate::neurons::Polarity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IzhParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl IzhParams {
    /// Excitatory corner at gamma = 0: regular spiking.
    pub fn regular_spiking() -> Self {
        IzhParams { a: 0.02, b: 0.2, c: -65.0, d: 8.0 }
    }

    /// Excitatory/inhibitory parameter blend at `gamma` in [0, 1].
    pub fn corner(polarity: Polarity, gamma: f64) -> Self {
        match polarity {
            Polarity::Excitatory => IzhParams {
                a: 0.02,
                b: 0.2,
                c: -65.0 + 15.0 * gamma,
                d: 8.0 - 6.0 * gamma,
            },
            Polarity::Inhibitory => IzhParams {
                a: 0.02 + 0.08 * gamma,
                b: 0.25 - 0.05 * gamma,
                c: -65.0,
                d: 2.0,
            },
        }
    }
}

/// Draw parameters for one cell with gamma uniform in [0, 1).
pub fn sample_izh_params(polarity: Polarity, rng: &mut impl Rng) -> IzhParams {
    IzhParams::corner(polarity, rng.gen::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IzhState {
    /// Membrane potential, mV.
    pub v: f64,
    /// Recovery variable.
    pub u: f64,
    /// Time of the most recent spike, ms.
    pub last_spike: Option<f64>,
}

impl IzhState {
    pub fn new(v: f64, u: f64) -> Self {
        IzhState { v, u, last_spike: None }
    }

    /// The stable fixed point `v' = u' = 0` below threshold, when it exists;
    /// falls back to the reset voltage otherwise.
    pub fn resting(p: &IzhParams) -> Self {
        // 0.04 v^2 + (5 - b) v + 140 = 0 with u = b v.
        let disc = (5.0 - p.b) * (5.0 - p.b) - 4.0 * 0.04 * 140.0;
        if disc >= 0.0 {
            let v = (-(5.0 - p.b) - disc.sqrt()) / (2.0 * 0.04);
            IzhState::new(v, p.b * v)
        } else {
            IzhState::new(p.c, p.b * p.c)
        }
    }
}

/// Absolute refractory window for the bounded variant, ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefractoryConfig {
    pub dt_min_ms: f64,
}

impl RefractoryConfig {
    pub fn new(dt_min_ms: f64) -> Result<Self> {
        if !dt_min_ms.is_finite() || dt_min_ms <= 0.0 {
            return Err(Error::argument(format!(
                "refractory window must be positive, got {dt_min_ms}"
            )));
        }
        Ok(RefractoryConfig { dt_min_ms })
    }
}

impl Default for RefractoryConfig {
    /// A typical absolute refractory period.
    fn default() -> Self {
        RefractoryConfig { dt_min_ms: 2.0 }
    }
}

pub const MAX_DT_MS: f64 = 0.25;

pub fn izh_derivatives(s: &IzhState, p: &IzhParams, i: f64) -> [f64; 2] {
    [
        0.04 * s.v * s.v + 5.0 * s.v + 140.0 - s.u + i,
        p.a * (p.b * s.v - s.u),
    ]
}

fn euler_advance(s: &IzhState, p: &IzhParams, i: f64, dt: StepSize) -> Result<(f64, f64)> {
    if dt.ms() > MAX_DT_MS {
        return Err(Error::argument(format!(
            "Izhikevich needs dt <= {MAX_DT_MS} ms, got {}",
            dt.ms()
        )));
    }
    let d = izh_derivatives(s, p, i);
    let v = s.v + dt.ms() * d[0];
    let u = s.u + dt.ms() * d[1];
    if !v.is_finite() || v < -500.0 || !u.is_finite() {
        return Err(Error::Instability {
            var: "v",
            value: v,
            dt_ms: dt.ms(),
            t_ms: 0.0,
            neuron: None,
        });
    }
    Ok((v, u))
}

/// One Euler step of the original model. `now` is the time at the end of the
/// step and becomes the spike timestamp on a reset.
pub fn izhikevich_step(
    s: &IzhState,
    p: &IzhParams,
    i: f64,
    dt: StepSize,
    now: f64,
) -> Result<(IzhState, bool)> {
    let (v, u) = euler_advance(s, p, i, dt)?;
    if v > 30.0 {
        Ok((
            IzhState { v: p.c, u: u + p.d, last_spike: Some(now) },
            true,
        ))
    } else {
        Ok((IzhState { v, u, last_spike: s.last_spike }, false))
    }
}

/// One Euler step of the refractory-bounded model: a reset inside the
/// `dt_min` window is suppressed and the potential is clamped to 30 mV.
pub fn izhikevich_step_bounded(
    s: &IzhState,
    p: &IzhParams,
    i: f64,
    dt: StepSize,
    r: &RefractoryConfig,
    now: f64,
) -> Result<(IzhState, bool)> {
    let (v, u) = euler_advance(s, p, i, dt)?;
    if v > 30.0 {
        let out_of_window = match s.last_spike {
            None => true,
            Some(t_last) => now - t_last > r.dt_min_ms,
        };
        if out_of_window {
            Ok((
                IzhState { v: p.c, u: u + p.d, last_spike: Some(now) },
                true,
            ))
        } else {
            Ok((IzhState { v: 30.0, u, last_spike: s.last_spike }, false))
        }
    } else {
        Ok((IzhState { v, u, last_spike: s.last_spike }, false))
    }
}
