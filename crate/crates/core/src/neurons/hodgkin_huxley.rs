//! Hodgkin–Huxley squid-axon model in the shifted-voltage convention
//! (rest near 0 mV, spike peaks near +100 mV).
//!
//! Membrane equation:
//!
//! ```text
//! C dV/dt = Ie - gK n^4 (V - EK) - gNa m^3 h (V - ENa) - gL (V - EL)
//! dx/dt   = alpha_x(V) (1 - x) - beta_x(V) x      for x in {n, m, h}
//! ```

use crate::error::{Error, Result};
use crate::integrators::{self, Method, StepSize};

/// Membrane and channel constants. Units: µF/cm², mS/cm², mV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HHParams {
    pub c_m: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_l: f64,
    pub e_na: f64,
    pub e_k: f64,
    pub e_l: f64,
}

impl Default for HHParams {
    fn default() -> Self {
        HHParams {
            c_m: 1.0,
            g_na: 120.0,
            g_k: 36.0,
            g_l: 0.3,
            e_na: 115.0,
            e_k: -12.0,
            e_l: 10.6,
        }
    }
}

/// Membrane potential plus the three gating variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HHState {
    pub v: f64,
    pub n: f64,
    pub m: f64,
    pub h: f64,
}

/// Voltage above which an upward crossing counts as a spike. The model has
/// no reset, so spikes are detected rather than declared.
pub const SPIKE_DETECT_MV: f64 = 50.0;

/// Largest step the kinetics tolerate without visible error.
pub const MAX_DT_MS: f64 = 0.05;

/// Channel opening/closing rates at membrane voltage `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HHRates {
    pub alpha_n: f64,
    pub beta_n: f64,
    pub alpha_m: f64,
    pub beta_m: f64,
    pub alpha_h: f64,
    pub beta_h: f64,
}

/// `x / (exp(x/10) - 1)` with its removable singularity at `x = 0` filled in.
fn vtrap10(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        // Taylor expansion around 0: 10 - x/2 + O(x^2).
        10.0 - 0.5 * x
    } else {
        x / ((x / 10.0).exp() - 1.0)
    }
}

/// The 1952 closed-form rate functions in the shifted convention.
pub fn hh_rates(v: f64) -> HHRates {
    HHRates {
        alpha_n: 0.01 * vtrap10(10.0 - v),
        beta_n: 0.125 * (-v / 80.0).exp(),
        alpha_m: 0.1 * vtrap10(25.0 - v),
        beta_m: 4.0 * (-v / 18.0).exp(),
        alpha_h: 0.07 * (-v / 20.0).exp(),
        beta_h: 1.0 / (((30.0 - v) / 10.0).exp() + 1.0),
    }
}

impl HHState {
    /// State with every gate at its steady value for voltage `v`.
    pub fn steady_at(v: f64) -> Self {
        let r = hh_rates(v);
        HHState {
            v,
            n: r.alpha_n / (r.alpha_n + r.beta_n),
            m: r.alpha_m / (r.alpha_m + r.beta_m),
            h: r.alpha_h / (r.alpha_h + r.beta_h),
        }
    }

    /// Nominal rest: 0 mV in the shifted convention, gates at steady state.
    pub fn rest() -> Self {
        HHState::steady_at(0.0)
    }
}

/// Time derivatives of `(V, n, m, h)` under injected current `i_e` (µA/cm²).
pub fn hh_derivatives(s: &HHState, p: &HHParams, i_e: f64) -> [f64; 4] {
    let r = hh_rates(s.v);
    let i_k = p.g_k * s.n.powi(4) * (s.v - p.e_k);
    let i_na = p.g_na * s.m.powi(3) * s.h * (s.v - p.e_na);
    let i_l = p.g_l * (s.v - p.e_l);
    [
        (i_e - i_k - i_na - i_l) / p.c_m,
        r.alpha_n * (1.0 - s.n) - r.beta_n * s.n,
        r.alpha_m * (1.0 - s.m) - r.beta_m * s.m,
        r.alpha_h * (1.0 - s.h) - r.beta_h * s.h,
    ]
}

/// Advance one step under constant `i_e`; gates are clamped to [0, 1] and a
/// spike is an upward crossing of `V` through [`SPIKE_DETECT_MV`].
pub fn hh_step(
    s: &HHState,
    p: &HHParams,
    i_e: f64,
    dt: StepSize,
    method: Method,
) -> Result<(HHState, bool)> {
    if dt.ms() > MAX_DT_MS {
        return Err(Error::argument(format!(
            "Hodgkin-Huxley needs dt <= {MAX_DT_MS} ms, got {}",
            dt.ms()
        )));
    }
    let sys = |_t: f64, y: &[f64; 4]| {
        let state = HHState { v: y[0], n: y[1], m: y[2], h: y[3] };
        hh_derivatives(&state, p, i_e)
    };
    let y = integrators::step(&sys, 0.0, &[s.v, s.n, s.m, s.h], dt, method)?;
    let next = HHState {
        v: y[0],
        n: y[1].clamp(0.0, 1.0),
        m: y[2].clamp(0.0, 1.0),
        h: y[3].clamp(0.0, 1.0),
    };
    if !next.v.is_finite() || next.v.abs() > 500.0 {
        return Err(Error::Instability {
            var: "V",
            value: next.v,
            dt_ms: dt.ms(),
            t_ms: 0.0,
            neuron: None,
        });
    }
    let spiked = s.v < SPIKE_DETECT_MV && next.v >= SPIKE_DETECT_MV;
    Ok((next, spiked))
}
