//! Fixed-step explicit ODE integration.
//!
//! The integrators are pure and never branch on thresholds: spike resets and
//! crossings are the business of each model's step wrapper. Keeping the
//! numeric core smooth makes it checkable against closed-form solutions.

use crate::error::{Error, Result};

/// A `D`-dimensional autonomous-or-driven system `dy/dt = f(t, y)`.
///
/// The derivative must be a pure function of `(t, y)` for a fixed stimulus
/// program; models capture per-step inputs by value before stepping.
pub trait OdeSystem<const D: usize> {
    fn derivative(&self, t: f64, y: &[f64; D]) -> [f64; D];
}

impl<const D: usize, F> OdeSystem<D> for F
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn derivative(&self, t: f64, y: &[f64; D]) -> [f64; D] {
        self(t, y)
    }
}

/// Strictly positive integration step, in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize(f64);

impl StepSize {
    pub fn new(dt_ms: f64) -> Result<Self> {
        if !dt_ms.is_finite() || dt_ms <= 0.0 {
            return Err(Error::argument(format!(
                "step size must be finite and positive, got {dt_ms}"
            )));
        }
        Ok(StepSize(dt_ms))
    }

    pub fn ms(self) -> f64 {
        self.0
    }
}

/// Which explicit scheme to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Rk4,
}

fn check_finite<const D: usize>(v: &[f64; D]) -> Result<()> {
    for (component, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Numeric { component, step: 0 });
        }
    }
    Ok(())
}

/// Forward Euler: `y + dt * f(t, y)`.
pub fn euler_step<const D: usize>(
    sys: &impl OdeSystem<D>,
    t: f64,
    y: &[f64; D],
    dt: StepSize,
) -> Result<[f64; D]> {
    let h = dt.ms();
    let k = sys.derivative(t, y);
    check_finite(&k)?;
    let mut out = *y;
    for i in 0..D {
        out[i] += h * k[i];
    }
    Ok(out)
}

/// Classical four-stage Runge–Kutta.
pub fn rk4_step<const D: usize>(
    sys: &impl OdeSystem<D>,
    t: f64,
    y: &[f64; D],
    dt: StepSize,
) -> Result<[f64; D]> {
    let h = dt.ms();
    let k1 = sys.derivative(t, y);
    check_finite(&k1)?;

    let mut y2 = *y;
    for i in 0..D {
        y2[i] += 0.5 * h * k1[i];
    }
    let k2 = sys.derivative(t + 0.5 * h, &y2);
    check_finite(&k2)?;

    let mut y3 = *y;
    for i in 0..D {
        y3[i] += 0.5 * h * k2[i];
    }
    let k3 = sys.derivative(t + 0.5 * h, &y3);
    check_finite(&k3)?;

    let mut y4 = *y;
    for i in 0..D {
        y4[i] += h * k3[i];
    }
    let k4 = sys.derivative(t + h, &y4);
    check_finite(&k4)?;

    let mut out = *y;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Advance one step with the chosen method.
pub fn step<const D: usize>(
    sys: &impl OdeSystem<D>,
    t: f64,
    y: &[f64; D],
    dt: StepSize,
    method: Method,
) -> Result<[f64; D]> {
    match method {
        Method::Euler => euler_step(sys, t, y, dt),
        Method::Rk4 => rk4_step(sys, t, y, dt),
    }
}

/// Number of fixed steps covering a horizon of `t_end` ms: `ceil(t_end / dt)`.
///
/// The ratio is nudged down by a few ulps so that horizons which are exact
/// multiples of `dt` in real arithmetic do not gain a spurious extra step.
pub fn step_count(t_end: f64, dt: StepSize) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let ratio = t_end / dt.ms();
    (ratio - ratio * 4.0 * f64::EPSILON).ceil() as usize
}

/// Run `ceil(t_end/dt)` fixed steps from `y0`, invoking `observer` with the
/// post-step `(t, state)` after every step, and return the final state.
pub fn integrate_fixed<const D: usize>(
    sys: &impl OdeSystem<D>,
    y0: [f64; D],
    dt: StepSize,
    t_end: f64,
    method: Method,
    mut observer: impl FnMut(f64, &[f64; D]),
) -> Result<[f64; D]> {
    let steps = step_count(t_end, dt);
    let mut y = y0;
    for k in 0..steps {
        let t = k as f64 * dt.ms();
        y = step(sys, t, &y, dt, method).map_err(|e| match e {
            Error::Numeric { component, .. } => Error::Numeric { component, step: k },
            other => other,
        })?;
        observer((k + 1) as f64 * dt.ms(), &y);
    }
    Ok(y)
}
