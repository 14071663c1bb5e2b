//! The four neuron models: threshold unit, Hodgkin–Huxley, McGregor, and
//! Izhikevich (original and refractory-bounded).

pub mod hodgkin_huxley;
pub mod izhikevich;
pub mod mcculloch_pitts;
pub mod mcgregor;

pub use hodgkin_huxley::{hh_derivatives, hh_rates, hh_step, HHParams, HHRates, HHState};
pub use izhikevich::{
    izh_derivatives, izhikevich_step, izhikevich_step_bounded, sample_izh_params, IzhParams,
    IzhState, RefractoryConfig,
};
pub use mcculloch_pitts::{mp_fire, ThresholdUnit};
pub use mcgregor::{mcgregor_derivatives, mcgregor_step, McGregorParams, McGregorState};

/// Whether a cell's outgoing PSPs depolarize or hyperpolarize its targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}
