//! Network description: neuron specs, synapses, and validation.

use crate::error::{Error, Result};
use crate::integrators::StepSize;
use crate::neurons::{
    hodgkin_huxley, izhikevich, mcgregor, HHParams, IzhParams, McGregorParams, Polarity,
    RefractoryConfig,
};
use crate::plasticity::{AlphaKernel, PairingRule, SaprRule, StdpRule, WeightBounds};

/// Which dynamical model a neuron runs, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum NeuronModel {
    /// Threshold unit; fires on an upward crossing of its summed drive
    /// through `theta`.
    McCullochPitts { theta: f64 },
    HodgkinHuxley(HHParams),
    McGregor(McGregorParams),
    Izhikevich(IzhParams),
    IzhikevichBounded(IzhParams, RefractoryConfig),
}

impl NeuronModel {
    /// Largest integration step the model tolerates.
    pub fn max_dt_ms(&self) -> f64 {
        match self {
            NeuronModel::McCullochPitts { .. } => 1.0,
            NeuronModel::HodgkinHuxley(_) => hodgkin_huxley::MAX_DT_MS,
            NeuronModel::McGregor(_) => mcgregor::MAX_DT_MS,
            NeuronModel::Izhikevich(_) | NeuronModel::IzhikevichBounded(..) => {
                izhikevich::MAX_DT_MS
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronSpec {
    pub model: NeuronModel,
    pub polarity: Polarity,
}

/// A weighted, delayed connection delivering alpha-shaped PSPs.
/// `plastic: None` falls back to the default rule: plastic iff the
/// presynaptic cell is excitatory.
#[derive(Debug, Clone, PartialEq)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub weight: f64,
    pub delay_ms: f64,
    pub kernel: AlphaKernel,
    pub plastic: Option<bool>,
}

impl Synapse {
    pub fn new(pre: usize, post: usize, weight: f64, delay_ms: f64, kernel: AlphaKernel) -> Self {
        Synapse {
            pre,
            post,
            weight,
            delay_ms,
            kernel,
            plastic: None,
        }
    }
}

/// Default conduction delay when a scenario does not specify one.
pub const DEFAULT_DELAY_MS: f64 = 1.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub neurons: Vec<NeuronSpec>,
    pub synapses: Vec<Synapse>,
    pub allow_self_loops: bool,
}

impl Topology {
    pub fn new(neurons: Vec<NeuronSpec>, synapses: Vec<Synapse>) -> Self {
        Topology {
            neurons,
            synapses,
            allow_self_loops: false,
        }
    }

    pub fn validate(&self, bounds: &WeightBounds) -> Result<()> {
        for (idx, syn) in self.synapses.iter().enumerate() {
            if syn.pre >= self.neurons.len() || syn.post >= self.neurons.len() {
                return Err(Error::topology(format!(
                    "synapse {idx} references neuron {} of {}",
                    syn.pre.max(syn.post),
                    self.neurons.len()
                )));
            }
            if syn.pre == syn.post && !self.allow_self_loops {
                return Err(Error::topology(format!(
                    "synapse {idx} is a self-loop on neuron {}",
                    syn.pre
                )));
            }
            if !(syn.delay_ms >= 0.0 && syn.delay_ms.is_finite()) {
                return Err(Error::topology(format!(
                    "synapse {idx} has negative delay {}",
                    syn.delay_ms
                )));
            }
            if !bounds.contains(syn.weight) {
                return Err(Error::topology(format!(
                    "synapse {idx} weight {} outside bounds [{}, {}]",
                    syn.weight, bounds.min, bounds.max
                )));
            }
            if syn.kernel.amplitude <= 0.0 {
                return Err(Error::topology(format!(
                    "synapse {idx} kernel amplitude must be positive; polarity \
                     of the presynaptic neuron carries the sign"
                )));
            }
        }
        for (id, spec) in self.neurons.iter().enumerate() {
            if let NeuronModel::McGregor(p) = &spec.model {
                p.validate()
                    .map_err(|e| Error::topology(format!("neuron {id}: {e}")))?;
            }
        }
        Ok(())
    }
}

/// Which pairing rule, if any, runs during a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlasticityMode {
    Off,
    Stdp(StdpRule),
    Sapr(SaprRule),
}

impl PlasticityMode {
    pub fn pairing(&self) -> Option<PairingRule> {
        match self {
            PlasticityMode::Off => None,
            PlasticityMode::Stdp(r) => Some(PairingRule::Stdp(*r)),
            PlasticityMode::Sapr(r) => Some(PairingRule::Sapr(*r)),
        }
    }
}

/// Run-level configuration: step, horizon, seed, plasticity, weight bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: StepSize,
    pub duration_ms: f64,
    pub seed: u64,
    pub plasticity: PlasticityMode,
    pub bounds: WeightBounds,
}

impl SimConfig {
    pub fn new(dt: StepSize, duration_ms: f64, seed: u64) -> Result<Self> {
        if !(duration_ms >= 0.0 && duration_ms.is_finite()) {
            return Err(Error::argument(format!(
                "duration must be finite and non-negative, got {duration_ms}"
            )));
        }
        Ok(SimConfig {
            dt,
            duration_ms,
            seed,
            plasticity: PlasticityMode::Off,
            bounds: WeightBounds::unit(),
        })
    }
}
