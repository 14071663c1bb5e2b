//! Spiking neuron models, plasticity rules, and a deterministic clock-driven
//! network engine, with hierarchical recognition demos built on top.
//!
//! A minimal run: one pulsed driver cell exciting one integrator.
//!
//! ```
//! use spikesim_core::integrators::StepSize;
//! use spikesim_core::network::{
//!     build, NeuronModel, NeuronSpec, Probes, SimConfig, StimulusProgram, Synapse, Topology,
//! };
//! use spikesim_core::neurons::{McGregorParams, Polarity};
//! use spikesim_core::plasticity::AlphaKernel;
//!
//! let cell = |polarity| NeuronSpec {
//!     model: NeuronModel::McGregor(McGregorParams::default()),
//!     polarity,
//! };
//! let topology = Topology::new(
//!     vec![cell(Polarity::Excitatory), cell(Polarity::Excitatory)],
//!     vec![Synapse::new(0, 1, 0.5, 1.0, AlphaKernel::new(1.0, 5.0)?)],
//! );
//! let config = SimConfig::new(StepSize::new(0.1)?, 100.0, 42)?;
//! let mut stimulus = StimulusProgram::new();
//! stimulus.add_current(0, 5.0, 8.0, 50.0)?;
//!
//! let mut engine = build(&topology, &config)?;
//! let result = engine.run(&stimulus, &Probes::none())?;
//! assert!(result.raster.len() >= 2); // the driver fired and so did its target
//! # Ok::<(), spikesim_core::Error>(())
//! ```

pub mod capacity;
pub mod demos;
pub mod error;
pub mod events;
pub mod integrators;
pub mod network;
pub mod neurons;
pub mod plasticity;
pub mod recognition;

pub use capacity::{capacity_bound, CapacityEstimate};
pub use error::{Error, Result};
pub use events::{isi_sequence, spike_count, Raster, SpikeEvent, SpikeTrain, TimeMs};
pub use integrators::{euler_step, integrate_fixed, rk4_step, Method, OdeSystem, StepSize};
pub use neurons::Polarity;
