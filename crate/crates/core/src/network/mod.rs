//! Clock-driven network simulation: topology, stimulus, engine, and the
//! scenario file format.

pub mod engine;
pub mod scenario;
pub mod stimulus;
pub mod topology;

pub use engine::{build, Engine, Probes, RunResult, TraceSample};
pub use stimulus::{CurrentSegment, PoissonSource, StimulusProgram};
pub use topology::{
    NeuronModel, NeuronSpec, PlasticityMode, SimConfig, Synapse, Topology, DEFAULT_DELAY_MS,
};
