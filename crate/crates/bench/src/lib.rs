//! Shared fixtures for the criterion benches.

use spikesim_core::integrators::StepSize;
use spikesim_core::network::{
    NeuronModel, NeuronSpec, PlasticityMode, SimConfig, StimulusProgram, Synapse, Topology,
};
use spikesim_core::neurons::{McGregorParams, Polarity};
use spikesim_core::plasticity::AlphaKernel;

/// A grid of McGregor cells with local excitatory fan-out and a pulsed
/// stimulus on the first row; roughly `side^2` cells and `4 side^2` synapses.
pub fn grid_network(side: usize) -> (Topology, SimConfig, StimulusProgram) {
    let n = side * side;
    let neurons: Vec<NeuronSpec> = (0..n)
        .map(|idx| NeuronSpec {
            model: NeuronModel::McGregor(McGregorParams { b: 60.0, ..Default::default() }),
            polarity: if idx % 5 == 4 {
                Polarity::Inhibitory
            } else {
                Polarity::Excitatory
            },
        })
        .collect();
    let kernel = AlphaKernel::new(1.0, 5.0).unwrap();
    let mut synapses = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let pre = r * side + c;
            for (dr, dc) in [(0usize, 1usize), (1, 0), (1, 1), (0, 2)] {
                let (nr, nc) = (r + dr, c + dc);
                if nr < side && nc < side {
                    synapses.push(Synapse::new(pre, nr * side + nc, 0.4, 1.0, kernel));
                }
            }
        }
    }
    let mut config = SimConfig::new(StepSize::new(0.1).unwrap(), 100.0, 7).unwrap();
    config.plasticity = PlasticityMode::Off;
    let mut stimulus = StimulusProgram::new();
    for c in 0..side {
        for k in 0..5 {
            let t0 = 1.0 + k as f64 * 18.0;
            stimulus.add_current(c, t0, t0 + 3.0, 40.0).unwrap();
        }
    }
    (topology_with(neurons, synapses), config, stimulus)
}

fn topology_with(neurons: Vec<NeuronSpec>, synapses: Vec<Synapse>) -> Topology {
    Topology::new(neurons, synapses)
}
