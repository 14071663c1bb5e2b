//! Canned desk-scale scenarios shared by the CLI and the regression suite:
//! the three-neuron McGregor circuit, the Izhikevich regime corners, and the
//! original-vs-bounded refractory sweep.

use crate::error::Result;
use crate::integrators::{step_count, StepSize};
use crate::network::{
    build, NeuronModel, NeuronSpec, Probes, RunResult, SimConfig, StimulusProgram, Synapse,
    Topology,
};
use crate::neurons::{
    izhikevich_step, izhikevich_step_bounded, IzhParams, IzhState, McGregorParams, Polarity,
    RefractoryConfig,
};
use crate::plasticity::AlphaKernel;

/// Post-neuron spike count of the reference three-neuron run. Regression
/// value produced by the run itself; a change here means the dynamics moved.
pub const FIG5_POST_SPIKES: usize = 8;

/// The three-neuron circuit: an excitatory and an inhibitory cell, each
/// driven by pulse trains, converging on one postsynaptic cell.
/// `inhibitory_scale` multiplies the inhibitory synapse weight (1.0 = reference).
pub fn three_neuron_scenario(inhibitory_scale: f64) -> (Topology, SimConfig, StimulusProgram, Probes) {
    let mcgregor = |polarity| NeuronSpec {
        model: NeuronModel::McGregor(McGregorParams::default()),
        polarity,
    };
    let topology = Topology::new(
        vec![
            mcgregor(Polarity::Excitatory),
            mcgregor(Polarity::Inhibitory),
            mcgregor(Polarity::Excitatory),
        ],
        vec![
            Synapse::new(0, 2, 0.5, 1.0, AlphaKernel::new(1.0, 5.0).unwrap()),
            Synapse::new(
                1,
                2,
                (0.5 * inhibitory_scale).min(1.0),
                1.0,
                AlphaKernel::new(1.0, 8.0).unwrap(),
            ),
        ],
    );
    let config = SimConfig::new(StepSize::new(0.1).unwrap(), 200.0, 0).unwrap();
    let mut stimulus = StimulusProgram::new();
    // Eight excitatory driver pulses...
    for k in 0..8 {
        let t0 = 5.0 + 22.0 * k as f64;
        stimulus.add_current(0, t0, t0 + 3.0, 50.0).unwrap();
    }
    // ...and five inhibitory driver pulses phase-locked to the later
    // excitatory ones, so the IPSPs overlap the EPSPs they should blunt.
    for k in 0..5 {
        let t0 = 40.0 + 22.0 * k as f64;
        stimulus.add_current(1, t0, t0 + 3.0, 50.0).unwrap();
    }
    let probes = Probes::trace(vec![0, 1, 2]);
    (topology, config, stimulus, probes)
}

/// Run the three-neuron circuit and return the result plus the post-neuron
/// spike count.
pub fn run_three_neuron(inhibitory_scale: f64) -> Result<(RunResult, usize)> {
    let (topology, config, stimulus, probes) = three_neuron_scenario(inhibitory_scale);
    let mut engine = build(&topology, &config)?;
    let result = engine.run(&stimulus, &probes)?;
    let post = result.raster.train_of(2).len();
    Ok((result, post))
}

/// The four named regime corners of the parameter table.
pub fn regime_corners() -> Vec<(&'static str, IzhParams)> {
    vec![
        ("RS", IzhParams::corner(Polarity::Excitatory, 0.0)),
        ("IB", IzhParams::corner(Polarity::Excitatory, 1.0)),
        ("LTS", IzhParams::corner(Polarity::Inhibitory, 0.0)),
        ("FS", IzhParams::corner(Polarity::Inhibitory, 1.0)),
    ]
}

/// Spike times of a single original-model cell under constant drive.
pub fn run_izhikevich(p: &IzhParams, i: f64, dt_ms: f64, t_end: f64) -> Result<Vec<f64>> {
    let dt = StepSize::new(dt_ms)?;
    let mut state = IzhState::resting(p);
    let mut spikes = Vec::new();
    for k in 0..step_count(t_end, dt) {
        let now = (k + 1) as f64 * dt_ms;
        let (next, spiked) = izhikevich_step(&state, p, i, dt, now)?;
        if spiked {
            spikes.push(now);
        }
        state = next;
    }
    Ok(spikes)
}

/// Spike times of a single bounded-model cell under constant drive.
pub fn run_izhikevich_bounded(
    p: &IzhParams,
    i: f64,
    dt_ms: f64,
    t_end: f64,
    r: &RefractoryConfig,
) -> Result<Vec<f64>> {
    let dt = StepSize::new(dt_ms)?;
    let mut state = IzhState::resting(p);
    let mut spikes = Vec::new();
    for k in 0..step_count(t_end, dt) {
        let now = (k + 1) as f64 * dt_ms;
        let (next, spiked) = izhikevich_step_bounded(&state, p, i, dt, r, now)?;
        if spiked {
            spikes.push(now);
        }
        state = next;
    }
    Ok(spikes)
}

/// One row of the refractory sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractoryRow {
    pub drive: f64,
    pub original_spikes: usize,
    pub original_min_isi: Option<f64>,
    pub bounded_spikes: usize,
    pub bounded_min_isi: Option<f64>,
}

/// The drive levels the sweep visits.
pub const REFRACTORY_SWEEP_DRIVES: [f64; 6] = [5.0, 10.0, 20.0, 40.0, 80.0, 160.0];

fn min_isi(spikes: &[f64]) -> Option<f64> {
    spikes
        .windows(2)
        .map(|w| w[1] - w[0])
        .min_by(|a, b| a.partial_cmp(b).expect("finite ISIs"))
}

/// Original vs bounded regular-spiking cell across the drive sweep,
/// 500 ms at dt = 0.1 ms.
pub fn refractory_sweep(r: &RefractoryConfig) -> Result<Vec<RefractoryRow>> {
    let p = IzhParams::regular_spiking();
    REFRACTORY_SWEEP_DRIVES
        .iter()
        .map(|&drive| {
            let original = run_izhikevich(&p, drive, 0.1, 500.0)?;
            let bounded = run_izhikevich_bounded(&p, drive, 0.1, 500.0, r)?;
            Ok(RefractoryRow {
                drive,
                original_min_isi: min_isi(&original),
                original_spikes: original.len(),
                bounded_min_isi: min_isi(&bounded),
                bounded_spikes: bounded.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_neuron_reference_count_is_pinned() {
        let (result, post) = run_three_neuron(1.0).unwrap();
        assert!(post >= 1, "post neuron never fired");
        assert_eq!(post, FIG5_POST_SPIKES, "reference spike count moved");
        // Both drivers actually fired.
        assert!(result.raster.train_of(0).len() >= 4);
        assert!(result.raster.train_of(1).len() >= 3);
    }

    #[test]
    fn doubling_inhibition_strictly_reduces_post_spikes() {
        let (_, reference) = run_three_neuron(1.0).unwrap();
        let (_, damped) = run_three_neuron(2.0).unwrap();
        assert!(
            damped < reference,
            "doubling inhibition did not reduce spikes: {reference} -> {damped}"
        );
    }

    #[test]
    fn post_threshold_visibly_adapts() {
        let (result, _) = run_three_neuron(1.0).unwrap();
        let max_th = result
            .traces
            .iter()
            .filter(|s| s.neuron_id == 2 && s.var == "Th")
            .map(|s| s.value)
            .fold(f64::MIN, f64::max);
        assert!(max_th > McGregorParams::default().th0 + 0.5, "Th peaked at {max_th}");
    }

    #[test]
    fn refractory_sweep_shows_the_contrast() {
        let rows = refractory_sweep(&RefractoryConfig::default()).unwrap();
        assert_eq!(rows.len(), 6);
        let top = rows.last().unwrap();
        assert!(top.original_min_isi.unwrap() < 2.0);
        for row in &rows {
            if let Some(isi) = row.bounded_min_isi {
                assert!(isi >= 2.0, "bounded ISI {isi} at I={}", row.drive);
            }
        }
    }
}
