//! Self-organizing spiking recognizer: a relay sensory layer that triples
//! each image axis, a feature-extraction layer of excitatory and inhibitory
//! McGregor cells with recurrent excitation, and one recognition cell per
//! label. Feature weights self-organize under repeated unlabeled
//! presentations; recognition weights are shaped by the same pairing rule
//! during a per-label presentation phase. The label whose cell spikes most
//! wins.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrators::StepSize;
use crate::network::{
    build, NeuronModel, NeuronSpec, PlasticityMode, Probes, SimConfig, StimulusProgram, Synapse,
    Topology,
};
use crate::neurons::{McGregorParams, Polarity};
use crate::plasticity::{AlphaKernel, SaprRule, WeightBounds};

use super::binio::{Reader, Writer};
use super::image::Image;

const MAGIC: &[u8] = b"SRN1";

/// Chebyshev radius of the excitatory-to-inhibitory and back projections.
const INHIBITION_RADIUS: usize = 2;

/// Initial weights, as fractions of `w_max`.
const W0_SENSORY: f64 = 0.5;
const W0_RECURRENT: f64 = 0.5;
const W0_EXC_TO_INH: f64 = 0.5;
const W_INH_TO_EXC: f64 = 0.8;
const W0_RECOGNITION: f64 = 0.2;

/// Per-projection PSP kernel amplitudes. An edge-triggered McGregor cell
/// falls silent when its drive parks the membrane above threshold, so each
/// projection is scaled to keep its target inside the tonic firing band
/// even with every afferent weight saturated at `w_max`.
const A_SENSORY: f64 = 0.35;
const A_RECURRENT: f64 = 0.3;
const A_EXC_TO_INH: f64 = 0.5;
const A_INH_TO_EXC: f64 = 0.5;
const A_RECOGNITION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SpikingRecognizerConfig {
    /// Axis multiplier of the sensory relay. The architecture is built
    /// around 3 and the constructor rejects anything else.
    pub upscale: usize,
    /// Fraction of feature cells that are excitatory.
    pub ei_ratio: f64,
    /// Chebyshev radius of recurrent excitatory connections.
    pub recurrence_radius: usize,
    /// Pairing rule used for self-organization and the label phase.
    pub rule: PlasticityMode,
    /// Self-organization stops when the mean per-epoch weight change falls
    /// below this.
    pub epsilon: f64,
    pub max_epochs: usize,
    /// How long each image is presented, per epoch and per prediction.
    pub presentation_ms: f64,
    pub dt_ms: f64,
    pub seed: u64,
    /// Injected current per unit pixel intensity at the sensory layer.
    pub gain: f64,
    /// Upper weight bound; all weights live in [0, w_max].
    pub w_max: f64,
    /// Cell parameters. The default raises the potassium surge so driven
    /// cells fire tonically instead of parking above threshold.
    pub mcgregor: McGregorParams,
    /// Resting threshold of the recognition cells; higher keeps them sparse.
    pub recognition_th0: f64,
    /// Current injected into a label's recognition cell during its
    /// presentation phase; its firing is what lets the pairing rule
    /// strengthen that label's afferents.
    pub teaching_current: f64,
}

impl SpikingRecognizerConfig {
    /// The SAPR instance the recognizer trains with by default. The
    /// inhibitory branch is scaled down so that cells volley-locked to
    /// their inputs strengthen rather than prune their afferents; the
    /// kernel shapes and the potentiation branch are the shared defaults.
    pub fn default_sapr() -> SaprRule {
        let base = SaprRule::default();
        SaprRule {
            epsp: base.epsp,
            ipsp: AlphaKernel { amplitude: -0.004, tau_ms: base.ipsp.tau_ms },
        }
    }
}

impl Default for SpikingRecognizerConfig {
    fn default() -> Self {
        SpikingRecognizerConfig {
            upscale: 3,
            ei_ratio: 0.8,
            recurrence_radius: 1,
            rule: PlasticityMode::Sapr(Self::default_sapr()),
            epsilon: 1e-3,
            max_epochs: 50,
            presentation_ms: 200.0,
            dt_ms: 0.1,
            seed: 1,
            gain: 30.0,
            w_max: 0.1,
            mcgregor: McGregorParams { b: 60.0, ..Default::default() },
            recognition_th0: 10.0,
            teaching_current: 30.0,
        }
    }
}

impl SpikingRecognizerConfig {
    fn validate(&self) -> Result<()> {
        if self.upscale != 3 {
            return Err(Error::argument(format!(
                "the sensory relay triples each axis; upscale must be 3, got {}",
                self.upscale
            )));
        }
        if !(self.ei_ratio > 0.0 && self.ei_ratio < 1.0) {
            return Err(Error::argument(format!(
                "ei_ratio must be in (0,1), got {}",
                self.ei_ratio
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::argument("max_epochs must be at least 1"));
        }
        if !self.w_max.is_finite() || self.w_max <= 0.0 {
            return Err(Error::argument("w_max must be positive"));
        }
        Ok(())
    }

    fn sim_config(&self, plasticity: PlasticityMode) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(
            StepSize::new(self.dt_ms)?,
            self.presentation_ms,
            self.seed,
        )?;
        cfg.plasticity = plasticity;
        cfg.bounds = WeightBounds::new(0.0, self.w_max)?;
        Ok(cfg)
    }
}

/// Map each pixel onto its 3x3 block of sensory cells as a constant current
/// `gain * pixel` held for `duration_ms`. Zero pixels contribute nothing.
pub fn sensory_encode(
    img: &Image,
    gain: f64,
    duration_ms: f64,
) -> Result<StimulusProgram> {
    let mut stim = StimulusProgram::new();
    let cols = img.width() * 3;
    for r in 0..img.height() {
        for c in 0..img.width() {
            let pixel = img.get(r, c);
            if pixel == 0.0 {
                continue;
            }
            for dr in 0..3 {
                for dc in 0..3 {
                    let id = (r * 3 + dr) * cols + (c * 3 + dc);
                    stim.add_current(id, 0.0, duration_ms, gain * pixel)?;
                }
            }
        }
    }
    Ok(stim)
}

/// Deterministic excitatory/inhibitory assignment over the feature grid.
fn assign_polarity(cfg: &SpikingRecognizerConfig, n_features: usize) -> Vec<bool> {
    let n_exc = ((n_features as f64) * cfg.ei_ratio).round() as usize;
    let mut indices: Vec<usize> = (0..n_features).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    indices.shuffle(&mut rng);
    let mut excitatory = vec![false; n_features];
    for &idx in indices.iter().take(n_exc) {
        excitatory[idx] = true;
    }
    excitatory
}

fn chebyshev(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

/// Build the sensory + feature layers (and optionally recognition cells)
/// with initial weights.
fn layout(
    cfg: &SpikingRecognizerConfig,
    width: usize,
    height: usize,
    excitatory: &[bool],
    n_labels: usize,
) -> Topology {
    let n_sensory = 9 * width * height;
    let n_features = width * height;
    let mut neurons = Vec::with_capacity(n_sensory + n_features + n_labels);
    for _ in 0..n_sensory {
        neurons.push(NeuronSpec {
            model: NeuronModel::McGregor(cfg.mcgregor),
            polarity: Polarity::Excitatory,
        });
    }
    for &exc in excitatory {
        neurons.push(NeuronSpec {
            model: NeuronModel::McGregor(cfg.mcgregor),
            polarity: if exc { Polarity::Excitatory } else { Polarity::Inhibitory },
        });
    }
    for _ in 0..n_labels {
        neurons.push(NeuronSpec {
            model: NeuronModel::McGregor(McGregorParams {
                th0: cfg.recognition_th0,
                ..cfg.mcgregor
            }),
            polarity: Polarity::Excitatory,
        });
    }

    let kernel = |amplitude: f64, tau: f64| AlphaKernel::new(amplitude, tau).expect("valid kernel");
    let feature_id = |r: usize, c: usize| n_sensory + r * width + c;
    let sensory_cols = width * 3;
    let mut synapses = Vec::new();

    // Each feature cell listens to the 3x3 sensory block of its pixel.
    // Only these feedforward synapses self-organize; the recurrent and
    // inhibitory wiring stays fixed so the competition has a stable arena.
    for r in 0..height {
        for c in 0..width {
            for dr in 0..3 {
                for dc in 0..3 {
                    let pre = (r * 3 + dr) * sensory_cols + (c * 3 + dc);
                    let mut syn = Synapse::new(
                        pre,
                        feature_id(r, c),
                        W0_SENSORY * cfg.w_max,
                        1.0,
                        kernel(A_SENSORY, 5.0),
                    );
                    syn.plastic = Some(true);
                    synapses.push(syn);
                }
            }
        }
    }
    // Recurrent excitation and the inhibitory loop within the feature layer.
    for r1 in 0..height {
        for c1 in 0..width {
            for r2 in 0..height {
                for c2 in 0..width {
                    if (r1, c1) == (r2, c2) {
                        continue;
                    }
                    let d = chebyshev((r1, c1), (r2, c2));
                    let pre_exc = excitatory[r1 * width + c1];
                    let post_exc = excitatory[r2 * width + c2];
                    let (pre, post) = (feature_id(r1, c1), feature_id(r2, c2));
                    let fixed = if pre_exc && post_exc && d <= cfg.recurrence_radius {
                        Some((W0_RECURRENT, kernel(A_RECURRENT, 5.0)))
                    } else if pre_exc && !post_exc && d <= INHIBITION_RADIUS {
                        Some((W0_EXC_TO_INH, kernel(A_EXC_TO_INH, 5.0)))
                    } else if !pre_exc && post_exc && d <= INHIBITION_RADIUS {
                        Some((W_INH_TO_EXC, kernel(A_INH_TO_EXC, 8.0)))
                    } else {
                        None
                    };
                    if let Some((w0, kernel)) = fixed {
                        let mut syn = Synapse::new(pre, post, w0 * cfg.w_max, 1.0, kernel);
                        syn.plastic = Some(false);
                        synapses.push(syn);
                    }
                }
            }
        }
    }
    // Every excitatory feature cell feeds every recognition cell. These stay
    // frozen here; the label phase unfreezes one cell's afferents at a time.
    for label in 0..n_labels {
        let post = n_sensory + n_features + label;
        for (idx, &exc) in excitatory.iter().enumerate() {
            if exc {
                let mut syn = Synapse::new(
                    n_sensory + idx,
                    post,
                    W0_RECOGNITION * cfg.w_max,
                    1.0,
                    kernel(A_RECOGNITION, 5.0),
                );
                syn.plastic = Some(false);
                synapses.push(syn);
            }
        }
    }

    Topology::new(neurons, synapses)
}

/// Outcome of the unsupervised phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfOrganized {
    pub topology: Topology,
    /// Per feature cell: true when excitatory.
    pub excitatory: Vec<bool>,
    pub width: usize,
    pub height: usize,
    pub epochs: usize,
    pub converged: bool,
    /// Mean absolute weight change of each epoch.
    pub epoch_deltas: Vec<f64>,
}

fn present(
    topology: &mut Topology,
    cfg: &SpikingRecognizerConfig,
    plasticity: PlasticityMode,
    stim: &StimulusProgram,
) -> Result<crate::network::RunResult> {
    let sim = cfg.sim_config(plasticity)?;
    let mut engine = build(topology, &sim)?;
    let result = engine.run(stim, &Probes::none())?;
    for (syn, &w) in topology.synapses.iter_mut().zip(&result.final_weights) {
        syn.weight = w;
    }
    Ok(result)
}

/// Repeatedly present the images in fixed rotation, applying the configured
/// rule, until the mean per-epoch weight change drops below epsilon or
/// `max_epochs` is reached. No labels are used.
pub fn self_organize(
    cfg: &SpikingRecognizerConfig,
    images: &[Image],
) -> Result<SelfOrganized> {
    cfg.validate()?;
    if images.is_empty() {
        return Err(Error::argument("self-organization needs at least one image"));
    }
    let (width, height) = (images[0].width(), images[0].height());
    for img in images {
        if img.width() != width || img.height() != height {
            return Err(Error::argument("images must share one size"));
        }
    }
    let excitatory = assign_polarity(cfg, width * height);
    let mut topology = layout(cfg, width, height, &excitatory, 0);

    let stims: Vec<StimulusProgram> = images
        .iter()
        .map(|img| sensory_encode(img, cfg.gain, cfg.presentation_ms))
        .collect::<Result<_>>()?;

    let mut epoch_deltas = Vec::new();
    let mut converged = false;
    let mut epochs = 0;
    for _ in 0..cfg.max_epochs {
        let before: Vec<f64> = topology.synapses.iter().map(|s| s.weight).collect();
        for stim in &stims {
            present(&mut topology, cfg, cfg.rule, stim)?;
        }
        epochs += 1;
        let delta = topology
            .synapses
            .iter()
            .zip(&before)
            .map(|(s, &w)| (s.weight - w).abs())
            .sum::<f64>()
            / before.len().max(1) as f64;
        epoch_deltas.push(delta);
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok(SelfOrganized {
        topology,
        excitatory,
        width,
        height,
        epochs,
        converged,
        epoch_deltas,
    })
}

/// A fully trained recognizer: self-organized feature weights plus one
/// recognition cell per training image.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikingRecognizer {
    pub config: SpikingRecognizerConfig,
    pub width: usize,
    pub height: usize,
    pub excitatory: Vec<bool>,
    pub topology: Topology,
    pub n_labels: usize,
    pub epochs: usize,
    pub converged: bool,
}

impl SpikingRecognizer {
    /// Self-organize on the images, then run one presentation per label with
    /// plasticity confined to that label's recognition synapses.
    pub fn train(cfg: &SpikingRecognizerConfig, images: &[Image]) -> Result<Self> {
        let organized = self_organize(cfg, images)?;
        let n_labels = images.len();

        // Rebuild with recognition cells, carrying over the trained weights.
        let mut topology = layout(
            cfg,
            organized.width,
            organized.height,
            &organized.excitatory,
            n_labels,
        );
        for (syn, trained) in topology
            .synapses
            .iter_mut()
            .zip(organized.topology.synapses.iter())
        {
            syn.weight = trained.weight;
        }
        let n_feature_synapses = organized.topology.synapses.len();
        let label_base = 9 * organized.width * organized.height
            + organized.width * organized.height;

        for (label, img) in images.iter().enumerate() {
            // Freeze everything except this label's recognition afferents.
            for (idx, syn) in topology.synapses.iter_mut().enumerate() {
                syn.plastic = Some(idx >= n_feature_synapses && syn.post == label_base + label);
            }
            let mut stim = sensory_encode(img, cfg.gain, cfg.presentation_ms)?;
            stim.add_current(label_base + label, 0.0, cfg.presentation_ms, cfg.teaching_current)?;
            present(&mut topology, cfg, cfg.rule, &stim)?;
        }
        for syn in topology.synapses.iter_mut() {
            syn.plastic = Some(false);
        }

        Ok(SpikingRecognizer {
            config: cfg.clone(),
            width: organized.width,
            height: organized.height,
            excitatory: organized.excitatory,
            topology,
            n_labels,
            epochs: organized.epochs,
            converged: organized.converged,
        })
    }

    fn recognition_ids(&self) -> std::ops::Range<usize> {
        let base = 9 * self.width * self.height + self.width * self.height;
        base..base + self.n_labels
    }
}

/// Present an image to a trained net and count recognition-layer spikes.
/// Returns the winning label index (ties to the lowest; `None` when every
/// count is zero) and the full count vector.
pub fn spiking_recognize(
    net: &SpikingRecognizer,
    img: &Image,
    presentation_ms: f64,
) -> Result<(Option<usize>, Vec<usize>)> {
    if img.width() != net.width || img.height() != net.height {
        return Err(Error::argument(format!(
            "image is {}x{}, recognizer was trained on {}x{}",
            img.width(),
            img.height(),
            net.width,
            net.height
        )));
    }
    let mut cfg = net.config.clone();
    cfg.presentation_ms = presentation_ms;
    let sim = cfg.sim_config(PlasticityMode::Off)?;
    let mut topology = net.topology.clone();
    for syn in topology.synapses.iter_mut() {
        syn.plastic = Some(false);
    }
    let mut engine = build(&topology, &sim)?;
    let stim = sensory_encode(img, cfg.gain, presentation_ms)?;
    let result = engine.run(&stim, &Probes::none())?;
    let counts: Vec<usize> = net
        .recognition_ids()
        .map(|id| result.raster.train_of(id).len())
        .collect();
    Ok((winner_of(&counts), counts))
}

/// Index of the largest count, ties to the lowest index; `None` when every
/// count is zero.
pub fn winner_of(counts: &[usize]) -> Option<usize> {
    let best = counts.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return None;
    }
    counts.iter().position(|&c| c == best)
}

/// Side-by-side accuracy of SAPR and STDP on the same training set.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleComparison {
    pub sapr_accuracy: f64,
    pub sapr_epochs: usize,
    pub stdp_accuracy: f64,
    pub stdp_epochs: usize,
}

fn training_accuracy(net: &SpikingRecognizer, images: &[Image]) -> Result<f64> {
    let mut hits = 0;
    for (label, img) in images.iter().enumerate() {
        let (winner, _) = spiking_recognize(net, img, net.config.presentation_ms)?;
        if winner == Some(label) {
            hits += 1;
        }
    }
    Ok(hits as f64 / images.len() as f64)
}

/// Train with both rules and report training-set accuracy for each.
pub fn rule_comparison(
    base: &SpikingRecognizerConfig,
    images: &[Image],
) -> Result<RuleComparison> {
    let mut sapr_cfg = base.clone();
    sapr_cfg.rule = PlasticityMode::Sapr(SpikingRecognizerConfig::default_sapr());
    let sapr = SpikingRecognizer::train(&sapr_cfg, images)?;
    let mut stdp_cfg = base.clone();
    stdp_cfg.rule = PlasticityMode::Stdp(Default::default());
    let stdp = SpikingRecognizer::train(&stdp_cfg, images)?;
    Ok(RuleComparison {
        sapr_accuracy: training_accuracy(&sapr, images)?,
        sapr_epochs: sapr.epochs,
        stdp_accuracy: training_accuracy(&stdp, images)?,
        stdp_epochs: stdp.epochs,
    })
}

/// Serialize to the flat `SRN1` format. All integers are little-endian u32
/// (seed u64), reals little-endian f64, booleans one byte. Field order:
///
/// ```text
/// "SRN1" | width | height | n_labels | epochs | converged
/// ei_ratio | recurrence_radius | rule tag (0 off, 1 stdp, 2 sapr)
/// epsilon | max_epochs | presentation_ms | dt_ms | seed | gain | w_max
/// t_mem | t_gk | t_th | b | c | th0 | e_k | e_e | e_i
/// recognition_th0 | teaching_current
/// n_features | n_features x excitatory flag
/// n_synapses | n_synapses x (pre, post, weight, delay, kernel A, kernel tau)
/// ```
pub fn to_bytes(net: &SpikingRecognizer) -> Vec<u8> {
    let mut w = Writer::new(MAGIC);
    let cfg = &net.config;
    w.u32(net.width as u32);
    w.u32(net.height as u32);
    w.u32(net.n_labels as u32);
    w.u32(net.epochs as u32);
    w.bool(net.converged);
    w.f64(cfg.ei_ratio);
    w.u32(cfg.recurrence_radius as u32);
    w.u32(match cfg.rule {
        PlasticityMode::Off => 0,
        PlasticityMode::Stdp(_) => 1,
        PlasticityMode::Sapr(_) => 2,
    });
    w.f64(cfg.epsilon);
    w.u32(cfg.max_epochs as u32);
    w.f64(cfg.presentation_ms);
    w.f64(cfg.dt_ms);
    w.u64(cfg.seed);
    w.f64(cfg.gain);
    w.f64(cfg.w_max);
    for v in [
        cfg.mcgregor.t_mem,
        cfg.mcgregor.t_gk,
        cfg.mcgregor.t_th,
        cfg.mcgregor.b,
        cfg.mcgregor.c,
        cfg.mcgregor.th0,
        cfg.mcgregor.e_k,
        cfg.mcgregor.e_e,
        cfg.mcgregor.e_i,
        cfg.recognition_th0,
        cfg.teaching_current,
    ] {
        w.f64(v);
    }
    w.u32(net.excitatory.len() as u32);
    for &e in &net.excitatory {
        w.bool(e);
    }
    w.u32(net.topology.synapses.len() as u32);
    for syn in &net.topology.synapses {
        w.u32(syn.pre as u32);
        w.u32(syn.post as u32);
        w.f64(syn.weight);
        w.f64(syn.delay_ms);
        w.f64(syn.kernel.amplitude);
        w.f64(syn.kernel.tau_ms);
    }
    w.finish()
}

pub fn from_bytes(bytes: &[u8]) -> Result<SpikingRecognizer> {
    let mut r = Reader::new(bytes, MAGIC)?;
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let n_labels = r.u32()? as usize;
    let epochs = r.u32()? as usize;
    let converged = r.bool()?;
    let ei_ratio = r.f64()?;
    let recurrence_radius = r.u32()? as usize;
    let rule = match r.u32()? {
        0 => PlasticityMode::Off,
        1 => PlasticityMode::Stdp(Default::default()),
        2 => PlasticityMode::Sapr(Default::default()),
        other => return Err(Error::format(format!("unknown rule tag {other}"))),
    };
    let epsilon = r.f64()?;
    let max_epochs = r.u32()? as usize;
    let presentation_ms = r.f64()?;
    let dt_ms = r.f64()?;
    let seed = r.u64()?;
    let gain = r.f64()?;
    let w_max = r.f64()?;
    let mcgregor = McGregorParams {
        t_mem: r.f64()?,
        t_gk: r.f64()?,
        t_th: r.f64()?,
        b: r.f64()?,
        c: r.f64()?,
        th0: r.f64()?,
        e_k: r.f64()?,
        e_e: r.f64()?,
        e_i: r.f64()?,
    };
    let recognition_th0 = r.f64()?;
    let teaching_current = r.f64()?;
    let n_features = r.u32()? as usize;
    let excitatory: Vec<bool> = (0..n_features).map(|_| r.bool()).collect::<Result<_>>()?;

    let config = SpikingRecognizerConfig {
        upscale: 3,
        ei_ratio,
        recurrence_radius,
        rule,
        epsilon,
        max_epochs,
        presentation_ms,
        dt_ms,
        seed,
        gain,
        w_max,
        mcgregor,
        recognition_th0,
        teaching_current,
    };
    // Rebuild the deterministic structure, then overlay the stored synapses.
    let mut topology = layout(&config, width, height, &excitatory, n_labels);
    let n_synapses = r.u32()? as usize;
    if n_synapses != topology.synapses.len() {
        return Err(Error::format(format!(
            "synapse count {n_synapses} does not match the rebuilt structure ({})",
            topology.synapses.len()
        )));
    }
    for syn in topology.synapses.iter_mut() {
        let pre = r.u32()? as usize;
        let post = r.u32()? as usize;
        if pre != syn.pre || post != syn.post {
            return Err(Error::format("synapse order does not match the rebuilt structure"));
        }
        syn.weight = r.f64()?;
        syn.delay_ms = r.f64()?;
        syn.kernel = AlphaKernel::new(r.f64()?, r.f64()?)?;
        syn.plastic = Some(false);
    }
    r.expect_end()?;
    Ok(SpikingRecognizer {
        config,
        width,
        height,
        excitatory,
        topology,
        n_labels,
        epochs,
        converged,
    })
}
