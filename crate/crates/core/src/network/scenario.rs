//! Scenario files: a small sectioned key-value format describing a network,
//! its stimulus, and the run configuration.
//!
//! ```text
//! # comment                     ; also a comment
//! [sim]
//! dt = 0.1                      ; ms, default 0.1
//! duration = 200                ; ms, default 100
//! seed = 42                     ; default 0
//! plasticity = off              ; off | stdp | sapr (rule defaults)
//! w_min = 0.0                   ; weight bounds, default [0, 1]
//! w_max = 1.0
//! probes = 0 2                  ; neuron ids to trace, optional
//! weight_sample_ms = 10         ; weight history stride, optional
//!
//! [neurons]                     ; ids must be 0..n-1, each defined once
//! 0 = mcgregor, excitatory
//! 1 = mcgregor, inhibitory, th0=12
//! 2 = izhikevich, excitatory, a=0.02, b=0.2, c=-65, d=8
//! 3 = izhikevich_bounded, excitatory, dt_min=2
//! 4 = hh, excitatory
//! 5 = mcculloch_pitts, excitatory, theta=1
//!
//! [synapses]
//! 0 -> 2 : weight=0.5, delay=1, tau=5
//!
//! [stimulus]
//! current 0 : 10..150 : 30      ; neuron : window ms : amplitude
//! poisson 1 : rate=50, weight=0.3, tau=5
//! ```

use crate::error::{Error, Result};
use crate::integrators::StepSize;
use crate::neurons::{
    HHParams, IzhParams, McGregorParams, Polarity, RefractoryConfig,
};
use crate::plasticity::{AlphaKernel, SaprRule, StdpRule, WeightBounds};

use super::engine::Probes;
use super::stimulus::{PoissonSource, StimulusProgram};
use super::topology::{
    NeuronModel, NeuronSpec, PlasticityMode, SimConfig, Synapse, Topology, DEFAULT_DELAY_MS,
};

/// Everything a scenario file describes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub config: SimConfig,
    pub stimulus: StimulusProgram,
    pub probes: Probes,
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    line[..cut].trim()
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(line, format!("bad {what} value {:?}", s.trim())))
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(line, format!("bad {what} value {:?}", s.trim())))
}

/// Split `k=v, k=v, ...` into pairs.
fn parse_kv_list(s: &str, line: usize) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected key=value, got {item:?}")))?;
        pairs.push((k.trim().to_lowercase(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_neuron(value: &str, line: usize) -> Result<NeuronSpec> {
    let mut parts = value.splitn(3, ',');
    let model_name = parts
        .next()
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::config(line, "missing neuron model"))?;
    let polarity = match parts.next().map(|s| s.trim().to_lowercase()).as_deref() {
        Some("excitatory") => Polarity::Excitatory,
        Some("inhibitory") => Polarity::Inhibitory,
        other => {
            return Err(Error::config(
                line,
                format!("polarity must be excitatory or inhibitory, got {other:?}"),
            ))
        }
    };
    let overrides = parse_kv_list(parts.next().unwrap_or(""), line)?;
    let get = |key: &str| -> Option<&str> {
        overrides
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let known = |allowed: &[&str]| -> Result<()> {
        for (k, _) in &overrides {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::config(line, format!("unknown key {k:?} for {model_name}")));
            }
        }
        Ok(())
    };
    let model = match model_name.as_str() {
        "mcculloch_pitts" => {
            known(&["theta"])?;
            let theta = match get("theta") {
                Some(v) => parse_f64(v, line, "theta")?,
                None => 1.0,
            };
            NeuronModel::McCullochPitts { theta }
        }
        "hh" => {
            known(&["cm", "gna", "gk", "gl", "ena", "ek", "el"])?;
            let mut p = HHParams::default();
            if let Some(v) = get("cm") { p.c_m = parse_f64(v, line, "cm")?; }
            if let Some(v) = get("gna") { p.g_na = parse_f64(v, line, "gna")?; }
            if let Some(v) = get("gk") { p.g_k = parse_f64(v, line, "gk")?; }
            if let Some(v) = get("gl") { p.g_l = parse_f64(v, line, "gl")?; }
            if let Some(v) = get("ena") { p.e_na = parse_f64(v, line, "ena")?; }
            if let Some(v) = get("ek") { p.e_k = parse_f64(v, line, "ek")?; }
            if let Some(v) = get("el") { p.e_l = parse_f64(v, line, "el")?; }
            NeuronModel::HodgkinHuxley(p)
        }
        "mcgregor" => {
            known(&["tmem", "tgk", "tth", "b", "c", "th0", "ek", "ee", "ei"])?;
            let mut p = McGregorParams::default();
            if let Some(v) = get("tmem") { p.t_mem = parse_f64(v, line, "tmem")?; }
            if let Some(v) = get("tgk") { p.t_gk = parse_f64(v, line, "tgk")?; }
            if let Some(v) = get("tth") { p.t_th = parse_f64(v, line, "tth")?; }
            if let Some(v) = get("b") { p.b = parse_f64(v, line, "b")?; }
            if let Some(v) = get("c") { p.c = parse_f64(v, line, "c")?; }
            if let Some(v) = get("th0") { p.th0 = parse_f64(v, line, "th0")?; }
            if let Some(v) = get("ek") { p.e_k = parse_f64(v, line, "ek")?; }
            if let Some(v) = get("ee") { p.e_e = parse_f64(v, line, "ee")?; }
            if let Some(v) = get("ei") { p.e_i = parse_f64(v, line, "ei")?; }
            NeuronModel::McGregor(p)
        }
        "izhikevich" | "izhikevich_bounded" => {
            known(&["a", "b", "c", "d", "dt_min"])?;
            let mut p = IzhParams::regular_spiking();
            if let Some(v) = get("a") { p.a = parse_f64(v, line, "a")?; }
            if let Some(v) = get("b") { p.b = parse_f64(v, line, "b")?; }
            if let Some(v) = get("c") { p.c = parse_f64(v, line, "c")?; }
            if let Some(v) = get("d") { p.d = parse_f64(v, line, "d")?; }
            if model_name == "izhikevich" {
                if get("dt_min").is_some() {
                    return Err(Error::config(line, "dt_min only applies to izhikevich_bounded"));
                }
                NeuronModel::Izhikevich(p)
            } else {
                let r = match get("dt_min") {
                    Some(v) => RefractoryConfig::new(parse_f64(v, line, "dt_min")?)
                        .map_err(|e| Error::config(line, e.to_string()))?,
                    None => RefractoryConfig::default(),
                };
                NeuronModel::IzhikevichBounded(p, r)
            }
        }
        other => {
            return Err(Error::config(line, format!("unknown neuron model {other:?}")));
        }
    };
    Ok(NeuronSpec { model, polarity })
}

fn parse_synapse(text: &str, line: usize) -> Result<Synapse> {
    let (endpoints, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::config(line, "expected 'pre -> post : key=value, ...'"))?;
    let (pre, post) = endpoints
        .split_once("->")
        .ok_or_else(|| Error::config(line, "expected 'pre -> post' endpoints"))?;
    let pre = parse_usize(pre, line, "presynaptic id")?;
    let post = parse_usize(post, line, "postsynaptic id")?;
    let pairs = parse_kv_list(rest, line)?;
    let mut weight = None;
    let mut delay = DEFAULT_DELAY_MS;
    let mut tau = 5.0;
    let mut plastic = None;
    for (k, v) in &pairs {
        match k.as_str() {
            "weight" => weight = Some(parse_f64(v, line, "weight")?),
            "delay" => delay = parse_f64(v, line, "delay")?,
            "tau" => tau = parse_f64(v, line, "tau")?,
            "plastic" => {
                plastic = Some(v.parse::<bool>().map_err(|_| {
                    Error::config(line, format!("plastic must be true or false, got {v:?}"))
                })?)
            }
            other => return Err(Error::config(line, format!("unknown synapse key {other:?}"))),
        }
    }
    let weight = weight.ok_or_else(|| Error::config(line, "synapse needs weight=..."))?;
    let kernel = AlphaKernel::new(1.0, tau).map_err(|e| Error::config(line, e.to_string()))?;
    Ok(Synapse { pre, post, weight, delay_ms: delay, kernel, plastic })
}

/// Parse a scenario file.
pub fn parse(text: &str) -> Result<Scenario> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Sim,
        Neurons,
        Synapses,
        Stimulus,
    }

    let mut section = Section::None;
    let mut dt = 0.1;
    let mut duration = 100.0;
    let mut seed = 0u64;
    let mut plasticity = PlasticityMode::Off;
    let mut w_min = 0.0;
    let mut w_max = 1.0;
    let mut probes = Probes::none();
    let mut neurons: Vec<(usize, NeuronSpec, usize)> = Vec::new();
    let mut synapses = Vec::new();
    let mut stimulus = StimulusProgram::new();
    let mut stim_lines: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line_no, "unterminated section header"))?;
            section = match name.trim().to_lowercase().as_str() {
                "sim" => Section::Sim,
                "neurons" => Section::Neurons,
                "synapses" => Section::Synapses,
                "stimulus" => Section::Stimulus,
                other => {
                    return Err(Error::config(line_no, format!("unknown section {other:?}")))
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(Error::config(line_no, "content before any [section] header"));
            }
            Section::Sim => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::config(line_no, "expected key = value"))?;
                let value = value.trim();
                match key.trim().to_lowercase().as_str() {
                    "dt" => dt = parse_f64(value, line_no, "dt")?,
                    "duration" => duration = parse_f64(value, line_no, "duration")?,
                    "seed" => {
                        seed = value.parse().map_err(|_| {
                            Error::config(line_no, format!("bad seed value {value:?}"))
                        })?
                    }
                    "plasticity" => {
                        plasticity = match value.to_lowercase().as_str() {
                            "off" => PlasticityMode::Off,
                            "stdp" => PlasticityMode::Stdp(StdpRule::default()),
                            "sapr" => PlasticityMode::Sapr(SaprRule::default()),
                            other => {
                                return Err(Error::config(
                                    line_no,
                                    format!("plasticity must be off, stdp, or sapr, got {other:?}"),
                                ))
                            }
                        }
                    }
                    "w_min" => w_min = parse_f64(value, line_no, "w_min")?,
                    "w_max" => w_max = parse_f64(value, line_no, "w_max")?,
                    "probes" => {
                        probes.neurons = value
                            .split([' ', ','])
                            .filter(|s| !s.is_empty())
                            .map(|s| parse_usize(s, line_no, "probe id"))
                            .collect::<Result<_>>()?;
                    }
                    "weight_sample_ms" => {
                        probes.weight_sample_every_ms =
                            Some(parse_f64(value, line_no, "weight_sample_ms")?)
                    }
                    other => {
                        return Err(Error::config(line_no, format!("unknown [sim] key {other:?}")))
                    }
                }
            }
            Section::Neurons => {
                let (id, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::config(line_no, "expected 'id = model, polarity'"))?;
                let id = parse_usize(id, line_no, "neuron id")?;
                if neurons.iter().any(|(existing, _, _)| *existing == id) {
                    return Err(Error::config(line_no, format!("neuron {id} defined twice")));
                }
                neurons.push((id, parse_neuron(value, line_no)?, line_no));
            }
            Section::Synapses => synapses.push(parse_synapse(line, line_no)?),
            Section::Stimulus => {
                stim_lines.push(line_no);
                if let Some(rest) = line.strip_prefix("current") {
                    let mut parts = rest.splitn(3, ':');
                    let neuron = parse_usize(
                        parts.next().ok_or_else(|| Error::config(line_no, "missing neuron id"))?,
                        line_no,
                        "neuron id",
                    )?;
                    let window = parts
                        .next()
                        .ok_or_else(|| Error::config(line_no, "missing t0..t1 window"))?;
                    let (t0, t1) = window
                        .split_once("..")
                        .ok_or_else(|| Error::config(line_no, "window must be t0..t1"))?;
                    let amplitude = parse_f64(
                        parts.next().ok_or_else(|| Error::config(line_no, "missing amplitude"))?,
                        line_no,
                        "amplitude",
                    )?;
                    stimulus
                        .add_current(
                            neuron,
                            parse_f64(t0, line_no, "t0")?,
                            parse_f64(t1, line_no, "t1")?,
                            amplitude,
                        )
                        .map_err(|e| Error::config(line_no, e.to_string()))?;
                } else if let Some(rest) = line.strip_prefix("poisson") {
                    let (id, kv) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::config(line_no, "expected 'poisson id : rate=..'"))?;
                    let neuron = parse_usize(id, line_no, "neuron id")?;
                    let pairs = parse_kv_list(kv, line_no)?;
                    let mut rate = None;
                    let mut weight = None;
                    let mut tau = 5.0;
                    for (k, v) in &pairs {
                        match k.as_str() {
                            "rate" => rate = Some(parse_f64(v, line_no, "rate")?),
                            "weight" => weight = Some(parse_f64(v, line_no, "weight")?),
                            "tau" => tau = parse_f64(v, line_no, "tau")?,
                            other => {
                                return Err(Error::config(
                                    line_no,
                                    format!("unknown poisson key {other:?}"),
                                ))
                            }
                        }
                    }
                    let source = PoissonSource {
                        neuron,
                        rate_hz: rate
                            .ok_or_else(|| Error::config(line_no, "poisson needs rate=..."))?,
                        weight: weight
                            .ok_or_else(|| Error::config(line_no, "poisson needs weight=..."))?,
                        kernel: AlphaKernel::new(1.0, tau)
                            .map_err(|e| Error::config(line_no, e.to_string()))?,
                    };
                    stimulus
                        .add_poisson(source)
                        .map_err(|e| Error::config(line_no, e.to_string()))?;
                } else {
                    return Err(Error::config(
                        line_no,
                        "stimulus lines start with 'current' or 'poisson'",
                    ));
                }
            }
        }
    }

    // Ids must be dense: exactly 0..n-1.
    neurons.sort_by_key(|(id, _, _)| *id);
    for (expected, (id, _, line_no)) in neurons.iter().enumerate() {
        if *id != expected {
            return Err(Error::config(
                *line_no,
                format!("neuron ids must be 0..n-1 with no gaps; expected {expected}, got {id}"),
            ));
        }
    }
    let specs: Vec<NeuronSpec> = neurons.into_iter().map(|(_, spec, _)| spec).collect();

    let bounds = WeightBounds::new(w_min, w_max).map_err(|e| Error::config(0, e.to_string()))?;
    let mut config = SimConfig::new(
        StepSize::new(dt).map_err(|e| Error::config(0, e.to_string()))?,
        duration,
        seed,
    )
    .map_err(|e| Error::config(0, e.to_string()))?;
    config.plasticity = plasticity;
    config.bounds = bounds;

    Ok(Scenario {
        topology: Topology::new(specs, synapses),
        config,
        stimulus,
        probes,
    })
}
