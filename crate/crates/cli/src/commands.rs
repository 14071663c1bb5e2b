//! Command implementations. Each returns the machine-parseable summary line
//! printed to stdout on success.

use std::fs;
use std::path::{Path, PathBuf};

use spikesim_core::capacity::capacity_bound;
use spikesim_core::demos;
use spikesim_core::error::{Error, Result};
use spikesim_core::events::Raster;
use spikesim_core::integrators::StepSize;
use spikesim_core::network::{build, scenario, PlasticityMode};
use spikesim_core::plasticity::{kernel_table_csv, SaprRule, StdpRule};
use spikesim_core::recognition::{
    digit2, irnn, spiking, Image, IrnnConfig, SpikingRecognizerConfig, WindowSpec,
};

use crate::svg::{self, PlotKind};

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Load an image by extension: `.pgm` binary/ASCII PGM, anything else the
/// plain-text matrix format.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("pgm") {
        Image::from_pgm(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::format(format!("{} is not utf-8", path.display())))?;
        Image::from_matrix_text(&text)
    }
}

pub fn capacity(neurons: u64) -> Result<String> {
    Ok(capacity_bound(neurons)?.patterns.to_string())
}

pub fn kernels(out: &Path) -> Result<String> {
    ensure_out(out)?;
    let table = kernel_table_csv(&StdpRule::default(), &SaprRule::default());
    let rows = table.lines().count() - 1;
    let path = write_file(out, "kernels.csv", &table)?;
    Ok(format!("rows={rows} out={}", path.display()))
}

pub struct SimulateArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub rule: Option<String>,
}

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let text = fs::read_to_string(&args.config)?;
    let mut scenario = scenario::parse(&text)?;
    if let Some(seed) = args.seed {
        scenario.config.seed = seed;
    }
    if let Some(dt) = args.dt {
        scenario.config.dt = StepSize::new(dt)?;
    }
    if let Some(duration) = args.duration {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::argument(format!("bad duration {duration}")));
        }
        scenario.config.duration_ms = duration;
    }
    if let Some(rule) = &args.rule {
        scenario.config.plasticity = parse_rule(rule)?;
    }
    ensure_out(&args.out)?;
    let mut engine = build(&scenario.topology, &scenario.config)?;
    let result = engine.run(&scenario.stimulus, &scenario.probes)?;
    write_file(&args.out, "raster.csv", &result.raster.to_csv())?;
    let mut written = vec!["raster.csv"];
    if !scenario.probes.neurons.is_empty() {
        write_file(&args.out, "traces.csv", &result.traces_to_csv())?;
        written.push("traces.csv");
    }
    if scenario.probes.weight_sample_every_ms.is_some() {
        write_file(&args.out, "weights.csv", &result.weights_to_csv())?;
        written.push("weights.csv");
    }
    Ok(format!(
        "neurons={} synapses={} spikes={} files={} out={}",
        scenario.topology.neurons.len(),
        scenario.topology.synapses.len(),
        result.raster.len(),
        written.join(","),
        args.out.display()
    ))
}

fn parse_rule(rule: &str) -> Result<PlasticityMode> {
    match rule.to_lowercase().as_str() {
        "off" => Ok(PlasticityMode::Off),
        "stdp" => Ok(PlasticityMode::Stdp(StdpRule::default())),
        "sapr" => Ok(PlasticityMode::Sapr(SaprRule::default())),
        other => Err(Error::argument(format!(
            "rule must be off, stdp, or sapr, got {other:?}"
        ))),
    }
}

pub fn demo_fig5(out: &Path, inhibition_scale: f64) -> Result<String> {
    ensure_out(out)?;
    let (result, post_spikes) = demos::run_three_neuron(inhibition_scale)?;
    write_file(out, "raster.csv", &result.raster.to_csv())?;
    write_file(out, "traces.csv", &result.traces_to_csv())?;
    Ok(format!(
        "post_spikes={post_spikes} reference={} inhibition_scale={inhibition_scale} out={}",
        demos::FIG5_POST_SPIKES,
        out.display()
    ))
}

pub fn demo_digit2(out: &Path) -> Result<String> {
    ensure_out(out)?;
    let net = digit2::mp_digit2_network();
    let cases = [
        ("canonical", digit2::digit2_image()),
        ("blank", Image::zeros(8, 8)),
        ("missing_bottom", digit2::digit2_missing_bottom_image()),
    ];
    let mut report = String::from("case,output,simple_active,complex_active\n");
    let mut summary = Vec::new();
    for (name, img) in &cases {
        let act = net.classify(img)?;
        report.push_str(&format!(
            "{name},{},{},{}\n",
            act.output,
            act.simple.iter().filter(|&&s| s == 1).count(),
            act.complex.iter().filter(|&&c| c == 1).count(),
        ));
        summary.push(format!("{name}={}", act.output));
        write_file(out, &format!("{name}.pgm"), &img.to_pgm_p2())?;
    }
    write_file(out, "digit2.csv", &report)?;
    Ok(format!("{} out={}", summary.join(" "), out.display()))
}

pub fn demo_izhi_regimes(out: &Path, drive: f64, duration: f64) -> Result<String> {
    ensure_out(out)?;
    let mut summary = Vec::new();
    for (name, params) in demos::regime_corners() {
        let spikes = demos::run_izhikevich(&params, drive, 0.1, duration)?;
        let raster = Raster::from_events(spikes.iter().map(|&t| {
            spikesim_core::SpikeEvent {
                neuron_id: 0,
                t: spikesim_core::TimeMs::new(t).expect("positive spike time"),
            }
        }));
        write_file(
            out,
            &format!("regime_{}.csv", name.to_lowercase()),
            &raster.to_csv(),
        )?;
        summary.push(format!("{}_spikes={}", name.to_lowercase(), spikes.len()));
    }
    Ok(format!(
        "drive={drive} duration_ms={duration} {} out={}",
        summary.join(" "),
        out.display()
    ))
}

pub fn demo_refractory(out: &Path, dt_min: f64) -> Result<String> {
    ensure_out(out)?;
    let config = spikesim_core::neurons::RefractoryConfig::new(dt_min)?;
    let rows = demos::refractory_sweep(&config)?;
    let mut csv = String::from("drive,model,spikes,min_isi_ms\n");
    let fmt_isi = |isi: Option<f64>| isi.map_or(String::from("none"), |v| format!("{v:.3}"));
    for row in &rows {
        csv.push_str(&format!(
            "{},original,{},{}\n",
            row.drive,
            row.original_spikes,
            fmt_isi(row.original_min_isi)
        ));
        csv.push_str(&format!(
            "{},bounded,{},{}\n",
            row.drive,
            row.bounded_spikes,
            fmt_isi(row.bounded_min_isi)
        ));
    }
    write_file(out, "refractory.csv", &csv)?;
    let original_min = rows
        .iter()
        .filter_map(|r| r.original_min_isi)
        .fold(f64::INFINITY, f64::min);
    let bounded_min = rows
        .iter()
        .filter_map(|r| r.bounded_min_isi)
        .fold(f64::INFINITY, f64::min);
    Ok(format!(
        "dt_min={dt_min} original_min_isi={original_min:.3} bounded_min_isi={bounded_min:.3} out={}",
        out.display()
    ))
}

pub struct IrnnTrainArgs {
    pub images: Vec<PathBuf>,
    pub labels: Vec<String>,
    pub out: PathBuf,
    pub window: usize,
    pub stride: usize,
    pub theta: f64,
}

pub fn irnn_train(args: &IrnnTrainArgs) -> Result<String> {
    let images: Vec<Image> = args.images.iter().map(|p| load_image(p)).collect::<Result<_>>()?;
    let config = IrnnConfig {
        window: WindowSpec::new(args.window, args.stride)?,
        theta: args.theta,
        ..IrnnConfig::default()
    };
    let model = irnn::irnn_train(&images, &args.labels, config)?;
    ensure_out(&args.out)?;
    let path = args.out.join("model.irnn");
    fs::write(&path, irnn::to_bytes(&model))?;
    let clusters: usize = model.level1.iter().map(|c| c.len()).sum();
    Ok(format!(
        "images={} labels={} level1_clusters={clusters} model={}",
        images.len(),
        model.labels.len(),
        path.display()
    ))
}

pub fn irnn_predict(model_path: &Path, image_path: &Path) -> Result<String> {
    let model = irnn::from_bytes(&fs::read(model_path)?)?;
    let img = load_image(image_path)?;
    let pred = irnn::irnn_predict(&model, &img)?;
    Ok(format!("label={} margin={:.4}", pred.label, pred.margin))
}

pub fn irnn_update(
    model_path: &Path,
    images: &[PathBuf],
    labels: Option<&[String]>,
    out: &Path,
) -> Result<String> {
    let mut model = irnn::from_bytes(&fs::read(model_path)?)?;
    let loaded: Vec<Image> = images.iter().map(|p| load_image(p)).collect::<Result<_>>()?;
    irnn::irnn_update(&mut model, &loaded, labels)?;
    ensure_out(out)?;
    let path = out.join("model.irnn");
    fs::write(&path, irnn::to_bytes(&model))?;
    Ok(format!(
        "images={} mode={} model={}",
        loaded.len(),
        if labels.is_some() { "labeled" } else { "unlabeled" },
        path.display()
    ))
}

pub struct SrnTrainArgs {
    pub images: Vec<PathBuf>,
    pub out: PathBuf,
    pub rule: String,
    pub seed: u64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub presentation_ms: f64,
    pub compare: bool,
}

pub fn srn_train(args: &SrnTrainArgs) -> Result<String> {
    let images: Vec<Image> = args.images.iter().map(|p| load_image(p)).collect::<Result<_>>()?;
    let mut config = SpikingRecognizerConfig {
        seed: args.seed,
        epsilon: args.epsilon,
        max_epochs: args.max_epochs,
        presentation_ms: args.presentation_ms,
        ..SpikingRecognizerConfig::default()
    };
    config.rule = match args.rule.to_lowercase().as_str() {
        "sapr" => PlasticityMode::Sapr(SpikingRecognizerConfig::default_sapr()),
        "stdp" => PlasticityMode::Stdp(StdpRule::default()),
        other => {
            return Err(Error::argument(format!(
                "rule must be sapr or stdp, got {other:?}"
            )))
        }
    };
    let net = spiking::SpikingRecognizer::train(&config, &images)?;
    ensure_out(&args.out)?;
    let path = args.out.join("model.srn");
    fs::write(&path, spiking::to_bytes(&net))?;
    let mut summary = format!(
        "labels={} epochs={} converged={} model={}",
        net.n_labels,
        net.epochs,
        net.converged,
        path.display()
    );
    if args.compare {
        let report = spiking::rule_comparison(&config, &images)?;
        summary.push_str(&format!(
            " sapr_accuracy={:.2} sapr_epochs={} stdp_accuracy={:.2} stdp_epochs={}",
            report.sapr_accuracy, report.sapr_epochs, report.stdp_accuracy, report.stdp_epochs
        ));
    }
    Ok(summary)
}

pub fn srn_predict(model_path: &Path, image_path: &Path, presentation_ms: f64) -> Result<String> {
    let net = spiking::from_bytes(&fs::read(model_path)?)?;
    let img = load_image(image_path)?;
    let (winner, counts) = spiking::spiking_recognize(&net, &img, presentation_ms)?;
    let counts: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    Ok(format!(
        "winner={} counts={}",
        winner.map_or(String::from("none"), |w| w.to_string()),
        counts.join(",")
    ))
}

pub fn plot(csv_path: &Path, kind: PlotKind, out: &Path) -> Result<String> {
    let csv = fs::read_to_string(csv_path)?;
    let rendered = svg::render(kind, &csv)?;
    ensure_out(out)?;
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot");
    let path = write_file(out, &format!("{stem}.svg"), &rendered)?;
    Ok(format!("svg={}", path.display()))
}
