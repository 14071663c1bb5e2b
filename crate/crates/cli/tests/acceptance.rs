//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured values. Run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use spikesim_core::capacity::capacity_bound;
use spikesim_core::demos;
use spikesim_core::integrators::{integrate_fixed, step_count, Method, StepSize};
use spikesim_core::neurons::{
    hh_step, izh_derivatives, mcgregor_step, HHParams, HHState, IzhParams, IzhState,
    McGregorParams, McGregorState, Polarity, RefractoryConfig,
};
use spikesim_core::plasticity::{
    apply_pairing, sapr_delta, stdp_delta, PairingRule, SaprRule, StdpRule, WeightBounds,
};
use spikesim_core::recognition::{
    digit2, irnn, spiking, Image, IrnnConfig, SpikingRecognizerConfig,
};

fn pass(criterion: usize, detail: &str) {
    println!("criterion {criterion:02} PASS: {detail}");
}

#[test]
fn c01_capacity_bound_values() {
    let small = capacity_bound(10_000).unwrap().patterns;
    assert_eq!(small, 271);
    let big = capacity_bound(100_000_000_000).unwrap().patterns as f64;
    let relative = (big - 1e9).abs() / 1e9;
    assert!(relative < 0.02, "relative error {relative}");
    pass(1, &format!("capacity(1e4)={small}, capacity(1e11)={big:.0} ({relative:.4} from 1e9)"));
}

#[test]
fn c02_izhikevich_rest_is_a_fixed_point() {
    let p = IzhParams::regular_spiking();
    let d = izh_derivatives(&IzhState::new(-70.0, -14.0), &p, 0.0);
    assert!(d[0].abs() < 1e-12, "dv = {}", d[0]);
    assert!(d[1].abs() < 1e-12, "du = {}", d[1]);
    pass(2, &format!("derivatives at (-70,-14) = ({:.1e}, {:.1e})", d[0], d[1]));
}

#[test]
fn c03_refractory_contrast_across_the_drive_sweep() {
    let r = RefractoryConfig::new(2.0).unwrap();
    let rows = demos::refractory_sweep(&r).unwrap();
    assert_eq!(rows.len(), demos::REFRACTORY_SWEEP_DRIVES.len());
    let top = rows.last().unwrap();
    let top_isi = top.original_min_isi.expect("original fires repeatedly at I=160");
    assert!(top_isi < 2.0, "original min ISI {top_isi} at the top of the sweep");
    let mut bounded_min = f64::INFINITY;
    for row in &rows {
        if let Some(isi) = row.bounded_min_isi {
            bounded_min = bounded_min.min(isi);
            assert!(isi >= 2.0 - 1e-9, "bounded ISI {isi} at I={}", row.drive);
        }
    }
    pass(3, &format!("original min ISI {top_isi:.1} ms; bounded min ISI {bounded_min:.1} ms"));
}

#[test]
fn c04_regime_qualitatives() {
    let rs = demos::run_izhikevich(&IzhParams::regular_spiking(), 10.0, 0.1, 500.0).unwrap();
    let isis: Vec<f64> = rs.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(isis.len() >= 5, "only {} ISIs", isis.len());
    // Spike times live on the 0.1 ms grid, so each ISI wobbles one cell.
    for pair in isis.windows(2).take(4) {
        assert!(pair[1] >= pair[0] - 0.1 - 1e-9, "ISIs shrank: {isis:?}");
    }
    let fast = demos::run_izhikevich(
        &IzhParams::corner(Polarity::Inhibitory, 0.0),
        10.0,
        0.1,
        500.0,
    )
    .unwrap();
    let ratio = fast.len() as f64 / rs.len() as f64;
    assert!(ratio >= 1.2, "inhibitory corner only {ratio:.2}x the RS rate");
    pass(4, &format!(
        "RS first ISIs {:?} non-decreasing; inhibitory-corner rate {ratio:.2}x RS",
        &isis[..5].iter().map(|i| format!("{i:.1}")).collect::<Vec<_>>()
    ));
}

fn hh_run(dt_ms: f64) -> (usize, f64) {
    let p = HHParams::default();
    let dt = StepSize::new(dt_ms).unwrap();
    let mut state = HHState::rest();
    let mut spikes = 0;
    let mut peak = f64::MIN;
    for _ in 0..step_count(100.0, dt) {
        let (next, spiked) = hh_step(&state, &p, 10.0, dt, Method::Rk4).unwrap();
        if spiked {
            spikes += 1;
        }
        peak = peak.max(next.v);
        state = next;
    }
    (spikes, peak)
}

#[test]
fn c05_hodgkin_huxley_fires_and_self_converges() {
    let (spikes, peak) = hh_run(0.01);
    assert!(spikes >= 3, "{spikes} spikes");
    assert!((90.0..=110.0).contains(&peak), "peak {peak}");
    let (oracle_spikes, _) = hh_run(0.001);
    assert_eq!(spikes, oracle_spikes, "dt=0.01 vs dt=0.001 spike counts differ");
    pass(5, &format!("{spikes} spikes (oracle {oracle_spikes}), peak {peak:.1} mV"));
}

#[test]
fn c06_mcgregor_analytics() {
    let p = McGregorParams::default();
    let dt = StepSize::new(0.1).unwrap();
    // Membrane decay from 5 mV with no drive.
    let mut state = McGregorState { e: 5.0, ..McGregorState::rest(&p) };
    let mut worst: f64 = 0.0;
    for k in 0..step_count(50.0, dt) {
        let (next, _) = mcgregor_step(&state, &p, 0.0, 0.0, 0.0, dt, Method::Rk4).unwrap();
        state = next;
        let t = (k + 1) as f64 * 0.1;
        let exact = 5.0 * (-t / p.t_mem).exp();
        worst = worst.max((state.e - exact).abs() / exact);
    }
    assert!(worst < 0.01, "decay error {worst}");
    // Threshold relaxation from 20 mV toward th0 with the membrane at rest.
    let mut state = McGregorState { th: 20.0, ..McGregorState::rest(&p) };
    for _ in 0..step_count(5.0 * p.t_th, dt) {
        let (next, _) = mcgregor_step(&state, &p, 0.0, 0.0, 0.0, dt, Method::Rk4).unwrap();
        state = next;
    }
    let residue = (state.th - p.th0).abs() / (20.0 - p.th0);
    assert!(residue <= 0.01, "threshold residue {residue}");
    pass(6, &format!("decay error {worst:.2e}; threshold residue {residue:.2e} after 5 T_th"));
}

#[test]
fn c07_integrator_convergence_orders() {
    let decay = |_t: f64, y: &[f64; 1]| [-y[0]];
    let final_error = |h: f64, method: Method| {
        let y = integrate_fixed(&decay, [1.0], StepSize::new(h).unwrap(), 1.0, method, |_, _| {})
            .unwrap();
        (y[0] - (-1.0f64).exp()).abs()
    };
    let order = |method: Method| {
        let errors: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| final_error(h, method))
            .collect();
        errors
            .windows(2)
            .map(|pair| (pair[0] / pair[1]).log2())
            .fold(f64::INFINITY, f64::min)
    };
    let euler = order(Method::Euler);
    let rk4 = order(Method::Rk4);
    assert!(euler >= 0.9, "euler order {euler}");
    assert!(rk4 >= 3.9, "rk4 order {rk4}");
    pass(7, &format!("euler order {euler:.3}, rk4 order {rk4:.3}"));
}

#[test]
fn c08_pairing_window_suite() {
    let stdp = StdpRule::default();
    let sapr = SaprRule::default();
    // Sign structure and monotone decay away from zero.
    let mut prev_plus = f64::INFINITY;
    let mut prev_minus = f64::NEG_INFINITY;
    for k in 1..=500 {
        let dt = k as f64 * 0.2;
        let plus = stdp_delta(&stdp, dt);
        let minus = stdp_delta(&stdp, -dt);
        assert!(plus > 0.0 && minus < 0.0);
        assert!(plus < prev_plus && minus > prev_minus, "decay broken at {dt}");
        prev_plus = plus;
        prev_minus = minus;
        assert!(sapr_delta(&sapr, dt) > 0.0);
        assert!(sapr_delta(&sapr, -dt) < 0.0);
    }
    // SAPR continuity at zero.
    let near = sapr_delta(&sapr, 0.01).abs().max(sapr_delta(&sapr, -0.01).abs());
    assert!(near < 1e-4, "SAPR near-zero magnitude {near}");
    // STDP jump across zero.
    let jump = stdp_delta(&stdp, 1e-9) - stdp_delta(&stdp, -1e-9);
    assert!((jump - (stdp.a_plus + stdp.a_minus)).abs() < 1e-12, "jump {jump}");
    // A hundred thousand random pairings never leave the bounds.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let bounds = WeightBounds::unit();
    let rules = [PairingRule::Stdp(stdp), PairingRule::Sapr(sapr)];
    let mut w = 0.5;
    for k in 0..100_000 {
        w = apply_pairing(w, rng.gen_range(-120.0..120.0), &rules[k % 2], &bounds).unwrap();
        assert!(bounds.contains(w), "weight {w} escaped");
    }
    pass(8, &format!(
        "signs/decay over 500 lags; |sapr(±0.01)|={near:.1e}; jump={jump:.6}; 1e5 pairings clamped"
    ));
}

#[test]
fn c09_three_neuron_circuit_reference() {
    let (_, reference) = demos::run_three_neuron(1.0).unwrap();
    assert!(reference >= 1, "post neuron silent");
    assert_eq!(reference, demos::FIG5_POST_SPIKES, "pinned count moved");
    let (_, damped) = demos::run_three_neuron(2.0).unwrap();
    assert!(damped < reference, "{reference} -> {damped} after doubling inhibition");
    pass(9, &format!("post spikes {reference} (pinned), {damped} with doubled inhibition"));
}

#[test]
fn c10_digit2_network() {
    let net = digit2::mp_digit2_network();
    let canonical = net.classify(&digit2::digit2_image()).unwrap().output;
    let blank = net.classify(&Image::zeros(8, 8)).unwrap().output;
    let missing = net.classify(&digit2::digit2_missing_bottom_image()).unwrap().output;
    assert_eq!((canonical, blank, missing), (1, 0, 0));
    pass(10, "canonical=1 blank=0 missing_bottom=0");
}

fn synthetic_faces() -> (Vec<Image>, Vec<String>) {
    let face = |variant: usize| -> Image {
        let mut img = Image::zeros(16, 16);
        for r in 0..16 {
            for c in 0..16 {
                img.set(r, c, 0.2);
            }
        }
        for r in 4..12 {
            for c in 4..12 {
                let v = match variant {
                    0 => if (r / 2 + c / 2) % 2 == 0 { 0.9 } else { 0.1 },
                    1 => if r % 3 == 0 { 0.85 } else { 0.15 },
                    _ => if c % 3 == 1 { 0.95 } else { 0.05 },
                };
                img.set(r, c, v);
            }
        }
        img
    };
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for variant in 0..3 {
        for _ in 0..2 {
            images.push(face(variant));
            labels.push(format!("face{variant}"));
        }
    }
    (images, labels)
}

#[test]
fn c11_irnn_desk_scale() {
    let (images, labels) = synthetic_faces();
    let model = irnn::irnn_train(&images, &labels, IrnnConfig::default()).unwrap();
    let (rows1, cols1) = model.grid1;
    let mut periphery_max = 0;
    let mut center_max = 0;
    for r in 0..rows1 {
        for c in 0..cols1 {
            let n = model.level1[r * cols1 + c].len();
            if (1..3).contains(&r) && (1..3).contains(&c) {
                center_max = center_max.max(n);
            } else {
                periphery_max = periphery_max.max(n);
            }
        }
    }
    assert_eq!(periphery_max, 1, "periphery grew {periphery_max} clusters");
    assert!(center_max > 1, "center stayed at {center_max}");
    let mut hits = 0;
    for (img, label) in images.iter().zip(&labels) {
        if &irnn::irnn_predict(&model, img).unwrap().label == label {
            hits += 1;
        }
    }
    assert_eq!(hits, images.len(), "training accuracy {hits}/{}", images.len());
    // Unlabeled update freezes the cluster layers bit-exactly.
    let mut updated = model.clone();
    irnn::irnn_update(&mut updated, &images, None).unwrap();
    assert_eq!(updated.level1, model.level1);
    assert_eq!(updated.level2, model.level2);
    pass(11, &format!(
        "periphery clusters=1, center max={center_max}, accuracy {hits}/{}, unlabeled update frozen",
        images.len()
    ));
}

fn orthogonal_bars() -> Vec<Image> {
    let mut left = Image::zeros(6, 6);
    let mut right = Image::zeros(6, 6);
    for r in 0..6 {
        for c in 0..3 {
            left.set(r, c, 1.0);
            right.set(r, c + 3, 1.0);
        }
    }
    vec![left, right]
}

#[test]
fn c12_spiking_recognizer_desk_scale() {
    let images = orthogonal_bars();
    let cfg = SpikingRecognizerConfig {
        presentation_ms: 100.0,
        epsilon: 1e-3,
        max_epochs: 50,
        ..SpikingRecognizerConfig::default()
    };
    let net = spiking::SpikingRecognizer::train(&cfg, &images).unwrap();
    assert!(net.converged, "no convergence within 50 epochs");
    assert!(net.epochs <= 50);

    let mut winners = Vec::new();
    for img in &images {
        let (first, counts) = spiking::spiking_recognize(&net, img, 100.0).unwrap();
        assert!(first.is_some(), "no recognition spikes: {counts:?}");
        for _ in 0..4 {
            let (again, _) = spiking::spiking_recognize(&net, img, 100.0).unwrap();
            assert_eq!(again, first, "winner unstable across re-presentations");
        }
        winners.push(first.unwrap());
    }
    assert_ne!(winners[0], winners[1], "patterns share a winner");

    // Reported, not asserted: how the two rules compare on this set.
    let report = spiking::rule_comparison(&cfg, &images).unwrap();
    pass(12, &format!(
        "converged in {} epochs; winners {:?}; sapr_accuracy={:.2} ({} epochs) stdp_accuracy={:.2} ({} epochs)",
        net.epochs, winners, report.sapr_accuracy, report.sapr_epochs,
        report.stdp_accuracy, report.stdp_epochs
    ));
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn c13_cli_runs_reproduce_byte_identical_artifacts() {
    let bin = env!("CARGO_BIN_EXE_spikesim");
    let dir = std::env::temp_dir().join(format!("spikesim-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();

    let scenario = dir.join("scenario.ini");
    fs::write(
        &scenario,
        "[sim]\ndt = 0.1\nduration = 100\nseed = 3\nplasticity = sapr\nprobes = 1\n\
         weight_sample_ms = 20\n\n[neurons]\n0 = mcgregor, excitatory\n1 = mcgregor, excitatory\n\n\
         [synapses]\n0 -> 1 : weight=0.5, delay=1, tau=5\n\n[stimulus]\n\
         poisson 0 : rate=60, weight=0.5\n",
    )
    .unwrap();
    let mut bars = Vec::new();
    for (name, lit) in [("left", 0..3), ("right", 3..6)] {
        let mut text = String::from("6 6 1\n");
        for _ in 0..6 {
            let row: Vec<&str> = (0..6).map(|c| if lit.contains(&c) { "1" } else { "0" }).collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        let path = dir.join(format!("{name}.txt"));
        fs::write(&path, text).unwrap();
        bars.push(path);
    }
    let mut faces = Vec::new();
    {
        let mut text = String::from("16 16 1\n");
        for r in 0..16 {
            let row: Vec<String> = (0..16)
                .map(|c| if (4..12).contains(&r) && (4..12).contains(&c) { "0.9" } else { "0.2" })
                .map(String::from)
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        let a = dir.join("blob.txt");
        fs::write(&a, &text).unwrap();
        faces.push(a);
        let b = dir.join("flat.txt");
        fs::write(&b, format!("16 16 1\n{}", "0.2 ".repeat(256).trim_end())).unwrap();
        faces.push(b);
    }

    let scenario_str = scenario.to_str().unwrap().to_string();
    let bar_strs: Vec<String> = bars.iter().map(|p| p.to_str().unwrap().to_string()).collect();
    let face_strs: Vec<String> = faces.iter().map(|p| p.to_str().unwrap().to_string()).collect();
    let invocations: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--config".into(), scenario_str, "--seed".into(), "3".into()],
        vec!["demo".into(), "fig5".into()],
        vec!["demo".into(), "digit2".into()],
        vec!["demo".into(), "izhi-regimes".into()],
        vec!["demo".into(), "refractory".into()],
        vec!["kernels".into()],
        vec![
            "irnn".into(), "train".into(), "--images".into(),
            face_strs[0].clone(), face_strs[1].clone(),
            "--labels".into(), "blob,flat".into(),
        ],
        vec![
            "srn".into(), "train".into(), "--images".into(),
            bar_strs[0].clone(), bar_strs[1].clone(),
            "--seed".into(), "1".into(), "--presentation".into(), "50".into(),
            "--max-epochs".into(), "4".into(),
        ],
    ];

    let mut checked = 0;
    for (idx, args) in invocations.iter().enumerate() {
        let out_a = dir.join(format!("a{idx}"));
        let out_b = dir.join(format!("b{idx}"));
        for out_dir in [&out_a, &out_b] {
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(out_dir)
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&status.stderr)
            );
        }
        let ca = dir_contents(&out_a);
        let cb = dir_contents(&out_b);
        assert_eq!(ca.len(), cb.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in ca.iter().zip(&cb) {
            assert_eq!(name_a, name_b);
            assert_eq!(bytes_a, bytes_b, "{name_a} differs across runs of {args:?}");
            checked += 1;
        }
    }
    // Plot from one of the reproduced rasters, twice.
    let raster: PathBuf = dir.join("a1/raster.csv");
    for sub in ["pa", "pb"] {
        let status = Command::new(bin)
            .args(["plot", "--csv", raster.to_str().unwrap(), "--kind", "raster", "--out"])
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert!(status.status.success());
    }
    assert_eq!(
        fs::read(dir.join("pa/raster.svg")).unwrap(),
        fs::read(dir.join("pb/raster.svg")).unwrap()
    );
    checked += 1;

    // Model updates rewrite byte-identically too.
    let irnn_model = dir.join("a6/model.irnn");
    for sub in ["ua", "ub"] {
        let status = Command::new(bin)
            .args([
                "irnn", "update", "--model", irnn_model.to_str().unwrap(),
                "--images", &face_strs[0], "--out",
            ])
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert!(status.status.success());
    }
    assert_eq!(
        fs::read(dir.join("ua/model.irnn")).unwrap(),
        fs::read(dir.join("ub/model.irnn")).unwrap()
    );
    checked += 1;

    // Print-only subcommands repeat their stdout verbatim.
    let stdout_of = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}");
        out.stdout
    };
    let srn_model = dir.join("a7/model.srn");
    for args in [
        vec!["capacity", "10000"],
        vec![
            "irnn", "predict", "--model", irnn_model.to_str().unwrap(),
            "--image", &face_strs[0],
        ],
        vec![
            "srn", "predict", "--model", srn_model.to_str().unwrap(),
            "--image", &bar_strs[0], "--presentation", "50",
        ],
    ] {
        assert_eq!(stdout_of(&args), stdout_of(&args), "{args:?} stdout varied");
        checked += 1;
    }
    pass(13, &format!("{checked} artifacts byte-identical across repeated seeded runs"));
}
