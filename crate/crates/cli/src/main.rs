//! Command-line front end: scenario runs, figure demos, kernel dumps,
//! recognition training, and SVG plots.
//!
//! Exit codes: 0 success, 1 usage error, 2 config/validation error,
//! 3 numeric failure.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use spikesim_core::error::Error;

#[derive(Parser)]
#[command(name = "spikesim", version, about = "Spiking neuron simulator and recognition demos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write raster/trace/weight CSVs.
    Simulate {
        /// Scenario file (sections [sim], [neurons], [synapses], [stimulus]).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the integration step, ms.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the run length, ms.
        #[arg(long)]
        duration: Option<f64>,
        /// Override the plasticity rule: off, stdp, or sapr.
        #[arg(long)]
        rule: Option<String>,
    },
    /// Canned desk-scale scenarios.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
    /// Dump the STDP/SAPR pairing windows as CSV (-50..50 ms, 0.5 ms steps).
    Kernels {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the storage-capacity bound for a network of N neurons.
    Capacity {
        /// Network size; must exceed 1.
        neurons: u64,
    },
    /// Windowed-clustering image recognition.
    Irnn {
        #[command(subcommand)]
        which: IrnnCommand,
    },
    /// Spiking recognizer.
    Srn {
        #[command(subcommand)]
        which: SrnCommand,
    },
    /// Render a CSV artifact as a deterministic SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKindArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Three McGregor cells: excitatory and inhibitory drivers onto one post cell.
    Fig5 {
        #[arg(long)]
        out: PathBuf,
        /// Multiplier on the inhibitory synapse weight.
        #[arg(long, default_value_t = 1.0)]
        inhibition_scale: f64,
    },
    /// The fixed threshold network recognizing the digit-2 fixture.
    Digit2 {
        #[arg(long)]
        out: PathBuf,
    },
    /// The four named parameter-table corners under constant drive.
    IzhiRegimes {
        #[arg(long)]
        out: PathBuf,
        /// Constant input current.
        #[arg(long, default_value_t = 10.0)]
        drive: f64,
        /// Run length, ms.
        #[arg(long, default_value_t = 500.0)]
        duration: f64,
    },
    /// Original vs refractory-bounded cell across the drive sweep.
    Refractory {
        #[arg(long)]
        out: PathBuf,
        /// Absolute refractory window, ms.
        #[arg(long, default_value_t = 2.0)]
        dt_min: f64,
    },
}

#[derive(Subcommand)]
enum IrnnCommand {
    /// Train on labeled images and write model.irnn.
    Train {
        /// Image files (.pgm or plain-text matrix).
        #[arg(long, num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        /// Comma-separated labels aligned with --images.
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Level-1 window side.
        #[arg(long, default_value_t = 4)]
        window: usize,
        /// Level-1 window stride.
        #[arg(long, default_value_t = 4)]
        stride: usize,
        /// Leader-clustering similarity threshold.
        #[arg(long, default_value_t = 0.9)]
        theta: f64,
    },
    /// Classify one image.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
    },
    /// Continue training; omit --labels to retrain only the output layer.
    Update {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SrnCommand {
    /// Self-organize on the images (label k = image k) and write model.srn.
    Train {
        #[arg(long, num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Pairing rule: sapr or stdp.
        #[arg(long, default_value = "sapr")]
        rule: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Convergence threshold on the mean per-epoch weight change.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 50)]
        max_epochs: usize,
        /// Presentation length per image, ms.
        #[arg(long, default_value_t = 200.0)]
        presentation: f64,
        /// Also train with the other rule and report both accuracies.
        #[arg(long)]
        compare: bool,
    },
    /// Present one image and report the winning label.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Presentation length, ms.
        #[arg(long, default_value_t = 200.0)]
        presentation: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKindArg {
    Raster,
    Trace,
    Kernel,
}

impl From<PlotKindArg> for svg::PlotKind {
    fn from(kind: PlotKindArg) -> Self {
        match kind {
            PlotKindArg::Raster => svg::PlotKind::Raster,
            PlotKindArg::Trace => svg::PlotKind::Trace,
            PlotKindArg::Kernel => svg::PlotKind::Kernel,
        }
    }
}

fn dispatch(cli: Cli) -> spikesim_core::Result<String> {
    match cli.command {
        Command::Simulate { config, out, seed, dt, duration, rule } => {
            commands::simulate(&commands::SimulateArgs { config, out, seed, dt, duration, rule })
        }
        Command::Demo { which } => match which {
            DemoCommand::Fig5 { out, inhibition_scale } => {
                commands::demo_fig5(&out, inhibition_scale)
            }
            DemoCommand::Digit2 { out } => commands::demo_digit2(&out),
            DemoCommand::IzhiRegimes { out, drive, duration } => {
                commands::demo_izhi_regimes(&out, drive, duration)
            }
            DemoCommand::Refractory { out, dt_min } => commands::demo_refractory(&out, dt_min),
        },
        Command::Kernels { out } => commands::kernels(&out),
        Command::Capacity { neurons } => commands::capacity(neurons),
        Command::Irnn { which } => match which {
            IrnnCommand::Train { images, labels, out, window, stride, theta } => {
                commands::irnn_train(&commands::IrnnTrainArgs {
                    images,
                    labels,
                    out,
                    window,
                    stride,
                    theta,
                })
            }
            IrnnCommand::Predict { model, image } => commands::irnn_predict(&model, &image),
            IrnnCommand::Update { model, images, labels, out } => {
                commands::irnn_update(&model, &images, labels.as_deref(), &out)
            }
        },
        Command::Srn { which } => match which {
            SrnCommand::Train {
                images,
                out,
                rule,
                seed,
                epsilon,
                max_epochs,
                presentation,
                compare,
            } => commands::srn_train(&commands::SrnTrainArgs {
                images,
                out,
                rule,
                seed,
                epsilon,
                max_epochs,
                presentation_ms: presentation,
                compare,
            }),
            SrnCommand::Predict { model, image, presentation } => {
                commands::srn_predict(&model, &image, presentation)
            }
        },
        Command::Plot { csv, kind, out } => commands::plot(&csv, kind.into(), &out),
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Numeric { .. } | Error::Instability { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
