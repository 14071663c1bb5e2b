//! Hierarchical recognition: the digit-2 threshold network, the windowed
//! clustering hierarchy, and the spiking recognizer.

mod binio;
pub mod digit2;
pub mod image;
pub mod irnn;
pub mod spiking;
pub mod windows;

pub use digit2::{digit2_image, digit2_missing_bottom_image, mp_digit2_network, Digit2Network};
pub use image::Image;
pub use irnn::{irnn_predict, irnn_train, irnn_update, IrnnConfig, IrnnModel, Prediction};
pub use spiking::{
    self_organize, sensory_encode, spiking_recognize, SpikingRecognizer,
    SpikingRecognizerConfig,
};
pub use windows::{cluster_windows, extract_windows, similarity, ClusterNeuron, WindowSpec};
