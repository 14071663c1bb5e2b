//! Two-level windowed clustering with a supervised associative output layer.
//!
//! Level 1 leader-clusters raw subimages per window position. Level 2
//! aggregates 2x2 blocks of level-1 positions: its inputs are the one-hot
//! activations of the nearest level-1 cluster at each position in the block,
//! and it leader-clusters those. The associative layer holds one weight
//! vector per label over the concatenated level-2 one-hot activations and is
//! trained winner-takes-all against the labels.
//!
//! Cluster counts are data-driven; nothing is preallocated per class.

use crate::error::{Error, Result};
use crate::plasticity::WtaRule;

use super::binio::{Reader, Writer};
use super::image::Image;
use super::windows::{
    assign_window, extract_windows, nearest_cluster, similarity, ClusterNeuron, WindowSpec,
};

const MAGIC: &[u8] = b"IRNN1";

#[derive(Debug, Clone, PartialEq)]
pub struct IrnnConfig {
    /// Level-1 receptive field.
    pub window: WindowSpec,
    /// Side of the square block of level-1 positions one level-2 position covers.
    pub block: usize,
    /// Leader-clustering similarity threshold for both levels.
    pub theta: f64,
    /// Associative-layer learning rule.
    pub wta: WtaRule,
}

impl Default for IrnnConfig {
    fn default() -> Self {
        IrnnConfig {
            window: WindowSpec { k: 4, stride: 4 },
            block: 2,
            theta: 0.9,
            wta: WtaRule { eta: 0.5, neighborhood_radius: 0 },
        }
    }
}

/// One level-2 cluster: a running mean of per-position one-hot activations,
/// stored per block slot so it can be padded when level-1 grows.
#[derive(Debug, Clone, PartialEq)]
pub struct Level2Cluster {
    /// One distribution per block slot, each over that position's level-1
    /// clusters.
    pub slots: Vec<Vec<f64>>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrnnModel {
    pub config: IrnnConfig,
    pub width: usize,
    pub height: usize,
    /// Level-1 window grid `(rows, cols)`.
    pub grid1: (usize, usize),
    /// Level-1 clusters per position, row-major.
    pub level1: Vec<Vec<ClusterNeuron>>,
    /// Level-2 grid `(rows, cols)`.
    pub grid2: (usize, usize),
    /// Level-2 clusters per coarse position, row-major.
    pub level2: Vec<Vec<Level2Cluster>>,
    pub labels: Vec<String>,
    /// One associative weight vector per label, over the concatenated
    /// level-2 one-hot activations.
    pub assoc: Vec<Vec<f64>>,
}

/// A prediction: the winning label plus the similarity margin over the
/// runner-up (1.0 when there is no runner-up).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub margin: f64,
}

fn one_hot(len: usize, hot: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[hot] = 1.0;
    v
}

impl IrnnModel {
    fn block_positions(&self, coarse: (usize, usize)) -> Vec<usize> {
        let (_, cols1) = self.grid1;
        let b = self.config.block;
        let mut out = Vec::with_capacity(b * b);
        for dr in 0..b {
            for dc in 0..b {
                out.push((coarse.0 * b + dr) * cols1 + (coarse.1 * b + dc));
            }
        }
        out
    }

    fn check_size(&self, img: &Image) -> Result<()> {
        if img.width() != self.width || img.height() != self.height {
            return Err(Error::argument(format!(
                "image is {}x{}, model was trained on {}x{}",
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }

    /// Nearest level-1 cluster index at every window position.
    fn level1_activation(&self, img: &Image) -> Result<Vec<usize>> {
        let windows = extract_windows(img, &self.config.window)?;
        windows
            .iter()
            .enumerate()
            .map(|(pos, (_, patch))| Ok(nearest_cluster(&self.level1[pos], patch)?.0))
            .collect()
    }

    /// Level-2 input at one coarse position: per-slot one-hots of the
    /// level-1 activation.
    fn level2_input(&self, coarse: (usize, usize), act1: &[usize]) -> Vec<Vec<f64>> {
        self.block_positions(coarse)
            .iter()
            .map(|&pos| one_hot(self.level1[pos].len(), act1[pos]))
            .collect()
    }

    /// Similarity between a level-2 cluster and a slot-wise input, padding
    /// whichever side is shorter (level-1 growth appends clusters).
    fn level2_similarity(cluster: &Level2Cluster, input: &[Vec<f64>]) -> Result<f64> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (ca, cb) in cluster.slots.iter().zip(input) {
            let len = ca.len().max(cb.len());
            a.extend(ca.iter().copied().chain(std::iter::repeat(0.0)).take(len));
            b.extend(cb.iter().copied().chain(std::iter::repeat(0.0)).take(len));
        }
        similarity(&a, &b)
    }

    /// Nearest level-2 cluster per coarse position.
    fn level2_activation(&self, act1: &[usize]) -> Result<Vec<usize>> {
        let (rows2, cols2) = self.grid2;
        let mut out = Vec::with_capacity(rows2 * cols2);
        for r in 0..rows2 {
            for c in 0..cols2 {
                let input = self.level2_input((r, c), act1);
                let clusters = &self.level2[r * cols2 + c];
                let mut best: Option<(usize, f64)> = None;
                for (idx, cl) in clusters.iter().enumerate() {
                    let sim = Self::level2_similarity(cl, &input)?;
                    if best.is_none_or(|(_, s)| sim > s) {
                        best = Some((idx, sim));
                    }
                }
                out.push(best.ok_or_else(|| Error::argument("untrained level-2 position"))?.0);
            }
        }
        Ok(out)
    }

    /// Leader-cluster one level-2 input into a coarse position.
    fn level2_assign(
        clusters: &mut Vec<Level2Cluster>,
        input: Vec<Vec<f64>>,
        theta: f64,
    ) -> Result<()> {
        let mut best: Option<(usize, f64)> = None;
        for (idx, cl) in clusters.iter().enumerate() {
            let sim = Self::level2_similarity(cl, &input)?;
            if best.is_none_or(|(_, s)| sim > s) {
                best = Some((idx, sim));
            }
        }
        match best {
            Some((idx, sim)) if sim >= theta => {
                let cl = &mut clusters[idx];
                let n = cl.count as f64;
                for (slot, incoming) in cl.slots.iter_mut().zip(&input) {
                    if slot.len() < incoming.len() {
                        slot.resize(incoming.len(), 0.0);
                    }
                    for (i, s) in slot.iter_mut().enumerate() {
                        let x = incoming.get(i).copied().unwrap_or(0.0);
                        *s = (*s * n + x) / (n + 1.0);
                    }
                }
                cl.count += 1;
            }
            _ => clusters.push(Level2Cluster { slots: input, count: 1 }),
        }
        Ok(())
    }

    /// Concatenated one-hot of the level-2 activation, padded to the current
    /// cluster counts.
    fn assoc_features(&self, img: &Image) -> Result<Vec<f64>> {
        let act1 = self.level1_activation(img)?;
        let act2 = self.level2_activation(&act1)?;
        let mut features = Vec::new();
        for (pos, &winner) in act2.iter().enumerate() {
            features.extend(one_hot(self.level2[pos].len(), winner));
        }
        Ok(features)
    }

    fn assoc_dim(&self) -> usize {
        self.level2.iter().map(|c| c.len()).sum()
    }

    /// Pad every associative weight vector to the current feature dimension.
    /// New clusters appear at slot boundaries, so existing weights shift to
    /// their new offsets.
    fn repad_assoc(&mut self, old_counts: &[usize]) {
        let new_counts: Vec<usize> = self.level2.iter().map(|c| c.len()).collect();
        if old_counts == new_counts.as_slice() {
            return;
        }
        let dim: usize = new_counts.iter().sum();
        for w in &mut self.assoc {
            let mut padded = Vec::with_capacity(dim);
            let mut offset = 0;
            for (&old, &new) in old_counts.iter().zip(&new_counts) {
                for i in 0..new {
                    padded.push(if i < old { w[offset + i] } else { 0.0 });
                }
                offset += old;
            }
            *w = padded;
        }
    }
}

/// Train a fresh model. `images` and `labels` are aligned and all images
/// share one size. Each level clusters with the other layers frozen: level 1
/// over all images first, then level 2, then the associative layer.
pub fn irnn_train(
    images: &[Image],
    labels: &[String],
    config: IrnnConfig,
) -> Result<IrnnModel> {
    if images.is_empty() {
        return Err(Error::argument("training needs at least one image"));
    }
    if images.len() != labels.len() {
        return Err(Error::argument(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    let (width, height) = (images[0].width(), images[0].height());
    for img in images {
        if img.width() != width || img.height() != height {
            return Err(Error::argument("training images must share one size"));
        }
    }
    let grid1 = config.window.grid(&images[0])?;
    if grid1.0 < config.block || grid1.1 < config.block {
        return Err(Error::argument(format!(
            "window grid {}x{} is smaller than the {b}x{b} level-2 block",
            grid1.0,
            grid1.1,
            b = config.block
        )));
    }
    let grid2 = (grid1.0 / config.block, grid1.1 / config.block);

    let mut model = IrnnModel {
        config,
        width,
        height,
        grid1,
        level1: vec![Vec::new(); grid1.0 * grid1.1],
        grid2,
        level2: vec![Vec::new(); grid2.0 * grid2.1],
        labels: Vec::new(),
        assoc: Vec::new(),
    };
    irnn_update(&mut model, images, Some(labels))?;
    Ok(model)
}

/// Continue training. With labels, every layer keeps learning; without, the
/// cluster layers stay frozen and only the associative layer adapts
/// (unsupervised winner-takes-all).
pub fn irnn_update(
    model: &mut IrnnModel,
    images: &[Image],
    labels: Option<&[String]>,
) -> Result<()> {
    if let Some(labels) = labels {
        if labels.len() != images.len() {
            return Err(Error::argument(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
    }
    for img in images {
        model.check_size(img)?;
    }
    if images.is_empty() {
        return Ok(());
    }

    if let Some(labels) = labels {
        // Level 1: leader-cluster every window of every image, per position.
        for img in images {
            let windows = extract_windows(img, &model.config.window)?;
            for (pos, (grid_pos, patch)) in windows.iter().enumerate() {
                assign_window(&mut model.level1[pos], patch, model.config.theta, *grid_pos)?;
            }
        }
        // Level 2: cluster block activations with level 1 now frozen.
        let old_counts: Vec<usize> = model.level2.iter().map(|c| c.len()).collect();
        let (rows2, cols2) = model.grid2;
        for img in images {
            let act1 = model.level1_activation(img)?;
            let inputs: Vec<Vec<Vec<f64>>> = (0..rows2)
                .flat_map(|r| (0..cols2).map(move |c| (r, c)))
                .map(|coarse| model.level2_input(coarse, &act1))
                .collect();
            let theta = model.config.theta;
            for (pos, input) in inputs.into_iter().enumerate() {
                IrnnModel::level2_assign(&mut model.level2[pos], input, theta)?;
            }
        }
        model.repad_assoc(&old_counts);
        // Associative layer: supervised winner-takes-all toward the label.
        for (img, label) in images.iter().zip(labels) {
            let features = model.assoc_features(img)?;
            let idx = match model.labels.iter().position(|l| l == label) {
                Some(idx) => idx,
                None => {
                    model.labels.push(label.clone());
                    model.assoc.push(vec![0.0; model.assoc_dim()]);
                    model.labels.len() - 1
                }
            };
            let eta = model.config.wta.eta;
            let w = &mut model.assoc[idx];
            debug_assert_eq!(w.len(), features.len());
            for (wi, xi) in w.iter_mut().zip(&features) {
                *wi += eta * (xi - *wi);
            }
        }
    } else {
        // Unsupervised: only the output layer moves.
        if model.assoc.is_empty() {
            return Err(Error::argument("unlabeled update needs a trained associative layer"));
        }
        for img in images {
            let features = model.assoc_features(img)?;
            crate::plasticity::wta_update(&mut model.assoc, &features, &model.config.wta)?;
        }
    }
    Ok(())
}

/// Classify one image; the margin is the similarity gap between the winning
/// label's weights and the runner-up's.
pub fn irnn_predict(model: &IrnnModel, img: &Image) -> Result<Prediction> {
    model.check_size(img)?;
    if model.labels.is_empty() {
        return Err(Error::argument("model has no trained labels"));
    }
    let features = model.assoc_features(img)?;
    let mut scored: Vec<(usize, f64)> = model
        .assoc
        .iter()
        .enumerate()
        .map(|(idx, w)| Ok((idx, similarity(w, &features)?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
    let margin = if scored.len() > 1 {
        scored[0].1 - scored[1].1
    } else {
        1.0
    };
    Ok(Prediction {
        label: model.labels[scored[0].0].clone(),
        margin,
    })
}

/// Serialize to the flat `IRNN1` format. All integers are little-endian
/// u32, reals little-endian f64, strings length-prefixed UTF-8. Field order:
///
/// ```text
/// "IRNN1" | width | height | window k | stride | block | theta | eta | radius
/// grid1 rows | grid1 cols
/// per level-1 position: n | n x (count, pos row, pos col, center: f64s)
/// grid2 rows | grid2 cols
/// per level-2 position: n | n x (count, n_slots, n_slots x f64s)
/// n_labels | n_labels x (label string, weights: f64s)
/// ```
///
/// where `f64s` is a u32 length followed by that many reals.
pub fn to_bytes(model: &IrnnModel) -> Vec<u8> {
    let mut w = Writer::new(MAGIC);
    w.u32(model.width as u32);
    w.u32(model.height as u32);
    w.u32(model.config.window.k as u32);
    w.u32(model.config.window.stride as u32);
    w.u32(model.config.block as u32);
    w.f64(model.config.theta);
    w.f64(model.config.wta.eta);
    w.u32(model.config.wta.neighborhood_radius as u32);
    w.u32(model.grid1.0 as u32);
    w.u32(model.grid1.1 as u32);
    for clusters in &model.level1 {
        w.u32(clusters.len() as u32);
        for cl in clusters {
            w.u32(cl.count as u32);
            w.u32(cl.position.0 as u32);
            w.u32(cl.position.1 as u32);
            w.f64s(&cl.center);
        }
    }
    w.u32(model.grid2.0 as u32);
    w.u32(model.grid2.1 as u32);
    for clusters in &model.level2 {
        w.u32(clusters.len() as u32);
        for cl in clusters {
            w.u32(cl.count as u32);
            w.u32(cl.slots.len() as u32);
            for slot in &cl.slots {
                w.f64s(slot);
            }
        }
    }
    w.u32(model.labels.len() as u32);
    for (label, weights) in model.labels.iter().zip(&model.assoc) {
        w.str(label);
        w.f64s(weights);
    }
    w.finish()
}

pub fn from_bytes(bytes: &[u8]) -> Result<IrnnModel> {
    let mut r = Reader::new(bytes, MAGIC)?;
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let window = WindowSpec::new(r.u32()? as usize, r.u32()? as usize)?;
    let block = r.u32()? as usize;
    let theta = r.f64()?;
    let wta = WtaRule::new(r.f64()?, r.u32()? as usize)?;
    let grid1 = (r.u32()? as usize, r.u32()? as usize);
    let mut level1 = Vec::with_capacity(grid1.0 * grid1.1);
    for _ in 0..grid1.0 * grid1.1 {
        let n = r.u32()? as usize;
        let mut clusters = Vec::with_capacity(n);
        for _ in 0..n {
            let count = r.u32()? as usize;
            let position = (r.u32()? as usize, r.u32()? as usize);
            clusters.push(ClusterNeuron {
                count,
                position,
                center: r.f64s()?,
            });
        }
        level1.push(clusters);
    }
    let grid2 = (r.u32()? as usize, r.u32()? as usize);
    let mut level2 = Vec::with_capacity(grid2.0 * grid2.1);
    for _ in 0..grid2.0 * grid2.1 {
        let n = r.u32()? as usize;
        let mut clusters = Vec::with_capacity(n);
        for _ in 0..n {
            let count = r.u32()? as usize;
            let nslots = r.u32()? as usize;
            let slots = (0..nslots).map(|_| r.f64s()).collect::<Result<_>>()?;
            clusters.push(Level2Cluster { slots, count });
        }
        level2.push(clusters);
    }
    let nlabels = r.u32()? as usize;
    let mut labels = Vec::with_capacity(nlabels);
    let mut assoc = Vec::with_capacity(nlabels);
    for _ in 0..nlabels {
        labels.push(r.str()?);
        assoc.push(r.f64s()?);
    }
    r.expect_end()?;
    Ok(IrnnModel {
        config: IrnnConfig { window, block, theta, wta },
        width,
        height,
        grid1,
        level1,
        grid2,
        level2,
        labels,
        assoc,
    })
}
