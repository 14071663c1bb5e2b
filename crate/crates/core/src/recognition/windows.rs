//! Receptive-field windowing and leader clustering of subimages.

use crate::error::{Error, Result};

use super::image::Image;

/// A square window of side `k` slid with stride `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub k: usize,
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(k: usize, stride: usize) -> Result<Self> {
        if k == 0 || stride == 0 {
            return Err(Error::argument("window side and stride must be at least 1"));
        }
        Ok(WindowSpec { k, stride })
    }

    /// Window-grid dimensions `(rows, cols)` over an image.
    pub fn grid(&self, img: &Image) -> Result<(usize, usize)> {
        if self.k > img.width() || self.k > img.height() {
            return Err(Error::argument(format!(
                "window side {} exceeds image {}x{}",
                self.k,
                img.width(),
                img.height()
            )));
        }
        Ok((
            (img.height() - self.k) / self.stride + 1,
            (img.width() - self.k) / self.stride + 1,
        ))
    }
}

/// A window's grid position and its flattened k^2 pixel vector.
pub type PositionedWindow = ((usize, usize), Vec<f64>);

/// Raster-order windows of an image.
pub fn extract_windows(img: &Image, spec: &WindowSpec) -> Result<Vec<PositionedWindow>> {
    let (rows, cols) = spec.grid(img)?;
    let mut out = Vec::with_capacity(rows * cols);
    for gr in 0..rows {
        for gc in 0..cols {
            let mut patch = Vec::with_capacity(spec.k * spec.k);
            for dr in 0..spec.k {
                for dc in 0..spec.k {
                    patch.push(img.get(gr * spec.stride + dr, gc * spec.stride + dc));
                }
            }
            out.push(((gr, gc), patch));
        }
    }
    Ok(out)
}

/// Similarity of two equal-length vectors with entries in [0, 1]:
/// one minus the mean absolute difference. Symmetric; 1 iff identical.
pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::argument(format!(
            "similarity needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::argument("similarity of empty vectors is undefined"));
    }
    let mean_abs: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    Ok(1.0 - mean_abs)
}

/// One cluster: a running-mean center over the subimages assigned to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNeuron {
    pub center: Vec<f64>,
    pub count: usize,
    /// Window-grid coordinate this cluster belongs to.
    pub position: (usize, usize),
}

/// Index and similarity of the cluster most similar to `x`
/// (ties to the lowest index).
pub fn nearest_cluster(clusters: &[ClusterNeuron], x: &[f64]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, cl) in clusters.iter().enumerate() {
        let sim = similarity(&cl.center, x)?;
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((idx, sim));
        }
    }
    best.ok_or_else(|| Error::argument("no clusters to match against"))
}

/// Fold one subimage into an existing cluster set by leader clustering:
/// join the most similar cluster when its similarity reaches `theta`
/// (the center moves to the running mean), otherwise seed a new cluster
/// whose center is the subimage itself.
pub fn assign_window(
    clusters: &mut Vec<ClusterNeuron>,
    x: &[f64],
    theta: f64,
    position: (usize, usize),
) -> Result<usize> {
    if clusters.is_empty() {
        clusters.push(ClusterNeuron {
            center: x.to_vec(),
            count: 1,
            position,
        });
        return Ok(0);
    }
    let (idx, sim) = nearest_cluster(clusters, x)?;
    if sim >= theta {
        let cl = &mut clusters[idx];
        let n = cl.count as f64;
        for (c, xi) in cl.center.iter_mut().zip(x) {
            *c = (*c * n + xi) / (n + 1.0);
        }
        cl.count += 1;
        Ok(idx)
    } else {
        clusters.push(ClusterNeuron {
            center: x.to_vec(),
            count: 1,
            position,
        });
        Ok(clusters.len() - 1)
    }
}

/// Leader-cluster a presentation-ordered sequence of same-position windows.
pub fn cluster_windows(
    windows: &[Vec<f64>],
    theta: f64,
    position: (usize, usize),
) -> Result<Vec<ClusterNeuron>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::argument(format!(
            "clustering threshold must be in (0,1), got {theta}"
        )));
    }
    let mut clusters = Vec::new();
    for w in windows {
        assign_window(&mut clusters, w, theta, position)?;
    }
    Ok(clusters)
}
