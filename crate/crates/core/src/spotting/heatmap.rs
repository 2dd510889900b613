//! Query-specific attention: products of consecutive character channels.

use crate::alphabet::transcription_to_classes;
use crate::error::Result;
use crate::mask::Mask;
use crate::tensor::SoftPhocTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct BigramHeatmap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl BigramHeatmap {
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Mean value over the given `(x, y)` pixels.
    pub fn mean_over(&self, pixels: impl IntoIterator<Item = (usize, usize)>) -> f64 {
        let (sum, n) = pixels
            .into_iter()
            .fold((0.0, 0usize), |(s, n), (x, y)| (s + self.get(y, x), n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

/// `Σ P(c_i)·P(c_{i+1})` over consecutive query characters; the plain channel
/// for one-character queries.
pub fn bigram_heatmap(prob: &SoftPhocTensor, query: &str) -> Result<BigramHeatmap> {
    let classes: Vec<usize> = transcription_to_classes(query)?
        .into_iter()
        .map(|c| c.index())
        .collect();
    let values = prob
        .pixels()
        .map(|px| {
            if classes.len() == 1 {
                px[classes[0]]
            } else {
                classes.windows(2).map(|w| px[w[0]] * px[w[1]]).sum()
            }
        })
        .collect();
    Ok(BigramHeatmap {
        height: prob.height(),
        width: prob.width(),
        values,
    })
}

/// Pixels whose heatmap value is at least `threshold`.
pub fn threshold_mask(heatmap: &BigramHeatmap, threshold: f64) -> Mask {
    Mask {
        height: heatmap.height,
        width: heatmap.width,
        data: heatmap.values.iter().map(|v| *v >= threshold).collect(),
    }
}
