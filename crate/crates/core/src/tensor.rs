//! Dense H×W×38 per-pixel character distributions.

use crate::alphabet::{CharClassId, BACKGROUND, NUM_CLASSES};
use crate::error::{Error, Result};

/// Row-major, channel-fastest H×W×38 tensor of probabilities.
///
/// Used both for word-crop annotations (background channel zero, character
/// channels summing to one) and for scene-level maps (all 38 channels summing
/// to one).
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPhocTensor {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Location of the first pixel that failed a distribution check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvalidPixel {
    pub x: usize,
    pub y: usize,
    pub sum: f64,
}

impl SoftPhocTensor {
    pub fn zeros(height: usize, width: usize) -> Self {
        SoftPhocTensor {
            height,
            width,
            data: vec![0.0; height * width * NUM_CLASSES],
        }
    }

    /// A scene with no text: background probability one everywhere.
    pub fn background(height: usize, width: usize) -> Self {
        let mut t = Self::zeros(height, width);
        for px in t.data.chunks_exact_mut(NUM_CLASSES) {
            px[BACKGROUND.index()] = 1.0;
        }
        t
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        let expected = height * width * NUM_CLASSES;
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{height}x{width}x{NUM_CLASSES} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(SoftPhocTensor { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        NUM_CLASSES
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, y: usize, x: usize) -> usize {
        debug_assert!(y < self.height && x < self.width);
        (y * self.width + x) * NUM_CLASSES
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f64] {
        let o = self.offset(y, x);
        &self.data[o..o + NUM_CLASSES]
    }

    #[inline]
    pub fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [f64] {
        let o = self.offset(y, x);
        &mut self.data[o..o + NUM_CLASSES]
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, class: CharClassId) -> f64 {
        self.data[self.offset(y, x) + class.index()]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(NUM_CLASSES)
    }

    pub fn pixels_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.data.chunks_exact_mut(NUM_CLASSES)
    }

    /// Copies one channel out as an H×W plane.
    pub fn channel_plane(&self, class: CharClassId) -> Vec<f64> {
        self.pixels().map(|px| px[class.index()]).collect()
    }

    /// Bilinear sample at a continuous position where pixel `(x, y)` is
    /// centred on `(x + 0.5, y + 0.5)`. Positions outside the grid are
    /// clamped to the border pixels.
    pub fn sample_bilinear(&self, px: f64, py: f64) -> [f64; NUM_CLASSES] {
        let mut out = [0.0; NUM_CLASSES];
        if self.height == 0 || self.width == 0 {
            return out;
        }
        let fx = (px - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (py - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = fx.floor() as usize;
        let y0 = fy.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let ax = fx - x0 as f64;
        let ay = fy - y0 as f64;
        let weights = [
            ((1.0 - ax) * (1.0 - ay), y0, x0),
            (ax * (1.0 - ay), y0, x1),
            ((1.0 - ax) * ay, y1, x0),
            (ax * ay, y1, x1),
        ];
        for (w, y, x) in weights {
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.pixel(y, x)) {
                *o += w * v;
            }
        }
        out
    }

    /// Checks that every pixel's 38-channel sum is within `tol` of one and
    /// that all values lie in `[0, 1]`.
    pub fn check_scene_distribution(&self, tol: f64) -> std::result::Result<(), InvalidPixel> {
        self.check_with(tol, |px| px.iter().sum(), false)
    }

    /// Word-crop variant: character channels sum to one, background is zero.
    pub fn check_crop_distribution(&self, tol: f64) -> std::result::Result<(), InvalidPixel> {
        self.check_with(tol, |px| px[1..].iter().sum(), true)
    }

    fn check_with(
        &self,
        tol: f64,
        sum: impl Fn(&[f64]) -> f64,
        zero_background: bool,
    ) -> std::result::Result<(), InvalidPixel> {
        for (i, px) in self.pixels().enumerate() {
            let s = sum(px);
            let in_range = px.iter().all(|v| (0.0..=1.0 + tol).contains(v));
            let bg_ok = !zero_background || px[BACKGROUND.index()] == 0.0;
            if (s - 1.0).abs() > tol || !in_range || !bg_ok {
                return Err(InvalidPixel {
                    x: i % self.width,
                    y: i / self.width,
                    sum: s,
                });
            }
        }
        Ok(())
    }
}

/// Scales a pixel so its channels sum to one. Leaves all-zero pixels alone.
pub(crate) fn normalize_in_place(px: &mut [f64]) {
    let s: f64 = px.iter().sum();
    if s > 0.0 {
        for v in px.iter_mut() {
            *v /= s;
        }
    }
}
