//! Stand-in for a trained network: turns ground truth into a probability map
//! with controllable corruption (blur, character confusion, background leak).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{BACKGROUND, NUM_CHAR_CLASSES, NUM_CLASSES};
use crate::encoder::{embed_scene, SceneAnnotation};
use crate::error::{Error, Result};
use crate::tensor::{normalize_in_place, SoftPhocTensor};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gaussian blur standard deviation in pixels, applied per channel.
    pub blur_sigma: f64,
    /// Mean fraction of each pixel's character mass spread uniformly over
    /// the 37 character channels.
    pub confusion_rate: f64,
    /// Mean fraction of each pixel's character mass moved to background.
    pub background_leak: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "blur sigma must be >= 0, got {}",
                self.blur_sigma
            )));
        }
        for (name, v) in [
            ("confusion rate", self.confusion_rate),
            ("background leak", self.background_leak),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_noise_free(&self) -> bool {
        self.blur_sigma == 0.0 && self.confusion_rate == 0.0 && self.background_leak == 0.0
    }
}

/// Per-pixel rate drawn uniformly from an interval centred on `mean` and
/// clipped to `[0, 1]`; collapses to `mean` exactly at 0 and 1.
fn jittered_rate(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let lo = (2.0 * mean - 1.0).max(0.0);
    let hi = (2.0 * mean).min(1.0);
    if hi <= lo {
        return lo;
    }
    rng.random_range(lo..=hi)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// 1-D convolution of `src` with `kernel`; taps falling outside are dropped
/// and the remaining weights renormalized, so constants are preserved.
fn convolve_line(src: &[f64], kernel: &[f64], dst: &mut [f64]) {
    let radius = kernel.len() / 2;
    let n = src.len() as isize;
    for (i, out) in dst.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (k, w) in kernel.iter().enumerate() {
            let j = i as isize + k as isize - radius as isize;
            if (0..n).contains(&j) {
                acc += w * src[j as usize];
                wsum += w;
            }
        }
        *out = acc / wsum;
    }
}

fn blur_plane(plane: &mut [f64], height: usize, width: usize, kernel: &[f64]) {
    let mut tmp = vec![0.0; width.max(height)];
    for row in plane.chunks_exact_mut(width) {
        convolve_line(row, kernel, &mut tmp[..width]);
        row.copy_from_slice(&tmp[..width]);
    }
    let mut col = vec![0.0; height];
    for x in 0..width {
        for y in 0..height {
            col[y] = plane[y * width + x];
        }
        convolve_line(&col, kernel, &mut tmp[..height]);
        for y in 0..height {
            plane[y * width + x] = tmp[y];
        }
    }
}

fn blur(t: &mut SoftPhocTensor, sigma: f64) {
    let (h, w) = t.dims();
    let kernel = gaussian_kernel(sigma);
    let mut planes: Vec<Vec<f64>> = (0..NUM_CLASSES).map(|c| t.pixels().map(|px| px[c]).collect()).collect();
    planes.par_iter_mut().for_each(|p| blur_plane(p, h, w, &kernel));
    for (i, px) in t.pixels_mut().enumerate() {
        for (c, v) in px.iter_mut().enumerate() {
            *v = planes[c][i];
        }
    }
}

/// Noisy probability map for `scene`. Deterministic for a fixed config.
pub fn simulate(scene: &SceneAnnotation, cfg: &NoiseConfig) -> Result<SoftPhocTensor> {
    cfg.validate()?;
    let mut t = embed_scene(scene)?;
    if cfg.is_noise_free() {
        return Ok(t);
    }
    if cfg.blur_sigma > 0.0 {
        blur(&mut t, cfg.blur_sigma);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for px in t.pixels_mut() {
        let confusion = jittered_rate(&mut rng, cfg.confusion_rate);
        let leak = jittered_rate(&mut rng, cfg.background_leak);
        let char_mass: f64 = px[1..].iter().sum();
        if char_mass > 0.0 {
            let uniform = confusion * char_mass / NUM_CHAR_CLASSES as f64;
            for v in px[1..].iter_mut() {
                *v = (1.0 - confusion) * *v + uniform;
                *v *= 1.0 - leak;
            }
            px[BACKGROUND.index()] += leak * char_mass;
        }
        normalize_in_place(px);
    }
    Ok(t)
}
