//! Soft-PHOC annotation: pyramidal character histograms laid out along the
//! columns of a rectified word crop, then warped back into the scene.
//!
//! At pyramid level `L` (one level per character, `L = 1..=n`) the crop is
//! split into `L` equal bins. The character at 1-based position `p` covers
//! the fractional span `[(p-1)/n, p/n]`, which is snapped outward to whole
//! bins. Every covered column receives one vote for the character's class;
//! the per-column histogram summed over all levels is then L1-normalized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{transcription_to_classes, BACKGROUND, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::geometry::{Homography, Point, Quad};
use crate::tensor::{normalize_in_place, SoftPhocTensor};

/// Character mass below which a warped pixel does not claim the scene pixel.
const CONTEST_EPS: f64 = 1e-6;

/// A single word: its region in the image and what it says.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordAnnotation {
    pub quad: Quad,
    pub transcription: String,
}

impl WordAnnotation {
    pub fn new(quad: Quad, transcription: impl Into<String>) -> Result<Self> {
        let transcription = transcription.into();
        if transcription.is_empty() {
            return Err(Error::EmptyTranscription);
        }
        quad.validate()?;
        Ok(WordAnnotation { quad, transcription })
    }

    pub fn char_count(&self) -> usize {
        self.transcription.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneAnnotation {
    pub image_width: usize,
    pub image_height: usize,
    pub words: Vec<WordAnnotation>,
}

impl SceneAnnotation {
    /// Builds a scene, clamping every quad vertex into the image.
    pub fn new(image_width: usize, image_height: usize, words: Vec<WordAnnotation>) -> Result<Self> {
        if image_width == 0 || image_height == 0 {
            return Err(Error::InvalidConfig(format!(
                "image dimensions must be positive, got {image_width}x{image_height}"
            )));
        }
        let (w, h) = (image_width as f64, image_height as f64);
        let words = words
            .into_iter()
            .map(|word| WordAnnotation::new(word.quad.clamped(w, h), word.transcription))
            .collect::<Result<Vec<_>>>()?;
        Ok(SceneAnnotation {
            image_width,
            image_height,
            words,
        })
    }

    pub fn empty(image_width: usize, image_height: usize) -> Result<Self> {
        Self::new(image_width, image_height, Vec::new())
    }
}

/// Pixel columns `[lower, upper)` influenced by one character at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharRegion {
    pub position: usize,
    pub level: usize,
    pub lower: usize,
    pub upper: usize,
}

impl CharRegion {
    pub fn columns(&self) -> std::ops::Range<usize> {
        self.lower..self.upper
    }
}

/// `round_half_up(k * width / level)` in exact integer arithmetic.
fn bin_edge(k: usize, width: usize, level: usize) -> usize {
    (2 * k * width + level) / (2 * level)
}

/// Region of influence of the character at 1-based `position` in a word of
/// `chars` characters at pyramid `level`, for a crop `width` pixels wide.
pub fn char_region_bounds(position: usize, chars: usize, level: usize, width: usize) -> Result<CharRegion> {
    let valid = (1..=chars).contains(&position) && (1..=chars).contains(&level) && width >= chars;
    if !valid {
        return Err(Error::InvalidIndex {
            position,
            chars,
            level,
            width,
        });
    }
    let first_bin = level * (position - 1) / chars;
    let end_bin = (level * position).div_ceil(chars);
    Ok(CharRegion {
        position,
        level,
        lower: bin_edge(first_bin, width, level),
        upper: bin_edge(end_bin, width, level),
    })
}

/// Soft-PHOC annotation of a rectified `width × height` word crop.
///
/// The result varies only along columns; background is zero everywhere and
/// the 37 character channels of each pixel sum to one.
pub fn encode_word(transcription: &str, width: usize, height: usize) -> Result<SoftPhocTensor> {
    let classes = transcription_to_classes(transcription)?;
    let n = classes.len();
    if width < n {
        return Err(Error::CropTooNarrow { width, chars: n });
    }
    if height == 0 {
        return Err(Error::InvalidConfig("crop height must be at least 1".into()));
    }

    let mut row = vec![0.0f64; width * NUM_CLASSES];
    for level in 1..=n {
        for (i, class) in classes.iter().enumerate() {
            let region = char_region_bounds(i + 1, n, level, width)?;
            for x in region.columns() {
                row[x * NUM_CLASSES + class.index()] += 1.0;
            }
        }
    }
    for px in row.chunks_exact_mut(NUM_CLASSES) {
        normalize_in_place(px);
    }

    let mut data = Vec::with_capacity(row.len() * height);
    for _ in 0..height {
        data.extend_from_slice(&row);
    }
    SoftPhocTensor::from_vec(height, width, data)
}

/// Rectified crop size for a word quad: rounded mean side lengths, at least
/// one pixel, and at least one column per character.
pub fn crop_size(quad: &Quad, chars: usize) -> (usize, usize) {
    let w = (quad.mean_width().round() as usize).max(1).max(chars);
    let h = (quad.mean_height().round() as usize).max(1);
    (w, h)
}

/// Warped distribution for one word: scene pixels it claims, in row-major
/// order, each carrying a normalized 38-channel distribution.
struct WordPatch {
    pixels: Vec<(usize, usize, [f64; NUM_CLASSES])>,
}

fn warp_word(word: &WordAnnotation, image_width: usize, image_height: usize) -> Result<WordPatch> {
    let (cw, ch) = crop_size(&word.quad, word.char_count());
    let crop = encode_word(&word.transcription, cw, ch)?;
    let to_crop = Homography::rect_to_quad(cw as f64, ch as f64, &word.quad)?.inverse()?;

    let bb = word.quad.bounding_rect();
    let x_range = (bb.x0.floor().max(0.0) as usize)..(bb.x1.ceil() as usize).min(image_width);
    let y_range = (bb.y0.floor().max(0.0) as usize)..(bb.y1.ceil() as usize).min(image_height);

    let mut pixels = Vec::new();
    for y in y_range {
        for x in x_range.clone() {
            let center = Point::pixel_center(x, y);
            if !word.quad.contains(center) {
                continue;
            }
            let Some(uv) = to_crop.apply(center) else {
                continue;
            };
            let mut dist = crop.sample_bilinear(uv.x, uv.y);
            dist[BACKGROUND.index()] = 0.0;
            let mass: f64 = dist.iter().sum();
            if mass > CONTEST_EPS {
                normalize_in_place(&mut dist);
                pixels.push((x, y, dist));
            }
        }
    }
    Ok(WordPatch { pixels })
}

/// Scene-level Soft-PHOC: every word's crop annotation warped into the image.
///
/// Pixels outside all words are pure background. Where words overlap, the
/// later word in the list wins.
pub fn embed_scene(scene: &SceneAnnotation) -> Result<SoftPhocTensor> {
    let (w, h) = (scene.image_width, scene.image_height);
    let patches = scene
        .words
        .par_iter()
        .map(|word| warp_word(word, w, h))
        .collect::<Result<Vec<_>>>()?;

    let mut out = SoftPhocTensor::background(h, w);
    for patch in patches {
        for (x, y, dist) in patch.pixels {
            out.pixel_mut(y, x).copy_from_slice(&dist);
        }
    }
    Ok(out)
}
