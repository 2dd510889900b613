//! Query-driven text line detection.
//!
//! For a query word the pipeline builds a bigram heatmap from the character
//! probability map, thresholds it, proposes lines with a Hough transform,
//! samples the map along every proposal and ranks proposals by their DTW
//! distance to the query's own Soft-PHOC descriptor.

mod dtw;
mod heatmap;
mod hough;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::encode_word;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::tensor::SoftPhocTensor;

pub use dtw::{cosine_cost, dtw_distance, ChannelVector};
pub use heatmap::{bigram_heatmap, threshold_mask, BigramHeatmap};
pub use hough::hough_lines;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpottingConfig {
    /// Heatmap pixels below this value are dropped before voting.
    pub heatmap_threshold: f64,
    pub hough_rho_res: f64,
    pub hough_theta_res: f64,
    pub hough_min_votes: u32,
    /// Peak suppression window in ρ (pixels).
    pub nms_rho: f64,
    /// Peak suppression window in θ (degrees).
    pub nms_theta: f64,
    pub max_candidates: usize,
    /// Longest run of unsupported positions a segment may bridge.
    pub gap_bridge: usize,
    /// Perpendicular distance within which a mask pixel supports a line.
    pub band_halfwidth: f64,
    pub query_samples_per_char: usize,
}

impl Default for SpottingConfig {
    fn default() -> Self {
        SpottingConfig {
            heatmap_threshold: 0.2,
            hough_rho_res: 1.0,
            hough_theta_res: 1.0,
            hough_min_votes: 20,
            nms_rho: 5.0,
            nms_theta: 5.0,
            max_candidates: 20,
            gap_bridge: 5,
            band_halfwidth: 2.0,
            query_samples_per_char: 10,
        }
    }
}

impl SpottingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.heatmap_threshold > 0.0 && self.heatmap_threshold < 1.0) {
            return bad("heatmap threshold must be in (0, 1)");
        }
        if !(self.hough_rho_res > 0.0 && self.hough_theta_res > 0.0) {
            return bad("Hough resolutions must be positive");
        }
        if self.hough_theta_res > 180.0 {
            return bad("Hough theta resolution must not exceed 180 degrees");
        }
        if !(self.nms_rho >= 0.0 && self.nms_theta >= 0.0 && self.band_halfwidth >= 0.0) {
            return bad("suppression window and band half-width must be non-negative");
        }
        if self.max_candidates == 0 || self.query_samples_per_char == 0 {
            return bad("candidate count and samples per character must be positive");
        }
        Ok(())
    }
}

/// A finite text line candidate.
///
/// Endpoints are stored left-to-right (top-to-bottom when vertical); `rho`
/// and `theta` are the normal form `x·cos θ + y·sin θ = ρ` with θ in degrees
/// in `[0, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub rho: f64,
    pub theta: f64,
    pub votes: u32,
}

impl LineSegment {
    pub fn new(a: Point, b: Point, rho: f64, theta: f64, votes: u32) -> Self {
        let (p, q) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
        LineSegment {
            x1: p.x,
            y1: p.y,
            x2: q.x,
            y2: q.y,
            rho,
            theta,
            votes,
        }
    }

    /// Segment between two points with its normal form computed from them.
    pub fn from_points(a: Point, b: Point) -> Self {
        let dir = (b.y - a.y).atan2(b.x - a.x).to_degrees();
        let theta = (dir + 90.0).rem_euclid(180.0);
        let (s, c) = theta.to_radians().sin_cos();
        let rho = a.x * c + a.y * s;
        Self::new(a, b, rho, theta, 0)
    }

    pub fn start(&self) -> Point {
        Point::new(self.x1, self.y1)
    }

    pub fn end(&self) -> Point {
        Point::new(self.x2, self.y2)
    }

    pub fn length(&self) -> f64 {
        self.start().distance(self.end())
    }

    pub fn midpoint(&self) -> Point {
        self.start().lerp(self.end(), 0.5)
    }
}

/// Fixed-width Soft-PHOC of a query transcription, one 38-vector per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDescriptor {
    pub samples: Vec<ChannelVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub query: String,
    pub segment: LineSegment,
    pub dtw_distance: f64,
    pub candidates_considered: usize,
}

/// Bilinear samples of `prob` at unit steps along `seg`, in canonical
/// left-to-right order. Yields `floor(length) + 1` samples.
pub fn sample_line_descriptor(prob: &SoftPhocTensor, seg: &LineSegment) -> Result<Vec<ChannelVector>> {
    let canonical = LineSegment::new(seg.start(), seg.end(), seg.rho, seg.theta, seg.votes);
    let len = canonical.length();
    if len == 0.0 || !len.is_finite() {
        return Err(Error::DegenerateSegment);
    }
    let (a, b) = (canonical.start(), canonical.end());
    let steps = len.floor() as usize;
    Ok((0..=steps)
        .map(|k| {
            let p = a.lerp(b, k as f64 / len);
            prob.sample_bilinear(p.x, p.y)
        })
        .collect())
}

pub fn query_descriptor(query: &str, cfg: &SpottingConfig) -> Result<QueryDescriptor> {
    let n = query.chars().count();
    if n == 0 {
        return Err(Error::EmptyTranscription);
    }
    let crop = encode_word(query, cfg.query_samples_per_char * n, 1)?;
    let samples = crop
        .pixels()
        .map(|px| {
            let mut v = [0.0; crate::alphabet::NUM_CLASSES];
            v.copy_from_slice(px);
            v
        })
        .collect();
    Ok(QueryDescriptor { samples })
}

fn rank(a: &(f64, LineSegment), b: &(f64, LineSegment)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(b.1.votes.cmp(&a.1.votes))
        .then(a.1.rho.total_cmp(&b.1.rho))
        .then(a.1.theta.total_cmp(&b.1.theta))
}

/// Best line for `query` in `prob`, or `None` when no candidate survives.
pub fn spot(prob: &SoftPhocTensor, query: &str, cfg: &SpottingConfig) -> Result<Option<Detection>> {
    cfg.validate()?;
    let descriptor = query_descriptor(query, cfg)?;
    let heatmap = bigram_heatmap(prob, query)?;
    let mask = threshold_mask(&heatmap, cfg.heatmap_threshold);
    let candidates = hough_lines(&mask, cfg);
    log::debug!(
        "query {query:?}: {} mask pixels, {} candidates",
        mask.count(),
        candidates.len()
    );

    let scored = candidates
        .par_iter()
        .map(|seg| {
            let line = sample_line_descriptor(prob, seg)?;
            Ok((dtw_distance(&line, &descriptor.samples)?, *seg))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(scored.iter().min_by(|a, b| rank(a, b)).map(|(d, seg)| Detection {
        query: query.to_string(),
        segment: *seg,
        dtw_distance: *d,
        candidates_considered: scored.len(),
    }))
}
