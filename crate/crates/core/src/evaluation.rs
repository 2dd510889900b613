//! Word-spotting evaluation: line-vs-box overlap and box IoU protocols.
//!
//! Each query yields at most one detection. A detection counts as a true
//! positive when it matches a not-yet-matched ground-truth word with the same
//! (case-insensitive) transcription at or above the threshold; matching is
//! greedy by descending score. Ground-truth words whose transcription was
//! queried but never matched are false negatives.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bbox::BoundingBox;
use crate::encoder::SceneAnnotation;
use crate::error::{Error, Result};
use crate::geometry::Quad;
use crate::spotting::{Detection, LineSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Line,
    Bbox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            true_positives: self.true_positives + o.true_positives,
            false_positives: self.false_positives + o.false_positives,
            false_negatives: self.false_negatives + o.false_negatives,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    /// `TP / (TP + FP + FN)`.
    pub accuracy: f64,
    pub hmean: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl EvalReport {
    pub fn from_counts(protocol: Protocol, threshold: f64, c: Counts) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let tp = c.true_positives;
        let precision = ratio(tp, tp + c.false_positives);
        let recall = ratio(tp, tp + c.false_negatives);
        let all = tp + c.false_positives + c.false_negatives;
        let accuracy = if all == 0 { 1.0 } else { tp as f64 / all as f64 };
        let hmean = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalReport {
            protocol,
            threshold,
            precision,
            recall,
            accuracy,
            hmean,
            true_positives: tp,
            false_positives: c.false_positives,
            false_negatives: c.false_negatives,
        }
    }

    pub fn counts(&self) -> Counts {
        Counts {
            true_positives: self.true_positives,
            false_positives: self.false_positives,
            false_negatives: self.false_negatives,
        }
    }

    /// Flat `key=value` lines; the third metric follows the protocol.
    pub fn to_key_value(&self) -> String {
        let (name, value) = match self.protocol {
            Protocol::Line => ("accuracy", self.accuracy),
            Protocol::Bbox => ("hmean", self.hmean),
        };
        format!(
            "protocol={}\nthreshold={}\nprecision={:.4}\nrecall={:.4}\n{name}={value:.4}\n\
             true_positives={}\nfalse_positives={}\nfalse_negatives={}\n",
            match self.protocol {
                Protocol::Line => "line",
                Protocol::Bbox => "bbox",
            },
            self.threshold,
            self.precision,
            self.recall,
            self.true_positives,
            self.false_positives,
            self.false_negatives
        )
    }
}

/// Outcome of one query under the line protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct LineResult {
    pub query: String,
    pub segment: Option<LineSegment>,
}

impl LineResult {
    pub fn not_found(query: impl Into<String>) -> Self {
        LineResult {
            query: query.into(),
            segment: None,
        }
    }
}

impl From<&Detection> for LineResult {
    fn from(d: &Detection) -> Self {
        LineResult {
            query: d.query.clone(),
            segment: Some(d.segment),
        }
    }
}

/// Outcome of one query under the box protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxResult {
    pub query: String,
    pub bbox: Option<BoundingBox>,
}

/// Fraction of the line lying inside the quad, relative to the longer of
/// the line and the quad's major axis.
pub fn line_box_overlap(seg: &LineSegment, quad: &Quad) -> Result<f64> {
    let len = seg.length();
    if len == 0.0 || !len.is_finite() {
        return Err(Error::DegenerateSegment);
    }
    quad.validate()?;
    let inside = quad.clipped_length(seg.start(), seg.end());
    Ok((inside / len.max(quad.major_axis())).clamp(0.0, 1.0))
}

fn same_word(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

/// Greedy one-to-one matching on `score(result, gt)` over same-word pairs.
fn greedy_match(
    queries: &[&str],
    found: &[bool],
    gt: &SceneAnnotation,
    threshold: f64,
    mut score: impl FnMut(usize, usize) -> Result<f64>,
) -> Result<Counts> {
    let mut pairs = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        if !found[i] {
            continue;
        }
        for (j, word) in gt.words.iter().enumerate() {
            if same_word(q, &word.transcription) {
                let s = score(i, j)?;
                if s >= threshold {
                    pairs.push((s, i, j));
                }
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut result_used = vec![false; queries.len()];
    let mut gt_used = vec![false; gt.words.len()];
    let mut tp = 0;
    for (_, i, j) in pairs {
        if !result_used[i] && !gt_used[j] {
            result_used[i] = true;
            gt_used[j] = true;
            tp += 1;
        }
    }

    let queried: HashSet<String> = queries.iter().map(|q| q.to_lowercase()).collect();
    let relevant = gt
        .words
        .iter()
        .filter(|w| queried.contains(&w.transcription.to_lowercase()))
        .count();
    let detections = found.iter().filter(|f| **f).count();
    Ok(Counts {
        true_positives: tp,
        false_positives: detections - tp,
        false_negatives: relevant - tp,
    })
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("threshold must be in (0, 1], got {t}")))
    }
}

pub fn line_counts(results: &[LineResult], gt: &SceneAnnotation, threshold: f64) -> Result<Counts> {
    check_threshold(threshold)?;
    let queries: Vec<&str> = results.iter().map(|r| r.query.as_str()).collect();
    let found: Vec<bool> = results.iter().map(|r| r.segment.is_some()).collect();
    greedy_match(&queries, &found, gt, threshold, |i, j| {
        let seg = results[i].segment.as_ref().expect("only found results are scored");
        line_box_overlap(seg, &gt.words[j].quad)
    })
}

pub fn evaluate_lines(results: &[LineResult], gt: &SceneAnnotation, threshold: f64) -> Result<EvalReport> {
    let c = line_counts(results, gt, threshold)?;
    Ok(EvalReport::from_counts(Protocol::Line, threshold, c))
}

pub fn bbox_counts(results: &[BoxResult], gt: &SceneAnnotation, iou_threshold: f64) -> Result<Counts> {
    check_threshold(iou_threshold)?;
    let queries: Vec<&str> = results.iter().map(|r| r.query.as_str()).collect();
    let found: Vec<bool> = results.iter().map(|r| r.bbox.is_some()).collect();
    greedy_match(&queries, &found, gt, iou_threshold, |i, j| {
        let b = results[i].bbox.as_ref().expect("only found results are scored");
        Ok(b.rect().iou(&gt.words[j].quad.bounding_rect()))
    })
}

pub fn evaluate_bboxes(results: &[BoxResult], gt: &SceneAnnotation, iou_threshold: f64) -> Result<EvalReport> {
    let c = bbox_counts(results, gt, iou_threshold)?;
    Ok(EvalReport::from_counts(Protocol::Bbox, iou_threshold, c))
}
