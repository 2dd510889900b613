//! Training masks and the three-term masked cross-entropy, evaluated (not
//! optimized) between a predicted map and a ground-truth annotation.

use serde::{Deserialize, Serialize};

use crate::alphabet::BACKGROUND;
use crate::encoder::SceneAnnotation;
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::mask::Mask;
use crate::tensor::SoftPhocTensor;

const LOG_FLOOR: f64 = 1e-12;

/// Non-text, text, and text-plus-context masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTriple {
    pub non_text: Mask,
    pub text: Mask,
    pub context: Mask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub background: f64,
    pub text: f64,
    pub context: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            background: 0.1,
            text: 1.0,
            context: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub background: f64,
    pub text: f64,
    pub context: f64,
    pub total: f64,
}

fn fill_rect(mask: &mut Mask, r: &Rect) {
    let x_end = (r.x1.ceil().max(0.0) as usize).min(mask.width);
    let y_end = (r.y1.ceil().max(0.0) as usize).min(mask.height);
    for y in (r.y0.floor().max(0.0) as usize)..y_end {
        for x in (r.x0.floor().max(0.0) as usize)..x_end {
            if r.contains(Point::pixel_center(x, y)) {
                mask.set(y, x, true);
            }
        }
    }
}

pub fn build_masks(scene: &SceneAnnotation) -> MaskTriple {
    let (w, h) = (scene.image_width, scene.image_height);
    let mut text = Mask::new(h, w, false);
    let mut context = Mask::new(h, w, false);

    for word in &scene.words {
        let bb = word.quad.bounding_rect();
        let x_end = (bb.x1.ceil() as usize).min(w);
        let y_end = (bb.y1.ceil() as usize).min(h);
        for y in (bb.y0.floor().max(0.0) as usize)..y_end {
            for x in (bb.x0.floor().max(0.0) as usize)..x_end {
                if word.quad.contains(Point::pixel_center(x, y)) {
                    text.set(y, x, true);
                }
            }
        }
        let (hw, hh) = (bb.width() / 2.0, bb.height() / 2.0);
        let grown = Rect {
            x0: bb.x0 - hw,
            y0: bb.y0 - hh,
            x1: bb.x1 + hw,
            y1: bb.y1 + hh,
        };
        fill_rect(&mut context, &grown);
    }

    // A text pixel always lies in its word's grown rectangle; keep the
    // subset relation explicit for quads thinner than a pixel.
    for (c, t) in context.data.iter_mut().zip(&text.data) {
        *c |= *t;
    }
    let non_text = Mask {
        height: h,
        width: w,
        data: text.data.iter().map(|v| !v).collect(),
    };
    MaskTriple {
        non_text,
        text,
        context,
    }
}

fn neg_log(p: f64) -> f64 {
    -p.max(LOG_FLOOR).ln()
}

fn masked_mean(mask: &Mask, mut term: impl FnMut(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, on) in mask.data.iter().enumerate() {
        if *on {
            sum += term(i);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Background BCE on non-text pixels, text BCE on text pixels and the 38-class
/// soft cross-entropy on the context mask, each a per-mask mean.
///
/// The context term subtracts the target's own entropy (i.e. it is the KL
/// divergence), so a prediction equal to a soft target scores zero.
pub fn evaluate_loss(
    pred: &SoftPhocTensor,
    gt: &SoftPhocTensor,
    masks: &MaskTriple,
    weights: &LossWeights,
) -> Result<LossTerms> {
    if pred.dims() != gt.dims() {
        return Err(Error::ShapeMismatch(format!(
            "prediction is {:?}, ground truth is {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    for m in [&masks.non_text, &masks.text, &masks.context] {
        if (m.height, m.width) != pred.dims() {
            return Err(Error::ShapeMismatch(format!(
                "mask is {:?}, tensors are {:?}",
                (m.height, m.width),
                pred.dims()
            )));
        }
    }

    let px = |i: usize| {
        let w = pred.width();
        pred.pixel(i / w, i % w)
    };
    let background = masked_mean(&masks.non_text, |i| neg_log(px(i)[BACKGROUND.index()]));
    let text = masked_mean(&masks.text, |i| neg_log(px(i)[1..].iter().sum()));
    let context = masked_mean(&masks.context, |i| {
        let w = pred.width();
        let target = gt.pixel(i / w, i % w);
        let kl: f64 = px(i)
            .iter()
            .zip(target)
            .filter(|(_, t)| **t > 0.0)
            .map(|(p, t)| t * (neg_log(*p) - neg_log(*t)))
            .sum();
        kl.max(0.0)
    });
    let total = weights.background * background + weights.text * text + weights.context * context;
    Ok(LossTerms {
        background,
        text,
        context,
        total,
    })
}
