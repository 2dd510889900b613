//! Axis-aligned word boxes from detected text lines.
//!
//! A near-horizontal line (|angle| ≤ 45°) becomes the box's width and the
//! height is its length divided by the query's character count. A
//! near-vertical line becomes the height and the width is its length
//! multiplied by the character count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::spotting::LineSegment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub center: Point,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn from_rect(r: &Rect) -> Self {
        BoundingBox {
            center: Point::new((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0),
            width: r.width(),
            height: r.height(),
        }
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.center.x - self.width / 2.0,
            y0: self.center.y - self.height / 2.0,
            x1: self.center.x + self.width / 2.0,
            y1: self.center.y + self.height / 2.0,
        }
    }
}

/// Segment angle from the horizontal in degrees, in `(−90, 90]`.
pub fn segment_angle(seg: &LineSegment) -> f64 {
    let a = (seg.y2 - seg.y1).atan2(seg.x2 - seg.x1).to_degrees();
    if a > 90.0 {
        a - 180.0
    } else if a <= -90.0 {
        a + 180.0
    } else {
        a
    }
}

/// The box before clipping to the image.
pub fn line_box_axes(seg: &LineSegment, n_chars: usize) -> Result<BoundingBox> {
    if n_chars == 0 {
        return Err(Error::InvalidConfig("query must have at least one character".into()));
    }
    let len = seg.length();
    if len == 0.0 || !len.is_finite() {
        return Err(Error::DegenerateSegment);
    }
    let n = n_chars as f64;
    // |dy| <= |dx| is |angle| <= 45° without trigonometric rounding.
    let near_horizontal = (seg.y2 - seg.y1).abs() <= (seg.x2 - seg.x1).abs();
    let (width, height) = if near_horizontal {
        (len, len / n)
    } else {
        (len * n, len)
    };
    Ok(BoundingBox {
        center: seg.midpoint(),
        width,
        height,
    })
}

/// Box for a detected line, clipped to a `width × height` image.
pub fn line_to_bbox(seg: &LineSegment, n_chars: usize, image_dims: (usize, usize)) -> Result<BoundingBox> {
    let raw = line_box_axes(seg, n_chars)?;
    let image = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: image_dims.0 as f64,
        y1: image_dims.1 as f64,
    };
    let clipped = raw.rect().intersection(&image);
    if clipped.area() <= 0.0 {
        return Err(Error::DegenerateSegment);
    }
    Ok(BoundingBox::from_rect(&clipped))
}
