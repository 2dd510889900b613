//! Straight-line proposals from a binary mask: (ρ, θ) voting, greedy peak
//! suppression, and trimming each infinite line to the mask pixels it covers.

use std::cmp::Ordering;

use crate::geometry::Point;
use crate::mask::Mask;

use super::{LineSegment, SpottingConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Peak {
    rho: f64,
    theta_deg: f64,
    votes: u32,
}

struct Accumulator {
    votes: Vec<u32>,
    n_rho: usize,
    rho_offset: isize,
    rho_res: f64,
    thetas: Vec<(f64, f64, f64)>,
}

impl Accumulator {
    fn build(points: &[Point], diag: f64, cfg: &SpottingConfig) -> Self {
        let rho_offset = (diag / cfg.hough_rho_res).ceil() as isize;
        let n_rho = 2 * rho_offset as usize + 1;
        let n_theta = ((180.0 / cfg.hough_theta_res).round() as usize).max(1);
        let thetas: Vec<(f64, f64, f64)> = (0..n_theta)
            .map(|k| {
                let deg = k as f64 * cfg.hough_theta_res;
                let (s, c) = deg.to_radians().sin_cos();
                (deg, c, s)
            })
            .collect();
        let mut votes = vec![0u32; n_theta * n_rho];
        for p in points {
            for (k, (_, c, s)) in thetas.iter().enumerate() {
                let rho = p.x * c + p.y * s;
                let bin = (rho / cfg.hough_rho_res).round() as isize + rho_offset;
                if (0..n_rho as isize).contains(&bin) {
                    votes[k * n_rho + bin as usize] += 1;
                }
            }
        }
        Accumulator {
            votes,
            n_rho,
            rho_offset,
            rho_res: cfg.hough_rho_res,
            thetas,
        }
    }

    fn cells_above(&self, min_votes: u32) -> Vec<Peak> {
        self.votes
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= min_votes && **v > 0)
            .map(|(i, v)| Peak {
                rho: (((i % self.n_rho) as isize - self.rho_offset) as f64) * self.rho_res,
                theta_deg: self.thetas[i / self.n_rho].0,
                votes: *v,
            })
            .collect()
    }
}

/// Whether two (ρ, θ) cells are within the suppression window, accounting
/// for the θ = 0 / θ = 180 identity `(ρ, θ) ≡ (−ρ, θ − 180)`.
fn within_window(a: &Peak, b: &Peak, rho_win: f64, theta_win: f64) -> bool {
    let dt = (a.theta_deg - b.theta_deg).abs();
    let direct = dt <= theta_win && (a.rho - b.rho).abs() <= rho_win;
    let wrapped = 180.0 - dt <= theta_win && (a.rho + b.rho).abs() <= rho_win;
    direct || wrapped
}

fn peak_order(a: &Peak, b: &Peak) -> Ordering {
    b.votes
        .cmp(&a.votes)
        .then(a.rho.total_cmp(&b.rho))
        .then(a.theta_deg.total_cmp(&b.theta_deg))
}

fn select_peaks(mut cells: Vec<Peak>, cfg: &SpottingConfig) -> Vec<Peak> {
    cells.sort_by(peak_order);
    let mut kept: Vec<Peak> = Vec::new();
    for cell in cells {
        if kept.len() >= cfg.max_candidates {
            break;
        }
        if !kept.iter().any(|k| within_window(k, &cell, cfg.nms_rho, cfg.nms_theta)) {
            kept.push(cell);
        }
    }
    kept
}

/// Sub-cell estimate of a peak's line: the total-least-squares fit of the
/// mask pixels within `band_halfwidth` of it. A thin line's votes split over
/// neighbouring ρ bins, which can leave the strongest cell a degree off; the
/// fit recovers the orientation. The grid cell is kept when the fit leaves
/// the peak's suppression window in θ.
fn refine_peak(peak: &Peak, points: &[Point], cfg: &SpottingConfig) -> Peak {
    let (s, c) = peak.theta_deg.to_radians().sin_cos();
    let support: Vec<&Point> = points
        .iter()
        .filter(|p| (p.x * c + p.y * s - peak.rho).abs() <= cfg.band_halfwidth)
        .collect();
    if support.len() < 2 {
        return *peak;
    }
    let n = support.len() as f64;
    let mx = support.iter().map(|p| p.x).sum::<f64>() / n;
    let my = support.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &support {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let direction = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let theta_deg = (direction.to_degrees() + 90.0).rem_euclid(180.0);
    let dt = (theta_deg - peak.theta_deg).abs();
    if dt.min(180.0 - dt) > cfg.nms_theta {
        return *peak;
    }
    let (s, c) = theta_deg.to_radians().sin_cos();
    Peak {
        rho: mx * c + my * s,
        theta_deg,
        votes: peak.votes,
    }
}

/// Parameter interval of `origin + t·dir` inside `[0, w] × [0, h]`.
fn clip_to_image(origin: Point, dir: (f64, f64), w: f64, h: f64) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (o, d, hi) in [(origin.x, dir.0, w), (origin.y, dir.1, h)] {
        if d.abs() < 1e-12 {
            if o < 0.0 || o > hi {
                return None;
            }
        } else {
            let a = (0.0 - o) / d;
            let b = (hi - o) / d;
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Trims the infinite line of `peak` to its longest run of mask support.
fn extract_segment(
    peak: &Peak,
    points: &[Point],
    width: f64,
    height: f64,
    cfg: &SpottingConfig,
) -> Option<LineSegment> {
    let (s, c) = peak.theta_deg.to_radians().sin_cos();
    let dir = (-s, c);
    let origin = Point::new(peak.rho * c, peak.rho * s);
    let (t_lo, t_hi) = clip_to_image(origin, dir, width, height)?;

    let n_bins = (t_hi - t_lo).floor() as usize + 1;
    let mut span: Vec<Option<(f64, f64)>> = vec![None; n_bins];
    for p in points {
        if (p.x * c + p.y * s - peak.rho).abs() > cfg.band_halfwidth {
            continue;
        }
        let t = (p.x * dir.0 + p.y * dir.1).clamp(t_lo, t_hi);
        let bin = ((t - t_lo).floor() as usize).min(n_bins - 1);
        span[bin] = Some(match span[bin] {
            Some((a, b)) => (a.min(t), b.max(t)),
            None => (t, t),
        });
    }

    let mut best: Option<(f64, f64)> = None;
    let mut current: Option<(f64, f64)> = None;
    let mut gap = 0usize;
    for bin in &span {
        match (bin, current) {
            (Some((a, b)), None) => {
                current = Some((*a, *b));
                gap = 0;
            }
            (Some((_, b)), Some((start, _))) => {
                current = Some((start, *b));
                gap = 0;
            }
            (None, Some(run)) => {
                gap += 1;
                if gap > cfg.gap_bridge {
                    best = longer(best, run);
                    current = None;
                }
            }
            (None, None) => {}
        }
    }
    if let Some(run) = current {
        best = longer(best, run);
    }

    let (ta, tb) = best?;
    let at = |t: f64| Point::new(origin.x + t * dir.0, origin.y + t * dir.1);
    let seg = LineSegment::new(at(ta), at(tb), peak.rho, peak.theta_deg, peak.votes);
    (seg.length() >= 1.0).then_some(seg)
}

fn longer(best: Option<(f64, f64)>, run: (f64, f64)) -> Option<(f64, f64)> {
    match best {
        Some(b) if b.1 - b.0 >= run.1 - run.0 => Some(b),
        _ => Some(run),
    }
}

/// Candidate text lines supported by the set pixels of `mask`, strongest
/// first.
pub fn hough_lines(mask: &Mask, cfg: &SpottingConfig) -> Vec<LineSegment> {
    let points: Vec<Point> = mask.iter_set().map(|(x, y)| Point::pixel_center(x, y)).collect();
    if points.is_empty() {
        return Vec::new();
    }
    let (w, h) = (mask.width as f64, mask.height as f64);
    let acc = Accumulator::build(&points, w.hypot(h), cfg);
    let peaks = select_peaks(acc.cells_above(cfg.hough_min_votes), cfg);
    log::debug!("hough: {} points, {} peaks", points.len(), peaks.len());
    let mut refined: Vec<Peak> = Vec::with_capacity(peaks.len());
    for p in &peaks {
        let r = refine_peak(p, &points, cfg);
        // Two grid peaks can settle on the same line.
        if !refined.iter().any(|k| within_window(k, &r, cfg.nms_rho, cfg.nms_theta)) {
            refined.push(r);
        }
    }
    refined
        .iter()
        .filter_map(|p| extract_segment(p, &points, w, h, cfg))
        .collect()
}
