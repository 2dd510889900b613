//! Dynamic time warping between sequences of 38-channel distributions.

use crate::alphabet::NUM_CLASSES;
use crate::error::{Error, Result};

pub type ChannelVector = [f64; NUM_CLASSES];

const NORM_FLOOR: f64 = 1e-12;

fn norm(v: &ChannelVector) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `1 − cos(u, v)`, or 1 when either vector is (numerically) zero.
pub fn cosine_cost(u: &ChannelVector, v: &ChannelVector) -> f64 {
    cost_with_norms(u, norm(u), v, norm(v))
}

#[inline]
fn cost_with_norms(u: &ChannelVector, nu: f64, v: &ChannelVector, nv: f64) -> f64 {
    if nu < NORM_FLOOR || nv < NORM_FLOOR {
        return 1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (1.0 - dot / (nu * nv)).max(0.0)
}

/// Minimum accumulated cosine cost over monotone alignments using the
/// steps (i−1, j), (i, j−1) and (i−1, j−1), divided by `|a| + |b|`.
pub fn dtw_distance(a: &[ChannelVector], b: &[ChannelVector]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let na: Vec<f64> = a.iter().map(norm).collect();
    let nb: Vec<f64> = b.iter().map(norm).collect();

    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for i in 0..a.len() {
        for j in 0..m {
            let cost = cost_with_norms(&a[i], na[i], &b[j], nb[j]);
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => curr[j - 1],
                (_, 0) => prev[j],
                _ => prev[j].min(curr[j - 1]).min(prev[j - 1]),
            };
            curr[j] = best + cost;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1] / (a.len() + b.len()) as f64)
}
