//! Word-level ground truth, one word per line:
//! `x1,y1,x2,y2,x3,y3,x4,y4,transcription`. The transcription is everything
//! after the eighth comma. `###` marks an ignore region.

use std::path::Path;

use crate::encoder::{SceneAnnotation, WordAnnotation};
use crate::geometry::Quad;

use super::FormatError;

pub const IGNORE_TRANSCRIPTION: &str = "###";

fn parse_line(line_no: usize, line: &str) -> Result<Option<WordAnnotation>, FormatError> {
    let fields: Vec<&str> = line.splitn(9, ',').collect();
    if fields.len() != 9 {
        return Err(FormatError::parse(
            line_no,
            format!(
                "expected 8 coordinates and a transcription, found {} fields",
                fields.len()
            ),
        ));
    }
    let mut coords = [0.0; 8];
    for (c, f) in coords.iter_mut().zip(&fields[..8]) {
        *c = f
            .trim()
            .parse::<i64>()
            .map_err(|_| FormatError::parse(line_no, format!("bad coordinate {f:?}")))? as f64;
    }
    let transcription = fields[8];
    if transcription == IGNORE_TRANSCRIPTION {
        return Ok(None);
    }
    WordAnnotation::new(Quad::from_coords(coords), transcription)
        .map(Some)
        .map_err(|e| FormatError::parse(line_no, e.to_string()))
}

/// Parses annotation text for an image of the given size. Vertices outside
/// the image are clamped.
pub fn parse_annotations(text: &str, width: usize, height: usize) -> Result<SceneAnnotation, FormatError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut words = Vec::new();
    let mut line_numbers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(w) = parse_line(i + 1, line)? {
            words.push(w);
            line_numbers.push(i + 1);
        }
    }
    // Clamp word by word so a failure can name its line.
    let mut clamped = Vec::with_capacity(words.len());
    for (w, line) in words.into_iter().zip(line_numbers) {
        let scene =
            SceneAnnotation::new(width, height, vec![w]).map_err(|e| FormatError::parse(line, e.to_string()))?;
        clamped.extend(scene.words);
    }
    SceneAnnotation::new(width, height, clamped).map_err(|e| FormatError::parse(0, e.to_string()))
}

pub fn read_annotations(path: &Path, width: usize, height: usize) -> Result<SceneAnnotation, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_annotations(&text, width, height)
}

/// Writes words back out, rounding vertices to integers.
pub fn format_annotations(scene: &SceneAnnotation) -> String {
    let mut out = String::new();
    for w in &scene.words {
        for p in w.quad.points() {
            out.push_str(&format!("{},{},", p.x.round() as i64, p.y.round() as i64));
        }
        out.push_str(&w.transcription);
        out.push('\n');
    }
    out
}
