//! Tab-separated spotting records, one per query, in query order:
//!
//! ```text
//! query  status  x1  y1  x2  y2  rho  theta  votes  dtw  bbox_cx  bbox_cy  bbox_w  bbox_h
//! ```
//!
//! `status` is `found` or `not-found`; not-found rows carry `-` in every
//! numeric column. Lines starting with `#` are comments.

use crate::bbox::BoundingBox;
use crate::evaluation::{BoxResult, LineResult};
use crate::geometry::Point;
use crate::spotting::LineSegment;

use super::FormatError;

pub const RECORD_HEADER: &str =
    "# query\tstatus\tx1\ty1\tx2\ty2\trho\ttheta\tvotes\tdtw\tbbox_cx\tbbox_cy\tbbox_w\tbbox_h";

const COLUMNS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct FoundLine {
    pub segment: LineSegment,
    pub dtw_distance: f64,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotRecord {
    pub query: String,
    pub found: Option<FoundLine>,
}

impl SpotRecord {
    pub fn line_result(&self) -> LineResult {
        LineResult {
            query: self.query.clone(),
            segment: self.found.as_ref().map(|f| f.segment),
        }
    }

    pub fn box_result(&self) -> BoxResult {
        BoxResult {
            query: self.query.clone(),
            bbox: self.found.as_ref().map(|f| f.bbox),
        }
    }
}

pub fn format_records(records: &[SpotRecord]) -> String {
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in records {
        match &r.found {
            Some(f) => {
                let s = &f.segment;
                out.push_str(&format!(
                    "{}\tfound\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{}\t{:.6}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\n",
                    r.query,
                    s.x1,
                    s.y1,
                    s.x2,
                    s.y2,
                    s.rho,
                    s.theta,
                    s.votes,
                    f.dtw_distance,
                    f.bbox.center.x,
                    f.bbox.center.y,
                    f.bbox.width,
                    f.bbox.height
                ));
            }
            None => {
                out.push_str(&r.query);
                out.push_str("\tnot-found");
                for _ in 2..COLUMNS {
                    out.push_str("\t-");
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn parse_records(text: &str) -> Result<Vec<SpotRecord>, FormatError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(FormatError::parse(
                line_no,
                format!("expected {COLUMNS} tab-separated columns, found {}", cols.len()),
            ));
        }
        let query = cols[0].to_string();
        if query.is_empty() {
            return Err(FormatError::parse(line_no, "empty query"));
        }
        let found = match cols[1] {
            "not-found" => None,
            "found" => {
                let num = |k: usize| -> Result<f64, FormatError> {
                    cols[k]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| FormatError::parse(line_no, format!("bad number {:?}", cols[k])))
                };
                let votes = cols[8]
                    .parse::<u32>()
                    .map_err(|_| FormatError::parse(line_no, format!("bad vote count {:?}", cols[8])))?;
                let segment = LineSegment::new(
                    Point::new(num(2)?, num(3)?),
                    Point::new(num(4)?, num(5)?),
                    num(6)?,
                    num(7)?,
                    votes,
                );
                Some(FoundLine {
                    segment,
                    dtw_distance: num(9)?,
                    bbox: BoundingBox {
                        center: Point::new(num(10)?, num(11)?),
                        width: num(12)?,
                        height: num(13)?,
                    },
                })
            }
            other => {
                return Err(FormatError::parse(line_no, format!("unknown status {other:?}")));
            }
        };
        records.push(SpotRecord { query, found });
    }
    Ok(records)
}

/// One query per non-blank line; surrounding whitespace is trimmed.
pub fn parse_queries(text: &str) -> Result<Vec<String>, FormatError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let q = line.trim();
        if q.is_empty() {
            continue;
        }
        if q.contains('\t') {
            return Err(FormatError::parse(i + 1, "queries may not contain tabs"));
        }
        out.push(q.to_string());
    }
    Ok(out)
}
