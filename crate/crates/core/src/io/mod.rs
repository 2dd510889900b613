//! On-disk formats: binary tensors, word annotations and detection records.

mod annotation;
mod detections;
mod tensor_file;

use thiserror::Error;

pub use annotation::{format_annotations, parse_annotations, read_annotations, IGNORE_TRANSCRIPTION};
pub use detections::{format_records, parse_queries, parse_records, FoundLine, SpotRecord, RECORD_HEADER};
pub use tensor_file::{decode_tensor, encode_tensor, read_tensor, write_tensor, MAGIC};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed tensor file: {0}")]
    Tensor(String),
}

impl FormatError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
