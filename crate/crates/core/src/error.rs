use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transcription is empty")]
    EmptyTranscription,
    #[error("crop width {width} is narrower than the word length {chars}")]
    CropTooNarrow { width: usize, chars: usize },
    #[error("invalid character region: p={position}, n={chars}, L={level}, W={width}")]
    InvalidIndex {
        position: usize,
        chars: usize,
        level: usize,
        width: usize,
    },
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),
    #[error("degenerate line segment (zero length)")]
    DegenerateSegment,
    #[error("sequence is empty")]
    EmptySequence,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
