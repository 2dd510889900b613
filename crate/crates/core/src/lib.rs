//! Soft-PHOC word spotting.
//!
//! Word transcriptions are encoded as per-pixel pyramidal character
//! histograms ([`encoder`]), fused into scene-level probability maps, and
//! searched with query-driven line proposals ([`spotting`]): a bigram
//! heatmap, a Hough transform over its thresholded mask, and DTW ranking of
//! the sampled lines against the query's own descriptor.
//!
//! [`oracle`] produces (optionally corrupted) probability maps from ground
//! truth so the pipeline can run without a trained network. [`evaluation`]
//! scores detections under the line-overlap and box-IoU protocols.

pub mod alphabet;
pub mod bbox;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod loss;
pub mod mask;
pub mod oracle;
pub mod spotting;
pub mod synth;
pub mod tensor;

pub use alphabet::{classify_char, transcription_to_classes, CharClassId, NUM_CLASSES};
pub use bbox::{line_to_bbox, BoundingBox};
pub use encoder::{char_region_bounds, embed_scene, encode_word, CharRegion, SceneAnnotation, WordAnnotation};
pub use error::{Error, Result};
pub use evaluation::{evaluate_bboxes, evaluate_lines, line_box_overlap, EvalReport};
pub use geometry::{Point, Quad};
pub use loss::{build_masks, evaluate_loss, LossTerms, LossWeights, MaskTriple};
pub use mask::Mask;
pub use oracle::{simulate, NoiseConfig};
pub use spotting::{spot, Detection, LineSegment, SpottingConfig};
pub use tensor::SoftPhocTensor;
