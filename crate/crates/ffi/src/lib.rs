//! C interface to `softphoc`.
//!
//! Scenes and tensors are opaque handles created and released through this
//! API. Every fallible call returns a [`SphocStatus`]; on failure
//! [`sphoc_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use softphoc::io::{read_annotations, read_tensor, write_tensor, FormatError};
use softphoc::{
    embed_scene, line_to_bbox, simulate, spot, LineSegment, NoiseConfig, Point, Quad, SceneAnnotation, SoftPhocTensor,
    SpottingConfig, WordAnnotation,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Io = 4,
    Format = 5,
    BufferTooSmall = 6,
    Panic = 99,
}

/// A scene annotation under construction.
pub struct SphocScene {
    width: usize,
    height: usize,
    words: Vec<WordAnnotation>,
}

/// An H × W × 38 probability tensor.
pub struct SphocTensor(SoftPhocTensor);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SphocNoiseConfig {
    pub blur_sigma: f64,
    pub confusion_rate: f64,
    pub background_leak: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SphocSpottingConfig {
    pub heatmap_threshold: f64,
    pub hough_rho_res: f64,
    pub hough_theta_res: f64,
    pub hough_min_votes: u32,
    pub nms_rho: f64,
    pub nms_theta: f64,
    pub max_candidates: usize,
    pub gap_bridge: usize,
    pub band_halfwidth: f64,
    pub query_samples_per_char: usize,
}

/// Best line for a query. When `found` is false the other fields are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SphocDetection {
    pub found: bool,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub rho: f64,
    pub theta: f64,
    pub votes: u32,
    pub dtw_distance: f64,
}

/// Axis-aligned box given by its centre and size.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SphocBox {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl From<SphocSpottingConfig> for SpottingConfig {
    fn from(c: SphocSpottingConfig) -> Self {
        SpottingConfig {
            heatmap_threshold: c.heatmap_threshold,
            hough_rho_res: c.hough_rho_res,
            hough_theta_res: c.hough_theta_res,
            hough_min_votes: c.hough_min_votes,
            nms_rho: c.nms_rho,
            nms_theta: c.nms_theta,
            max_candidates: c.max_candidates,
            gap_bridge: c.gap_bridge,
            band_halfwidth: c.band_halfwidth,
            query_samples_per_char: c.query_samples_per_char,
        }
    }
}

impl From<&SpottingConfig> for SphocSpottingConfig {
    fn from(c: &SpottingConfig) -> Self {
        SphocSpottingConfig {
            heatmap_threshold: c.heatmap_threshold,
            hough_rho_res: c.hough_rho_res,
            hough_theta_res: c.hough_theta_res,
            hough_min_votes: c.hough_min_votes,
            nms_rho: c.nms_rho,
            nms_theta: c.nms_theta,
            max_candidates: c.max_candidates,
            gap_bridge: c.gap_bridge,
            band_halfwidth: c.band_halfwidth,
            query_samples_per_char: c.query_samples_per_char,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure {
    status: SphocStatus,
    message: String,
}

impl Failure {
    fn new(status: SphocStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(SphocStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<softphoc::Error> for Failure {
    fn from(e: softphoc::Error) -> Self {
        Failure::new(SphocStatus::InvalidArgument, e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let status = match e {
            FormatError::Io { .. } => SphocStatus::Io,
            _ => SphocStatus::Format,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn run(f: impl FnOnce() -> Result<(), Failure>) -> SphocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SphocStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            SphocStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(SphocStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

fn scene_annotation(scene: &SphocScene) -> Result<SceneAnnotation, Failure> {
    Ok(SceneAnnotation::new(scene.width, scene.height, scene.words.clone())?)
}

fn into_handle<T>(value: T, out: &mut *mut T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sphoc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sphoc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an empty scene of `width × height` pixels.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sphoc_scene_new(width: usize, height: usize, out: *mut *mut SphocScene) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        if width == 0 || height == 0 {
            return Err(Failure::new(
                SphocStatus::InvalidArgument,
                "image dimensions must be positive",
            ));
        }
        into_handle(
            SphocScene {
                width,
                height,
                words: Vec::new(),
            },
            out,
        );
        Ok(())
    })
}

/// Loads a scene from an annotation file (`x1,y1,...,x4,y4,transcription`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sphoc_scene_read(
    path: *const c_char,
    width: usize,
    height: usize,
    out: *mut *mut SphocScene,
) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let scene = read_annotations(&path, width, height)?;
        into_handle(
            SphocScene {
                width: scene.image_width,
                height: scene.image_height,
                words: scene.words,
            },
            out,
        );
        Ok(())
    })
}

/// Appends a word with corners `quad = [x1, y1, x2, y2, x3, y3, x4, y4]`
/// in reading order (top-left, top-right, bottom-right, bottom-left).
///
/// # Safety
/// `scene` must be a live handle, `quad` must point to 8 doubles and
/// `transcription` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sphoc_scene_add_word(
    scene: *mut SphocScene,
    quad: *const f64,
    transcription: *const c_char,
) -> SphocStatus {
    run(|| {
        let scene = out_arg(scene, "scene")?;
        if quad.is_null() {
            return Err(Failure::null("quad"));
        }
        let mut coords = [0.0; 8];
        coords.copy_from_slice(std::slice::from_raw_parts(quad, 8));
        let text = str_arg(transcription, "transcription")?;
        let word = WordAnnotation::new(Quad::from_coords(coords), text)?;
        // Validate against the image now rather than at embedding time.
        SceneAnnotation::new(scene.width, scene.height, vec![word.clone()])?;
        scene.words.push(word);
        Ok(())
    })
}

/// Number of words in the scene.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sphoc_scene_word_count(scene: *const SphocScene, out: *mut usize) -> SphocStatus {
    run(|| {
        let scene = ref_arg(scene, "scene")?;
        *out_arg(out, "out")? = scene.words.len();
        Ok(())
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sphoc_scene_free(scene: *mut SphocScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Noise-free ground-truth tensor of the scene.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sphoc_embed(scene: *const SphocScene, out: *mut *mut SphocTensor) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let scene = scene_annotation(ref_arg(scene, "scene")?)?;
        into_handle(SphocTensor(embed_scene(&scene)?), out);
        Ok(())
    })
}

/// Simulated probability map of the scene.
///
/// # Safety
/// `scene` and `config` must be valid pointers, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sphoc_simulate(
    scene: *const SphocScene,
    config: *const SphocNoiseConfig,
    out: *mut *mut SphocTensor,
) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let scene = scene_annotation(ref_arg(scene, "scene")?)?;
        let c = ref_arg(config, "config")?;
        let cfg = NoiseConfig {
            blur_sigma: c.blur_sigma,
            confusion_rate: c.confusion_rate,
            background_leak: c.background_leak,
            seed: c.seed,
        };
        into_handle(SphocTensor(simulate(&scene, &cfg)?), out);
        Ok(())
    })
}

/// Reads a tensor file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sphoc_tensor_read(path: *const c_char, out: *mut *mut SphocTensor) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        into_handle(SphocTensor(read_tensor(&path)?), out);
        Ok(())
    })
}

/// Writes a tensor file. Values are stored as 32-bit floats.
///
/// # Safety
/// `tensor` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sphoc_tensor_write(tensor: *const SphocTensor, path: *const c_char) -> SphocStatus {
    run(|| {
        let t = ref_arg(tensor, "tensor")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        write_tensor(&path, &t.0)?;
        Ok(())
    })
}

/// Height, width and channel count. Any output pointer may be null.
///
/// # Safety
/// `tensor` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sphoc_tensor_dims(
    tensor: *const SphocTensor,
    height: *mut usize,
    width: *mut usize,
    channels: *mut usize,
) -> SphocStatus {
    run(|| {
        let t = &ref_arg(tensor, "tensor")?.0;
        for (p, v) in [(height, t.height()), (width, t.width()), (channels, t.channels())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the tensor in row-major `[y][x][channel]` order into `buffer`,
/// which must hold at least `height * width * channels` doubles.
///
/// # Safety
/// `tensor` must be a live handle and `buffer` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sphoc_tensor_copy_data(
    tensor: *const SphocTensor,
    buffer: *mut f64,
    len: usize,
) -> SphocStatus {
    run(|| {
        let data = ref_arg(tensor, "tensor")?.0.as_slice();
        if buffer.is_null() {
            return Err(Failure::null("buffer"));
        }
        if len < data.len() {
            return Err(Failure::new(
                SphocStatus::BufferTooSmall,
                format!("buffer holds {len} values, tensor has {}", data.len()),
            ));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buffer, data.len());
        Ok(())
    })
}

/// Releases a tensor. Null is ignored.
///
/// # Safety
/// `tensor` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sphoc_tensor_free(tensor: *mut SphocTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Default spotting parameters.
#[no_mangle]
pub extern "C" fn sphoc_spotting_config_default() -> SphocSpottingConfig {
    (&SpottingConfig::default()).into()
}

/// Finds the line that best matches `query`. `config` may be null for the
/// defaults. A query with no candidate line returns `SPHOC_STATUS_OK` with
/// `found = false`.
///
/// # Safety
/// `tensor` must be a live handle, `query` a NUL-terminated string,
/// `config` null or valid, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sphoc_spot(
    tensor: *const SphocTensor,
    query: *const c_char,
    config: *const SphocSpottingConfig,
    out: *mut SphocDetection,
) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        *out = SphocDetection::default();
        let t = &ref_arg(tensor, "tensor")?.0;
        let query = str_arg(query, "query")?;
        let cfg = match config.as_ref() {
            Some(c) => SpottingConfig::from(*c),
            None => SpottingConfig::default(),
        };
        if let Some(d) = spot(t, query, &cfg)? {
            let s = d.segment;
            *out = SphocDetection {
                found: true,
                x1: s.x1,
                y1: s.y1,
                x2: s.x2,
                y2: s.y2,
                rho: s.rho,
                theta: s.theta,
                votes: s.votes,
                dtw_distance: d.dtw_distance,
            };
        }
        Ok(())
    })
}

/// Word box for a detected line of a query with `n_chars` characters,
/// clipped to an `image_width × image_height` image.
///
/// # Safety
/// `detection` must point to a detection with `found = true` and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sphoc_line_to_bbox(
    detection: *const SphocDetection,
    n_chars: usize,
    image_width: usize,
    image_height: usize,
    out: *mut SphocBox,
) -> SphocStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let d = ref_arg(detection, "detection")?;
        if !d.found {
            return Err(Failure::new(SphocStatus::InvalidArgument, "detection has no line"));
        }
        let seg = LineSegment::new(Point::new(d.x1, d.y1), Point::new(d.x2, d.y2), d.rho, d.theta, d.votes);
        let b = line_to_bbox(&seg, n_chars, (image_width, image_height))?;
        *out = SphocBox {
            cx: b.center.x,
            cy: b.center.y,
            width: b.width,
            height: b.height,
        };
        Ok(())
    })
}
