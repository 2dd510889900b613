//! Random synthetic scenes: non-overlapping rotated word boxes with random
//! lowercase transcriptions.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::{SceneAnnotation, WordAnnotation};
use crate::geometry::{Point, Quad, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub image_width: usize,
    pub image_height: usize,
    pub words: (usize, usize),
    pub word_len: (usize, usize),
    pub char_width: (f64, f64),
    pub word_height: (f64, f64),
    /// Maximum absolute rotation in degrees.
    pub max_angle: f64,
    /// Clearance between the bounding rectangles of different words.
    pub spacing: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            image_width: 480,
            image_height: 360,
            words: (1, 6),
            word_len: (3, 10),
            char_width: (9.0, 13.0),
            word_height: (14.0, 22.0),
            max_angle: 45.0,
            spacing: 8.0,
        }
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 400;

pub fn random_word(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| (b'a' + rng.random_range(0..26u8)) as char).collect()
}

fn overlaps(a: &Rect, b: &Rect, spacing: f64) -> bool {
    a.x0 < b.x1 + spacing && b.x0 < a.x1 + spacing && a.y0 < b.y1 + spacing && b.y0 < a.y1 + spacing
}

/// Places `texts` one by one at random positions; words that cannot be
/// placed without overlap are dropped.
pub fn place_words(rng: &mut ChaCha8Rng, texts: &[String], p: &SceneParams) -> SceneAnnotation {
    let (iw, ih) = (p.image_width as f64, p.image_height as f64);
    let mut words: Vec<WordAnnotation> = Vec::new();
    let mut rects: Vec<Rect> = Vec::new();
    for text in texts {
        let n = text.chars().count() as f64;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let width = n * rng.random_range(p.char_width.0..=p.char_width.1);
            let height = rng.random_range(p.word_height.0..=p.word_height.1);
            let angle = if p.max_angle > 0.0 {
                rng.random_range(-p.max_angle..=p.max_angle)
            } else {
                0.0
            };
            let center = Point::new(rng.random_range(0.0..iw), rng.random_range(0.0..ih));
            let quad = Quad::rotated_rect(center, width, height, angle);
            let r = quad.bounding_rect();
            let inside = r.x0 >= 2.0 && r.y0 >= 2.0 && r.x1 <= iw - 2.0 && r.y1 <= ih - 2.0;
            if inside && !rects.iter().any(|o| overlaps(o, &r, p.spacing)) {
                let word = WordAnnotation::new(quad, text.clone()).expect("rotated rectangles are simple");
                words.push(word);
                rects.push(r);
                break;
            }
        }
    }
    SceneAnnotation::new(p.image_width, p.image_height, words).expect("words lie inside the image")
}

/// A scene with a random number of random words.
pub fn random_scene(seed: u64, p: &SceneParams) -> SceneAnnotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(p.words.0..=p.words.1);
    let texts: Vec<String> = (0..count)
        .map(|_| {
            let len = rng.random_range(p.word_len.0..=p.word_len.1);
            random_word(&mut rng, len)
        })
        .collect();
    place_words(&mut rng, &texts, p)
}
