//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! Run with `cargo test -p softphoc --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use softphoc::alphabet::classify_char;
use softphoc::bbox::line_box_axes;
use softphoc::evaluation::{line_counts, Counts, EvalReport, LineResult, Protocol};
use softphoc::geometry::{Point, Rect};
use softphoc::io::{read_tensor, write_tensor};
use softphoc::spotting::{dtw_distance, hough_lines, ChannelVector};
use softphoc::synth::{place_words, random_scene, SceneParams};
use softphoc::{
    build_masks, embed_scene, encode_word, evaluate_loss, line_box_overlap, line_to_bbox, simulate, spot, LineSegment,
    LossWeights, Mask, MaskTriple, NoiseConfig, SceneAnnotation, SoftPhocTensor, SpottingConfig, NUM_CLASSES,
};

/// Heatmap threshold used on oracle maps. A noise-free bigram heatmap
/// averages `P(c_i)·P(c_i+1)` over adjacent characters; for a word with k
/// distinct letters each pixel's mass is spread over roughly k channels, so
/// the peak falls like 1/k and dips under the 0.2 default from about six
/// distinct letters on. 0.1 stays below the lowest peak seen for ten
/// distinct letters (about 0.14).
const ORACLE_HEATMAP_THRESHOLD: f64 = 0.1;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn oracle_config() -> SpottingConfig {
    SpottingConfig {
        heatmap_threshold: ORACLE_HEATMAP_THRESHOLD,
        ..SpottingConfig::default()
    }
}

// ---------------------------------------------------------------------------
// 1. Encoder against the bin-overlap oracle

const ORACLE_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.,:;!?-'&/";

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Accumulates one vote per (level, character, column) triple whose column
/// interval overlaps the character's snapped bin span, then normalizes.
fn oracle_encode(word: &str, width: usize) -> Vec<[f64; NUM_CLASSES]> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let w = width as f64;
    let mut cols = vec![[0.0; NUM_CLASSES]; width];
    for level in 1..=n {
        let lf = level as f64;
        for (i, ch) in chars.iter().enumerate() {
            let p = (i + 1) as f64;
            let lo = round_half_up((lf * (p - 1.0) / n as f64).floor() * w / lf);
            let hi = round_half_up((lf * p / n as f64).ceil() * w / lf);
            let class = classify_char(*ch).index();
            for (x, col) in cols.iter_mut().enumerate() {
                let (a, b) = (x as f64 / w, (x + 1) as f64 / w);
                if a < hi / w && b > lo / w {
                    col[class] += 1.0;
                }
            }
        }
    }
    for col in &mut cols {
        let s: f64 = col.iter().sum();
        col.iter_mut().for_each(|v| *v /= s);
    }
    cols
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let len = rng.random_range(1..=8usize);
        let word: String = (0..len)
            .map(|_| ORACLE_ALPHABET[rng.random_range(0..ORACLE_ALPHABET.len())] as char)
            .collect();
        let width = rng.random_range(8..=64usize);
        let height = rng.random_range(1..=4usize);
        let t = encode_word(&word, width, height).expect("valid word");
        let expected = oracle_encode(&word, width);
        for y in 0..height {
            for (x, col) in expected.iter().enumerate() {
                for (a, b) in t.pixel(y, x).iter().zip(col) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("500 words, max |diff| = {worst:.1e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

// ---------------------------------------------------------------------------
// 2. Normalization

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for i in 0..100 {
        let len = rng.random_range(1..=10usize);
        let word: String = (0..len)
            .map(|_| ORACLE_ALPHABET[rng.random_range(0..ORACLE_ALPHABET.len())] as char)
            .collect();
        let width = rng.random_range(len..=80);
        let t = encode_word(&word, width, 3).unwrap();
        if let Err(e) = t.check_crop_distribution(1e-6) {
            failures.push(format!("encode_word #{i}: {e:?}"));
        }
    }
    let scenes: Vec<SceneAnnotation> = (0..10)
        .map(|s| random_scene(200 + s, &SceneParams::default()))
        .collect();
    for (i, scene) in scenes.iter().enumerate() {
        if let Err(e) = embed_scene(scene).unwrap().check_scene_distribution(1e-6) {
            failures.push(format!("embed_scene #{i}: {e:?}"));
        }
    }
    let sweep: Vec<NoiseConfig> = (0..20)
        .map(|k| NoiseConfig {
            blur_sigma: [0.0, 0.5, 1.0, 2.5][k % 4],
            confusion_rate: [0.0, 0.2, 0.5, 0.8, 1.0][k % 5],
            background_leak: [0.0, 0.1, 0.3, 0.6, 1.0][(k / 4) % 5],
            seed: k as u64,
        })
        .collect();
    for (k, cfg) in sweep.iter().enumerate() {
        let scene = &scenes[k % scenes.len()];
        if let Err(e) = simulate(scene, cfg).unwrap().check_scene_distribution(1e-6) {
            failures.push(format!("simulate config #{k}: {e:?}"));
        }
    }
    let detail = match failures.first() {
        None => "100 crops, 10 scenes, 20 noise configs".to_string(),
        Some(f) => format!("{} failures, first: {f}", failures.len()),
    };
    outcome(failures.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// 3. Hough recovery

fn theta_rho_error(seg: &LineSegment, rho: f64, theta: f64) -> (f64, f64) {
    let dt = (seg.theta - theta).abs();
    if dt <= 90.0 {
        ((seg.rho - rho).abs(), dt)
    } else {
        ((seg.rho + rho).abs(), 180.0 - dt)
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SpottingConfig::default();
    let size = 200usize;
    let mut hits = 0usize;
    let mut total = 0usize;
    for angle in 0..180 {
        for _ in 0..5 {
            let a = (angle as f64).to_radians();
            let c = Point::new(rng.random_range(60.0..140.0), rng.random_range(60.0..140.0));
            let d = Point::new(30.0 * a.cos(), 30.0 * a.sin());
            let (p0, p1) = (Point::new(c.x - d.x, c.y - d.y), Point::new(c.x + d.x, c.y + d.y));
            let mut mask = Mask::new(size, size, false);
            for s in 0..=600 {
                let p = p0.lerp(p1, s as f64 / 600.0);
                mask.set(p.y.floor() as usize, p.x.floor() as usize, true);
            }
            let theta = (angle as f64 + 90.0) % 180.0;
            let (st, ct) = theta.to_radians().sin_cos();
            let rho = c.x * ct + c.y * st;
            total += 1;
            if let Some(top) = hough_lines(&mask, &cfg).first() {
                let (dr, dt) = theta_rho_error(top, rho, theta);
                if dr <= 1.0 && dt <= 1.0 {
                    hits += 1;
                }
            }
        }
    }
    let rate = hits as f64 / total as f64;
    outcome(
        rate >= 0.99,
        format!("{hits}/{total} trials within 1 px / 1 deg ({:.1}%)", 100.0 * rate),
    )
}

// ---------------------------------------------------------------------------
// 4. DTW against exhaustive path enumeration

fn cosine(u: &ChannelVector, v: &ChannelVector) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu < 1e-12 || nv < 1e-12 {
        return 1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (1.0 - dot / (nu * nv)).max(0.0)
}

fn cheapest_path(a: &[ChannelVector], b: &[ChannelVector], i: usize, j: usize) -> f64 {
    let here = cosine(&a[i], &b[j]);
    if i == a.len() - 1 && j == b.len() - 1 {
        return here;
    }
    let mut best = f64::INFINITY;
    if i + 1 < a.len() {
        best = best.min(cheapest_path(a, b, i + 1, j));
    }
    if j + 1 < b.len() {
        best = best.min(cheapest_path(a, b, i, j + 1));
    }
    if i + 1 < a.len() && j + 1 < b.len() {
        best = best.min(cheapest_path(a, b, i + 1, j + 1));
    }
    here + best
}

fn random_sequence(rng: &mut ChaCha8Rng) -> Vec<ChannelVector> {
    let len = rng.random_range(1..=5usize);
    (0..len)
        .map(|_| {
            let mut v = [0.0; NUM_CLASSES];
            match rng.random_range(0..4u8) {
                0 => {}
                1 => v[rng.random_range(0..NUM_CLASSES)] = 1.0,
                _ => {
                    for _ in 0..rng.random_range(1..6usize) {
                        v[rng.random_range(0..NUM_CLASSES)] += rng.random_range(0.0..1.0);
                    }
                }
            }
            v
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let a = random_sequence(&mut rng);
        let b = random_sequence(&mut rng);
        let expected = cheapest_path(&a, &b, 0, 0) / (a.len() + b.len()) as f64;
        let got = dtw_distance(&a, &b).unwrap();
        worst = worst.max((got - expected).abs());
    }
    outcome(worst <= 1e-12, format!("200 pairs, max |diff| = {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 5 and 6. End-to-end spotting on oracle maps

struct SceneRun {
    overlaps: Vec<f64>,
    counts: Counts,
}

fn best_overlap(seg: &LineSegment, scene: &SceneAnnotation, query: &str) -> f64 {
    scene
        .words
        .iter()
        .filter(|w| w.transcription.to_lowercase() == query.to_lowercase())
        .map(|w| line_box_overlap(seg, &w.quad).unwrap())
        .fold(0.0, f64::max)
}

fn run_scene(scene: &SceneAnnotation, noise: &NoiseConfig, cfg: &SpottingConfig) -> SceneRun {
    let prob = simulate(scene, noise).unwrap();
    let mut queries: Vec<String> = scene.words.iter().map(|w| w.transcription.clone()).collect();
    queries.dedup();
    let mut overlaps = Vec::new();
    let mut results = Vec::new();
    for q in &queries {
        match spot(&prob, q, cfg).unwrap() {
            Some(d) => {
                overlaps.push(best_overlap(&d.segment, scene, q));
                results.push(LineResult::from(&d));
            }
            None => {
                overlaps.push(0.0);
                results.push(LineResult::not_found(q.as_str()));
            }
        }
    }
    let counts = line_counts(&results, scene, 0.7).unwrap();
    SceneRun { overlaps, counts }
}

fn end_to_end_scenes() -> Vec<SceneAnnotation> {
    (0..50)
        .map(|s| random_scene(5000 + s, &SceneParams::default()))
        .collect()
}

fn run_all(scenes: &[SceneAnnotation], confusion_rate: f64) -> (Vec<f64>, Counts) {
    let cfg = oracle_config();
    let runs: Vec<SceneRun> = scenes
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let noise = NoiseConfig {
                confusion_rate,
                seed: i as u64,
                ..NoiseConfig::default()
            };
            run_scene(s, &noise, &cfg)
        })
        .collect();
    let overlaps = runs.iter().flat_map(|r| r.overlaps.iter().copied()).collect();
    let counts = runs.iter().fold(Counts::default(), |acc, r| acc + r.counts);
    (overlaps, counts)
}

fn criterion_5(scenes: &[SceneAnnotation]) -> Outcome {
    let start = Instant::now();
    let (overlaps, counts) = run_all(scenes, 0.0);
    let elapsed = start.elapsed();
    let good = overlaps.iter().filter(|o| **o >= 0.7).count();
    let rate = good as f64 / overlaps.len() as f64;
    let r = EvalReport::from_counts(Protocol::Line, 0.7, counts);
    let pass = rate >= 0.95
        && r.precision >= 0.95
        && r.recall >= 0.95
        && r.accuracy >= 0.95
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "{good}/{} queries with overlap >= 0.7 ({:.1}%), P={:.3} R={:.3} Acc={:.3} at T=0.7, {:.1} s",
            overlaps.len(),
            100.0 * rate,
            r.precision,
            r.recall,
            r.accuracy,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6(scenes: &[SceneAnnotation]) -> Outcome {
    let rates = [0.0, 0.2, 0.4, 0.6];
    let means: Vec<f64> = rates
        .iter()
        .map(|r| {
            let (o, _) = run_all(scenes, *r);
            o.iter().sum::<f64>() / o.len() as f64
        })
        .collect();
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    let listing: Vec<String> = rates.iter().zip(&means).map(|(r, m)| format!("{r}: {m:.4}")).collect();
    outcome(
        monotone,
        format!("mean overlap by confusion rate {}", listing.join(", ")),
    )
}

// ---------------------------------------------------------------------------
// 7. Anagram discrimination

fn criterion_7() -> Outcome {
    let texts = ["listen".to_string(), "silent".to_string()];
    let params = SceneParams::default();
    let mut scenes = Vec::new();
    let mut seed = 7000u64;
    while scenes.len() < 20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        seed += 1;
        let scene = place_words(&mut rng, &texts, &params);
        if scene.words.len() == 2 {
            scenes.push(scene);
        }
    }
    let cfg = oracle_config();
    let wins = scenes
        .par_iter()
        .filter(|scene| {
            let prob = simulate(scene, &NoiseConfig::default()).unwrap();
            match spot(&prob, "listen", &cfg).unwrap() {
                Some(d) => {
                    let listen = line_box_overlap(&d.segment, &scene.words[0].quad).unwrap();
                    let silent = line_box_overlap(&d.segment, &scene.words[1].quad).unwrap();
                    listen > silent
                }
                None => false,
            }
        })
        .count();
    outcome(wins >= 18, format!("{wins}/20 scenes pick the \"listen\" quad"))
}

// ---------------------------------------------------------------------------
// 8. Loss evaluator

fn one_by_two_masks() -> MaskTriple {
    let mut non_text = Mask::new(1, 2, false);
    non_text.set(0, 0, true);
    let mut text = Mask::new(1, 2, false);
    text.set(0, 1, true);
    MaskTriple {
        non_text,
        context: text.clone(),
        text,
    }
}

fn criterion_8() -> Outcome {
    let a = classify_char('a').index();
    let w = LossWeights::default();
    let masks = one_by_two_masks();

    let mut pred = SoftPhocTensor::zeros(1, 2);
    pred.pixel_mut(0, 0)[0] = 0.5;
    pred.pixel_mut(0, 0)[5] = 0.5;
    pred.pixel_mut(0, 1)[0] = 0.5;
    pred.pixel_mut(0, 1)[a] = 0.5;
    let mut gt = SoftPhocTensor::background(1, 2);
    gt.pixel_mut(0, 1)[0] = 0.0;
    gt.pixel_mut(0, 1)[a] = 1.0;
    let hand = evaluate_loss(&pred, &gt, &masks, &w).unwrap().total;
    let hand_ok = (hand - 3.6 * 2f64.ln()).abs() <= 1e-6 && (hand - 2.4953).abs() <= 1e-4;

    let uniform = SoftPhocTensor::from_vec(1, 2, vec![1.0 / NUM_CLASSES as f64; 2 * NUM_CLASSES]).unwrap();
    let l3 = evaluate_loss(&uniform, &gt, &masks, &w).unwrap().context;
    let l3_ok = (l3 - (NUM_CLASSES as f64).ln()).abs() <= 1e-6;

    let mut worst = 0.0f64;
    for s in 0..20 {
        let scene = random_scene(800 + s, &SceneParams::default());
        let gt = embed_scene(&scene).unwrap();
        let l = evaluate_loss(&gt, &gt, &build_masks(&scene), &w).unwrap();
        worst = worst.max(l.total.abs());
    }
    let zero_ok = worst <= 1e-9;
    outcome(
        hand_ok && l3_ok && zero_ok,
        format!(
            "1x2 example {hand:.6}, uniform l3 {l3:.6} (ln 38 = {:.6}), max self-loss {worst:.1e}",
            (NUM_CLASSES as f64).ln()
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Line-to-box rule

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (iw, ih) = (400usize, 300usize);
    let image = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: iw as f64,
        y1: ih as f64,
    };
    let mut failures = 0usize;
    for case in 0..1000 {
        let mut c = Point::new(rng.random_range(0.0..iw as f64), rng.random_range(0.0..ih as f64));
        let n = rng.random_range(1..=12usize);
        let (dx, dy) = if case % 10 == 0 {
            // Exactly on the diagonal: ties take the horizontal branch. Integer
            // coordinates keep |dx| and |dy| exactly equal.
            c = Point::new(c.x.round(), c.y.round());
            let h = rng.random_range(1..40u32) as f64;
            let sx = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let sy = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (sx * h, sy * h)
        } else {
            let a = rng.random_range(-90.0f64..=90.0).to_radians();
            let h = rng.random_range(2.0..120.0);
            (h * a.cos(), h * a.sin())
        };
        let seg = LineSegment::from_points(Point::new(c.x - dx, c.y - dy), Point::new(c.x + dx, c.y + dy));
        let len = seg.length();
        let mid = seg.midpoint();
        let angle = (seg.y2 - seg.y1).atan2(seg.x2 - seg.x1).to_degrees();
        let horizontal = case % 10 == 0 || angle.abs() <= 45.0 || angle.abs() >= 135.0;
        let (ew, eh) = if horizontal {
            (len, len / n as f64)
        } else {
            (len * n as f64, len)
        };
        let raw = line_box_axes(&seg, n).unwrap();
        let mut ok = close(raw.width, ew) && close(raw.height, eh);
        ok &= raw.center == mid;
        // Either branch keeps width / height = n; they differ in which side is the line.
        ok &= close(raw.width / raw.height, n as f64);
        ok &= if horizontal {
            raw.width == len
        } else {
            raw.height == len
        };

        let clipped = line_to_bbox(&seg, n, (iw, ih)).unwrap().rect();
        let expected = raw.rect().intersection(&image);
        ok &= close(clipped.x0, expected.x0)
            && close(clipped.y0, expected.y0)
            && close(clipped.x1, expected.x1)
            && close(clipped.y1, expected.y1);
        if !ok {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 cases, {failures} mismatches"))
}

// ---------------------------------------------------------------------------
// 10. Tensor file round-trip

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let specials = [
        0.0f32,
        f32::from_bits(1),
        f32::from_bits(2),
        f32::from_bits(0x007f_fffe),
        f32::from_bits(0x007f_ffff),
        f32::MIN_POSITIVE,
        f32::from_bits(0x0080_0001),
        f32::EPSILON,
        1.0 - f32::EPSILON / 2.0,
        1.0,
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = 0usize;
    for k in 0..10 {
        let (h, w) = (rng.random_range(1..=24usize), rng.random_range(1..=24usize));
        let values: Vec<f32> = (0..h * w * NUM_CLASSES)
            .map(|_| match rng.random_range(0..4u8) {
                0 => specials[rng.random_range(0..specials.len())],
                1 => f32::from_bits(rng.random_range(0..0x0080_0000u32)),
                _ => rng.random_range(0.0f32..1.0),
            })
            .collect();
        let t = SoftPhocTensor::from_vec(h, w, values.iter().map(|v| *v as f64).collect()).unwrap();
        let path = dir.path().join(format!("t{k}.sphoc"));
        write_tensor(&path, &t).unwrap();
        let back = read_tensor(&path).unwrap();
        if back.dims() != (h, w) {
            mismatches += 1;
            continue;
        }
        mismatches += back
            .as_slice()
            .iter()
            .zip(&values)
            .filter(|(a, b)| (**a as f32).to_bits() != b.to_bits() || a.to_bits() != (**b as f64).to_bits())
            .count();
        let again = dir.path().join(format!("t{k}b.sphoc"));
        write_tensor(&again, &back).unwrap();
        if std::fs::read(&path).unwrap() != std::fs::read(&again).unwrap() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("10 tensors, {mismatches} mismatched values"))
}

fn main() -> ExitCode {
    let scenes = end_to_end_scenes();
    let criteria: Vec<Criterion> = vec![
        ("encoder matches bin-overlap oracle", Box::new(criterion_1)),
        ("per-pixel normalization", Box::new(criterion_2)),
        ("hough recovery", Box::new(criterion_3)),
        ("dtw matches path enumeration", Box::new(criterion_4)),
        ("noise-free end-to-end spotting", Box::new(|| criterion_5(&scenes))),
        (
            "overlap degrades monotonically with confusion",
            Box::new(|| criterion_6(&scenes)),
        ),
        ("anagram discrimination", Box::new(criterion_7)),
        ("loss evaluator", Box::new(criterion_8)),
        ("line-to-box rule", Box::new(criterion_9)),
        ("tensor file round-trip", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:>2}: {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
