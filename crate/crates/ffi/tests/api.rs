use std::ffi::{CStr, CString};
use std::ptr;

use softphoc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sphoc_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn scene_with(words: &[([f64; 8], &str)]) -> *mut SphocScene {
    let mut scene = ptr::null_mut();
    unsafe {
        assert_eq!(sphoc_scene_new(240, 120, &mut scene), SphocStatus::Ok);
        for (quad, text) in words {
            let t = CString::new(*text).unwrap();
            assert_eq!(sphoc_scene_add_word(scene, quad.as_ptr(), t.as_ptr()), SphocStatus::Ok);
        }
    }
    scene
}

fn tensor_values(t: *const SphocTensor) -> (usize, usize, Vec<f64>) {
    let (mut h, mut w, mut c) = (0, 0, 0);
    unsafe {
        assert_eq!(sphoc_tensor_dims(t, &mut h, &mut w, &mut c), SphocStatus::Ok);
        let mut buf = vec![0.0; h * w * c];
        assert_eq!(sphoc_tensor_copy_data(t, buf.as_mut_ptr(), buf.len()), SphocStatus::Ok);
        (h, w, buf)
    }
}

const DIRECTORY: [f64; 8] = [30.0, 40.0, 210.0, 40.0, 210.0, 60.0, 30.0, 60.0];

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sphoc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn embed_matches_library() {
    let scene = scene_with(&[(DIRECTORY, "DIRECTORY")]);
    let mut t = ptr::null_mut();
    unsafe { assert_eq!(sphoc_embed(scene, &mut t), SphocStatus::Ok) };
    let (h, w, values) = tensor_values(t);

    let quad = softphoc::Quad::from_coords(DIRECTORY);
    let word = softphoc::WordAnnotation::new(quad, "DIRECTORY").unwrap();
    let expected = softphoc::embed_scene(&softphoc::SceneAnnotation::new(240, 120, vec![word]).unwrap()).unwrap();
    assert_eq!((h, w), expected.dims());
    assert_eq!(values, expected.as_slice());
    unsafe {
        sphoc_tensor_free(t);
        sphoc_scene_free(scene);
    }
}

#[test]
fn spot_and_box_on_noise_free_map() {
    let scene = scene_with(&[(DIRECTORY, "DIRECTORY")]);
    let noise = SphocNoiseConfig {
        blur_sigma: 0.0,
        confusion_rate: 0.0,
        background_leak: 0.0,
        seed: 1,
    };
    let mut t = ptr::null_mut();
    unsafe { assert_eq!(sphoc_simulate(scene, &noise, &mut t), SphocStatus::Ok) };

    let mut cfg = sphoc_spotting_config_default();
    cfg.heatmap_threshold = 0.1;
    let q = CString::new("directory").unwrap();
    let mut det = SphocDetection::default();
    unsafe { assert_eq!(sphoc_spot(t, q.as_ptr(), &cfg, &mut det), SphocStatus::Ok) };
    assert!(det.found);
    assert!(
        det.y1 > 40.0 && det.y1 < 60.0 && det.y2 > 40.0 && det.y2 < 60.0,
        "{det:?}"
    );

    let mut b = SphocBox::default();
    unsafe { assert_eq!(sphoc_line_to_bbox(&det, 9, 240, 120, &mut b), SphocStatus::Ok) };
    let len = ((det.x2 - det.x1).powi(2) + (det.y2 - det.y1).powi(2)).sqrt();
    assert!((b.width - len).abs() < 1e-9 && (b.height - len / 9.0).abs() < 1e-9);

    let missing = CString::new("zzzz").unwrap();
    unsafe { assert_eq!(sphoc_spot(t, missing.as_ptr(), ptr::null(), &mut det), SphocStatus::Ok) };
    assert!(!det.found);
    unsafe {
        assert_eq!(
            sphoc_line_to_bbox(&det, 4, 240, 120, &mut b),
            SphocStatus::InvalidArgument
        );
        sphoc_tensor_free(t);
        sphoc_scene_free(scene);
    }
}

#[test]
fn tensor_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.sphoc").to_str().unwrap()).unwrap();
    let scene = scene_with(&[([10.0, 10.0, 90.0, 10.0, 90.0, 30.0, 10.0, 30.0], "ab12")]);
    let mut t = ptr::null_mut();
    let mut back = ptr::null_mut();
    unsafe {
        assert_eq!(sphoc_embed(scene, &mut t), SphocStatus::Ok);
        assert_eq!(sphoc_tensor_write(t, path.as_ptr()), SphocStatus::Ok);
        assert_eq!(sphoc_tensor_read(path.as_ptr(), &mut back), SphocStatus::Ok);
    }
    let (_, _, a) = tensor_values(t);
    let (_, _, b) = tensor_values(back);
    assert!(a
        .iter()
        .zip(&b)
        .all(|(x, y)| (*x as f32).to_bits() == (*y as f32).to_bits()));
    unsafe {
        sphoc_tensor_free(t);
        sphoc_tensor_free(back);
        sphoc_scene_free(scene);
    }
}

#[test]
fn scene_read_from_annotation_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gt.txt");
    std::fs::write(&file, "10,10,90,10,90,30,10,30,hello\n5,40,60,40,60,55,5,55,###\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let mut scene = ptr::null_mut();
    let mut n = 0usize;
    unsafe {
        assert_eq!(sphoc_scene_read(path.as_ptr(), 100, 60, &mut scene), SphocStatus::Ok);
        assert_eq!(sphoc_scene_word_count(scene, &mut n), SphocStatus::Ok);
        sphoc_scene_free(scene);
    }
    assert_eq!(n, 1);
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut scene = ptr::null_mut();
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(sphoc_scene_new(0, 10, &mut scene), SphocStatus::InvalidArgument);
        assert!(scene.is_null());
        assert!(last_error().contains("positive"));

        assert_eq!(sphoc_embed(ptr::null(), &mut t), SphocStatus::NullPointer);
        assert!(t.is_null());

        let missing = CString::new("/nonexistent/dir/t.sphoc").unwrap();
        assert_eq!(sphoc_tensor_read(missing.as_ptr(), &mut t), SphocStatus::Io);

        let scene = scene_with(&[]);
        let quad = [0.0; 8];
        let text = CString::new("x").unwrap();
        assert_eq!(
            sphoc_scene_add_word(scene, quad.as_ptr(), text.as_ptr()),
            SphocStatus::InvalidArgument
        );
        let empty = CString::new("").unwrap();
        let ok_quad = [1.0, 1.0, 9.0, 1.0, 9.0, 5.0, 1.0, 5.0];
        assert_eq!(
            sphoc_scene_add_word(scene, ok_quad.as_ptr(), empty.as_ptr()),
            SphocStatus::InvalidArgument
        );
        let bad_utf8 = [0xffu8, 0x00];
        assert_eq!(
            sphoc_scene_add_word(scene, ok_quad.as_ptr(), bad_utf8.as_ptr().cast()),
            SphocStatus::InvalidUtf8
        );

        let mut e = ptr::null_mut();
        assert_eq!(sphoc_embed(scene, &mut e), SphocStatus::Ok);
        let mut small = [0.0; 4];
        assert_eq!(
            sphoc_tensor_copy_data(e, small.as_mut_ptr(), 4),
            SphocStatus::BufferTooSmall
        );

        let mut noise = SphocNoiseConfig {
            blur_sigma: 0.0,
            confusion_rate: 1.5,
            background_leak: 0.0,
            seed: 0,
        };
        assert_eq!(sphoc_simulate(scene, &noise, &mut t), SphocStatus::InvalidArgument);
        noise.confusion_rate = 0.0;
        assert_eq!(sphoc_simulate(scene, &noise, &mut t), SphocStatus::Ok);

        sphoc_tensor_free(e);
        sphoc_tensor_free(t);
        sphoc_scene_free(scene);
        sphoc_scene_free(ptr::null_mut());
        sphoc_tensor_free(ptr::null_mut());
    }
}
