mod common;

use common::{reflect, TestRng};
use pnp_core::io::encode;
use pnp_core::{
    integral_image, pad_symmetric, project, psnr, read_image, write_image, ConstraintSet, Error, Image, ImageFormat,
};
use proptest::prelude::*;

#[test]
fn pgm_round_trip_within_half_step() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.pgm");
    let img = TestRng::new(1).image(13, 7);
    write_image(&img, &path, ImageFormat::Pgm8).unwrap();
    let back = read_image(&path).unwrap();
    assert!(back.max_abs_diff(&img) <= 0.5 / 255.0 + 1e-15);
}

#[test]
fn pfm_round_trip_is_bit_exact_for_single_precision_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.pfm");
    let img = TestRng::new(2).image(9, 11).map(|v| (3.0 * v - 1.0) as f32 as f64);
    write_image(&img, &path, ImageFormat::Pfm).unwrap();
    assert_eq!(read_image(&path).unwrap(), img);
    // Arbitrary doubles come back rounded to the nearest single.
    let img = TestRng::new(3).image(4, 4);
    write_image(&img, &path, ImageFormat::Pfm).unwrap();
    let back = read_image(&path).unwrap();
    assert!(back.data().iter().zip(img.data()).all(|(b, a)| *b == *a as f32 as f64));
}

#[test]
fn constant_half_encodes_as_128() {
    let bytes = encode(&Image::filled(3, 2, 0.5), ImageFormat::Pgm8);
    assert!(bytes.ends_with(&[128; 6]));
}

#[test]
fn missing_file_names_the_path() {
    let err = read_image("/nonexistent/dir/img.pgm").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/img.pgm"));
}

#[test]
fn integral_matches_direct_summation() {
    let img = TestRng::new(4).image(16, 16);
    let table = integral_image(&img);
    for i in 0..=16 {
        for j in 0..=16 {
            let mut s = 0.0;
            for y in 0..i {
                for x in 0..j {
                    s += img.get(x, y);
                }
            }
            assert!((table.entry(i, j) - s).abs() <= 1e-12 * s.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padding_matches_index_map(w in 1usize..9, h in 1usize..9, margin in 0usize..9, seed in any::<u64>()) {
        let img = TestRng::new(seed).image(w, h);
        let padded = pad_symmetric(&img, margin);
        if margin > w || margin > h {
            prop_assert!(padded.is_err());
        } else {
            let padded = padded.unwrap();
            prop_assert_eq!((padded.width(), padded.height()), (w + 2 * margin, h + 2 * margin));
            let m = margin as isize;
            for y in 0..padded.height() {
                for x in 0..padded.width() {
                    let src = img.get(reflect(x as isize - m, w), reflect(y as isize - m, h));
                    prop_assert_eq!(padded.get(x, y), src);
                }
            }
        }
    }

    #[test]
    fn box_sums_match_direct(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let img = rng.image(w, h);
        let table = integral_image(&img);
        for _ in 0..10 {
            let size = 1 + rng.below(w.min(h));
            let (top, left) = (rng.below(h - size + 1), rng.below(w - size + 1));
            let mut direct = 0.0;
            for y in top..top + size {
                for x in left..left + size {
                    direct += img.get(x, y);
                }
            }
            let got = table.box_sum(top, left, size).unwrap();
            prop_assert!((got - direct).abs() <= 1e-9 * direct.max(1e-12));
        }
    }

    #[test]
    fn projection_is_idempotent(w in 1usize..8, h in 1usize..8, seed in any::<u64>()) {
        let img = TestRng::new(seed).image(w, h).map(|v| 4.0 * v - 2.0);
        for c in [ConstraintSet::unit_box(), ConstraintSet::NonNegative, ConstraintSet::Unconstrained] {
            let once = project(&img, c);
            prop_assert_eq!(project(&once, c), once.clone());
            prop_assert!(once.data().iter().all(|&v| c.project_value(v) == v));
        }
    }

    #[test]
    fn psnr_follows_mse(mse_exp in -6.0f64..-1.0) {
        let d = 10f64.powf(mse_exp / 2.0);
        let a = Image::filled(4, 4, 0.5);
        let b = a.map(|v| v + d);
        let p = psnr(&a, &b, 1.0).unwrap();
        prop_assert!((p + 10.0 * mse_exp).abs() < 1e-9);
    }
}
