mod common;

use huefuse::metrics::{
    ciede2000, ciede2000_hue_diff, ciede2000_terms, image_hue_diff, srgb_to_lab, HueDiffOptions, LabPixel,
    MetricVariant,
};
use proptest::prelude::*;

use common::sharma::{chord_delta_h, PAIRS};

fn lab(p: [f64; 3]) -> LabPixel {
    LabPixel::new(p[0], p[1], p[2])
}

#[test]
fn verification_pairs() {
    for (k, (p, q, expected)) in PAIRS.iter().enumerate() {
        let de = ciede2000(&lab(*p), &lab(*q));
        assert_eq!((de * 1e4).round() / 1e4, *expected, "pair {}", k + 1);
        let dh = ciede2000_hue_diff(&lab(*p), &lab(*q));
        assert!((dh - chord_delta_h(*p, *q)).abs() < 5e-5, "pair {}", k + 1);
    }
}

#[test]
fn scaled_variant_divides_by_s_h() {
    let (p, q, _) = PAIRS[16];
    let t = ciede2000_terms(&lab(p), &lab(q));
    let a = common::ldr_from_fn(1, 1, |_, _| [0.8, 0.3, 0.1]);
    let b = common::ldr_from_fn(1, 1, |_, _| [0.7, 0.4, 0.1]);
    let raw = image_hue_diff(&a, &b, &HueDiffOptions::default()).unwrap();
    let scaled = image_hue_diff(&a, &b, &HueDiffOptions { variant: MetricVariant::ScaledDeltaH, ..Default::default() })
        .unwrap();
    let tt = ciede2000_terms(&srgb_to_lab(&a.pixel(0, 0)), &srgb_to_lab(&b.pixel(0, 0)));
    assert!((raw.mean_dh - tt.delta_h.abs()).abs() < 1e-12);
    assert!((scaled.mean_dh - (tt.delta_h / tt.s_h).abs()).abs() < 1e-12);
    assert!(t.s_h > 1.0);
}

fn lab_strategy() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..100.0, -128.0f64..128.0, -128.0f64..128.0).prop_map(|(l, a, b)| [l, a, b])
}

proptest! {
    #[test]
    fn hue_term_matches_chord_identity(p in lab_strategy(), q in lab_strategy()) {
        let dh = ciede2000_hue_diff(&lab(p), &lab(q));
        prop_assert!((dh - chord_delta_h(p, q)).abs() < 1e-6 * (1.0 + dh));
    }

    #[test]
    fn symmetric_and_non_negative(p in lab_strategy(), q in lab_strategy()) {
        let a = ciede2000(&lab(p), &lab(q));
        let b = ciede2000(&lab(q), &lab(p));
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert_eq!(ciede2000(&lab(p), &lab(p)), 0.0);
    }

    #[test]
    fn image_mean_is_bounded(seed in any::<u64>()) {
        let f = |x: usize, y: usize, k: u64| ((seed ^ k).wrapping_mul((x * 7 + y * 13 + 1) as u64) >> 40) as f64 / (1u64 << 24) as f64;
        let a = common::ldr_from_fn(7, 5, |x, y| [f(x, y, 1), f(x, y, 2), f(x, y, 3)]);
        let b = common::ldr_from_fn(7, 5, |x, y| [f(x, y, 4), f(x, y, 5), f(x, y, 6)]);
        let r = image_hue_diff(&a, &b, &HueDiffOptions::default()).unwrap();
        let per: Vec<f64> = a.pixels().iter().zip(b.pixels())
            .map(|(p, q)| ciede2000_hue_diff(&srgb_to_lab(p), &srgb_to_lab(q))).collect();
        let max = per.iter().cloned().fold(0.0, f64::max);
        prop_assert!(r.mean_dh >= 0.0 && r.mean_dh <= max + 1e-12);
        prop_assert_eq!(r.pixels, 35);
    }
}
