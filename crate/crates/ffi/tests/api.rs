use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use huefuse::hdr::{render_reference, synth_stack, RenderOptions};
use huefuse::{io, RadianceMap};
use huefuse_ffi::*;

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = hf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scene() -> RadianceMap {
    RadianceMap::from_fn(40, 32, |x, y| {
        let u = x as f64 / 39.0;
        let v = y as f64 / 31.0;
        let g = (((x * 7 + y * 13) % 11) as f64 - 5.0) * 0.02;
        [-2.5 + 4.0 * u + g, -2.0 + 3.0 * v + g, -1.5 + 2.0 * u * v + g]
    })
    .unwrap()
}

/// Writes a five-exposure stack and its manifest; returns the manifest path.
fn write_stack(dir: &Path) -> std::path::PathBuf {
    let stack = synth_stack(&scene(), &[0.0, 1.0, -1.0, 2.0, -2.0], &RenderOptions::default()).unwrap();
    let images = stack
        .images()
        .iter()
        .zip(stack.evs())
        .enumerate()
        .map(|(i, (im, ev))| {
            let path = dir.join(format!("e{i}.png"));
            io::write_ldr(im, &path).unwrap();
            io::ManifestEntry { path, ev: *ev }
        })
        .collect();
    let manifest = dir.join("manifest.json");
    io::write_manifest(&io::StackManifest { base_time: 1.0, images }, &manifest).unwrap();
    let reference = render_reference(&scene(), &RenderOptions::default()).unwrap();
    io::write_ldr(&reference, dir.join("reference.png")).unwrap();
    manifest
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(hf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn full_pipeline_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = cstr(&write_stack(dir.path()));
    unsafe {
        let mut stack = ptr::null_mut();
        assert_eq!(hf_stack_load(manifest.as_ptr(), &mut stack), HfStatus::Ok);
        assert_eq!(hf_stack_len(stack), 5);
        assert!(hf_last_error().is_null());

        let mut fused = ptr::null_mut();
        assert_eq!(hf_fuse(stack, ptr::null(), &mut fused), HfStatus::Ok);
        assert_eq!((hf_image_width(fused), hf_image_height(fused)), (40, 32));

        let mut crf = ptr::null_mut();
        assert_eq!(hf_estimate_crf(stack, ptr::null(), &mut crf), HfStatus::Ok);
        let mut table = [0.0; HF_CRF_LEVELS];
        assert_eq!(hf_crf_channel(crf, 1, table.as_mut_ptr(), table.len()), HfStatus::Ok);
        assert_eq!(table[128], 0.0);
        assert!(table.windows(2).all(|w| w[0] <= w[1]));

        let mut radiance = ptr::null_mut();
        assert_eq!(hf_recover_radiance(stack, crf, &mut radiance), HfStatus::Ok);
        let mut comp = ptr::null_mut();
        assert_eq!(hf_compensate(fused, radiance, HF_HUE_DOMAIN_GAMMA, &mut comp), HfStatus::Ok);

        let reference_path = cstr(&dir.path().join("reference.png"));
        let mut reference = ptr::null_mut();
        assert_eq!(hf_image_read_png(reference_path.as_ptr(), &mut reference), HfStatus::Ok);
        let mut a = HfReport::default();
        let mut b = HfReport::default();
        assert_eq!(hf_evaluate(fused, reference, HF_METRIC_RAW, false, &mut a), HfStatus::Ok);
        assert_eq!(hf_evaluate(comp, reference, HF_METRIC_RAW, false, &mut b), HfStatus::Ok);
        assert_eq!(a.pixels, 40 * 32);
        assert!(b.mean_dh < a.mean_dh, "{} vs {}", b.mean_dh, a.mean_dh);

        hf_image_free(reference);
        hf_image_free(comp);
        hf_radiance_free(radiance);
        hf_crf_free(crf);
        hf_image_free(fused);
        hf_stack_free(stack);
    }
}

#[test]
fn results_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = write_stack(dir.path());
    let stack_rs = io::load_stack(&io::read_manifest(&manifest_path).unwrap()).unwrap();
    let weights = huefuse::fusion::FusionWeights { contrast: 0.5, ..Default::default() };
    let expect = huefuse::fusion::fuse(&stack_rs, &weights).unwrap().to_codes();

    let manifest = cstr(&manifest_path);
    unsafe {
        let mut stack = ptr::null_mut();
        assert_eq!(hf_stack_load(manifest.as_ptr(), &mut stack), HfStatus::Ok);
        let w = HfFusionWeights { contrast: 0.5, ..hf_fusion_weights_default() };
        let mut fused = ptr::null_mut();
        assert_eq!(hf_fuse(stack, &w, &mut fused), HfStatus::Ok);
        let mut codes = vec![0u8; 40 * 32 * 3];
        assert_eq!(hf_image_to_rgb8(fused, codes.as_mut_ptr(), codes.len()), HfStatus::Ok);
        assert_eq!(codes, expect);
        assert_eq!(hf_image_to_rgb8(fused, codes.as_mut_ptr(), 10), HfStatus::ErrInput);
        hf_image_free(fused);
        hf_stack_free(stack);
    }
}

#[test]
fn stack_from_buffers_and_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let gt = scene();
    let evs = [-1.0, 0.0, 1.0];
    let stack = synth_stack(&gt, &evs, &RenderOptions::default()).unwrap();
    unsafe {
        let handles: Vec<*mut HfImage> = stack
            .images()
            .iter()
            .map(|im| {
                let codes = im.to_codes();
                let mut h = ptr::null_mut();
                assert_eq!(hf_image_from_rgb8(codes.as_ptr(), 40, 32, &mut h), HfStatus::Ok);
                h
            })
            .collect();
        let ptrs: Vec<*const HfImage> = handles.iter().map(|h| *h as *const _).collect();
        let mut s = ptr::null_mut();
        assert_eq!(hf_stack_new(ptrs.as_ptr(), evs.as_ptr(), 3, 1.0, &mut s), HfStatus::Ok);
        // the stack owns copies
        for h in handles {
            hf_image_free(h);
        }
        let mut crf = ptr::null_mut();
        let opts = HfCrfOptions { samples: 150, ..hf_crf_options_default() };
        assert_eq!(hf_estimate_crf(s, &opts, &mut crf), HfStatus::Ok);
        let json = cstr(&dir.path().join("crf.json"));
        assert_eq!(hf_crf_write_json(crf, json.as_ptr()), HfStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(hf_crf_read_json(json.as_ptr(), &mut back), HfStatus::Ok);

        let mut r1 = ptr::null_mut();
        let mut r2 = ptr::null_mut();
        assert_eq!(hf_recover_radiance(s, crf, &mut r1), HfStatus::Ok);
        assert_eq!(hf_recover_radiance(s, back, &mut r2), HfStatus::Ok);
        let pfm = cstr(&dir.path().join("r.pfm"));
        assert_eq!(hf_radiance_write(r1, pfm.as_ptr()), HfStatus::Ok);
        let mut r3 = ptr::null_mut();
        assert_eq!(hf_radiance_read(pfm.as_ptr(), &mut r3), HfStatus::Ok);
        let a = io::read_hdr(dir.path().join("r.pfm")).unwrap();
        let pfm2 = cstr(&dir.path().join("r2.pfm"));
        assert_eq!(hf_radiance_write(r2, pfm2.as_ptr()), HfStatus::Ok);
        assert_eq!(a, io::read_hdr(dir.path().join("r2.pfm")).unwrap());

        for r in [r1, r2, r3] {
            hf_radiance_free(r);
        }
        hf_crf_free(crf);
        hf_crf_free(back);
        hf_stack_free(s);
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut out = ptr::dangling_mut::<HfImage>();
        assert_eq!(hf_fuse(ptr::null(), ptr::null(), &mut out), HfStatus::ErrNullArgument);
        assert!(out.is_null());
        assert!(last_error().contains("stack"));
        assert_eq!(hf_image_read_png(ptr::null(), &mut out), HfStatus::ErrNullArgument);
        assert_eq!(hf_fuse(ptr::null(), ptr::null(), ptr::null_mut()), HfStatus::ErrNullArgument);
        let mut report = HfReport::default();
        assert_eq!(hf_evaluate(ptr::null(), ptr::null(), 0, false, &mut report), HfStatus::ErrNullArgument);
        assert_eq!(hf_image_width(ptr::null()), 0);
        hf_image_free(ptr::null_mut());
        hf_stack_free(ptr::null_mut());
        hf_crf_free(ptr::null_mut());
        hf_radiance_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let missing = cstr(&dir.path().join("nope.png"));
        let mut image = ptr::null_mut();
        assert_eq!(hf_image_read_png(missing.as_ptr(), &mut image), HfStatus::ErrInput);
        assert!(last_error().contains("nope.png"));

        let codes = [128u8; 12 * 3];
        let mut a = ptr::null_mut();
        assert_eq!(hf_image_from_rgb8(codes.as_ptr(), 4, 3, &mut a), HfStatus::Ok);
        let one = [a as *const HfImage];
        let mut stack = ptr::null_mut();
        assert_eq!(hf_stack_new(one.as_ptr(), [0.0].as_ptr(), 1, 1.0, &mut stack), HfStatus::ErrInput);
        assert!(stack.is_null());

        let two = [a as *const HfImage, a as *const HfImage];
        assert_eq!(hf_stack_new(two.as_ptr(), [0.0, 1.0].as_ptr(), 2, 1.0, &mut stack), HfStatus::Ok);
        let bad = HfFusionWeights { contrast: -1.0, ..hf_fusion_weights_default() };
        let mut fused = ptr::null_mut();
        assert_eq!(hf_fuse(stack, &bad, &mut fused), HfStatus::ErrInput);

        let mut crf = ptr::null_mut();
        let few = HfCrfOptions { samples: 10, ..hf_crf_options_default() };
        assert_eq!(hf_estimate_crf(stack, &few, &mut crf), HfStatus::ErrNumerical);
        assert!(last_error().contains("P(N-1)"));
        assert!(crf.is_null());

        let mut report = HfReport::default();
        assert_eq!(hf_evaluate(a, a, 7, false, &mut report), HfStatus::ErrInput);
        assert_eq!(hf_evaluate(a, a, HF_METRIC_SCALED, true, &mut report), HfStatus::Ok);
        assert!(hf_last_error().is_null());
        assert_eq!(report.mean_dh, 0.0);

        hf_stack_free(stack);
        hf_image_free(a);
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(hf_image_read_png(ptr::null(), &mut out), HfStatus::ErrNullArgument);
    }
    std::thread::spawn(|| assert!(hf_last_error().is_null())).join().unwrap();
    assert!(!hf_last_error().is_null());
}
