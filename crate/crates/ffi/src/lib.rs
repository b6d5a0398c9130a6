//! C ABI for huefuse.
//!
//! Every fallible function returns an `HfStatus`. On failure a message is
//! kept per thread and can be read with `hf_last_error` until the next call
//! on that thread. Objects are opaque handles; each constructor has a
//! matching `*_free`, which accepts NULL.
//!
//! Output handles are written only on success and set to NULL otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use huefuse::crf::{estimate_inverse_crf, CrfSolveConfig};
use huefuse::fusion::{fuse, FusionWeights};
use huefuse::hdr::recover_radiance;
use huefuse::hueplane::{compensate_image, HueDomain};
use huefuse::metrics::{image_hue_diff, HueDiffOptions, MetricVariant};
use huefuse::{io, CrfTable, ErrorKind, ExposureStack, LdrImage, RadianceMap};

/// Number of entries per channel in a response table.
pub const HF_CRF_LEVELS: usize = 256;

pub const HF_HUE_DOMAIN_LINEAR: u32 = 0;
pub const HF_HUE_DOMAIN_GAMMA: u32 = 1;

pub const HF_METRIC_RAW: u32 = 0;
pub const HF_METRIC_SCALED: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    /// Bad arguments, bad data, unreadable or malformed files.
    ErrInput = 2,
    /// The response solver failed.
    ErrNumerical = 3,
    /// A required pointer was NULL.
    ErrNullArgument = 4,
    /// Internal panic; the library state is unaffected.
    ErrPanic = 5,
}

/// Display image with 8-bit channels.
pub struct HfImage(LdrImage);

/// Exposure-bracketed images of one scene.
pub struct HfStack(ExposureStack);

/// Inverse camera response.
pub struct HfCrf(CrfTable);

/// Radiance map.
pub struct HfRadiance(RadianceMap);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HfFusionWeights {
    pub contrast: f64,
    pub saturation: f64,
    pub exposedness: f64,
    pub sigma: f64,
    /// Pyramid depth, negative for automatic.
    pub depth: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HfCrfOptions {
    pub samples: usize,
    pub lambda: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HfReport {
    pub mean_dh: f64,
    pub pixels: usize,
    pub excluded: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Fail {
    Core(huefuse::Error),
    Input(String),
    Null(&'static str),
}

impl From<huefuse::Error> for Fail {
    fn from(e: huefuse::Error) -> Self {
        Fail::Core(e)
    }
}

type Res<T> = Result<T, Fail>;

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Res<()>) -> HfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            match e.kind() {
                ErrorKind::Input => HfStatus::ErrInput,
                ErrorKind::Numerical => HfStatus::ErrNumerical,
            }
        }
        Ok(Err(Fail::Input(msg))) => {
            set_error(msg);
            HfStatus::ErrInput
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("{name} is NULL"));
            HfStatus::ErrNullArgument
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            HfStatus::ErrPanic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &'static str) -> Res<&'a T> {
    p.as_ref().ok_or(Fail::Null(name))
}

/// Clears `*out` and returns it for writing later.
unsafe fn out_slot<'a, T>(p: *mut *mut T, name: &'static str) -> Res<&'a mut *mut T> {
    let slot = p.as_mut().ok_or(Fail::Null(name))?;
    *slot = ptr::null_mut();
    Ok(slot)
}

unsafe fn path_arg<'a>(p: *const c_char, name: &'static str) -> Res<&'a Path> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail::Input(format!("{name} is not valid UTF-8")))
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next `hf_*` call on this thread.
#[no_mangle]
pub extern "C" fn hf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Image from interleaved RGB codes, `width * height * 3` bytes, row-major.
///
/// # Safety
/// `codes` must point to at least `width * height * 3` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_image_from_rgb8(
    codes: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut HfImage,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let codes = arg(codes, "codes")?;
        let len = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| Fail::Input(format!("image size {width}x{height} overflows")))?;
        let codes = std::slice::from_raw_parts(codes, len);
        boxed(slot, HfImage(LdrImage::from_codes(width, height, codes)?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_image_read_png(path: *const c_char, out: *mut *mut HfImage) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        boxed(slot, HfImage(io::read_ldr(path_arg(path, "path")?)?));
        Ok(())
    })
}

/// # Safety
/// `image` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_image_write_png(image: *const HfImage, path: *const c_char) -> HfStatus {
    guard(|| {
        let image = arg(image, "image")?;
        io::write_ldr(&image.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Width in pixels, 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_image_width(image: *const HfImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// Height in pixels, 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_image_height(image: *const HfImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// Copies interleaved RGB codes into `buf`, which holds `len` bytes.
///
/// # Safety
/// `image` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_image_to_rgb8(image: *const HfImage, buf: *mut u8, len: usize) -> HfStatus {
    guard(|| {
        let image = arg(image, "image")?;
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let codes = image.0.to_codes();
        if len < codes.len() {
            return Err(Fail::Input(format!("buffer holds {len} bytes, need {}", codes.len())));
        }
        ptr::copy_nonoverlapping(codes.as_ptr(), buf, codes.len());
        Ok(())
    })
}

/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_image_free(image: *mut HfImage) {
    free(image)
}

/// Stack from `count` images with their EVs; exposure time is
/// `base_time * 2^ev`. The images are copied.
///
/// # Safety
/// `images` and `evs` must each point to `count` elements; every image must
/// be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_stack_new(
    images: *const *const HfImage,
    evs: *const f64,
    count: usize,
    base_time: f64,
    out: *mut *mut HfStack,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let images = std::slice::from_raw_parts(arg(images, "images")?, count);
        let evs = std::slice::from_raw_parts(arg(evs, "evs")?, count);
        let images = images
            .iter()
            .map(|p| arg(*p, "images[i]").map(|i| i.0.clone()))
            .collect::<Res<Vec<_>>>()?;
        boxed(slot, HfStack(ExposureStack::new(images, evs.to_vec(), base_time)?));
        Ok(())
    })
}

/// Loads a JSON manifest and the images it lists.
///
/// # Safety
/// `manifest` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_stack_load(manifest: *const c_char, out: *mut *mut HfStack) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let m = io::read_manifest(path_arg(manifest, "manifest")?)?;
        boxed(slot, HfStack(io::load_stack(&m)?));
        Ok(())
    })
}

/// Number of exposures, 0 for NULL.
///
/// # Safety
/// `stack` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_stack_len(stack: *const HfStack) -> usize {
    stack.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `stack` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_stack_free(stack: *mut HfStack) {
    free(stack)
}

#[no_mangle]
pub extern "C" fn hf_fusion_weights_default() -> HfFusionWeights {
    let d = FusionWeights::default();
    HfFusionWeights {
        contrast: d.contrast,
        saturation: d.saturation,
        exposedness: d.exposedness,
        sigma: d.sigma,
        depth: -1,
    }
}

/// Exposure fusion. `weights` may be NULL for the defaults.
///
/// # Safety
/// `stack` must be a live handle; `weights` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn hf_fuse(
    stack: *const HfStack,
    weights: *const HfFusionWeights,
    out: *mut *mut HfImage,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let stack = arg(stack, "stack")?;
        let w = weights.as_ref().copied().unwrap_or_else(|| hf_fusion_weights_default());
        let w = FusionWeights {
            contrast: w.contrast,
            saturation: w.saturation,
            exposedness: w.exposedness,
            sigma: w.sigma,
            depth: usize::try_from(w.depth).ok(),
        };
        w.validate()?;
        boxed(slot, HfImage(fuse(&stack.0, &w)?));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hf_crf_options_default() -> HfCrfOptions {
    let d = CrfSolveConfig::default();
    HfCrfOptions {
        samples: d.samples,
        lambda: d.lambda,
        seed: d.seed,
    }
}

/// Estimates the inverse camera response. `options` may be NULL.
///
/// # Safety
/// `stack` must be a live handle; `options` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn hf_estimate_crf(
    stack: *const HfStack,
    options: *const HfCrfOptions,
    out: *mut *mut HfCrf,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let stack = arg(stack, "stack")?;
        let o = options.as_ref().copied().unwrap_or_else(|| hf_crf_options_default());
        let cfg = CrfSolveConfig {
            samples: o.samples,
            lambda: o.lambda,
            seed: o.seed,
        };
        cfg.validate()?;
        boxed(slot, HfCrf(estimate_inverse_crf(&stack.0, &cfg)?));
        Ok(())
    })
}

/// Copies the log-exposure table of one channel (0 = R) into `buf`, which
/// must hold `HF_CRF_LEVELS` values.
///
/// # Safety
/// `crf` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_crf_channel(crf: *const HfCrf, channel: u32, buf: *mut f64, len: usize) -> HfStatus {
    guard(|| {
        let crf = arg(crf, "crf")?;
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if channel > 2 {
            return Err(Fail::Input(format!("channel {channel} is not 0, 1 or 2")));
        }
        let t = crf.0.channel(channel as usize);
        if len < t.len() {
            return Err(Fail::Input(format!("buffer holds {len} values, need {}", t.len())));
        }
        ptr::copy_nonoverlapping(t.as_ptr(), buf, t.len());
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_crf_read_json(path: *const c_char, out: *mut *mut HfCrf) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        boxed(slot, HfCrf(io::read_json(path_arg(path, "path")?)?));
        Ok(())
    })
}

/// # Safety
/// `crf` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_crf_write_json(crf: *const HfCrf, path: *const c_char) -> HfStatus {
    guard(|| {
        let crf = arg(crf, "crf")?;
        io::write_json(&crf.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `crf` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_crf_free(crf: *mut HfCrf) {
    free(crf)
}

/// Weighted radiance merge of the stack through `crf`.
///
/// # Safety
/// `stack` and `crf` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn hf_recover_radiance(
    stack: *const HfStack,
    crf: *const HfCrf,
    out: *mut *mut HfRadiance,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let (stack, crf) = (arg(stack, "stack")?, arg(crf, "crf")?);
        boxed(slot, HfRadiance(recover_radiance(&stack.0, &crf.0)?));
        Ok(())
    })
}

/// Reads `.hdr` (RGBE) or `.pfm` by extension.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_radiance_read(path: *const c_char, out: *mut *mut HfRadiance) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        boxed(slot, HfRadiance(io::read_hdr(path_arg(path, "path")?)?));
        Ok(())
    })
}

/// Writes `.hdr` (RGBE) or `.pfm` by extension.
///
/// # Safety
/// `radiance` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hf_radiance_write(radiance: *const HfRadiance, path: *const c_char) -> HfStatus {
    guard(|| {
        let radiance = arg(radiance, "radiance")?;
        io::write_hdr(&radiance.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `radiance` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_radiance_free(radiance: *mut HfRadiance) {
    free(radiance)
}

/// Replaces the hue of every fused pixel by the hue of the radiance map.
/// `hue_domain` is `HF_HUE_DOMAIN_LINEAR` or `HF_HUE_DOMAIN_GAMMA`.
///
/// # Safety
/// `fused` and `radiance` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn hf_compensate(
    fused: *const HfImage,
    radiance: *const HfRadiance,
    hue_domain: u32,
    out: *mut *mut HfImage,
) -> HfStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let (fused, radiance) = (arg(fused, "fused")?, arg(radiance, "radiance")?);
        let domain = match hue_domain {
            HF_HUE_DOMAIN_LINEAR => HueDomain::Linear,
            HF_HUE_DOMAIN_GAMMA => HueDomain::Gamma,
            other => return Err(Fail::Input(format!("unknown hue domain {other}"))),
        };
        boxed(slot, HfImage(compensate_image(&fused.0, &radiance.0, domain)?));
        Ok(())
    })
}

/// Mean CIEDE2000 hue difference of `image` against `reference`.
/// `variant` is `HF_METRIC_RAW` or `HF_METRIC_SCALED`.
///
/// # Safety
/// `image` and `reference` must be live handles, `report` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_evaluate(
    image: *const HfImage,
    reference: *const HfImage,
    variant: u32,
    exclude_clipped: bool,
    report: *mut HfReport,
) -> HfStatus {
    guard(|| {
        let (image, reference) = (arg(image, "image")?, arg(reference, "reference")?);
        let report = report.as_mut().ok_or(Fail::Null("report"))?;
        let variant = match variant {
            HF_METRIC_RAW => MetricVariant::RawDeltaH,
            HF_METRIC_SCALED => MetricVariant::ScaledDeltaH,
            other => return Err(Fail::Input(format!("unknown metric variant {other}"))),
        };
        let r = image_hue_diff(&image.0, &reference.0, &HueDiffOptions { variant, exclude_clipped })?;
        *report = HfReport {
            mean_dh: r.mean_dh,
            pixels: r.pixels,
            excluded: r.excluded,
        };
        Ok(())
    })
}
