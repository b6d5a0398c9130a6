//! Command-line front end. `main.rs` only parses arguments and maps errors
//! to exit codes; everything else lives here so it can be tested.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::crf::{estimate_inverse_crf, CrfSolveConfig};
use crate::error::{Error, ErrorKind, Result};
use crate::fusion::{fuse, FusionWeights};
use crate::hdr::{recover_radiance, render_reference, synth_stack, RenderOptions};
use crate::hueplane::{compensate_image, HueDomain};
use crate::image::{CrfTable, ExposureStack};
use crate::io;
use crate::metrics::{image_hue_diff, HueDiffOptions, HueDiffReport, MetricVariant};

/// PNG text chunk holding the effective configuration.
pub const CONFIG_TEXT_KEY: &str = "huefuse:config";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

/// Every tunable of a run. Missing fields in a config file take the
/// defaults below; command-line flags override the file.
///
/// | field | default |
/// |---|---|
/// | `crf.samples` | 100 |
/// | `crf.lambda` | 50 |
/// | `crf.seed` | 0 |
/// | `fusion.contrast`, `fusion.saturation`, `fusion.exposedness` | 1, 1, 1 |
/// | `fusion.sigma` | 0.2 |
/// | `fusion.depth` | automatic |
/// | `hue_domain` | `linear` |
/// | `metric.variant` | `raw_dHp` |
/// | `metric.exclude_clipped` | false |
/// | `render.gamma` | 2.2 |
/// | `render.scale` | median luminance anchored |
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub crf: CrfSolveConfig,
    pub fusion: FusionWeights,
    pub hue_domain: HueDomain,
    pub metric: HueDiffOptions,
    pub render: RenderOptions,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.crf.validate()?;
        self.fusion.validate()?;
        if !(self.render.gamma.is_finite() && self.render.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.render.gamma)));
        }
        Ok(())
    }

    fn to_json(self) -> String {
        serde_json::to_string(&self).expect("config serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "huefuse", version, about = "Exposure fusion with HDR-guided hue compensation")]
pub struct Cli {
    #[command(flatten)]
    pub options: GlobalOptions,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalOptions {
    /// JSON run configuration; flags given on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// CRF smoothness weight (>= 0)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    /// Number of sampled pixels for CRF estimation
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Tie-break seed for CRF sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Display gamma of the synthetic camera
    #[arg(long, global = true)]
    pub gamma: Option<f64>,

    /// Take HDR hue after a 1/2.2 display gamma instead of from linear radiance
    #[arg(long, global = true)]
    pub hdr_gamma: bool,

    /// Fusion exponents for contrast, saturation and well-exposedness
    #[arg(long, global = true, value_name = "C,S,E", value_parser = parse_weights)]
    pub weights: Option<[f64; 3]>,

    /// Hue term averaged by `evaluate`: raw_dHp or scaled_dHp
    #[arg(long, global = true, value_parser = parse_variant)]
    pub metric_variant: Option<MetricVariant>,

    /// Ignore pixels clipped in the reference when evaluating
    #[arg(long, global = true)]
    pub exclude_clipped: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse an exposure stack into one display image
    Fuse { manifest: PathBuf, output: PathBuf },

    /// Estimate the inverse camera response and write it as JSON
    EstimateCrf { manifest: PathBuf, output: PathBuf },

    /// Recover a radiance map (.hdr or .pfm)
    MergeHdr {
        manifest: PathBuf,
        output: PathBuf,
        /// Inverse response table from `estimate-crf`
        #[arg(long, conflicts_with = "auto_crf", required_unless_present = "auto_crf")]
        crf: Option<PathBuf>,
        /// Estimate the response from the same stack first
        #[arg(long)]
        auto_crf: bool,
    },

    /// Replace the hue of a fused image with the hue of a radiance map
    Compensate {
        fused: PathBuf,
        radiance: PathBuf,
        output: PathBuf,
    },

    /// Render an exposure stack from a radiance map
    SynthStack {
        radiance: PathBuf,
        outdir: PathBuf,
        /// Exposure values, e.g. `0,±0.5,±2` or `0,0.5,-0.5,2,-2`
        #[arg(long, allow_hyphen_values = true, value_parser = parse_evs)]
        evs: EvList,
        /// Also write the EV 0 rendering used as the evaluation reference
        #[arg(long, value_name = "PNG")]
        reference: Option<PathBuf>,
    },

    /// Mean CIEDE2000 hue difference between two images
    Evaluate {
        image: PathBuf,
        reference: PathBuf,
        output: PathBuf,
    },

    /// fuse, estimate-crf, merge-hdr, compensate and (with a reference) evaluate
    Pipeline {
        manifest: PathBuf,
        outdir: PathBuf,
        #[arg(long, value_name = "PNG")]
        reference: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvList(pub Vec<f64>);

/// Comma-separated exposure values; a leading `±` (or `+-`) yields both signs.
pub fn parse_evs(s: &str) -> std::result::Result<EvList, String> {
    let mut evs = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let (both, num) = match item.strip_prefix('±').or_else(|| item.strip_prefix("+-")) {
            Some(rest) => (true, rest),
            None => (false, item),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| format!("bad exposure value '{item}' in '{s}'"))?;
        if !v.is_finite() {
            return Err(format!("exposure value '{item}' is not finite"));
        }
        evs.push(v);
        if both && v != 0.0 {
            evs.push(-v);
        }
    }
    let mut sorted = evs.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(format!("repeated exposure value in '{s}'"));
    }
    Ok(EvList(evs))
}

fn parse_weights(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated exponents, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("bad exponent '{p}'"))?;
    }
    Ok(out)
}

fn parse_variant(s: &str) -> std::result::Result<MetricVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl GlobalOptions {
    /// File config (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg: RunConfig = match &self.config {
            Some(path) => io::read_json(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.lambda {
            cfg.crf.lambda = v;
        }
        if let Some(v) = self.samples {
            cfg.crf.samples = v;
        }
        if let Some(v) = self.seed {
            cfg.crf.seed = v;
        }
        if let Some(v) = self.gamma {
            cfg.render.gamma = v;
        }
        if self.hdr_gamma {
            cfg.hue_domain = HueDomain::Gamma;
        }
        if let Some([c, s, e]) = self.weights {
            cfg.fusion.contrast = c;
            cfg.fusion.saturation = s;
            cfg.fusion.exposedness = e;
        }
        if let Some(v) = self.metric_variant {
            cfg.metric.variant = v;
        }
        if self.exclude_clipped {
            cfg.metric.exclude_clipped = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct CrfDocument<'a> {
    #[serde(flatten)]
    table: &'a CrfTable,
    config: RunConfig,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    #[serde(flatten)]
    report: &'a HueDiffReport,
    config: RunConfig,
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.options.resolve()?;
    match &cli.command {
        Command::Fuse { manifest, output } => cmd_fuse(manifest, output, &cfg),
        Command::EstimateCrf { manifest, output } => cmd_estimate_crf(manifest, output, &cfg),
        Command::MergeHdr {
            manifest,
            output,
            crf,
            auto_crf: _,
        } => cmd_merge_hdr(manifest, crf.as_deref(), output, &cfg),
        Command::Compensate {
            fused,
            radiance,
            output,
        } => cmd_compensate(fused, radiance, output, &cfg),
        Command::SynthStack {
            radiance,
            outdir,
            evs,
            reference,
        } => cmd_synth(radiance, &evs.0, outdir, reference.as_deref(), &cfg),
        Command::Evaluate {
            image,
            reference,
            output,
        } => cmd_evaluate(image, reference, output, &cfg).map(|_| ()),
        Command::Pipeline {
            manifest,
            outdir,
            reference,
        } => cmd_pipeline(manifest, outdir, reference.as_deref(), &cfg).map(|_| ()),
    }
}

fn load_stack(manifest: &Path) -> Result<ExposureStack> {
    let stack = io::load_stack(&io::read_manifest(manifest)?)?;
    info!("loaded {} exposures of {}x{}", stack.len(), stack.width(), stack.height());
    Ok(stack)
}

fn write_png(image: &crate::LdrImage, path: &Path, cfg: &RunConfig) -> Result<()> {
    io::write_ldr_with_text(image, path, &[(CONFIG_TEXT_KEY, &cfg.to_json())])
}

pub fn cmd_fuse(manifest: &Path, output: &Path, cfg: &RunConfig) -> Result<()> {
    let stack = load_stack(manifest)?;
    let fused = fuse(&stack, &cfg.fusion)?;
    write_png(&fused, output, cfg)
}

pub fn cmd_estimate_crf(manifest: &Path, output: &Path, cfg: &RunConfig) -> Result<()> {
    let stack = load_stack(manifest)?;
    let table = estimate_inverse_crf(&stack, &cfg.crf)?;
    io::write_json(&CrfDocument { table: &table, config: *cfg }, output)
}

/// `crf = None` estimates the response from the stack itself.
pub fn cmd_merge_hdr(manifest: &Path, crf: Option<&Path>, output: &Path, cfg: &RunConfig) -> Result<()> {
    // fail on a bad extension before doing any work
    io::HdrFormat::from_path(output)?;
    let stack = load_stack(manifest)?;
    let table: CrfTable = match crf {
        Some(path) => io::read_json(path)?,
        None => estimate_inverse_crf(&stack, &cfg.crf)?,
    };
    let radiance = recover_radiance(&stack, &table)?;
    io::write_hdr(&radiance, output)
}

pub fn cmd_compensate(fused: &Path, radiance: &Path, output: &Path, cfg: &RunConfig) -> Result<()> {
    let fused = io::read_ldr(fused)?;
    let radiance = io::read_hdr(radiance)?;
    let out = compensate_image(&fused, &radiance, cfg.hue_domain)?;
    write_png(&out, output, cfg)
}

/// File name of exposure `index` in a synthesized stack.
pub fn exposure_file_name(index: usize, ev: f64) -> String {
    format!("exposure_{index:02}_ev{ev:+}.png")
}

pub fn cmd_synth(radiance: &Path, evs: &[f64], outdir: &Path, reference: Option<&Path>, cfg: &RunConfig) -> Result<()> {
    let ground_truth = io::read_hdr(radiance)?;
    let stack = synth_stack(&ground_truth, evs, &cfg.render)?;
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let mut entries = Vec::with_capacity(stack.len());
    for (j, (image, &ev)) in stack.images().iter().zip(stack.evs()).enumerate() {
        let name = exposure_file_name(j, ev);
        write_png(image, &outdir.join(&name), cfg)?;
        entries.push(io::ManifestEntry { path: name.into(), ev });
    }
    let manifest = io::StackManifest {
        base_time: stack.base_time(),
        images: entries,
    };
    io::write_manifest(&manifest, outdir.join("manifest.json"))?;
    if let Some(path) = reference {
        write_png(&render_reference(&ground_truth, &cfg.render)?, path, cfg)?;
    }
    Ok(())
}

pub fn cmd_evaluate(image: &Path, reference: &Path, output: &Path, cfg: &RunConfig) -> Result<HueDiffReport> {
    let image = io::read_ldr(image)?;
    let reference = io::read_ldr(reference)?;
    let report = image_hue_diff(&image, &reference, &cfg.metric)?;
    io::write_json(&ReportDocument { report: &report, config: *cfg }, output)?;
    Ok(report)
}

/// Reports of the fused and compensated images, when a reference was given.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReports {
    pub fused: HueDiffReport,
    pub compensated: HueDiffReport,
}

/// Runs the individual commands in order on files inside `outdir`:
/// `fused.png`, `crf.json`, `radiance.hdr`, `compensated.png` and, with a
/// reference, `report_fused.json` and `report_compensated.json`.
pub fn cmd_pipeline(
    manifest: &Path,
    outdir: &Path,
    reference: Option<&Path>,
    cfg: &RunConfig,
) -> Result<Option<PipelineReports>> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let fused = outdir.join("fused.png");
    let crf = outdir.join("crf.json");
    let radiance = outdir.join("radiance.hdr");
    let compensated = outdir.join("compensated.png");
    cmd_fuse(manifest, &fused, cfg)?;
    cmd_estimate_crf(manifest, &crf, cfg)?;
    cmd_merge_hdr(manifest, Some(&crf), &radiance, cfg)?;
    cmd_compensate(&fused, &radiance, &compensated, cfg)?;
    let Some(reference) = reference else {
        return Ok(None);
    };
    let fused = cmd_evaluate(&fused, reference, &outdir.join("report_fused.json"), cfg)?;
    let compensated = cmd_evaluate(&compensated, reference, &outdir.join("report_compensated.json"), cfg)?;
    info!(
        "mean hue difference: fused {:.4}, compensated {:.4}",
        fused.mean_dh, compensated.mean_dh
    );
    Ok(Some(PipelineReports { fused, compensated }))
}
