//! `asd` command line. Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{spectral_stats, verify_amplitude_bound, DEFAULT_BOUND_SEED};
use crate::detection::{detect_with_asd, AsdConfig, BoundingBox, Detector, SubprocessDetector};
use crate::error::{invalid, AsdError, Result};
use crate::harness::corpus::{self, CorpusSpec, PatchTemplate};
use crate::harness::eval::GroundTruth;
use crate::harness::io::{load_image, save_image, save_mask};
use crate::harness::oracle::{EvasionRule, OracleDetector};
use crate::harness::patch::{inject_patch, PatchKind, PatchSpec};
use crate::harness::resize::{parse_size, resize, ResizeFilter};
use crate::harness::{evaluate, RunConfig, SCHEMA_VERSION};
use crate::spectral_mask::{asd_mask, to_grayscale, RgbImage};

#[derive(Debug, Parser)]
#[command(name = "asd", version, about = "Spectral masking of adversarial patches with Haar wavelets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mask and blur high-amplitude regions of images.
    Mask {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        resize: ResizeArgs,
    },
    /// Run multi-level defended detection on one image.
    Detect {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        resize: ResizeArgs,
    },
    /// Spectral amplitude statistics over a directory of PNG patches.
    Analyze {
        dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check the per-level detail amplitude bound.
    VerifyBound {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Trial image size, `N` or `WxH`.
        #[arg(long, default_value = "32")]
        size: String,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Paste a synthetic patch into an image.
    Inject {
        input: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: PatchKind,
        /// `x1,y1,x2,y2` in pixels.
        #[arg(long, value_parser = parse_region)]
        region: BoundingBox,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 2)]
        period: usize,
        #[arg(long, default_value_t = 0.5)]
        center: f64,
        /// Output file; defaults to `<out-dir>/<stem>.patched.png`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a seeded synthetic corpus with ground truth and patch manifests.
    Corpus {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, value_parser = parse_kind, default_value = "checkerboard")]
        kind: PatchKind,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 2)]
        period: usize,
        /// Skip patches.
        #[arg(long)]
        clean: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run defended detection over a corpus and report AP50.
    Eval {
        dir: PathBuf,
        /// Patch manifest for the built-in oracle detector (instead of `--detector-cmd`).
        #[arg(long)]
        oracle_patches: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        resize: ResizeArgs,
    },
    /// Time one masking pass on a synthetic image.
    Bench {
        #[arg(long, default_value_t = 416)]
        size: usize,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        /// Pass/fail budget for the median time.
        #[arg(long, default_value_t = 50.0)]
        budget_ms: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated decomposition levels.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    #[arg(long)]
    nms_iou: Option<f64>,
    #[arg(long)]
    blur_sigma: Option<f64>,
    #[arg(long)]
    blur_radius: Option<usize>,
    #[arg(long)]
    detector_cmd: Option<String>,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResizeArgs {
    /// Resize inputs to `WxH` before processing.
    #[arg(long, value_parser = parse_size)]
    resize: Option<(usize, usize)>,
    #[arg(long, default_value = "bilinear")]
    resize_filter: ResizeFilter,
}

impl ResizeArgs {
    fn apply(&self, image: RgbImage) -> Result<RgbImage> {
        match self.resize {
            Some((w, h)) => resize(&image, w, h, self.resize_filter),
            None => Ok(image),
        }
    }
}

fn parse_kind(s: &str) -> std::result::Result<PatchKind, String> {
    s.parse()
}

fn parse_region(s: &str) -> std::result::Result<BoundingBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad coordinate in `{s}`")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x1, y1, x2, y2] => BoundingBox::new(x1, y1, x2, y2, 1.0, 0).map_err(|e| e.to_string()),
        _ => Err(format!("expected x1,y1,x2,y2, got `{s}`")),
    }
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.theta {
            cfg.asd.theta = v;
        }
        if let Some(v) = &self.levels {
            cfg.asd.levels = v.clone();
        }
        if let Some(v) = self.nms_iou {
            cfg.asd.nms_iou = v;
        }
        if let Some(v) = self.blur_sigma {
            cfg.asd.blur_sigma = v;
        }
        if let Some(v) = self.blur_radius {
            cfg.asd.blur_radius = v;
        }
        if let Some(v) = &self.detector_cmd {
            cfg.detector_cmd = Some(v.clone());
        }
        if let Some(v) = &self.gt {
            cfg.gt = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = Some(v.clone());
        }
        cfg.asd.validate()?;
        Ok(cfg)
    }
}

fn max_level(cfg: &AsdConfig) -> usize {
    cfg.levels.iter().copied().max().unwrap_or(0) as usize
}

fn require_out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir.clone().ok_or_else(|| invalid("--out-dir is required"))?;
    fs::create_dir_all(&dir).map_err(|source| AsdError::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| AsdError::Io { path: path.to_path_buf(), source })
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(AsdError::MissingFile(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| AsdError::Io { path: dir.to_path_buf(), source })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn versioned<T: Serialize>(body: &T) -> Versioned<'_, T> {
    Versioned { schema_version: SCHEMA_VERSION, body }
}

/// Runs the CLI with `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let emit = |out: &mut dyn Write, text: String| -> Result<()> {
        out.write_all(text.as_bytes()).map_err(|source| AsdError::Io { path: PathBuf::from("<stdout>"), source })
    };
    match command {
        Command::Mask { inputs, common, resize } => {
            let mut cfg = common.resolve()?;
            cfg.inputs.extend(inputs);
            if cfg.inputs.is_empty() {
                return Err(invalid("no input images given"));
            }
            cfg.check_paths()?;
            let dir = require_out_dir(&cfg)?;
            let mask_cfg = cfg.asd.mask_config(max_level(&cfg.asd) as u32);
            let mut summary = Vec::new();
            for input in &cfg.inputs {
                let image = resize.apply(load_image(input)?)?;
                let (defended, mask) = asd_mask(&image, &mask_cfg)?;
                let name = stem(input);
                save_image(&defended, dir.join(format!("{name}.defended.png")))?;
                save_mask(&mask, dir.join(format!("{name}.mask.png")))?;
                summary.push(serde_json::json!({
                    "image": file_name(input),
                    "masked_pixels": mask.count(),
                    "coverage": mask.coverage(),
                }));
            }
            let report = serde_json::json!({ "schema_version": SCHEMA_VERSION, "n": mask_cfg.n, "images": summary });
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Detect { input, common, resize } => {
            let cfg = common.resolve()?;
            let cmd = cfg.detector_cmd.clone().ok_or_else(|| invalid("--detector-cmd is required"))?;
            let detector = SubprocessDetector::new(&cmd)?;
            let image = resize.apply(load_image(&input)?)?;
            let boxes = detect_with_asd(&image, &detector, &cfg.asd)?;
            let report = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "image": file_name(&input),
                "levels": cfg.asd.levels,
                "boxes": boxes,
            });
            if cfg.out_dir.is_some() {
                let dir = require_out_dir(&cfg)?;
                write_json(&dir.join(format!("{}.detections.json", stem(&input))), &report)?;
            }
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Analyze { dir, common, format } => {
            let cfg = common.resolve()?;
            let n = max_level(&cfg.asd).max(1);
            let patches = png_files(&dir)?
                .iter()
                .map(|p| load_image(p).map(|img| to_grayscale(&img)))
                .collect::<Result<Vec<_>>>()?;
            let stats = spectral_stats(&patches, n)?;
            if cfg.out_dir.is_some() {
                let d = require_out_dir(&cfg)?;
                write_json(&d.join("stats.json"), &versioned(&stats))?;
                fs::write(d.join("stats.txt"), stats.to_text())
                    .map_err(|source| AsdError::Io { path: d.join("stats.txt"), source })?;
            }
            let text = match format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&versioned(&stats))?),
                Format::Text => stats.to_text(),
            };
            emit(out, text)
        }
        Command::VerifyBound { epsilon, trials, size, common, format } => {
            let cfg = common.resolve()?;
            let n = max_level(&cfg.asd).max(1);
            let size = parse_trial_size(&size)?;
            let seed = common.seed.unwrap_or(DEFAULT_BOUND_SEED);
            let report = verify_amplitude_bound(epsilon, n, trials, size, seed)?;
            if cfg.out_dir.is_some() {
                let d = require_out_dir(&cfg)?;
                write_json(&d.join("bound.json"), &versioned(&report))?;
            }
            let text = match format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&versioned(&report))?),
                Format::Text => report.to_text(),
            };
            emit(out, text)
        }
        Command::Inject { input, kind, region, amplitude, period, center, out: target, common } => {
            let cfg = common.resolve()?;
            let spec = PatchSpec { kind, region, amplitude, period, value_center: center };
            let image = load_image(&input)?;
            let patched = inject_patch(&image, &spec, cfg.seed)?;
            let target = match target {
                Some(t) => t,
                None => require_out_dir(&cfg)?.join(format!("{}.patched.png", stem(&input))),
            };
            save_image(&patched, &target)?;
            let report = serde_json::json!({ "schema_version": SCHEMA_VERSION, "output": target, "patch": spec });
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Corpus { count, size, kind, amplitude, period, clean, common } => {
            let cfg = common.resolve()?;
            let dir = require_out_dir(&cfg)?;
            let template = PatchTemplate { kind, amplitude, period, ..PatchTemplate::default() };
            let spec = CorpusSpec { count, size, seed: cfg.seed, patch: (!clean).then_some(template) };
            let images = corpus::generate(&spec)?;
            for img in &images {
                save_image(&img.image, dir.join(&img.name))?;
            }
            let (gt, patches) = corpus::manifests(&images);
            write_json(&dir.join("gt.json"), &gt)?;
            write_json(&dir.join("patches.json"), &patches)?;
            let report =
                serde_json::json!({ "schema_version": SCHEMA_VERSION, "images": images.len(), "out_dir": dir });
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Eval { dir, oracle_patches, common, resize } => {
            let cfg = common.resolve()?;
            let gt_path = cfg.gt.clone().ok_or_else(|| invalid("--gt is required"))?;
            let gt = GroundTruth::load(&gt_path)?;
            let images = png_files(&dir)?
                .iter()
                .map(|p| Ok((file_name(p), resize.apply(load_image(p)?)?)))
                .collect::<Result<Vec<_>>>()?;
            let (detections, report) = match (&oracle_patches, &cfg.detector_cmd) {
                (Some(manifest), _) => {
                    let patches = load_patch_manifest(manifest)?;
                    let gt = &gt;
                    let patches = &patches;
                    evaluate(&images, gt, &cfg.asd, move |name, image| {
                        let regions = patches
                            .get(name)
                            .map(|v| v.iter().map(PatchSpec::pixel_region).collect())
                            .unwrap_or_default();
                        let oracle =
                            OracleDetector::new(gt.boxes(name), regions, image.clone(), EvasionRule::default())?;
                        Ok(Box::new(oracle) as Box<dyn Detector>)
                    })?
                }
                (None, Some(cmd)) => {
                    let detector = SubprocessDetector::new(cmd)?;
                    evaluate(&images, &gt, &cfg.asd, |_, _| Ok(Box::new(detector.clone()) as Box<dyn Detector>))?
                }
                (None, None) => return Err(invalid("eval needs --detector-cmd or --oracle-patches")),
            };
            if cfg.out_dir.is_some() {
                let d = require_out_dir(&cfg)?;
                write_json(&d.join("detections.json"), &detections)?;
                write_json(&d.join("report.json"), &report)?;
            }
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Bench { size, iterations, budget_ms, common } => {
            let cfg = common.resolve()?;
            let n = max_level(&cfg.asd);
            let report = bench(size, n, iterations.max(1), budget_ms, &cfg.asd)?;
            emit(out, format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
    }
}

fn parse_trial_size(s: &str) -> Result<(usize, usize)> {
    if let Ok(n) = s.trim().parse::<usize>() {
        return Ok((n, n));
    }
    parse_size(s).map(|(w, h)| (h, w)).map_err(AsdError::InvalidInput)
}

fn load_patch_manifest(path: &Path) -> Result<std::collections::BTreeMap<String, Vec<PatchSpec>>> {
    if !path.exists() {
        return Err(AsdError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| AsdError::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// Timing of [`asd_mask`] on a synthetic scene with a checkerboard patch.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub size: usize,
    pub n: usize,
    pub iterations: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub budget_ms: f64,
    pub within_budget: bool,
}

pub fn bench(size: usize, n: usize, iterations: usize, budget_ms: f64, cfg: &AsdConfig) -> Result<BenchReport> {
    let scene = corpus::generate(&CorpusSpec { count: 1, size, seed: 0, patch: Some(PatchTemplate::default()) })?
        .remove(0)
        .image;
    let mask_cfg = cfg.mask_config(n as u32);
    let mut times: Vec<f64> = (0..iterations)
        .map(|_| {
            let start = Instant::now();
            asd_mask(&scene, &mask_cfg).map(|_| start.elapsed().as_secs_f64() * 1e3)
        })
        .collect::<Result<_>>()?;
    times.sort_by(f64::total_cmp);
    let median_ms = times[times.len() / 2];
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        size,
        n,
        iterations,
        min_ms: times[0],
        median_ms,
        mean_ms: times.iter().sum::<f64>() / times.len() as f64,
        budget_ms,
        within_budget: median_ms < budget_ms,
    })
}
