use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _, Result};
use clap::Args;
use depthkit::camera::Camera;
use depthkit::dataset::{load_cameras, load_dataset, save_dataset, SceneDataset};
use depthkit::depth_io::{load_depth, load_mask_png, load_rgb_png, store_depth_pfm, store_rgb_png};
use depthkit::eval::{evaluate_dataset, write_report_csv, write_summary_json, FrameInput, ReportSummary, ScaleMode};
use depthkit::field::{load_grid, render_image, store_grid, Aabb, VoxelGrid};
use depthkit::geometry::Vec3;
use depthkit::inpaint::{inpaint_depth, inpaint_rgb};
use depthkit::synth::{analytic_depth, make_dataset, ring_cameras, SceneSpec};
use depthkit::train::{TrainingLog, MASKED_LOSS_NOTE};
use serde::Serialize;

use crate::config::{write_json, Manifest, RunConfig, Versions};
use crate::frames::{frame_name, numbered_files};

pub struct Context {
    pub out: PathBuf,
    pub command: &'static str,
    pub threads: usize,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn subdir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.out.join(name);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn manifest(&self, cfg: &RunConfig, notes: Vec<&'static str>) -> Result<()> {
        let m = Manifest {
            command: self.command,
            args: std::env::args().skip(1).collect(),
            seed: cfg.seed,
            threads: self.threads,
            deterministic: cfg.deterministic,
            config: cfg,
            versions: Versions::current(),
            notes,
        };
        write_json(&self.path("manifest.json"), &m)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of ground-truth depth maps (.pfm or 16-bit .png)
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of predicted depth maps
    #[arg(long)]
    pub pred: PathBuf,
    /// median, lsq, or none
    #[arg(long)]
    pub scale_mode: Option<ScaleMode>,
    /// Divisor applied to 16-bit PNG depth values
    #[arg(long)]
    pub depth_divisor: Option<f64>,
    /// Frame ids to leave out (repeatable)
    #[arg(long = "exclude")]
    pub exclude: Vec<u64>,
}

pub fn eval(ctx: &Context, mut cfg: RunConfig, args: EvalArgs) -> Result<()> {
    if let Some(m) = args.scale_mode {
        cfg.eval.scale_mode = m;
    }
    if let Some(d) = args.depth_divisor {
        cfg.depth_divisor = d;
    }
    cfg.eval.exclude.extend(args.exclude);
    let gt = numbered_files(&args.gt, &["pfm", "png"])?;
    let pred = numbered_files(&args.pred, &["pfm", "png"])?;
    let keep = |k: &u64| !cfg.eval.exclude.contains(k);
    let mut keys: Vec<u64> = gt.keys().chain(pred.keys()).copied().filter(keep).collect();
    keys.sort_unstable();
    keys.dedup();
    let matched = keys.iter().filter(|k| gt.contains_key(k) && pred.contains_key(k)).count();
    if matched == 0 {
        bail!(
            "no matching frame ids between {} and {}",
            args.gt.display(),
            args.pred.display()
        );
    }
    let divisor = cfg.depth_divisor;
    let inputs: Vec<FrameInput<f64>> = keys
        .iter()
        .map(|&k| {
            let id = frame_name(k);
            let load = |p: Option<&PathBuf>| p.map(|p| load_depth::<f64>(p, divisor)).transpose();
            match (load(gt.get(&k)), load(pred.get(&k))) {
                (Ok(g), Ok(p)) => FrameInput {
                    id,
                    gt: g,
                    pred: p,
                    failure: None,
                },
                (Err(e), _) | (_, Err(e)) => FrameInput::failed(id, e.to_string()),
            }
        })
        .collect();
    let report = evaluate_dataset(inputs, &depthkit::eval::AlignmentConfig {
        scale_mode: cfg.eval.scale_mode,
    })?;
    let csv_path = ctx.path("report.csv");
    write_report_csv(&report, fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?)?;
    let json_path = ctx.path("summary.json");
    let mut json = Vec::new();
    write_summary_json(&report, &mut json)?;
    json.push(b'\n');
    fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    ctx.manifest(&cfg, vec![depthkit::eval::DENSITY_NOTE])?;
    let summary = ReportSummary::from_report(&report);
    eprintln!(
        "evaluated {} frame(s), skipped {}; mean rmse {:.6}, delta1 {:.4}",
        summary.frames, summary.skipped, summary.means.rmse, summary.means.delta1
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene description (JSON); defaults to a sphere in front of a slab
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub cameras: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Samples per ray for the rendered images
    #[arg(long)]
    pub samples: Option<usize>,
    /// Cells per axis of the baked grid
    #[arg(long)]
    pub resolution: Option<usize>,
}

pub fn synth(ctx: &Context, mut cfg: RunConfig, args: SynthArgs) -> Result<()> {
    let s = &mut cfg.synth;
    s.cameras = args.cameras.unwrap_or(s.cameras);
    s.width = args.width.unwrap_or(s.width);
    s.height = args.height.unwrap_or(s.height);
    s.samples = args.samples.unwrap_or(s.samples);
    if let Some(r) = args.resolution {
        s.grid.resolution = [r; 3];
    }
    let spec = match &args.scene {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing scene {}", p.display()))?,
        None => SceneSpec::demo(),
    };
    spec.validate()?;
    let s = &cfg.synth;
    ensure!(s.cameras > 0, "need at least one camera");
    let cams: Vec<Camera<f64>> = ring_cameras(s.cameras, s.distance, s.spread, s.focal, s.width, s.height)?;
    let (ds, grid) = make_dataset(&spec, &cams, s.samples, cfg.seed, &s.grid)?;
    save_dataset(&ds, &ctx.out)?;
    store_grid(&grid, ctx.path("grid.vxg"))?;
    write_json(&ctx.path("scene.json"), &spec)?;
    if spec.removal.is_some() {
        let removed = spec.without_removal();
        let dir = ctx.subdir("depths_removed")?;
        for (id, cam) in ds.ids.iter().zip(&cams) {
            store_depth_pfm(&analytic_depth(&removed, cam), dir.join(format!("{id}.pfm")))?;
        }
    }
    ctx.manifest(&cfg, vec![])?;
    eprintln!("wrote {} frame(s) to {}", ds.len(), ctx.out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Voxel grid file
    #[arg(long)]
    pub grid: PathBuf,
    /// cameras.json with intrinsics, poses, near and far
    #[arg(long)]
    pub cameras: PathBuf,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Jitter sample positions (seeded)
    #[arg(long)]
    pub jitter: bool,
}

pub fn render(ctx: &Context, mut cfg: RunConfig, args: RenderArgs) -> Result<()> {
    cfg.render.samples = args.samples.unwrap_or(cfg.render.samples);
    cfg.render.jitter |= args.jitter;
    ensure!(cfg.render.samples > 0, "samples must be positive");
    let grid: VoxelGrid<f64> = load_grid(&args.grid)?;
    let cams = load_cameras(&args.cameras)?;
    let images = ctx.subdir("images")?;
    let depths = ctx.subdir("depths")?;
    for rec in &cams.frames {
        let cam: Camera<f64> = rec.to_camera()?;
        let (img, depth) = render_image(&grid, &cam, cams.near, cams.far, cfg.render.samples, cfg.render.jitter, cfg.seed)?;
        store_rgb_png(&img, images.join(format!("{}.png", rec.id)))?;
        store_depth_pfm(&depth, depths.join(format!("{}.pfm", rec.id)))?;
    }
    ctx.manifest(&cfg, vec![])?;
    eprintln!("rendered {} view(s)", cams.frames.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory (images/, depths/, masks/, cameras.json)
    #[arg(long)]
    pub data: PathBuf,
    /// Initial grid; otherwise a uniform grid from the configuration
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda_rgb: Option<f64>,
    #[arg(long)]
    pub lambda_depth: Option<f64>,
    #[arg(long)]
    pub lambda_masked: Option<f64>,
    /// Frame index held out of training and used for PSNR
    #[arg(long)]
    pub holdout: Option<usize>,
    #[arg(long)]
    pub log_every: Option<usize>,
    /// Cells per axis of the initial grid
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub init_sigma: Option<f64>,
}

#[derive(Serialize)]
struct TrainRecord<'a> {
    config: &'a depthkit::train::TrainConfig,
    weights: &'a depthkit::train::LossWeights,
    masked_loss: &'static str,
    frames: usize,
}

pub fn train(ctx: &Context, mut cfg: RunConfig, args: TrainArgs) -> Result<()> {
    let t = &mut cfg.train;
    let c = &mut t.config;
    c.iterations = args.iterations.unwrap_or(c.iterations);
    c.rays_per_batch = args.rays.unwrap_or(c.rays_per_batch);
    c.sample_count = args.samples.unwrap_or(c.sample_count);
    c.learning_rate = args.lr.unwrap_or(c.learning_rate);
    c.log_every = args.log_every.unwrap_or(c.log_every);
    if args.holdout.is_some() {
        c.holdout = args.holdout;
    }
    c.seed = cfg.seed;
    t.weights.lambda_rgb = args.lambda_rgb.unwrap_or(t.weights.lambda_rgb);
    t.weights.lambda_depth = args.lambda_depth.unwrap_or(t.weights.lambda_depth);
    t.weights.lambda_masked = args.lambda_masked.unwrap_or(t.weights.lambda_masked);
    if let Some(r) = args.resolution {
        t.resolution = [r; 3];
    }
    t.init_sigma = args.init_sigma.unwrap_or(t.init_sigma);

    let ds: SceneDataset<f64> = load_dataset(&args.data, cfg.depth_divisor)?;
    let init = match &args.init {
        Some(p) => load_grid(p)?,
        None => {
            let bounds = Aabb::new(Vec3::from_array(t.bounds_min), Vec3::from_array(t.bounds_max))?;
            VoxelGrid::filled(t.resolution, bounds, t.init_sigma, [t.init_color; 3])?
        }
    };
    store_grid(&init, ctx.path("grid_init.vxg"))?;
    let (grid, log) = depthkit::train::train(&ds, init, &t.config, &t.weights)?;
    store_grid(&grid, ctx.path("grid.vxg"))?;
    log.write_csv(ctx.path("train_log.csv"))?;
    log.write_svg(ctx.path("train_curves.svg"))?;
    write_json(
        &ctx.path("train_config.json"),
        &TrainRecord {
            config: &t.config,
            weights: &t.weights,
            masked_loss: MASKED_LOSS_NOTE,
            frames: ds.len(),
        },
    )?;
    ctx.manifest(&cfg, vec![MASKED_LOSS_NOTE])?;
    if let Some(last) = log.entries.last() {
        eprintln!("iteration {}: total loss {:.6}, hold-out psnr {}", last.iter, last.total, last.psnr_holdout);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct InpaintArgs {
    /// Single depth map to fill (.pfm or 16-bit .png)
    #[arg(long, conflicts_with = "data")]
    pub depth: Option<PathBuf>,
    /// Mask PNG (white = fill)
    #[arg(long, requires = "depth")]
    pub mask: Option<PathBuf>,
    /// Optional RGB image filled under the same mask
    #[arg(long, requires = "depth")]
    pub image: Option<PathBuf>,
    /// Fill every frame of a dataset directory instead
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

fn stem(p: &Path) -> String {
    p.file_stem().and_then(|s| s.to_str()).unwrap_or("output").to_string()
}

pub fn inpaint(ctx: &Context, mut cfg: RunConfig, args: InpaintArgs) -> Result<()> {
    cfg.inpaint.tolerance = args.tolerance.unwrap_or(cfg.inpaint.tolerance);
    if args.max_iterations.is_some() {
        cfg.inpaint.max_iterations = args.max_iterations;
    }
    let ic = cfg.inpaint;
    match (&args.depth, &args.data) {
        (Some(depth_path), None) => {
            let depth = load_depth::<f64>(depth_path, cfg.depth_divisor)?;
            let mask = match &args.mask {
                Some(p) => load_mask_png(p)?,
                None => depthkit::depth_io::Mask::empty(depth.width(), depth.height()),
            };
            let filled = inpaint_depth(&depth, &mask, &ic)?;
            store_depth_pfm(&filled, ctx.path(&format!("{}.pfm", stem(depth_path))))?;
            if let Some(img_path) = &args.image {
                let img = load_rgb_png::<f64>(img_path)?;
                store_rgb_png(&inpaint_rgb(&img, &mask, &ic)?, ctx.path(&format!("{}.png", stem(img_path))))?;
            }
        }
        (None, Some(dir)) => {
            let mut ds: SceneDataset<f64> = load_dataset(dir, cfg.depth_divisor)?;
            for i in 0..ds.len() {
                ds.depths[i] = inpaint_depth(&ds.depths[i], &ds.masks[i], &ic)
                    .with_context(|| format!("frame {}", ds.ids[i]))?;
                ds.images[i] = inpaint_rgb(&ds.images[i], &ds.masks[i], &ic)
                    .with_context(|| format!("frame {}", ds.ids[i]))?;
            }
            save_dataset(&ds, &ctx.out)?;
        }
        _ => bail!("give either --depth (with --mask) or --data"),
    }
    ctx.manifest(&cfg, vec!["harmonic fill; color targets are a proxy for learned inpainting"])?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// summary.json written by `eval`
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// train_log.csv written by `train`
    #[arg(long)]
    pub log: Option<PathBuf>,
}

pub fn report(ctx: &Context, cfg: RunConfig, args: ReportArgs) -> Result<()> {
    ensure!(args.summary.is_some() || args.log.is_some(), "give --summary and/or --log");
    if let Some(p) = &args.summary {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        let means = &v["means"];
        let mut table = String::from("metric    mean\n");
        for key in ["rmse", "delta1", "delta2", "delta3", "log10", "density", "n_valid"] {
            table += &format!("{key:<9} {}\n", means[key]);
        }
        table += &format!("frames    {}\nskipped   {}\n", v["frames"], v["skipped"]);
        fs::write(ctx.path("report.txt"), &table)?;
        print!("{table}");
    }
    if let Some(p) = &args.log {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let log = TrainingLog::<f64>::from_csv(&text)?;
        log.write_svg(ctx.path("train_curves.svg"))?;
    }
    ctx.manifest(&cfg, vec![])?;
    Ok(())
}
