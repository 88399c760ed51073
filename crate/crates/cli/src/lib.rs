//! The `ctxmask` command line: thin wrappers that read grids, call the
//! library and write grids or JSON reports.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags or values), 2 for
//! data errors (unreadable files, mismatched shapes, invalid grids).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use ctxmask::fixtures::{gen_fig4_scenario, gen_gap_line, gen_random};
use ctxmask::io::{decode_btf, decode_pgm, write_btf};
use ctxmask::losses::{context_loss, pixel_loss, LossValue};
use ctxmask::metrics::{evaluate_pair, summarize, Metric, Protocol, Tiling};
use ctxmask::postproc::topological_postprocess;
use ctxmask::{
    betti, critical_mask, distance_transform_sq, euler_characteristic, hard_skeleton, label_components, soft_skeleton,
    Adjacency, AnyGrid, BinaryGrid, LossConfig, Shape, SkeletonMode, DEFAULT_SKELETON_ITERS,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

impl From<ctxmask::Error> for Failure {
    fn from(e: ctxmask::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "ctxmask",
    version,
    about = "Topology-aware segmentation masks, losses and metrics"
)]
struct Cli {
    /// Worker threads for commands that process several files (results do
    /// not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Skeleton of a grid: soft (f32) by default, binary with --hard.
    Skeletonize {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SKELETON_ITERS)]
        iters: usize,
        /// Binarize the input at 0.5 and write a binary skeleton.
        #[arg(long)]
        hard: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Squared Euclidean distance to the nearest foreground pixel (f32;
    /// seed-free grids give f32::MAX everywhere).
    Distmap {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Betti numbers and Euler characteristic (8-adjacency in 2D, 26 in 3D).
    Betti { input: PathBuf },
    /// Critical pixel mask of a prediction against a label; writes
    /// v_gap.btf, v_fp.btf and m.btf.
    Mask {
        prediction: PathBuf,
        label: PathBuf,
        #[arg(long, default_value = "soft", value_parser = parse_mode)]
        mode: SkeletonMode,
        #[arg(long, default_value_t = DEFAULT_SKELETON_ITERS)]
        iters: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Forward value of the context loss (or a plain pixel loss).
    Loss(LossArgs),
    /// Tiled metrics for prediction/label pairs.
    Eval(EvalArgs),
    /// Keep the components of a fine-tuned prediction that overlap the
    /// pretrained prediction.
    Postproc {
        finetuned: PathBuf,
        pretrained: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write synthetic grids.
    #[command(subcommand)]
    Fixture(Fixture),
}

#[derive(Args, Debug)]
struct LossArgs {
    prediction: PathBuf,
    label: PathBuf,
    /// Weight of cross-entropy against Dice within each pixel loss.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    alpha: f64,
    /// Weight of the masked term. Keep gamma < 0.5 so the whole-image term
    /// dominates; values near 1 train on the mask alone.
    #[arg(long, default_value_t = 0.2, value_parser = unit_interval)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_SKELETON_ITERS)]
    iters: usize,
    /// Report the unmasked pixel loss instead of the context loss.
    #[arg(long)]
    pixel_only: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Prediction file; pair each with a --label in the same order.
    #[arg(long)]
    pred: Vec<PathBuf>,
    #[arg(long)]
    label: Vec<PathBuf>,
    /// Directory of predictions; labels are matched by file name.
    #[arg(long, requires = "label_dir", conflicts_with_all = ["pred", "label"])]
    pred_dir: Option<PathBuf>,
    #[arg(long, requires = "pred_dir")]
    label_dir: Option<PathBuf>,
    /// Tiling per metric as METRIC=TILING, e.g. `e0=375x375`,
    /// `betti=slices` (sets e, e0 and e1) or `all=64x64/32x32`.
    /// Metrics: dice, cldice, e, e1, e0, e0_gt, ags.
    #[arg(long, value_parser = parse_patch)]
    patch: Vec<(Vec<Metric>, Tiling)>,
    #[arg(long, default_value_t = DEFAULT_SKELETON_ITERS)]
    iters: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Fixture {
    /// Solid bar label and the same bar with missing columns; writes y.btf
    /// and x.btf.
    GapLine {
        #[arg(long, default_value_t = 7)]
        length: usize,
        #[arg(long, default_value_t = 3)]
        thickness: usize,
        #[arg(long, default_value_t = 3)]
        gap_at: usize,
        #[arg(long, default_value_t = 1)]
        gap_width: usize,
        #[arg(long, default_value = "3x7", value_parser = parse_extents)]
        shape: Extents,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// A curve rendered thin (label and prediction) and thick (second
    /// prediction); writes y.btf, x_thin.btf and x_thick.btf.
    Fig4 {
        #[arg(long, default_value_t = 1.0)]
        thin: f64,
        #[arg(long, default_value_t = 9.0)]
        thick: f64,
        #[arg(long, default_value = "32x64", value_parser = parse_extents)]
        shape: Extents,
        #[arg(long, default_value = "32x32", value_parser = parse_extents)]
        tile: Extents,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Bernoulli grid from a seeded generator.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_extents)]
        shape: Extents,
        #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
        density: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> std::result::Result<SkeletonMode, String> {
    s.parse()
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

/// Grid or tile extents written as `32x32` or `8x8x8`.
#[derive(Clone, Debug)]
struct Extents(Vec<usize>);

fn parse_extents(s: &str) -> std::result::Result<Extents, String> {
    let extents = s
        .split('x')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| format!("`{s}` is not of the form 32x32 or 8x8x8"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if !(2..=3).contains(&extents.len()) || extents.contains(&0) {
        return Err(format!("`{s}` needs 2 or 3 positive extents"));
    }
    Ok(Extents(extents))
}

fn parse_patch(s: &str) -> std::result::Result<(Vec<Metric>, Tiling), String> {
    let (name, tiling) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not of the form METRIC=TILING"))?;
    let metrics = match name {
        "all" => Metric::ALL.to_vec(),
        "betti" => vec![Metric::E, Metric::E0, Metric::E1],
        other => vec![other.parse()?],
    };
    Ok((metrics, tiling.parse()?))
}

fn shape_of(extents: &Extents) -> Outcome<Shape> {
    Shape::new(&extents.0).map_err(|e| Failure::Usage(e.to_string()))
}

/// Reads a BTF file, or a binary PGM when the file starts with `P5`.
fn load(path: &Path) -> Outcome<AnyGrid> {
    let bytes = fs::read(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(b"P5") {
        Ok(decode_pgm(&bytes, path)?.into())
    } else {
        Ok(decode_btf(&bytes, path)?)
    }
}

fn load_pair(prediction: &Path, label: &Path) -> Outcome<(AnyGrid, BinaryGrid)> {
    let x = load(prediction)?;
    let y = load(label)?.to_binary();
    if x.shape() != y.shape() {
        return Err(Failure::Data(format!(
            "{} has shape {:?} but {} has shape {:?}",
            prediction.display(),
            x.shape().extents(),
            label.display(),
            y.shape().extents()
        )));
    }
    Ok((x, y))
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))
}

fn save(grid: impl Into<AnyGrid>, path: &Path) -> Outcome {
    write_btf(&grid.into(), path)?;
    Ok(())
}

fn emit(value: &Value, out: &mut dyn Write) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::Data(format!("cannot write output: {e}")))
}

fn loss_config(alpha: f64, gamma: f64, iters: usize) -> Outcome<LossConfig> {
    let cfg = LossConfig {
        alpha,
        gamma,
        skeleton_iters: iters,
        ..LossConfig::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            match failure {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Data(_) => EXIT_DATA,
            }
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Skeletonize {
            input,
            iters,
            hard,
            out: path,
        } => {
            let grid = load(&input)?;
            let (pixels, max) = if hard {
                let skel = hard_skeleton(&grid.to_binary(), iters);
                let n = skel.count();
                save(skel, &path)?;
                (n, f64::from(u8::from(n > 0)))
            } else {
                let skel = soft_skeleton(&grid.to_probability()?, iters);
                let n = skel.data().iter().filter(|&&v| v > 0.0).count();
                let max = skel.data().iter().fold(0.0f32, |a, &b| a.max(b));
                save(skel, &path)?;
                (n, f64::from(max))
            };
            emit(
                &json!({ "shape": grid.shape(), "iters": iters, "hard": hard, "nonzero": pixels, "max": max }),
                out,
            )
        }
        Command::Distmap { input, out: path } => {
            let seeds = load(&input)?.to_binary();
            let field = distance_transform_sq(&seeds);
            let max_finite = field.data().iter().copied().filter(|&d| d != u64::MAX).max();
            save(field.to_real(), &path)?;
            emit(
                &json!({ "shape": seeds.shape(), "seeds": seeds.count(), "max_finite_sq": max_finite }),
                out,
            )
        }
        Command::Betti { input } => {
            let mask = load(&input)?.to_binary();
            let adjacency = Adjacency::for_shape(mask.shape());
            let b = betti(&mask, adjacency)?;
            emit(
                &json!({
                    "shape": mask.shape(),
                    "adjacency": adjacency,
                    "b0": b.b0,
                    "b1": b.b1,
                    "b2": b.b2,
                    "euler": euler_characteristic(&mask),
                }),
                out,
            )
        }
        Command::Mask {
            prediction,
            label,
            mode,
            iters,
            out_dir,
        } => {
            let cfg = loss_config(0.5, 0.2, iters)?;
            let (x, y) = load_pair(&prediction, &label)?;
            let cm = critical_mask(&x.to_probability()?, &y, &cfg, mode)?;
            create_dir(&out_dir)?;
            let counts = json!({
                "mode": match mode { SkeletonMode::Soft => "soft", SkeletonMode::Binary => "binary" },
                "iters": iters,
                "v_gap": cm.v_gap.count(),
                "v_fp": cm.v_fp.count(),
                "m": cm.m.count(),
            });
            save(cm.v_gap, &out_dir.join("v_gap.btf"))?;
            save(cm.v_fp, &out_dir.join("v_fp.btf"))?;
            save(cm.m, &out_dir.join("m.btf"))?;
            emit(&counts, out)
        }
        Command::Loss(args) => {
            let cfg = loss_config(args.alpha, args.gamma, args.iters)?;
            let (x, y) = load_pair(&args.prediction, &args.label)?;
            let p = x.to_probability()?;
            let value: LossValue = if args.pixel_only {
                pixel_loss(&p, &y, None, &cfg)?
            } else {
                context_loss(&p, &y, &cfg)?
            };
            emit(
                &json!({
                    "loss": if args.pixel_only { "pixel" } else { "context" },
                    "alpha": cfg.alpha,
                    "gamma": cfg.gamma,
                    "total": value.total,
                    "parts": value.parts,
                    "mask_pixels": value.mask_pixels,
                }),
                out,
            )
        }
        Command::Eval(args) => eval(args, cli.threads, out),
        Command::Postproc {
            finetuned,
            pretrained,
            out: path,
        } => {
            let (ft, pre) = load_pair(&finetuned, &pretrained)?;
            let ft = ft.to_binary();
            let adjacency = Adjacency::for_shape(ft.shape());
            let kept = topological_postprocess(&ft, &pre, adjacency)?;
            let conn = adjacency.foreground();
            let report = json!({
                "adjacency": adjacency,
                "components_in": label_components(&ft, conn)?.count,
                "components_kept": label_components(&kept, conn)?.count,
                "pixels_in": ft.count(),
                "pixels_kept": kept.count(),
            });
            save(kept, &path)?;
            emit(&report, out)
        }
        Command::Fixture(fixture) => run_fixture(fixture, out),
    }
}

fn run_fixture(fixture: Fixture, out: &mut dyn Write) -> Outcome {
    match fixture {
        Fixture::GapLine {
            length,
            thickness,
            gap_at,
            gap_width,
            shape,
            out_dir,
        } => {
            let shape = shape_of(&shape)?;
            let (y, x) =
                gen_gap_line(length, thickness, gap_at, gap_width, shape).map_err(|e| Failure::Usage(e.to_string()))?;
            create_dir(&out_dir)?;
            let report = json!({ "shape": shape, "y_pixels": y.count(), "x_pixels": x.count() });
            save(y, &out_dir.join("y.btf"))?;
            save(x, &out_dir.join("x.btf"))?;
            emit(&report, out)
        }
        Fixture::Fig4 {
            thin,
            thick,
            shape,
            tile,
            out_dir,
        } => {
            let shape = shape_of(&shape)?;
            let curve = [(4.0, 4.0), (16.0, 28.0), (28.0, 4.0)];
            let sc =
                gen_fig4_scenario(&curve, thin, thick, shape, tile.0).map_err(|e| Failure::Usage(e.to_string()))?;
            create_dir(&out_dir)?;
            let report = json!({
                "shape": shape,
                "tile": Tiling::tiles(sc.tile.clone()).to_string(),
                "y_pixels": sc.y.count(),
                "x_thick_pixels": sc.x_thick.count(),
            });
            save(sc.y, &out_dir.join("y.btf"))?;
            save(sc.x_thin, &out_dir.join("x_thin.btf"))?;
            save(sc.x_thick, &out_dir.join("x_thick.btf"))?;
            emit(&report, out)
        }
        Fixture::Random {
            seed,
            shape,
            density,
            out: path,
        } => {
            let shape = shape_of(&shape)?;
            let grid = gen_random(seed, shape, density).map_err(|e| Failure::Usage(e.to_string()))?;
            let report = json!({ "shape": shape, "seed": seed, "pixels": grid.count() });
            save(grid, &path)?;
            emit(&report, out)
        }
    }
}

fn is_grid_file(path: &Path) -> bool {
    path.is_file() && matches!(path.extension().and_then(|e| e.to_str()), Some("btf") | Some("pgm"))
}

fn pairs(args: &EvalArgs) -> Outcome<Vec<(PathBuf, PathBuf)>> {
    if let (Some(pred_dir), Some(label_dir)) = (&args.pred_dir, &args.label_dir) {
        let listing =
            fs::read_dir(pred_dir).map_err(|e| Failure::Data(format!("cannot list {}: {e}", pred_dir.display())))?;
        let mut preds: Vec<PathBuf> = listing
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| is_grid_file(p))
            .collect();
        preds.sort();
        if preds.is_empty() {
            return Err(Failure::Data(format!(
                "no .btf or .pgm files in {}",
                pred_dir.display()
            )));
        }
        return preds
            .into_iter()
            .map(|p| {
                let label = label_dir.join(p.file_name().expect("listed files have names"));
                if label.is_file() {
                    Ok((p, label))
                } else {
                    Err(Failure::Data(format!(
                        "no label {} for {}",
                        label.display(),
                        p.display()
                    )))
                }
            })
            .collect();
    }
    if args.pred.is_empty() {
        return Err(Failure::Usage(
            "give --pred/--label pairs or --pred-dir/--label-dir".into(),
        ));
    }
    if args.pred.len() != args.label.len() {
        return Err(Failure::Usage(format!(
            "{} --pred files but {} --label files",
            args.pred.len(),
            args.label.len()
        )));
    }
    Ok(args.pred.iter().cloned().zip(args.label.iter().cloned()).collect())
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn eval(args: EvalArgs, threads: Option<u16>, out: &mut dyn Write) -> Outcome {
    let mut protocol = Protocol {
        skeleton_iters: args.iters,
        ..Protocol::default()
    };
    for (metrics, tiling) in &args.patch {
        for &m in metrics {
            protocol.set(m, tiling.clone());
        }
    }
    let pairs = pairs(&args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.map_or(0, usize::from))
        .build()
        .map_err(|e| Failure::Data(format!("cannot start worker threads: {e}")))?;
    // collect keeps input order whatever the scheduling
    let reports: Vec<Outcome<_>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(pred, label)| {
                let (x, y) = load_pair(pred, label)?;
                Ok(evaluate_pair(&image_id(pred), &x.to_binary(), &y, &protocol)?)
            })
            .collect()
    });
    let summary = summarize(reports.into_iter().collect::<Outcome<Vec<_>>>()?);
    let value: Value = serde_json::to_value(&summary).map_err(|e| Failure::Data(e.to_string()))?;
    match &args.out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&value).map_err(|e| Failure::Data(e.to_string()))?;
            fs::write(path, text + "\n").map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))?;
            emit(
                &json!({ "images": summary.images.len(), "out": path.display().to_string(), "per_image_mean": summary.per_image_mean }),
                out,
            )
        }
        None => emit(&value, out),
    }
}
