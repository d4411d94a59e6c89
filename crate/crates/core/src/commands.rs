//! Command implementations shared by the binary and the examples. Each
//! returns the text to print on stdout.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use crate::config::{CannyParams, GeneratorConfig, PruningConfig, RunConfig, SimConfig};
use crate::error::{Error, Result};
use crate::generator::{buffer_stats, check_prediction, fit_ridge, predict_next};
use crate::io::{
    read_attention_csv, read_buffer_csv, read_pgm, render_report, summary_csv, write_pgm, write_run,
};
use crate::pruning::{
    attention::check_row_stochastic, attention_weights, select_tokens, TokenGrid,
};
use crate::sim::{compute_metrics, run_batch, scene::SyntheticAttention};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Runs a batch and returns the report. With an output directory, traces,
/// the episode index, `summary.csv` and `report.txt` are written there.
pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let text = fs::read_to_string(&args.config)?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(n) = args.episodes {
        cfg.sim.episodes = n;
    }
    if let Some(s) = args.seed {
        cfg.sim.seed = s;
    }
    cfg.validate()?;
    let traces = run_batch(&cfg)?;
    let metrics = compute_metrics(&traces, cfg.cost.c_full)?;
    let report = render_report(&metrics);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.sim.out_dir.clone().map(PathBuf::from));
    if let Some(dir) = out {
        write_run(&dir, &traces)?;
        fs::write(dir.join("summary.csv"), summary_csv(&metrics))?;
        fs::write(dir.join("report.txt"), &report)?;
        log::info!("wrote {} traces to {}", traces.len(), dir.display());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneImageArgs {
    pub image: PathBuf,
    pub attn: Option<PathBuf>,
    pub speed: f64,
    pub mask_out: Option<PathBuf>,
    pub patch_size: usize,
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl PruneImageArgs {
    pub fn new(image: impl Into<PathBuf>, speed: f64) -> Self {
        let p = PruningConfig::default();
        PruneImageArgs {
            image: image.into(),
            attn: None,
            speed,
            mask_out: None,
            patch_size: p.patch_size,
            sigma: p.canny.gaussian_sigma,
            low: p.canny.low_ratio,
            high: p.canny.high_ratio,
        }
    }
}

/// Prunes the tokens of one image and returns the kept indices, one per
/// line. Without an attention matrix, weights are synthesized from patch
/// statistics with the simulator's default projections.
pub fn prune_image(args: &PruneImageArgs) -> Result<String> {
    let cfg = PruningConfig {
        patch_size: args.patch_size,
        canny: CannyParams {
            gaussian_sigma: args.sigma,
            low_ratio: args.low,
            high_ratio: args.high,
            ..CannyParams::default()
        },
        ..PruningConfig::default()
    };
    cfg.validate()?;
    if !(args.speed >= 0.0 && args.speed.is_finite()) {
        return Err(Error::domain(format!(
            "speed must be >= 0, got {}",
            args.speed
        )));
    }
    let img = read_pgm(&fs::read(&args.image)?)?;
    let grid = TokenGrid::for_image(img.width(), img.height(), cfg.patch_size)?;
    let attn = match &args.attn {
        Some(path) => {
            let w = read_attention_csv(File::open(path)?)?;
            if w.nrows() != grid.len() {
                return Err(Error::domain(format!(
                    "attention matrix is {0}x{0} but the image has {1} tokens",
                    w.nrows(),
                    grid.len()
                )));
            }
            check_row_stochastic(&w, 1e-6)?;
            w
        }
        None => {
            let synth = SyntheticAttention::new(&grid, SimConfig::default().projection_seed);
            attention_weights(&synth.inputs(&img, &grid))?
        }
    };
    let sel = select_tokens(&img, &attn, &grid, args.speed, &cfg)?;
    log::info!(
        "kept {} of {} tokens ({} spatial, retain ratio {:.3})",
        sel.kept.len(),
        grid.len(),
        sel.spatial.len(),
        sel.retain_ratio
    );
    if let Some(path) = &args.mask_out {
        write_pgm(&sel.mask.to_image(), BufWriter::new(File::create(path)?))?;
    }
    Ok(sel.kept.iter().map(|i| format!("{i}\n")).collect())
}

const CHANNEL_NAMES: [&str; 6] = ["ax", "ay", "az", "rx", "ry", "rz"];

/// Fits the buffered actions and reports the per-channel line, the
/// next-step prediction and the validity-gate verdict.
pub fn fit_demo(buffer: &PathBuf, lambda: Option<f64>) -> Result<String> {
    let cfg = GeneratorConfig {
        lambda: lambda.unwrap_or(GeneratorConfig::default().lambda),
        ..GeneratorConfig::default()
    };
    cfg.validate()?;
    let buf = read_buffer_csv(File::open(buffer)?)?;
    let model = fit_ridge(&buf, cfg.lambda)?;
    let pred = predict_next(&model, buf.len());
    let (mean, std) = buffer_stats(&buf);
    let mut out = format!(
        "n = {}, lambda = {}\nchannel      slope  intercept  prediction\n",
        buf.len(),
        cfg.lambda
    );
    for c in 0..CHANNEL_NAMES.len() {
        out.push_str(&format!(
            "{:<7} {:>10.6} {:>10.6} {:>11.6}\n",
            CHANNEL_NAMES[c], model.slope[c], model.intercept[c], pred[c]
        ));
    }
    let gripper = buf.last().map_or(0, |a| a.gripper);
    out.push_str(&format!("gripper (copied) {gripper}\n"));
    match check_prediction(&pred, &mean, &std, &cfg, SimConfig::default().v_max_env) {
        None => out.push_str("gate: accepted\n"),
        Some(r) => out.push_str(&format!("gate: rejected ({r:?})\n")),
    }
    Ok(out)
}
