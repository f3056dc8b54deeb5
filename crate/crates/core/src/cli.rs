//! Command-line frontend.
//!
//! Data goes to files or stdout; summaries and diagnostics go to stderr.
//! Exit codes: 0 success, 2 usage, 3 file I/O, 4 malformed input,
//! 5 embedding join or dimension errors, 6 tracker or configuration
//! errors, 7 evaluation errors, 8 scenario generation errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{ArgAction, Args, Parser, Subcommand};

use crate::assoc::Tracker;
use crate::config::{self, SecondStagePool, TrackerConfig};
use crate::error::Error;
use crate::io;
use crate::metrics::{self, EvalReport};
use crate::synth::{self, Occlusion, ScenarioSpec, ScoreDip};

#[derive(Debug, Parser)]
#[command(name = "reidtrack", version, about = "Appearance-only multi-object tracker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track detections and write a results file.
    Track(TrackArgs),
    /// Score a results file against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic scenario (det.txt, emb.txt, gt.txt).
    Synth(SynthArgs),
    /// Apply per-class greedy NMS to a detection file.
    Nms(NmsArgs),
}

#[derive(Debug, Args)]
pub struct TrackerFlags {
    #[arg(long, default_value_t = config::DEFAULT_HIGH_THRESH)]
    pub high_thresh: f64,
    #[arg(long, default_value_t = config::DEFAULT_LOW_THRESH)]
    pub low_thresh: f64,
    #[arg(long, default_value_t = config::DEFAULT_TAU)]
    pub tau: usize,
    #[arg(long, default_value_t = config::DEFAULT_SIM_GATE, allow_negative_numbers = true)]
    pub sim_gate_high: f64,
    #[arg(long, default_value_t = config::DEFAULT_SIM_GATE, allow_negative_numbers = true)]
    pub sim_gate_low: f64,
    #[arg(long, default_value_t = config::DEFAULT_MAX_LOST_AGE)]
    pub max_lost_age: u32,
    /// Score needed to start a track [default: --high-thresh]
    #[arg(long)]
    pub min_init_score: Option<f64>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub per_class: bool,
    /// Match only low-band detections in the second stage.
    #[arg(long)]
    pub bytetrack_stage2: bool,
    /// Required embedding dimension [default: taken from the first record]
    #[arg(long)]
    pub embedding_dim: Option<usize>,
}

impl TrackerFlags {
    pub fn to_config(&self) -> TrackerConfig {
        TrackerConfig {
            high_thresh: self.high_thresh,
            low_thresh: self.low_thresh,
            sim_gate_high: self.sim_gate_high,
            sim_gate_low: self.sim_gate_low,
            tau: self.tau,
            max_lost_age: self.max_lost_age,
            min_init_score: self.min_init_score.unwrap_or(self.high_thresh),
            per_class: self.per_class,
            embedding_dim: self.embedding_dim,
            second_stage: if self.bytetrack_stage2 {
                SecondStagePool::LowOnly
            } else {
                SecondStagePool::Pooled
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Detection file (frame,-1,x,y,w,h,score,class,-1).
    #[arg(long)]
    pub det: PathBuf,
    /// Embedding file (frame,index,v1,...,vd).
    #[arg(long)]
    pub emb: PathBuf,
    /// Results file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub tracker: TrackerFlags,
    /// Run NMS on each frame before tracking.
    #[arg(long)]
    pub nms: bool,
    #[arg(long, default_value_t = io::DEFAULT_NMS_THRESH)]
    pub nms_thresh: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value_t = metrics::DEFAULT_IOU_GATE)]
    pub iou_gate: f64,
    /// Print one CSV line: mota,motp,fp,fn,idsw,idf1,idp,idr,num_gt,num_pred
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub num_ids: u32,
    #[arg(long, default_value_t = 200)]
    pub num_frames: u32,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Per-coordinate Gaussian noise added to embeddings.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Minimum pairwise cosine distance between identities.
    #[arg(long, default_value_t = 0.8)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    /// Expected clutter detections per frame.
    #[arg(long, default_value_t = 0.0)]
    pub clutter: f64,
    /// Score dip START:END:IDENTITY:SCORE (repeatable).
    #[arg(long)]
    pub dip: Vec<DipArg>,
    /// Full occlusion START:END:IDENTITY (repeatable).
    #[arg(long)]
    pub occlude: Vec<OcclusionArg>,
    #[arg(long, default_value_t = 1920.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1080.0)]
    pub height: f64,
    #[arg(long, default_value_t = config::DEFAULT_LOW_THRESH)]
    pub low_thresh: f64,
    #[arg(long, default_value_t = config::DEFAULT_HIGH_THRESH)]
    pub high_thresh: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn to_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            num_identities: self.num_ids,
            num_frames: self.num_frames,
            embedding_dim: self.dim,
            embed_noise_sigma: self.sigma,
            min_identity_separation: self.separation,
            dropout_prob: self.dropout,
            score_dips: self.dip.iter().map(|d| d.0).collect(),
            occlusions: self.occlude.iter().map(|o| o.0).collect(),
            clutter_rate: self.clutter,
            arena_width: self.width,
            arena_height: self.height,
            low_thresh: self.low_thresh,
            high_thresh: self.high_thresh,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct NmsArgs {
    #[arg(long)]
    pub det: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = io::DEFAULT_NMS_THRESH)]
    pub nms_thresh: f64,
    /// Embedding file to filter alongside the detections.
    #[arg(long, requires = "emb_out")]
    pub emb: Option<PathBuf>,
    /// Where to write the filtered, re-indexed embeddings.
    #[arg(long, requires = "emb")]
    pub emb_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
pub struct DipArg(pub ScoreDip);

impl FromStr for DipArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, identity, score] = parts[..] else {
            return Err(format!("expected START:END:IDENTITY:SCORE, got '{s}'"));
        };
        let int = |v: &str| v.parse::<u32>().map_err(|e| format!("'{v}': {e}"));
        Ok(DipArg(ScoreDip {
            start: int(start)?,
            end: int(end)?,
            identity: int(identity)?,
            score: score.parse().map_err(|e| format!("'{score}': {e}"))?,
        }))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OcclusionArg(pub Occlusion);

impl FromStr for OcclusionArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, identity] = parts[..] else {
            return Err(format!("expected START:END:IDENTITY, got '{s}'"));
        };
        let int = |v: &str| v.parse::<u32>().map_err(|e| format!("'{v}': {e}"));
        Ok(OcclusionArg(Occlusion {
            start: int(start)?,
            end: int(end)?,
            identity: int(identity)?,
        }))
    }
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    match e {
        Error::Io { .. } => 3,
        Error::Parse { .. } | Error::DuplicateEntry { .. } => 4,
        Error::MissingEmbedding { .. }
        | Error::DimensionMismatch { .. }
        | Error::ZeroNorm
        | Error::NonFinite => 5,
        Error::NonMonotonicFrame { .. }
        | Error::EmptyHistory
        | Error::ZeroWeight
        | Error::InvalidConfig(_)
        | Error::InvalidBox { .. }
        | Error::InvalidScore(_) => 6,
        Error::EmptyGt => 7,
        Error::SeparationInfeasible { .. } | Error::InvalidScenario(_) => 8,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    Ok(io::read_text(path)?)
}

fn in_file<T>(path: &Path, r: crate::error::Result<T>) -> anyhow::Result<T> {
    r.with_context(|| path.display().to_string())
}

pub fn track(args: &TrackArgs) -> anyhow::Result<()> {
    let config = args.tracker.to_config();
    let mut tracker = Tracker::new(config)?;
    if args.nms && !(args.nms_thresh > 0.0 && args.nms_thresh <= 1.0) {
        bail!(Error::InvalidConfig(format!("nms threshold {} outside (0, 1]", args.nms_thresh)));
    }

    let dets = in_file(&args.det, io::parse_detections(&read(&args.det)?))?;
    let table = in_file(
        &args.emb,
        io::parse_embeddings(&read(&args.emb)?, args.tracker.embedding_dim),
    )?;
    let mut frames = in_file(&args.emb, io::attach_embeddings(&dets, &table))?;
    if args.nms {
        for f in &mut frames {
            f.detections = io::nms(&f.detections, args.nms_thresh);
        }
    }

    let started = Instant::now();
    let mut outputs = Vec::new();
    for f in &frames {
        outputs.extend(tracker.step(f)?);
    }
    let elapsed = started.elapsed().as_secs_f64();
    io::write_text(&args.out, &io::write_results(&outputs))?;

    let fps = if elapsed > 0.0 {
        frames.len() as f64 / elapsed
    } else {
        f64::INFINITY
    };
    eprintln!(
        "tracks created: {}, outputs: {}, frames: {}, wall time: {:.3} s, {:.1} frames/s",
        tracker.tracks_created(),
        outputs.len(),
        frames.len(),
        elapsed,
        fps
    );
    Ok(())
}

pub fn format_report_row(r: &EvalReport) -> String {
    format!(
        "{:.3} {:.3} {} {} {} {:.3}",
        r.mota, r.motp, r.false_pos, r.false_neg, r.id_switches, r.idf1
    )
}

pub fn format_report_csv(r: &EvalReport) -> String {
    format!(
        "{:.6},{:.6},{},{},{},{:.6},{:.6},{:.6},{},{}",
        r.mota, r.motp, r.false_pos, r.false_neg, r.id_switches, r.idf1, r.idp, r.idr, r.num_gt, r.num_pred
    )
}

pub fn eval(args: &EvalArgs) -> anyhow::Result<String> {
    let gt = in_file(&args.gt, io::parse_gt(&read(&args.gt)?))?;
    let pred = in_file(&args.results, io::parse_results(&read(&args.results)?))?;
    let report = metrics::evaluate(&gt, &pred, args.iou_gate)?;
    Ok(if args.csv {
        format_report_csv(&report)
    } else {
        eprintln!("MOTA MOTP FP FN IDSW IDF1");
        format_report_row(&report)
    })
}

pub fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let scenario = synth::generate(&args.to_spec())?;
    synth::export(&scenario.bundle, &args.out)?;
    let s = &scenario.stats;
    eprintln!(
        "wrote {}: {} true detections, {} clutter, mean cosine perturbation {:.6}",
        args.out.display(),
        s.true_detections,
        s.clutter_detections,
        s.mean_cosine_perturbation
    );
    Ok(())
}

/// Writes kept detections in their original file order, so a threshold
/// that suppresses nothing reproduces the input.
pub fn nms(args: &NmsArgs) -> anyhow::Result<()> {
    if !(args.nms_thresh > 0.0 && args.nms_thresh <= 1.0) {
        bail!(Error::InvalidConfig(format!("nms threshold {} outside (0, 1]", args.nms_thresh)));
    }
    let dets = in_file(&args.det, io::parse_detections(&read(&args.det)?))?;
    let table = match &args.emb {
        Some(p) => Some(in_file(p, io::parse_embeddings(&read(p)?, None))?),
        None => None,
    };

    let mut kept_dets = Vec::new();
    let mut kept_emb = io::EmbeddingTable::new();
    let mut start = 0;
    while start < dets.len() {
        let frame = dets[start].frame;
        let end = start + dets[start..].iter().take_while(|d| d.frame == frame).count();
        let mut kept = io::nms_indices(&dets[start..end], args.nms_thresh);
        kept.sort_unstable();
        for (new_index, &i) in kept.iter().enumerate() {
            kept_dets.push(dets[start + i].clone());
            if let Some(t) = &table {
                let e = t.get(frame, i).ok_or(Error::MissingEmbedding { frame, index: i })?;
                kept_emb.insert(frame, new_index, e.clone())?;
            }
        }
        start = end;
    }

    io::write_text(&args.out, &io::write_detections(&kept_dets))?;
    if let Some(p) = &args.emb_out {
        io::write_text(p, &io::write_embeddings(&kept_emb))?;
    }
    eprintln!("kept {} of {} detections", kept_dets.len(), dets.len());
    Ok(())
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Track(a) => track(a),
        Command::Eval(a) => {
            println!("{}", eval(a)?);
            Ok(())
        }
        Command::Synth(a) => synth(a),
        Command::Nms(a) => nms(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
