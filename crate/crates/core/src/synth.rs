//! Seeded synthetic scenarios: ground truth, detections and embeddings.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`; Gaussian and Poisson draws use `rand_distr`.
//! The same spec and seed always produce the same scenario.
//!
//! Each identity has a fixed unit "base" embedding. Identities move on
//! straight lines at constant velocity, reflecting off the arena walls,
//! with 40x40 boxes. Every frame each visible identity yields one
//! detection whose embedding is `normalize(base + N(0, sigma^2) noise)`
//! and whose score is 0.95 unless a score dip applies. Clutter adds
//! spurious detections with random embeddings and low-band scores.

use std::f64::consts::TAU;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::config::{DEFAULT_HIGH_THRESH, DEFAULT_LOW_THRESH};
use crate::detection::{Detection, FrameInput, GtEntry, TrackOutput};
use crate::embedding::{cosine_similarity, normalize, Embedding};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::io::{self, EmbeddingTable, SequenceBundle};

pub const BOX_SIZE: f64 = 40.0;
pub const NOMINAL_SCORE: f64 = 0.95;
pub const MAX_SAMPLING_ATTEMPTS: usize = 100_000;
const MIN_SPEED: f64 = 1.0;
const GRID: f64 = 1e6;
const MAX_SPEED: f64 = 4.0;

pub const DET_FILE: &str = "det.txt";
pub const EMB_FILE: &str = "emb.txt";
pub const GT_FILE: &str = "gt.txt";

/// Frames `start..=end` in which `identity`'s score drops to `score`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreDip {
    pub start: u32,
    pub end: u32,
    pub identity: u32,
    pub score: f64,
}

/// Frames `start..=end` in which `identity` produces no detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occlusion {
    pub start: u32,
    pub end: u32,
    pub identity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub num_identities: u32,
    pub num_frames: u32,
    pub embedding_dim: usize,
    pub embed_noise_sigma: f64,
    /// Minimum pairwise cosine distance between base embeddings.
    pub min_identity_separation: f64,
    pub dropout_prob: f64,
    pub score_dips: Vec<ScoreDip>,
    pub occlusions: Vec<Occlusion>,
    /// Expected spurious detections per frame.
    pub clutter_rate: f64,
    pub arena_width: f64,
    pub arena_height: f64,
    /// Score band used for dips and clutter.
    pub low_thresh: f64,
    pub high_thresh: f64,
    pub class_id: u32,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            num_identities: 5,
            num_frames: 200,
            embedding_dim: 16,
            embed_noise_sigma: 0.0,
            min_identity_separation: 0.8,
            dropout_prob: 0.0,
            score_dips: Vec::new(),
            occlusions: Vec::new(),
            clutter_rate: 0.0,
            arena_width: 1920.0,
            arena_height: 1080.0,
            low_thresh: DEFAULT_LOW_THRESH,
            high_thresh: DEFAULT_HIGH_THRESH,
            class_id: 1,
            seed: 0,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidScenario(m.to_string()));
        if self.num_identities == 0 {
            return fail("num_identities must be >= 1");
        }
        if self.embedding_dim < 2 {
            return fail("embedding_dim must be >= 2");
        }
        if !(self.embed_noise_sigma >= 0.0 && self.embed_noise_sigma.is_finite()) {
            return fail("embed_noise_sigma must be finite and >= 0");
        }
        if !(0.0..=2.0).contains(&self.min_identity_separation) {
            return fail("min_identity_separation must lie in [0, 2]");
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return fail("dropout_prob must lie in [0, 1)");
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return fail("clutter_rate must be finite and >= 0");
        }
        if !(self.arena_width > BOX_SIZE && self.arena_height > BOX_SIZE) {
            return fail("arena must be larger than the 40x40 box");
        }
        if !(0.0 <= self.low_thresh && self.low_thresh < self.high_thresh && self.high_thresh <= 1.0) {
            return fail("score band must satisfy 0 <= low < high <= 1");
        }
        for dip in &self.score_dips {
            if !(self.low_thresh..self.high_thresh).contains(&dip.score) {
                return fail("dipped score must lie in [low_thresh, high_thresh)");
            }
            if dip.identity == 0 || dip.identity > self.num_identities || dip.start > dip.end {
                return fail("score dip refers to an unknown identity or an empty range");
            }
        }
        for occ in &self.occlusions {
            if occ.identity == 0 || occ.identity > self.num_identities || occ.start > occ.end {
                return fail("occlusion refers to an unknown identity or an empty range");
            }
        }
        Ok(())
    }

    fn score_at(&self, identity: u32, frame: u32) -> f64 {
        self.score_dips
            .iter()
            .find(|d| d.identity == identity && (d.start..=d.end).contains(&frame))
            .map_or(NOMINAL_SCORE, |d| d.score)
    }

    fn occluded(&self, identity: u32, frame: u32) -> bool {
        self.occlusions
            .iter()
            .any(|o| o.identity == identity && (o.start..=o.end).contains(&frame))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioStats {
    pub true_detections: usize,
    pub clutter_detections: usize,
    /// Mean `1 - cos(observed, base)` over true detections.
    pub mean_cosine_perturbation: f64,
    pub sampling_attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bundle: SequenceBundle,
    /// Base embedding of identity `i + 1` at index `i`.
    pub base_embeddings: Vec<Embedding>,
    pub stats: ScenarioStats,
}

/// Rounds to the six-decimal grid of the text formats, so exported boxes
/// and scores read back bit-identical.
fn quantize(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Embedding {
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(e) = normalize(&raw) {
            return e;
        }
    }
}

fn sample_bases(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Embedding>, usize)> {
    let max_sim = 1.0 - spec.min_identity_separation;
    let mut bases: Vec<Embedding> = Vec::with_capacity(spec.num_identities as usize);
    let mut attempts = 0;
    while bases.len() < spec.num_identities as usize {
        if attempts >= MAX_SAMPLING_ATTEMPTS {
            return Err(Error::SeparationInfeasible { attempts });
        }
        attempts += 1;
        let candidate = random_unit(rng, spec.embedding_dim);
        let separated = bases
            .iter()
            .all(|b| b.dot(&candidate).is_ok_and(|s| s <= max_sim));
        if separated {
            bases.push(candidate);
        }
    }
    Ok((bases, attempts))
}

struct Mover {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

fn reflect(pos: &mut f64, vel: &mut f64, max: f64) {
    if *pos < 0.0 {
        *pos = -*pos;
        *vel = -*vel;
    } else if *pos > max {
        *pos = 2.0 * max - *pos;
        *vel = -*vel;
    }
}

impl Mover {
    fn advance(&mut self, max_x: f64, max_y: f64) {
        self.x += self.vx;
        self.y += self.vy;
        reflect(&mut self.x, &mut self.vx, max_x);
        reflect(&mut self.y, &mut self.vy, max_y);
    }
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (bases, attempts) = sample_bases(spec, &mut rng)?;

    let max_x = spec.arena_width - BOX_SIZE;
    let max_y = spec.arena_height - BOX_SIZE;
    let mut movers: Vec<Mover> = (0..spec.num_identities)
        .map(|_| {
            let speed = rng.random_range(MIN_SPEED..MAX_SPEED);
            let heading = rng.random_range(0.0..TAU);
            Mover {
                x: rng.random_range(0.0..max_x),
                y: rng.random_range(0.0..max_y),
                vx: speed * heading.cos(),
                vy: speed * heading.sin(),
            }
        })
        .collect();

    let noise = Normal::new(0.0, spec.embed_noise_sigma)
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;
    let clutter = if spec.clutter_rate > 0.0 {
        Some(Poisson::new(spec.clutter_rate).map_err(|e| Error::InvalidScenario(e.to_string()))?)
    } else {
        None
    };

    let mut frames = Vec::with_capacity(spec.num_frames as usize);
    let mut gt = Vec::new();
    let mut stats = ScenarioStats {
        sampling_attempts: attempts,
        ..Default::default()
    };
    let mut perturbation_sum = 0.0;

    for frame in 1..=spec.num_frames {
        if frame > 1 {
            for m in &mut movers {
                m.advance(max_x, max_y);
            }
        }
        let mut dets = Vec::new();
        for (k, mover) in movers.iter().enumerate() {
            let identity = k as u32 + 1;
            let bbox = BBox::new(quantize(mover.x), quantize(mover.y), BOX_SIZE, BOX_SIZE)?;
            gt.push(GtEntry {
                frame,
                identity,
                bbox,
                class_id: spec.class_id,
            });
            let dropped = rng.random::<f64>() < spec.dropout_prob;
            if dropped || spec.occluded(identity, frame) {
                continue;
            }
            let base = &bases[k];
            let observed = if spec.embed_noise_sigma > 0.0 {
                let raw: Vec<f64> = base
                    .as_slice()
                    .iter()
                    .map(|v| v + noise.sample(&mut rng))
                    .collect();
                normalize(&raw)?
            } else {
                base.clone()
            };
            perturbation_sum += 1.0 - cosine_similarity(&observed, base)?;
            stats.true_detections += 1;
            dets.push(
                Detection::new(frame, bbox, spec.score_at(identity, frame), spec.class_id)?
                    .with_embedding(observed),
            );
        }
        if let Some(poisson) = &clutter {
            let count = poisson.sample(&mut rng) as usize;
            for _ in 0..count {
                let bbox = BBox::new(
                    quantize(rng.random_range(0.0..max_x)),
                    quantize(rng.random_range(0.0..max_y)),
                    BOX_SIZE,
                    BOX_SIZE,
                )?;
                let score = quantize(rng.random_range(spec.low_thresh..spec.high_thresh))
                    .clamp(spec.low_thresh, spec.high_thresh - 1.0 / GRID);
                let embedding = random_unit(&mut rng, spec.embedding_dim);
                dets.push(Detection::new(frame, bbox, score, spec.class_id)?.with_embedding(embedding));
                stats.clutter_detections += 1;
            }
        }
        dets.shuffle(&mut rng);
        frames.push(FrameInput::new(frame, dets));
    }
    if stats.true_detections > 0 {
        stats.mean_cosine_perturbation = perturbation_sum / stats.true_detections as f64;
    }

    Ok(Scenario {
        bundle: SequenceBundle {
            name: format!("synth-{}", spec.seed),
            frames,
            gt: Some(gt),
            fps: None,
        },
        base_embeddings: bases,
        stats,
    })
}

/// Writes `det.txt`, `emb.txt` and `gt.txt` into `dir`, creating it if needed.
pub fn export(bundle: &SequenceBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut dets = Vec::new();
    let mut table = EmbeddingTable::new();
    for f in &bundle.frames {
        for (index, d) in f.detections.iter().enumerate() {
            let e = d.embedding.clone().ok_or(Error::MissingEmbedding {
                frame: f.frame,
                index,
            })?;
            table.insert(f.frame, index, e)?;
            dets.push(d.clone());
        }
    }
    io::write_text(&dir.join(DET_FILE), &io::write_detections(&dets))?;
    io::write_text(&dir.join(EMB_FILE), &io::write_embeddings(&table))?;
    let gt = bundle.gt.as_deref().unwrap_or(&[]);
    io::write_text(&dir.join(GT_FILE), &io::write_gt(gt))?;
    Ok(())
}

/// Reads a directory written by [`export`]. Only frames with detections
/// appear in `frames`.
pub fn import(dir: &Path) -> Result<SequenceBundle> {
    let dets = io::parse_detections(&io::read_text(&dir.join(DET_FILE))?)?;
    let table = io::parse_embeddings(&io::read_text(&dir.join(EMB_FILE))?, None)?;
    let frames = io::attach_embeddings(&dets, &table)?;
    let gt_path = dir.join(GT_FILE);
    let gt = if gt_path.exists() {
        Some(io::parse_gt(&io::read_text(&gt_path)?)?)
    } else {
        None
    };
    Ok(SequenceBundle {
        name: dir
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        frames,
        gt,
        fps: None,
    })
}

/// Turns ground truth into predictions with exactly one identity switch
/// injected into each of the first `k` identities that span at least two
/// frames. The switch happens at the identity's middle frame, where its
/// remaining frames move to a fresh track id. Returns the predictions and
/// the number of switches injected.
pub fn predictions_with_id_switches(gt: &[GtEntry], k: usize) -> (Vec<TrackOutput>, usize) {
    use std::collections::BTreeMap;

    let mut frames_of: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for g in gt {
        frames_of.entry(g.identity).or_default().push(g.frame);
    }
    let mut next_id = gt.iter().map(|g| g.identity).max().unwrap_or(0) + 1;
    let mut switch_at: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    for (&identity, frames) in &frames_of {
        if switch_at.len() == k {
            break;
        }
        let mut frames = frames.clone();
        frames.sort_unstable();
        if frames.len() >= 2 {
            switch_at.insert(identity, (frames[frames.len() / 2], next_id));
            next_id += 1;
        }
    }
    let mut out: Vec<TrackOutput> = gt
        .iter()
        .map(|g| {
            let track_id = match switch_at.get(&g.identity) {
                Some(&(frame, fresh)) if g.frame >= frame => fresh,
                _ => g.identity,
            };
            TrackOutput {
                frame: g.frame,
                track_id,
                bbox: g.bbox,
                score: 1.0,
                class_id: g.class_id,
            }
        })
        .collect();
    out.sort_by_key(|o| (o.frame, o.track_id));
    (out, switch_at.len())
}
