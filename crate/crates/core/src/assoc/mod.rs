//! Appearance-only tracker with a score-banded two-stage cascade.
//!
//! Each frame, detections are split into a high and a low score band.
//! Stage one matches every live track against the high band; stage two
//! matches the tracks left over against the remaining high detections plus
//! the low band (or the low band alone, see [`SecondStagePool`]). Both
//! stages use `1 - cosine(track feature, detection embedding)` as cost and
//! never look at box positions.

mod track;

pub use track::{weighted_feature, Track, TrackState};

use crate::assign::{gate_costs, solve_assignment, CostMatrix, FORBIDDEN};
use crate::config::{SecondStagePool, TrackerConfig};
use crate::detection::{Detection, FrameInput, TrackOutput};
use crate::embedding::cosine_similarity;
use crate::error::{Error, Result};

/// Indices into a detection list, by score band. Order within each band
/// follows the input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreBands {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub discarded: Vec<usize>,
}

pub fn split_by_score(detections: &[Detection], config: &TrackerConfig) -> ScoreBands {
    let mut bands = ScoreBands::default();
    for (i, d) in detections.iter().enumerate() {
        if d.score >= config.high_thresh {
            bands.high.push(i);
        } else if d.score >= config.low_thresh {
            bands.low.push(i);
        } else {
            bands.discarded.push(i);
        }
    }
    bands
}

/// `1 - cosine` between each track's weighted feature and each detection's
/// embedding; class mismatches are [`FORBIDDEN`] when `per_class` is set.
pub fn build_cost_matrix(
    tracks: &[&Track],
    detections: &[&Detection],
    per_class: bool,
) -> Result<CostMatrix> {
    let mut data = Vec::with_capacity(tracks.len() * detections.len());
    for track in tracks {
        for (index, det) in detections.iter().enumerate() {
            let embedding = det.embedding.as_ref().ok_or(Error::MissingEmbedding {
                frame: det.frame,
                index,
            })?;
            if per_class && track.class_id() != det.class_id {
                data.push(FORBIDDEN);
            } else {
                let sim = cosine_similarity(track.weighted_feature(), embedding)?;
                data.push((1.0 - sim).max(0.0));
            }
        }
    }
    Ok(CostMatrix::new(tracks.len(), detections.len(), data))
}

/// What happened in one call to [`Tracker::step`]. Detection indices refer
/// to the frame's input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub bands: ScoreBands,
    /// `(track_id, detection index, cost)` matched in the first stage.
    pub first_stage: Vec<(u32, usize, f64)>,
    pub second_stage: Vec<(u32, usize, f64)>,
    /// `(track_id, detection index)` of tracks started this frame.
    pub spawned: Vec<(u32, usize)>,
    pub removed: Vec<u32>,
    pub outputs: Vec<TrackOutput>,
}

/// Per-sequence tracker state.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u32,
    last_frame: Option<u32>,
    dim: Option<usize>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        let dim = config.embedding_dim;
        Ok(Tracker {
            config,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            dim,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live (non-removed) tracks, ordered by id.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Number of tracks started so far.
    pub fn tracks_created(&self) -> u32 {
        self.next_id - 1
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.last_frame
    }

    /// Processes one frame and returns the tracks matched or born in it,
    /// sorted by id.
    pub fn step(&mut self, input: &FrameInput) -> Result<Vec<TrackOutput>> {
        Ok(self.step_with_report(input)?.outputs)
    }

    pub fn step_with_report(&mut self, input: &FrameInput) -> Result<StepReport> {
        self.check_input(input)?;
        let frame = input.frame;

        let mut report = StepReport::default();

        // Frames skipped in the input count as empty frames.
        if let Some(prev) = self.last_frame {
            for _ in prev + 1..frame {
                self.age_all(&mut report.removed);
            }
        }
        self.last_frame = Some(frame);

        let dets = &input.detections;
        let bands = split_by_score(dets, &self.config);

        let mut det_taken = vec![false; dets.len()];
        let mut track_taken = vec![false; self.tracks.len()];

        let all_tracks: Vec<usize> = (0..self.tracks.len()).collect();
        let first = self.associate(dets, &all_tracks, &bands.high, self.config.sim_gate_high)?;
        for &(ti, di, cost) in &first {
            track_taken[ti] = true;
            det_taken[di] = true;
            report.first_stage.push((self.tracks[ti].id, di, cost));
        }

        let remaining_tracks: Vec<usize> = all_tracks.into_iter().filter(|&t| !track_taken[t]).collect();
        let pool: Vec<usize> = match self.config.second_stage {
            SecondStagePool::Pooled => bands
                .high
                .iter()
                .chain(&bands.low)
                .copied()
                .filter(|&d| !det_taken[d])
                .collect(),
            SecondStagePool::LowOnly => bands.low.clone(),
        };
        let second = self.associate(dets, &remaining_tracks, &pool, self.config.sim_gate_low)?;
        for &(ti, di, cost) in &second {
            track_taken[ti] = true;
            det_taken[di] = true;
            report.second_stage.push((self.tracks[ti].id, di, cost));
        }

        for &(ti, di, _) in first.iter().chain(&second) {
            let d = &dets[di];
            let embedding = d.embedding.clone().expect("checked in check_input");
            self.tracks[ti].mark_matched(frame, d.bbox, d.score, embedding);
        }

        let mut unmatched: Vec<usize> = (0..self.tracks.len()).filter(|&t| !track_taken[t]).collect();
        self.age_subset(&mut unmatched, &mut report.removed);

        for &di in &bands.high {
            let d = &dets[di];
            if det_taken[di] || d.score < self.config.min_init_score {
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            let embedding = d.embedding.clone().expect("checked in check_input");
            self.tracks.push(Track::spawn(
                id,
                frame,
                d.bbox,
                d.score,
                d.class_id,
                embedding,
                self.config.tau,
            ));
            report.spawned.push((id, di));
        }

        self.tracks.retain(|t| t.state != TrackState::Removed);

        report.outputs = self
            .tracks
            .iter()
            .filter(|t| t.frames_since_match == 0 && t.last_frame == frame)
            .map(|t| TrackOutput {
                frame,
                track_id: t.id,
                bbox: t.last_bbox,
                score: t.last_score,
                class_id: t.class_id,
            })
            .collect();
        report.bands = bands;
        Ok(report)
    }

    fn check_input(&mut self, input: &FrameInput) -> Result<()> {
        if let Some(prev) = self.last_frame {
            if input.frame <= prev {
                return Err(Error::NonMonotonicFrame {
                    previous: prev,
                    got: input.frame,
                });
            }
        }
        if input.frame == 0 {
            return Err(Error::NonMonotonicFrame {
                previous: 0,
                got: 0,
            });
        }
        let mut dim = self.dim;
        for (index, d) in input.detections.iter().enumerate() {
            let embedding = d.embedding.as_ref().ok_or(Error::MissingEmbedding {
                frame: input.frame,
                index,
            })?;
            match dim {
                None => dim = Some(embedding.dim()),
                Some(expected) if expected != embedding.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected,
                        found: embedding.dim(),
                    })
                }
                Some(_) => {}
            }
        }
        self.dim = dim;
        Ok(())
    }

    /// Gated assignment between a subset of tracks and a subset of
    /// detections. Returns `(track index, detection index, cost)`.
    fn associate(
        &self,
        dets: &[Detection],
        track_idx: &[usize],
        det_idx: &[usize],
        sim_gate: f64,
    ) -> Result<Vec<(usize, usize, f64)>> {
        if track_idx.is_empty() || det_idx.is_empty() {
            return Ok(Vec::new());
        }
        let tracks: Vec<&Track> = track_idx.iter().map(|&t| &self.tracks[t]).collect();
        let candidates: Vec<&Detection> = det_idx.iter().map(|&d| &dets[d]).collect();
        let costs = build_cost_matrix(&tracks, &candidates, self.config.per_class)?;
        let gated = gate_costs(&costs, 1.0 - sim_gate);
        let result = solve_assignment(&gated);
        Ok(result
            .matches
            .into_iter()
            .map(|(r, c)| (track_idx[r], det_idx[c], gated.get(r, c)))
            .collect())
    }

    fn age_all(&mut self, removed: &mut Vec<u32>) {
        let mut all: Vec<usize> = (0..self.tracks.len()).collect();
        self.age_subset(&mut all, removed);
        self.tracks.retain(|t| t.state != TrackState::Removed);
    }

    fn age_subset(&mut self, idx: &mut Vec<usize>, removed: &mut Vec<u32>) {
        for &t in idx.iter() {
            let track = &mut self.tracks[t];
            if track.mark_missed(self.config.max_lost_age) == TrackState::Removed {
                removed.push(track.id);
            }
        }
        idx.clear();
    }
}

/// Runs a fresh tracker over `frames` and returns all outputs sorted by
/// `(frame, track_id)`.
pub fn run_sequence(frames: &[FrameInput], config: &TrackerConfig) -> Result<Vec<TrackOutput>> {
    let mut tracker = Tracker::new(config.clone())?;
    let mut out = Vec::new();
    for input in frames {
        out.extend(tracker.step(input)?);
    }
    Ok(out)
}
