use crate::embedding::{normalize, Embedding};
use crate::error::{Error, Result};
use crate::geometry::BBox;

const MIN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Active,
    Lost,
    /// Terminal.
    Removed,
}

/// Score-weighted mean of the most recent `tau` embeddings, renormalized.
///
/// `history` is ordered oldest first. Entries older than the last `tau` are
/// ignored.
pub fn weighted_feature(history: &[(Embedding, f64)], tau: usize) -> Result<Embedding> {
    if history.is_empty() || tau == 0 {
        return Err(Error::EmptyHistory);
    }
    let window = &history[history.len().saturating_sub(tau)..];
    let dim = window[0].0.dim();
    let mut sum = vec![0.0; dim];
    let mut weight = 0.0;
    for (embedding, score) in window {
        if embedding.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: embedding.dim(),
            });
        }
        for (acc, v) in sum.iter_mut().zip(embedding.as_slice()) {
            *acc += v * score;
        }
        weight += score;
    }
    if weight < MIN_WEIGHT {
        return Err(Error::ZeroWeight);
    }
    for v in &mut sum {
        *v /= weight;
    }
    normalize(&sum)
}

/// A tracklet: one identity hypothesis and its appearance memory.
#[derive(Debug, Clone)]
pub struct Track {
    pub(crate) id: u32,
    pub(crate) state: TrackState,
    pub(crate) class_id: u32,
    pub(crate) last_bbox: BBox,
    pub(crate) last_score: f64,
    history: Vec<(Embedding, f64)>,
    feature: Embedding,
    pub(crate) frames_since_match: u32,
    pub(crate) start_frame: u32,
    pub(crate) last_frame: u32,
    tau: usize,
}

impl Track {
    pub(crate) fn spawn(
        id: u32,
        frame: u32,
        bbox: BBox,
        score: f64,
        class_id: u32,
        embedding: Embedding,
        tau: usize,
    ) -> Self {
        let mut track = Track {
            id,
            state: TrackState::Active,
            class_id,
            last_bbox: bbox,
            last_score: score,
            history: Vec::with_capacity(tau),
            feature: embedding.clone(),
            frames_since_match: 0,
            start_frame: frame,
            last_frame: frame,
            tau,
        };
        track.push_history(embedding, score);
        track
    }

    pub(crate) fn mark_matched(&mut self, frame: u32, bbox: BBox, score: f64, embedding: Embedding) {
        self.push_history(embedding, score);
        self.state = TrackState::Active;
        self.frames_since_match = 0;
        self.last_bbox = bbox;
        self.last_score = score;
        self.last_frame = frame;
    }

    /// One frame without a match. Returns the new state.
    pub(crate) fn mark_missed(&mut self, max_lost_age: u32) -> TrackState {
        if self.state == TrackState::Removed {
            return self.state;
        }
        self.frames_since_match += 1;
        self.state = if self.frames_since_match > max_lost_age {
            TrackState::Removed
        } else {
            TrackState::Lost
        };
        self.state
    }

    fn push_history(&mut self, embedding: Embedding, score: f64) {
        if self.history.len() == self.tau {
            self.history.remove(0);
        }
        self.history.push((embedding, score));
        // A window whose weights or weighted sum vanish has no direction;
        // fall back to the newest observation.
        self.feature = weighted_feature(&self.history, self.tau)
            .unwrap_or_else(|_| self.history[self.history.len() - 1].0.clone());
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn state(&self) -> TrackState {
        self.state
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn last_bbox(&self) -> &BBox {
        &self.last_bbox
    }

    pub fn last_score(&self) -> f64 {
        self.last_score
    }

    /// `(embedding, score)` pairs of the last matches, oldest first.
    pub fn history(&self) -> &[(Embedding, f64)] {
        &self.history
    }

    pub fn weighted_feature(&self) -> &Embedding {
        &self.feature
    }

    pub fn frames_since_match(&self) -> u32 {
        self.frames_since_match
    }

    pub fn start_frame(&self) -> u32 {
        self.start_frame
    }

    pub fn last_frame(&self) -> u32 {
        self.last_frame
    }
}
