use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::geometry::BBox;

/// One scored, classed box in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BBox,
    pub score: f64,
    pub class_id: u32,
    pub embedding: Option<Embedding>,
}

impl Detection {
    pub fn new(frame: u32, bbox: BBox, score: f64, class_id: u32) -> Result<Self> {
        if frame == 0 {
            return Err(Error::InvalidConfig("frame index must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        Ok(Detection {
            frame,
            bbox,
            score,
            class_id,
            embedding: None,
        })
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Self {
        self.embedding = Some(embedding);
        self
    }
}

/// All detections of one frame, each carrying an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub frame: u32,
    pub detections: Vec<Detection>,
}

impl FrameInput {
    pub fn new(frame: u32, detections: Vec<Detection>) -> Self {
        FrameInput { frame, detections }
    }

    pub fn empty(frame: u32) -> Self {
        FrameInput {
            frame,
            detections: Vec::new(),
        }
    }
}

/// One row of tracker output: a track matched (or born) in `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub frame: u32,
    pub track_id: u32,
    pub bbox: BBox,
    pub score: f64,
    pub class_id: u32,
}

/// One ground-truth annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct GtEntry {
    pub frame: u32,
    pub identity: u32,
    pub bbox: BBox,
    pub class_id: u32,
}
