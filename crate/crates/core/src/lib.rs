//! Appearance-only multi-object tracking.
//!
//! Detections carry a confidence score and a re-identification embedding.
//! The tracker links them into identities using appearance alone: each
//! track keeps a detection-score-weighted average of its recent embeddings,
//! and every frame is associated in two stages, confident detections first
//! and the remaining plus low-confidence detections second, each solved as
//! a gated linear assignment.
//!
//! Around the tracker sit CLEAR-MOT / IDF1 evaluation ([`metrics`]),
//! MOTChallenge-style text formats and NMS ([`io`]), and a seeded
//! scenario generator ([`synth`]) for testing without a detector.

pub mod assign;
pub mod assoc;
pub mod cli;
pub mod config;
pub mod detection;
pub mod embedding;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod synth;

pub use assoc::{run_sequence, Track, TrackState, Tracker};
pub use config::{SecondStagePool, TrackerConfig};
pub use detection::{Detection, FrameInput, GtEntry, TrackOutput};
pub use embedding::{cosine_similarity, normalize, Embedding};
pub use error::{Error, Result};
pub use geometry::{iou, BBox};
pub use metrics::{evaluate, EvalReport};
