use crate::error::{Error, Result};

pub const DEFAULT_HIGH_THRESH: f64 = 0.84;
pub const DEFAULT_LOW_THRESH: f64 = 0.3;
pub const DEFAULT_SIM_GATE: f64 = 0.5;
pub const DEFAULT_TAU: usize = 30;
pub const DEFAULT_MAX_LOST_AGE: u32 = 30;

/// Which detections compete for the tracks left over after the first stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondStagePool {
    /// Unmatched high-band detections together with the low band.
    #[default]
    Pooled,
    /// Low-band detections only (the original ByteTrack cascade).
    LowOnly,
}

/// Tracker thresholds and windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Scores `>= high_thresh` form the high band.
    pub high_thresh: f64,
    /// Scores in `[low_thresh, high_thresh)` form the low band; below is discarded.
    pub low_thresh: f64,
    /// Minimum cosine similarity accepted in the first stage.
    pub sim_gate_high: f64,
    /// Minimum cosine similarity accepted in the second stage.
    pub sim_gate_low: f64,
    /// Number of recent matches combined into a track's weighted feature.
    pub tau: usize,
    /// Frames a track may go unmatched before removal.
    pub max_lost_age: u32,
    /// Unmatched high-band detections at or above this score start tracks.
    pub min_init_score: f64,
    /// Only associate tracks and detections of the same class.
    pub per_class: bool,
    /// Expected embedding dimension; `None` adopts the first one seen.
    pub embedding_dim: Option<usize>,
    pub second_stage: SecondStagePool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            high_thresh: DEFAULT_HIGH_THRESH,
            low_thresh: DEFAULT_LOW_THRESH,
            sim_gate_high: DEFAULT_SIM_GATE,
            sim_gate_low: DEFAULT_SIM_GATE,
            tau: DEFAULT_TAU,
            max_lost_age: DEFAULT_MAX_LOST_AGE,
            min_init_score: DEFAULT_HIGH_THRESH,
            per_class: true,
            embedding_dim: None,
            second_stage: SecondStagePool::Pooled,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.low_thresh) || !unit.contains(&self.high_thresh) {
            return Err(Error::InvalidConfig(
                "score thresholds must lie in [0, 1]".into(),
            ));
        }
        // low == high is allowed and leaves the low band empty
        if self.low_thresh > self.high_thresh {
            return Err(Error::InvalidConfig(format!(
                "low_thresh ({}) must not exceed high_thresh ({})",
                self.low_thresh, self.high_thresh
            )));
        }
        let sim = -1.0..=1.0;
        if !sim.contains(&self.sim_gate_high) || !sim.contains(&self.sim_gate_low) {
            return Err(Error::InvalidConfig(
                "similarity gates must lie in [-1, 1]".into(),
            ));
        }
        if self.tau == 0 {
            return Err(Error::InvalidConfig("tau must be >= 1".into()));
        }
        if !unit.contains(&self.min_init_score) {
            return Err(Error::InvalidConfig(
                "min_init_score must lie in [0, 1]".into(),
            ));
        }
        if self.embedding_dim.is_some_and(|d| d < 2) {
            return Err(Error::InvalidConfig("embedding_dim must be >= 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = TrackerConfig::default();
        c.validate().unwrap();
        assert_eq!(c.high_thresh, 0.84);
        assert_eq!(c.low_thresh, 0.3);
        assert_eq!(c.min_init_score, c.high_thresh);
    }

    #[test]
    fn rejects_inverted_band() {
        let c = TrackerConfig {
            low_thresh: 0.9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = TrackerConfig {
            low_thresh: 0.84,
            ..Default::default()
        };
        c.validate().unwrap();
        let c = TrackerConfig {
            tau: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
