use crate::error::{Error, Result};

const MIN_NORM: f64 = 1e-12;

/// Unit-norm appearance vector. Always normalized on construction, so
/// similarity downstream is a plain dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// Normalizes `raw` to unit L2 norm.
    pub fn new(raw: &[f64]) -> Result<Self> {
        normalize(raw)
    }

    /// Like [`Embedding::new`], also checking the dimension.
    pub fn with_dim(raw: &[f64], dim: usize) -> Result<Self> {
        if raw.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: raw.len(),
            });
        }
        normalize(raw)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

pub fn normalize(raw: &[f64]) -> Result<Embedding> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < MIN_NORM {
        return Err(Error::ZeroNorm);
    }
    Ok(Embedding(raw.iter().map(|v| v / norm).collect()))
}

/// Cosine similarity of two unit embeddings, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    Ok(a.dot(b)?.clamp(-1.0, 1.0))
}
