use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{DocVector, EmbedError};

/// Dense Gaussian random projection with entries drawn from `N(0, 1/target)`.
#[derive(Debug, Clone)]
pub struct GaussianProjection {
    input_dim: usize,
    target_dim: usize,
    // Row-major, input_dim x target_dim.
    matrix: Vec<f64>,
}

impl GaussianProjection {
    pub fn new(input_dim: usize, target_dim: usize, seed: u64) -> Result<Self, EmbedError> {
        if target_dim == 0 || target_dim >= input_dim {
            return Err(EmbedError::TargetTooLarge {
                target: target_dim,
                input: input_dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (target_dim as f64).sqrt()).expect("positive std");
        let matrix = (0..input_dim * target_dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Ok(Self {
            input_dim,
            target_dim,
            matrix,
        })
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn project(&self, v: &[f32]) -> Vec<f32> {
        debug_assert_eq!(v.len(), self.input_dim);
        let mut out = vec![0f64; self.target_dim];
        for (i, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = &self.matrix[i * self.target_dim..(i + 1) * self.target_dim];
            for (o, m) in out.iter_mut().zip(row) {
                *o += f64::from(x) * m;
            }
        }
        out.into_iter().map(|x| x as f32).collect()
    }
}

/// Fills `reduced` on every vector with its seeded Gaussian projection.
pub fn reduce(
    vectors: &[DocVector],
    target_dim: usize,
    seed: u64,
) -> Result<Vec<DocVector>, EmbedError> {
    if vectors.len() < 2 {
        return Err(EmbedError::TooFewVectors(2));
    }
    let input_dim = vectors[0].full.len();
    if let Some(bad) = vectors.iter().find(|v| v.full.len() != input_dim) {
        return Err(EmbedError::DimensionMismatch {
            id: bad.post_id,
            expected: input_dim,
            found: bad.full.len(),
        });
    }
    let proj = GaussianProjection::new(input_dim, target_dim, seed)?;
    Ok(vectors
        .iter()
        .map(|v| DocVector {
            post_id: v.post_id,
            full: v.full.clone(),
            reduced: Some(proj.project(&v.full)),
        })
        .collect())
}

/// Projects topic centroids to 2-D and scales them uniformly into the unit
/// square, centered. A single centroid, or centroids that all coincide,
/// land on (0.5, 0.5).
pub fn map_coordinates(centroids: &[Vec<f32>], seed: u64) -> Result<Vec<[f64; 2]>, EmbedError> {
    if centroids.is_empty() {
        return Err(EmbedError::TooFewVectors(1));
    }
    let dim = centroids[0].len();
    let raw: Vec<[f64; 2]> = if centroids.len() == 1 || dim <= 2 {
        centroids
            .iter()
            .map(|c| {
                [
                    c.first().copied().unwrap_or(0.0) as f64,
                    c.get(1).copied().unwrap_or(0.0) as f64,
                ]
            })
            .collect()
    } else {
        let proj = GaussianProjection::new(dim, 2, seed)?;
        centroids
            .iter()
            .map(|c| {
                let p = proj.project(c);
                [f64::from(p[0]), f64::from(p[1])]
            })
            .collect()
    };
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &raw {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if span.is_nan() || span <= 0.0 {
        return Ok(vec![[0.5, 0.5]; raw.len()]);
    }
    let mid = [(hi[0] + lo[0]) / 2.0, (hi[1] + lo[1]) / 2.0];
    Ok(raw
        .iter()
        .map(|p| {
            [
                (0.5 + (p[0] - mid[0]) / span).clamp(0.0, 1.0),
                (0.5 + (p[1] - mid[1]) / span).clamp(0.0, 1.0),
            ]
        })
        .collect())
}
