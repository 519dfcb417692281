use rayon::prelude::*;

use super::ClusterError;

pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = f64::from(*x) - f64::from(*y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from each point to its `k`-th nearest neighbor, the point itself
/// excluded. `k = 0` yields all zeros.
pub fn core_distances(points: &[Vec<f32>], k: usize) -> Result<Vec<f64>, ClusterError> {
    let n = points.len();
    if k > n.saturating_sub(1) {
        return Err(ClusterError::NeighborsExceedPoints { k, n });
    }
    if k == 0 {
        return Ok(vec![0.0; n]);
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(&points[i], &points[j]))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// `max(core[i], core[j], d(i, j))` over a fixed point set.
#[derive(Debug, Clone, Copy)]
pub struct MutualReachability<'a> {
    points: &'a [Vec<f32>],
    core: &'a [f64],
}

impl<'a> MutualReachability<'a> {
    pub fn new(points: &'a [Vec<f32>], core: &'a [f64]) -> Result<Self, ClusterError> {
        if points.len() != core.len() {
            return Err(ClusterError::LengthMismatch {
                points: points.len(),
                core: core.len(),
            });
        }
        Ok(Self { points, core })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn metric_distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
            .max(self.core[i])
            .max(self.core[j])
    }
}
