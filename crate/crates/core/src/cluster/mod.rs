//! Density-based clustering over mutual-reachability distances: core
//! distances, a minimum spanning tree, the condensed cluster tree and
//! excess-of-mass flat extraction. Outliers get label `-1`.

mod condense;
mod distance;
mod extract;
mod mst;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector_space::DocVector;

pub use condense::{
    condense, condense_dendrogram, single_linkage, weight_to_lambda, CondensedEdge, CondensedTree,
    Dendrogram, Merge, LAMBDA_CAP,
};
pub use distance::{core_distances, euclidean, MutualReachability};
pub use extract::{point_assignments, select_clusters, stabilities};
pub use mst::{mst, prim, prim_keyed, total_weight, Edge};

pub const OUTLIER: i64 = -1;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} neighbors requested but only {n} points")]
    NeighborsExceedPoints { k: usize, n: usize },
    #[error("{points} points but {core} core distances")]
    LengthMismatch { points: usize, core: usize },
    #[error("invalid cluster parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    /// Neighborhood size for core distances, counting the point itself.
    /// Defaults to `min_cluster_size`.
    #[serde(default)]
    pub min_samples: Option<usize>,
    #[serde(default)]
    pub metric: Metric,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 15,
            min_samples: None,
            metric: Metric::Euclidean,
        }
    }
}

impl ClusterParams {
    pub fn new(min_cluster_size: usize) -> Self {
        Self {
            min_cluster_size,
            ..Self::default()
        }
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples.unwrap_or(self.min_cluster_size)
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.min_cluster_size < 2 {
            return Err(ClusterError::InvalidParams(
                "min_cluster_size must be at least 2".into(),
            ));
        }
        let ms = self.min_samples();
        if ms < 1 || ms > self.min_cluster_size {
            return Err(ClusterError::InvalidParams(format!(
                "min_samples must lie in [1, {}], got {ms}",
                self.min_cluster_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// One label per input, `-1` for outliers; clusters are `0..K` by
    /// descending size.
    pub labels: Vec<i64>,
    /// Input positions of the points that entered the density hierarchy;
    /// point ids in `condensed_tree` index into this list.
    pub point_index: Vec<usize>,
    pub condensed_tree: Vec<CondensedEdge>,
    pub stabilities: BTreeMap<usize, f64>,
    /// Condensed-tree cluster id behind each dense label.
    pub selected: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Clustering {
    pub fn n_clusters(&self) -> usize {
        self.selected.len()
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == OUTLIER).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_clusters()];
        for &l in self.labels.iter().filter(|&&l| l >= 0) {
            sizes[l as usize] += 1;
        }
        sizes
    }

    fn all_outliers(n: usize, warning: String) -> Self {
        Self {
            labels: vec![OUTLIER; n],
            point_index: Vec::new(),
            condensed_tree: Vec::new(),
            stabilities: BTreeMap::new(),
            selected: Vec::new(),
            warnings: vec![warning],
        }
    }
}

/// Turns a condensed tree into dense labels ordered by descending size
/// (ties: the cluster holding the smaller point index first).
pub fn extract(tree: &CondensedTree) -> Clustering {
    let selected = select_clusters(tree);
    let assignment = point_assignments(tree, &selected);
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (p, a) in assignment.iter().enumerate() {
        if let Some(c) = a {
            members.entry(*c).or_default().push(p);
        }
    }
    let mut order: Vec<(usize, Vec<usize>)> = members.into_iter().collect();
    order.sort_by(|(_, a), (_, b)| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut labels = vec![OUTLIER; tree.n_points];
    for (label, (_, pts)) in order.iter().enumerate() {
        for &p in pts {
            labels[p] = label as i64;
        }
    }
    let mut stab = stabilities(tree);
    stab.remove(&tree.root());
    Clustering {
        labels,
        point_index: (0..tree.n_points).collect(),
        condensed_tree: tree.edges.clone(),
        stabilities: stab,
        selected: order.into_iter().map(|(c, _)| c).collect(),
        warnings: Vec::new(),
    }
}

/// Runs the full hierarchy on raw points.
pub fn cluster_points(
    points: &[Vec<f32>],
    params: &ClusterParams,
) -> Result<Clustering, ClusterError> {
    params.validate()?;
    let n = points.len();
    if n < params.min_cluster_size {
        return Ok(Clustering::all_outliers(
            n,
            format!(
                "{n} points is fewer than min_cluster_size {}; everything is an outlier",
                params.min_cluster_size
            ),
        ));
    }
    // min_samples counts the point itself.
    let k = (params.min_samples() - 1).min(n - 1);
    let core = core_distances(points, k)?;
    let mreach = MutualReachability::new(points, &core)?;
    let tree = condense(n, &mst(&mreach), params.min_cluster_size);
    Ok(extract(&tree))
}

/// Clusters documents on their reduced vectors (full vectors when no
/// reduction was applied). Zero vectors are outliers up front.
pub fn cluster_documents(
    vectors: &[DocVector],
    params: &ClusterParams,
) -> Result<Clustering, ClusterError> {
    params.validate()?;
    let keep: Vec<usize> = (0..vectors.len())
        .filter(|&i| !vectors[i].is_zero())
        .collect();
    let points: Vec<Vec<f32>> = keep
        .iter()
        .map(|&i| {
            vectors[i]
                .reduced
                .clone()
                .unwrap_or_else(|| vectors[i].full.clone())
        })
        .collect();
    let inner = cluster_points(&points, params)?;
    let mut labels = vec![OUTLIER; vectors.len()];
    for (j, &i) in keep.iter().enumerate() {
        labels[i] = inner.labels[j];
    }
    let mut warnings = inner.warnings;
    let zero = vectors.len() - keep.len();
    if zero > 0 {
        warnings.push(format!(
            "{zero} zero-vector documents assigned to the outlier group"
        ));
    }
    Ok(Clustering {
        labels,
        point_index: if inner.condensed_tree.is_empty() && inner.selected.is_empty() {
            Vec::new()
        } else {
            keep
        },
        condensed_tree: inner.condensed_tree,
        stabilities: inner.stabilities,
        selected: inner.selected,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(id: u64, v: Vec<f32>) -> DocVector {
        DocVector {
            post_id: id,
            full: v,
            reduced: None,
        }
    }

    #[test]
    fn param_validation() {
        assert!(ClusterParams::new(1).validate().is_err());
        let p = ClusterParams {
            min_cluster_size: 5,
            min_samples: Some(6),
            metric: Metric::Euclidean,
        };
        assert!(p.validate().is_err());
        assert!(ClusterParams::default().validate().is_ok());
        assert_eq!(ClusterParams::default().min_samples(), 15);
    }

    #[test]
    fn identical_vectors_one_cluster() {
        let vs: Vec<DocVector> = (0..20).map(|i| dv(i, vec![0.5, 0.5])).collect();
        let c = cluster_documents(&vs, &ClusterParams::new(15)).unwrap();
        assert!(c.labels.iter().all(|&l| l == 0));
        assert_eq!(c.outlier_count(), 0);
    }

    #[test]
    fn too_few_points_all_outliers() {
        let vs: Vec<DocVector> = (0..5).map(|i| dv(i, vec![i as f32, 1.0])).collect();
        let c = cluster_documents(&vs, &ClusterParams::new(15)).unwrap();
        assert_eq!(c.labels, vec![-1; 5]);
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn zero_vectors_preassigned_outliers() {
        let mut vs: Vec<DocVector> = (0..10)
            .map(|i| dv(i, vec![1.0 + i as f32 * 0.01, 1.0]))
            .collect();
        vs.push(dv(99, vec![0.0, 0.0]));
        let c = cluster_documents(&vs, &ClusterParams::new(3)).unwrap();
        assert_eq!(c.labels[10], -1);
        assert!(c.labels[..10].iter().all(|&l| l >= 0));
    }

    #[test]
    fn two_blobs() {
        let mut vs = Vec::new();
        for i in 0..12 {
            let off = if i < 6 { 1.0 } else { 50.0 };
            vs.push(dv(i, vec![off + (i % 6) as f32 * 0.1, off]));
        }
        let c = cluster_documents(&vs, &ClusterParams::new(5)).unwrap();
        assert_eq!(c.n_clusters(), 2);
        assert_eq!(c.cluster_sizes(), vec![6, 6]);
        assert_eq!(c.outlier_count(), 0);
        assert_eq!(c.labels[0], 0);
    }
}
