//! Single-linkage dendrogram and its condensed form.
//!
//! Node ids follow the usual convention: points are `0..n`, merges are
//! numbered `n..2n-1` in ascending edge order. In the condensed tree the root
//! cluster is `n` and new clusters are numbered upward in breadth-first order,
//! so a child cluster always has a larger id than its parent.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Edge;

/// Lambda used for zero-weight merges (duplicate points).
pub const LAMBDA_CAP: f64 = 1e12;

pub fn weight_to_lambda(weight: f64) -> f64 {
    if weight > 0.0 {
        (1.0 / weight).min(LAMBDA_CAP)
    } else {
        LAMBDA_CAP
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub weight: f64,
    pub size: usize,
}

/// Merges of the single-linkage hierarchy; merge `k` is node `n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n_points: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        if self.merges.is_empty() {
            0
        } else {
            self.n_points + self.merges.len() - 1
        }
    }

    fn children(&self, node: usize) -> Option<(usize, usize, f64)> {
        node.checked_sub(self.n_points)
            .and_then(|k| self.merges.get(k))
            .map(|m| (m.left, m.right, m.weight))
    }

    fn size(&self, node: usize) -> usize {
        node.checked_sub(self.n_points)
            .and_then(|k| self.merges.get(k))
            .map_or(1, |m| m.size)
    }

    fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r, _)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Builds the single-linkage hierarchy by merging along MST edges in
/// ascending [`Edge::order`].
pub fn single_linkage(n_points: usize, edges: &[Edge]) -> Dendrogram {
    let mut sorted = edges.to_vec();
    sorted.sort_by(Edge::order);
    // Union-find over dendrogram nodes; each component root maps to its node.
    let mut uf = UnionFind::new(2 * n_points.max(1));
    let mut size = vec![1usize; 2 * n_points.max(1)];
    let mut merges = Vec::with_capacity(sorted.len());
    for e in sorted {
        let ra = uf.find(e.a);
        let rb = uf.find(e.b);
        if ra == rb {
            continue;
        }
        let node = n_points + merges.len();
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge {
            left: ra,
            right: rb,
            weight: e.weight,
            size: size[node],
        });
    }
    Dendrogram { n_points, merges }
}

/// One row of the condensed tree: `child` (a point `< n_points` or a
/// cluster id) leaves `parent` at `lambda`, taking `size` points with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub n_points: usize,
    pub min_cluster_size: usize,
    pub edges: Vec<CondensedEdge>,
}

impl CondensedTree {
    pub fn root(&self) -> usize {
        self.n_points
    }

    pub fn is_cluster(&self, id: usize) -> bool {
        id >= self.n_points
    }

    /// All cluster ids, root first, ascending.
    pub fn clusters(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = std::iter::once(self.root())
            .chain(
                self.edges
                    .iter()
                    .filter(|e| self.is_cluster(e.child))
                    .map(|e| e.child),
            )
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn child_clusters(&self, id: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.parent == id && self.is_cluster(e.child))
            .map(|e| e.child)
            .collect()
    }

    pub fn parent_of(&self, id: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.child == id).map(|e| e.parent)
    }

    /// Lambda at which a cluster appears (0 for the root).
    pub fn birth_lambda(&self, id: usize) -> f64 {
        self.edges
            .iter()
            .find(|e| e.child == id)
            .map_or(0.0, |e| e.lambda)
    }

    /// Number of points in a cluster.
    pub fn cluster_size(&self, id: usize) -> usize {
        if id == self.root() {
            return self.n_points;
        }
        self.edges
            .iter()
            .find(|e| e.child == id)
            .map_or(0, |e| e.size)
    }
}

/// Condenses an MST into the cluster tree for `min_cluster_size`.
pub fn condense(n_points: usize, mst: &[Edge], min_cluster_size: usize) -> CondensedTree {
    let dendro = single_linkage(n_points, mst);
    condense_dendrogram(&dendro, min_cluster_size)
}

pub fn condense_dendrogram(dendro: &Dendrogram, min_cluster_size: usize) -> CondensedTree {
    let n = dendro.n_points;
    let mut tree = CondensedTree {
        n_points: n,
        min_cluster_size,
        edges: Vec::new(),
    };
    if dendro.merges.is_empty() {
        return tree;
    }
    let total_nodes = n + dendro.merges.len();
    let mut label = vec![usize::MAX; total_nodes];
    let mut ignore = vec![false; total_nodes];
    let root = dendro.root();
    label[root] = n;
    let mut next_label = n + 1;

    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        let Some((left, right, weight)) = dendro.children(node) else {
            continue;
        };
        queue.push_back(left);
        queue.push_back(right);
        if ignore[node] {
            continue;
        }
        let lambda = weight_to_lambda(weight);
        let parent = label[node];
        let (ls, rs) = (dendro.size(left), dendro.size(right));
        let (left_big, right_big) = (ls >= min_cluster_size, rs >= min_cluster_size);

        let fall_out = |child: usize, tree: &mut CondensedTree, ignore: &mut Vec<bool>| {
            for p in dendro.leaves(child) {
                tree.edges.push(CondensedEdge {
                    parent,
                    child: p,
                    lambda,
                    size: 1,
                });
            }
            mark_subtree(dendro, child, ignore);
        };

        match (left_big, right_big) {
            (true, true) => {
                for (child, size) in [(left, ls), (right, rs)] {
                    label[child] = next_label;
                    tree.edges.push(CondensedEdge {
                        parent,
                        child: next_label,
                        lambda,
                        size,
                    });
                    next_label += 1;
                }
            }
            (true, false) => {
                label[left] = parent;
                fall_out(right, &mut tree, &mut ignore);
            }
            (false, true) => {
                label[right] = parent;
                fall_out(left, &mut tree, &mut ignore);
            }
            (false, false) => {
                fall_out(left, &mut tree, &mut ignore);
                fall_out(right, &mut tree, &mut ignore);
            }
        }
    }
    tree
}

fn mark_subtree(dendro: &Dendrogram, node: usize, ignore: &mut [bool]) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        ignore[x] = true;
        if let Some((l, r, _)) = dendro.children(x) {
            stack.push(l);
            stack.push(r);
        }
    }
}
