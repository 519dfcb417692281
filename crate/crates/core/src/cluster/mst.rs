use serde::{Deserialize, Serialize};

use super::MutualReachability;

/// A spanning-tree edge with `a < b`. `tie` is a secondary ordering key
/// consulted when weights are equal (the raw metric distance for
/// mutual-reachability graphs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    #[serde(default)]
    pub tie: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        Self {
            a,
            b,
            weight,
            tie: 0.0,
        }
    }

    /// Total order used for merging: weight, then tie key, then endpoints.
    pub fn order(&self, other: &Edge) -> std::cmp::Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.tie.total_cmp(&other.tie))
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Prim's algorithm over a complete graph given by `weight`.
///
/// Equal weights are broken by the smaller `(a, b)` pair, so the tree is a
/// pure function of the weights.
pub fn prim(n: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<Edge> {
    prim_keyed(n, |i, j| (weight(i, j), 0.0))
}

/// Prim's algorithm where each edge carries `(weight, tie)`; candidates are
/// compared by weight, then tie, then the `(a, b)` pair.
pub fn prim_keyed(n: usize, key: impl Fn(usize, usize) -> (f64, f64)) -> Vec<Edge> {
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    // Cheapest known connection from the tree to every outside vertex.
    let mut best: Vec<Option<Edge>> = vec![None; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let (w, t) = key(current, v);
            let (a, b) = ordered(current, v);
            let cand = Edge {
                a,
                b,
                weight: w,
                tie: t,
            };
            if best[v].is_none_or(|old| cand.order(&old).is_lt()) {
                best[v] = Some(cand);
            }
        }
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| {
                best[x]
                    .expect("reachable")
                    .order(&best[y].expect("reachable"))
            })
            .expect("vertices remain");
        edges.push(best[next].expect("reachable"));
        in_tree[next] = true;
        current = next;
    }
    edges
}

/// MST of the mutual-reachability graph, ties resolved by raw distance so the
/// result does not depend on input order.
pub fn mst(mreach: &MutualReachability<'_>) -> Vec<Edge> {
    prim_keyed(mreach.len(), |i, j| {
        (mreach.distance(i, j), mreach.metric_distance(i, j))
    })
}

/// Sum of edge weights taken in ascending order, so that two trees with the
/// same weight multiset always produce bit-identical totals.
pub fn total_weight(edges: &[Edge]) -> f64 {
    let mut w: Vec<f64> = edges.iter().map(|e| e.weight).collect();
    w.sort_by(f64::total_cmp);
    w.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let e = prim(2, |_, _| 3.0);
        assert_eq!(e, vec![Edge::new(0, 1, 3.0)]);
    }

    #[test]
    fn equilateral_tie_break() {
        let e = prim(3, |_, _| 1.0);
        let pairs: Vec<(usize, usize)> = e.iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn path_graph() {
        let pos = [0.0f64, 1.0, 3.0, 6.0];
        let e = prim(4, |i: usize, j: usize| (pos[i] - pos[j]).abs());
        let got: Vec<(usize, usize, f64)> = e.iter().map(|e| (e.a, e.b, e.weight)).collect();
        assert_eq!(got, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]);
    }
}
