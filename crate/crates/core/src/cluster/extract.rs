use std::collections::BTreeMap;

use super::CondensedTree;

/// Stability of every cluster: the sum over the rows leaving it of
/// `(lambda - birth) * size`.
pub fn stabilities(tree: &CondensedTree) -> BTreeMap<usize, f64> {
    let mut birth: BTreeMap<usize, f64> = BTreeMap::new();
    birth.insert(tree.root(), 0.0);
    for e in tree.edges.iter().filter(|e| tree.is_cluster(e.child)) {
        birth.insert(e.child, e.lambda);
    }
    let mut stability: BTreeMap<usize, f64> = birth.keys().map(|&c| (c, 0.0)).collect();
    for e in &tree.edges {
        let b = birth[&e.parent];
        *stability.get_mut(&e.parent).expect("parent is a cluster") +=
            (e.lambda - b) * e.size as f64;
    }
    stability
}

/// Excess-of-mass selection.
///
/// Walking from the leaves up, a cluster is kept when its own stability is at
/// least the best total its descendants can offer; otherwise it passes that
/// total up. The root only counts when it has no child clusters at all (and
/// holds at least `min_cluster_size` points), in which case it is the single
/// selected cluster.
pub fn select_clusters(tree: &CondensedTree) -> Vec<usize> {
    let own = stabilities(tree);
    let root = tree.root();
    let clusters = tree.clusters();
    if clusters.len() == 1 {
        return if tree.n_points >= tree.min_cluster_size && tree.n_points > 0 {
            vec![root]
        } else {
            Vec::new()
        };
    }
    let mut best = own.clone();
    let mut selected: BTreeMap<usize, bool> = BTreeMap::new();
    // Children carry larger ids than their parents.
    for &c in clusters.iter().rev().filter(|&&c| c != root) {
        let children = tree.child_clusters(c);
        let subtree: f64 = children.iter().map(|ch| best[ch]).sum();
        if subtree > own[&c] {
            selected.insert(c, false);
            best.insert(c, subtree);
        } else {
            selected.insert(c, true);
            let mut stack = children;
            while let Some(d) = stack.pop() {
                selected.insert(d, false);
                stack.extend(tree.child_clusters(d));
            }
        }
    }
    selected
        .into_iter()
        .filter(|&(_, s)| s)
        .map(|(c, _)| c)
        .collect()
}

/// Cluster id for each point: the selected cluster it descends from, if any.
pub fn point_assignments(tree: &CondensedTree, selected: &[usize]) -> Vec<Option<usize>> {
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &tree.edges {
        parent.insert(e.child, e.parent);
    }
    if selected.contains(&tree.root()) {
        return vec![Some(tree.root()); tree.n_points];
    }
    (0..tree.n_points)
        .map(|p| {
            let mut cur = parent.get(&p).copied();
            while let Some(c) = cur {
                if selected.contains(&c) {
                    return Some(c);
                }
                cur = parent.get(&c).copied();
            }
            None
        })
        .collect()
}
