//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so_insight::cluster::CondensedTree;
use so_insight::ingest::{PostMeta, PostType};
use so_insight::prep::CleanDocument;
use so_insight::summarize::{rank, Candidate, SentenceEmbedder};
use so_insight::topic_model::Topic;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0f32..10.0)).collect())
        .collect()
}

pub fn dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// k-th nearest neighbor distance by full sort.
pub fn brute_core(points: &[Vec<f32>], k: usize) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<f64> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| dist(p, q))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if k == 0 {
                0.0
            } else {
                d[k - 1]
            }
        })
        .collect()
}

/// Decodes a Prüfer sequence into tree edges.
fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Minimum spanning-tree weight by enumerating every labeled tree on `n`
/// vertices (n^(n-2) of them). Totals are summed over sorted weights.
pub fn exhaustive_mst_weight(n: usize, w: &dyn Fn(usize, usize) -> f64) -> f64 {
    assert!(n >= 2);
    if n == 2 {
        return w(0, 1);
    }
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut best = f64::INFINITY;
    loop {
        let mut weights: Vec<f64> = prufer_edges(&seq, n)
            .iter()
            .map(|&(a, b)| w(a, b))
            .collect();
        weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total: f64 = weights.into_iter().sum();
        if total < best {
            best = total;
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == len {
                return best;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Stability of every cluster computed straight from the definition:
/// sum over points p of the cluster of (lambda_p - lambda_birth), where
/// lambda_p is when p stops belonging to the cluster.
pub fn oracle_stabilities(tree: &CondensedTree) -> std::collections::BTreeMap<usize, f64> {
    use std::collections::BTreeMap;
    let mut parent: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for e in &tree.edges {
        parent.insert(e.child, (e.parent, e.lambda));
    }
    let birth = |c: usize| parent.get(&c).map_or(0.0, |&(_, l)| l);
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    let clusters: Vec<usize> = std::iter::once(tree.n_points)
        .chain(
            tree.edges
                .iter()
                .filter(|e| e.child >= tree.n_points)
                .map(|e| e.child),
        )
        .collect();
    for &c in &clusters {
        let mut s = 0.0;
        for p in 0..tree.n_points {
            // Walk p's ancestry; the step whose parent is c gives lambda_p for c.
            let mut node = p;
            while let Some(&(par, lambda)) = parent.get(&node) {
                if par == c {
                    s += lambda - birth(c);
                    break;
                }
                node = par;
            }
        }
        out.insert(c, s);
    }
    out
}

/// Best total stability over all antichains of non-root clusters, and the
/// maximizing set. Returns `None` for the set when the optimum is not
/// unique (within `1e-9` relative).
pub fn brute_force_selection(tree: &CondensedTree) -> (f64, Option<Vec<usize>>) {
    let (best, mut sets) = optimal_selections(tree);
    let unique = if sets.len() == 1 { sets.pop() } else { None };
    (best, unique)
}

/// Best total stability and every antichain (sorted ids) reaching it.
pub fn optimal_selections(tree: &CondensedTree) -> (f64, Vec<Vec<usize>>) {
    let stab = oracle_stabilities(tree);
    let clusters: Vec<usize> = stab
        .keys()
        .copied()
        .filter(|&c| c != tree.n_points)
        .collect();
    let ancestors = |c: usize| {
        let mut out = Vec::new();
        let mut cur = c;
        while let Some(e) = tree.edges.iter().find(|e| e.child == cur) {
            out.push(e.parent);
            cur = e.parent;
        }
        out
    };
    let anc: Vec<Vec<usize>> = clusters.iter().map(|&c| ancestors(c)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_sets: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1u32 << clusters.len()) {
        let chosen: Vec<usize> = (0..clusters.len())
            .filter(|i| mask & (1 << i) != 0)
            .collect();
        let antichain = chosen.iter().all(|&i| {
            chosen
                .iter()
                .all(|&j| i == j || !anc[i].contains(&clusters[j]))
        });
        if !antichain {
            continue;
        }
        let total = selection_total(
            &stab,
            &chosen.iter().map(|&i| clusters[i]).collect::<Vec<_>>(),
        );
        let tol = if best.is_finite() {
            1e-9 * best.abs().max(1.0)
        } else {
            0.0
        };
        if total > best + tol {
            best = total;
            best_sets = vec![chosen.iter().map(|&i| clusters[i]).collect()];
        } else if (total - best).abs() <= tol {
            best_sets.push(chosen.iter().map(|&i| clusters[i]).collect());
        }
    }
    (best, best_sets)
}

pub fn selection_total(stab: &std::collections::BTreeMap<usize, f64>, set: &[usize]) -> f64 {
    let mut v: Vec<f64> = set.iter().map(|c| stab[c]).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.into_iter().sum()
}

pub fn is_antichain(tree: &CondensedTree, set: &[usize]) -> bool {
    set.iter().all(|&c| {
        let mut cur = c;
        while let Some(e) = tree.edges.iter().find(|e| e.child == cur) {
            if set.contains(&e.parent) {
                return false;
            }
            cur = e.parent;
        }
        true
    })
}

/// Cosine similarity written independently of the library.
pub fn oracle_cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Greedy-with-redundancy selection restated as a search problem: among all
/// subsets of at most `k` candidates with no pair above `redundancy`, pick
/// the one whose ascending rank list is lexicographically first, a longer
/// list winning over its own prefix. `ranked` is the candidate order.
pub fn exhaustive_selection(
    vectors: &[Vec<f32>],
    ranked: &[usize],
    k: usize,
    redundancy: f64,
) -> Vec<usize> {
    let m = ranked.len();
    let conflict =
        |a: usize, b: usize| oracle_cosine(&vectors[ranked[a]], &vectors[ranked[b]]) > redundancy;
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn better(a: &[usize], b: &[usize]) -> bool {
        for (x, y) in a.iter().zip(b) {
            if x != y {
                return x < y;
            }
        }
        a.len() > b.len()
    }
    fn rec(
        start: usize,
        m: usize,
        k: usize,
        current: &mut Vec<usize>,
        best: &mut Vec<usize>,
        conflict: &dyn Fn(usize, usize) -> bool,
    ) {
        if better(current, best) {
            *best = current.clone();
        }
        if current.len() == k {
            return;
        }
        for i in start..m {
            if current.iter().all(|&j| !conflict(i, j)) {
                current.push(i);
                rec(i + 1, m, k, current, best, conflict);
                current.pop();
            }
        }
    }
    rec(0, m, k, &mut current, &mut best, &conflict);
    best.into_iter().map(|i| ranked[i]).collect()
}

const WORDS: &[&str] = &[
    "gradle", "build", "emulator", "launch", "fragment", "view", "kotlin", "source", "proguard",
    "crash", "layout", "manifest",
];

pub fn random_sentence(r: &mut impl Rng) -> String {
    let n = r.random_range(3..7);
    (0..n)
        .map(|_| *WORDS.choose(r).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Posts of a few sentences each, with repeated sentences so the redundancy
/// rule has something to reject.
pub fn random_posts(r: &mut impl Rng, posts: usize, max_sentences: usize) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    (0..posts)
        .map(|_| {
            let n = r.random_range(1..=max_sentences);
            (0..n)
                .map(|_| {
                    let s = if !seen.is_empty() && r.random_bool(0.3) {
                        seen.choose(r).unwrap().clone()
                    } else {
                        random_sentence(r)
                    };
                    seen.push(s.clone());
                    format!("{s}.")
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Reference summary: scores from an f64 centroid and an independent
/// cosine, then exhaustive search over redundancy-free subsets.
pub fn oracle_summary(
    docs: &[&CleanDocument],
    emb: &SentenceEmbedder,
    k: usize,
    redundancy: f64,
) -> Vec<(String, u64)> {
    let mut cands = Vec::new();
    for d in docs {
        for (position, text) in d.sentences().enumerate() {
            cands.push(Candidate {
                text,
                source_id: d.post_id,
                position,
            });
        }
    }
    let vectors: Vec<Vec<f32>> = cands.iter().map(|c| emb.embed(c.text)).collect();
    let dim = vectors[0].len();
    let mut centroid = vec![0f64; dim];
    for v in &vectors {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += *x as f64 / vectors.len() as f64;
        }
    }
    let centroid: Vec<f32> = centroid.iter().map(|c| *c as f32).collect();
    let scores: Vec<f64> = vectors
        .iter()
        .map(|v| {
            if v.iter().all(|x| *x == 0.0) {
                -1.0
            } else {
                oracle_cosine(v, &centroid)
            }
        })
        .collect();
    let ranked = rank(&cands, &scores);
    exhaustive_selection(&vectors, &ranked, k, redundancy)
        .into_iter()
        .map(|i| (cands[i].text.to_string(), cands[i].source_id))
        .collect()
}

pub fn meta(id: u64, parent: Option<u64>, score: i64, accepted: bool) -> PostMeta {
    PostMeta {
        id,
        post_type: if parent.is_some() {
            PostType::Answer
        } else {
            PostType::Question
        },
        parent_id: parent,
        accepted,
        score,
    }
}

pub fn topic(member_ids: Vec<u64>) -> Topic {
    Topic {
        topic_id: 1,
        count: member_ids.len(),
        name: String::new(),
        representation: vec![],
        member_ids,
        centroid: vec![],
        map_xy: None,
    }
}
