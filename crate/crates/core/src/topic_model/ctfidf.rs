use std::collections::BTreeMap;

use crate::prep::CleanDocument;

pub type TermScores = BTreeMap<String, f64>;

/// Class-based TF-IDF.
///
/// Every class's documents are concatenated into one bag of tokens. For term
/// `t` in class `c`: `tf(t, c) * ln(1 + A / f(t))`, where `A` is the mean
/// token count per class and `f(t)` the number of occurrences of `t` over all
/// classes. The outlier label `-1` is ignored. Classes without tokens get an
/// empty map and a warning.
pub fn ctfidf(
    classes: &BTreeMap<i64, Vec<&CleanDocument>>,
) -> (BTreeMap<i64, TermScores>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut tf: BTreeMap<i64, BTreeMap<&str, usize>> = BTreeMap::new();
    for (&label, docs) in classes.iter().filter(|(l, _)| **l >= 0) {
        let counts = tf.entry(label).or_default();
        for t in docs.iter().flat_map(|d| d.tokens.iter()) {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if tf.is_empty() {
        return (BTreeMap::new(), warnings);
    }
    let mut total: BTreeMap<&str, usize> = BTreeMap::new();
    let mut token_count = 0usize;
    for counts in tf.values() {
        for (&t, &c) in counts {
            *total.entry(t).or_default() += c;
            token_count += c;
        }
    }
    let mean_tokens = token_count as f64 / tf.len() as f64;

    let scores = tf
        .into_iter()
        .map(|(label, counts)| {
            if counts.is_empty() {
                warnings.push(format!(
                    "cluster {label} has no tokens; its term map is empty"
                ));
            }
            let terms = counts
                .into_iter()
                .map(|(t, c)| {
                    (
                        t.to_string(),
                        c as f64 * (1.0 + mean_tokens / total[t] as f64).ln(),
                    )
                })
                .collect();
            (label, terms)
        })
        .collect();
    (scores, warnings)
}

/// Highest-scoring terms, ties broken by the term itself.
pub fn top_terms(scores: &TermScores, n: usize) -> Vec<String> {
    let mut ranked: Vec<(&String, &f64)> = scores.iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().take(n).map(|(t, _)| t.clone()).collect()
}
