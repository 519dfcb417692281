mod common;

use common::*;
use rand::Rng;
use so_insight::ingest::PostMeta;
use so_insight::prep::{normalize, CleanDocument, StopWords};
use so_insight::summarize::{
    summarize_question_answers, summarize_topic_questions, AnswerFilterPolicy, SentenceEmbedder,
    SummaryCorpus, SummaryParams,
};

#[test]
fn topic_summaries_match_exhaustive_search() {
    let stop = StopWords::english();
    for case in 0..60u64 {
        let mut r = rng(1000 + case);
        let n_posts = r.random_range(1..10);
        let texts = random_posts(&mut r, n_posts, 5);
        let docs: Vec<CleanDocument> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| normalize(i as u64 + 1, t, &stop))
            .collect();
        let pool: usize = docs.iter().map(|d| d.sentence_spans.len()).sum();
        assert!(pool <= 50);
        let metas: Vec<PostMeta> = docs
            .iter()
            .map(|d| meta(d.post_id, None, 0, false))
            .collect();
        let corpus = SummaryCorpus::new(&metas, &docs);
        let emb = SentenceEmbedder::fit(&docs, 64, case, stop.clone());
        let k = 1 + (case as usize % 4);
        let redundancy = [0.95, 0.8, 0.5][case as usize % 3];
        let params = SummaryParams {
            k_questions: k,
            redundancy_cos: redundancy,
            ..SummaryParams::new(case)
        };
        let got = summarize_topic_questions(
            &topic(metas.iter().map(|m| m.id).collect()),
            &corpus,
            &emb,
            &params,
        );
        let refs: Vec<&CleanDocument> = docs.iter().collect();
        let want = oracle_summary(&refs, &emb, k, redundancy);
        let got_pairs: Vec<(String, u64)> = got
            .items
            .iter()
            .map(|i| (i.text.clone(), i.source_id))
            .collect();
        assert_eq!(got_pairs, want, "case {case}");
        assert!(got.items.len() <= k);
        assert!(got.items.windows(2).all(|w| w[0].score >= w[1].score));
        for item in &got.items {
            let src = docs.iter().find(|d| d.post_id == item.source_id).unwrap();
            assert!(src.text.contains(&item.text));
            assert!((-1.0..=1.0).contains(&item.score));
        }
    }
}

#[test]
fn answer_summaries_match_exhaustive_search() {
    let stop = StopWords::english();
    for case in 0..40u64 {
        let mut r = rng(5000 + case);
        let n_answers = r.random_range(1..8);
        let texts = random_posts(&mut r, n_answers + 1, 4);
        let docs: Vec<CleanDocument> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| normalize(i as u64 + 1, t, &stop))
            .collect();
        let mut metas = vec![meta(1, None, 0, false)];
        for i in 0..n_answers as u64 {
            metas.push(meta(
                i + 2,
                Some(1),
                r.random_range(-2..6),
                r.random_bool(0.2),
            ));
        }
        let corpus = SummaryCorpus::new(&metas, &docs);
        let policy = AnswerFilterPolicy::for_corpus(&metas, None).unwrap();
        let emb = SentenceEmbedder::fit(&docs, 64, case, stop.clone());
        let k = 1 + (case as usize % 3);
        let params = SummaryParams {
            k_answers: k,
            ..SummaryParams::new(case)
        };
        let got = summarize_question_answers(1, &corpus, &policy, &emb, &params).unwrap();
        let kept: Vec<&CleanDocument> = metas[1..]
            .iter()
            .filter(|m| policy.keeps(m))
            .map(|m| docs.iter().find(|d| d.post_id == m.id).unwrap())
            .collect();
        if kept.is_empty() {
            assert!(got.items.is_empty());
            assert_eq!(got.warnings.len(), 1);
            continue;
        }
        let want = oracle_summary(&kept, &emb, k, 0.95);
        let got_pairs: Vec<(String, u64)> = got
            .items
            .iter()
            .map(|i| (i.text.clone(), i.source_id))
            .collect();
        assert_eq!(got_pairs, want, "case {case}");
    }
}

#[test]
fn scores_rank_like_independent_cosine() {
    let stop = StopWords::english();
    let mut r = rng(77);
    let text = (0..20)
        .map(|_| format!("{}.", random_sentence(&mut r)))
        .collect::<Vec<_>>()
        .join(" ");
    let doc = normalize(1, &text, &stop);
    assert_eq!(doc.sentence_spans.len(), 20);
    let emb = SentenceEmbedder::fit(std::slice::from_ref(&doc), 32, 3, stop);
    let sentences: Vec<&str> = doc.sentences().collect();
    let got = so_insight::summarize::score_sentences(&sentences, &emb);
    let vectors: Vec<Vec<f32>> = sentences.iter().map(|s| emb.embed(s)).collect();
    let mut centroid = vec![0f32; 32];
    for v in &vectors {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x;
        }
    }
    for (i, v) in vectors.iter().enumerate() {
        assert!((got[i] - oracle_cosine(v, &centroid)).abs() < 1e-5);
    }
}

#[test]
fn answer_filter_is_monotone() {
    let mut r = rng(9);
    let answers: Vec<PostMeta> = (0..40)
        .map(|i| meta(i + 2, Some(1), r.random_range(-5..10), r.random_bool(0.15)))
        .collect();
    let refs: Vec<&PostMeta> = answers.iter().collect();
    let mut prev: Option<Vec<u64>> = None;
    for t in 0..12 {
        let p = AnswerFilterPolicy {
            explicit_threshold: Some(t),
            ..AnswerFilterPolicy::from_mean(0.0)
        };
        let kept: Vec<u64> = so_insight::summarize::filter_answers(&refs, &p)
            .iter()
            .map(|a| a.id)
            .collect();
        assert!(answers
            .iter()
            .filter(|a| a.accepted)
            .all(|a| kept.contains(&a.id)));
        if let Some(prev) = &prev {
            assert!(kept.iter().all(|id| prev.contains(id)));
        }
        prev = Some(kept);
    }
}
