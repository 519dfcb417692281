//! Extractive summaries: the most central problem sentences of a topic's
//! questions, and for each problem the most central solution sentences of
//! the question's well-received answers.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::PostMeta;
use crate::prep::{CleanDocument, StopWords};
use crate::topic_model::Topic;
use crate::vector_space::{cosine, HashedTfIdf};

pub const DEFAULT_K_QUESTIONS: usize = 3;
pub const DEFAULT_K_ANSWERS: usize = 1;
pub const DEFAULT_REDUNDANCY: f64 = 0.95;
pub const DEFAULT_MAX_POOL: usize = 2000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SummarizeError {
    #[error("corpus contains no answers; the answer-score threshold is undefined")]
    NoAnswers,
    #[error("question {0} is not in the corpus")]
    UnknownQuestion(u64),
    #[error("explicit answer-score threshold must be non-negative, got {0}")]
    NegativeThreshold(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummarySubject {
    TopicQuestions,
    QuestionAnswers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryItem {
    pub text: String,
    pub source_id: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub subject: SummarySubject,
    pub subject_id: u64,
    pub items: Vec<SummaryItem>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Summary {
    fn empty(subject: SummarySubject, subject_id: u64, k: usize, warning: String) -> Self {
        Summary {
            subject,
            subject_id,
            items: Vec::new(),
            k,
            warnings: vec![warning],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryParams {
    pub k_questions: usize,
    pub k_answers: usize,
    pub redundancy_cos: f64,
    pub max_pool: usize,
    pub seed: u64,
}

impl SummaryParams {
    pub fn new(seed: u64) -> Self {
        SummaryParams {
            k_questions: DEFAULT_K_QUESTIONS,
            k_answers: DEFAULT_K_ANSWERS,
            redundancy_cos: DEFAULT_REDUNDANCY,
            max_pool: DEFAULT_MAX_POOL,
            seed,
        }
    }
}

/// Sentence vectors from a hashed TF-IDF table fitted on the corpus.
#[derive(Debug, Clone)]
pub struct SentenceEmbedder {
    model: HashedTfIdf,
    stop: StopWords,
}

impl SentenceEmbedder {
    pub fn new(model: HashedTfIdf, stop: StopWords) -> Self {
        SentenceEmbedder { model, stop }
    }

    pub fn fit(docs: &[CleanDocument], dimension: usize, seed: u64, stop: StopWords) -> Self {
        Self::new(HashedTfIdf::fit(docs, dimension, seed), stop)
    }

    pub fn embed(&self, sentence: &str) -> Vec<f32> {
        self.model.embed_text(sentence, &self.stop)
    }
}

/// Cosine of each vector to the pool centroid; zero vectors score -1.
pub fn centroid_scores(vectors: &[Vec<f32>]) -> Vec<f64> {
    let dim = vectors.iter().map(Vec::len).max().unwrap_or(0);
    let mut centroid = vec![0f64; dim];
    for v in vectors {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += f64::from(*x);
        }
    }
    let centroid: Vec<f32> = centroid
        .iter()
        .map(|c| (c / vectors.len().max(1) as f64) as f32)
        .collect();
    vectors
        .iter()
        .map(|v| {
            if v.iter().all(|x| *x == 0.0) {
                -1.0
            } else {
                cosine(v, &centroid)
            }
        })
        .collect()
}

pub fn score_sentences(sentences: &[&str], embedder: &SentenceEmbedder) -> Vec<f64> {
    let vectors: Vec<Vec<f32>> = sentences.iter().map(|s| embedder.embed(s)).collect();
    centroid_scores(&vectors)
}

/// A sentence in a pool: its text, the post it came from and its index among
/// that post's sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate<'a> {
    pub text: &'a str,
    pub source_id: u64,
    pub position: usize,
}

/// Candidate indices by descending score; ties go to the earlier sentence
/// position, then the smaller post id.
pub fn rank(candidates: &[Candidate<'_>], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(candidates[a].position.cmp(&candidates[b].position))
            .then(candidates[a].source_id.cmp(&candidates[b].source_id))
            .then(a.cmp(&b))
    });
    order
}

/// Walks `ranked` and keeps each candidate whose cosine to every kept one is
/// at most `redundancy`, stopping after `k`.
pub fn select_greedy(
    vectors: &[Vec<f32>],
    ranked: &[usize],
    k: usize,
    redundancy: f64,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for &i in ranked {
        if chosen.len() == k {
            break;
        }
        if chosen
            .iter()
            .all(|&j| cosine(&vectors[i], &vectors[j]) <= redundancy)
        {
            chosen.push(i);
        }
    }
    chosen
}

fn pool<'a>(docs: impl IntoIterator<Item = &'a CleanDocument>) -> Vec<Candidate<'a>> {
    docs.into_iter()
        .flat_map(|d| {
            d.sentences()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(move |(position, text)| Candidate {
                    text,
                    source_id: d.post_id,
                    position,
                })
        })
        .collect()
}

fn sample_pool(mut pool: Vec<Candidate<'_>>, max_pool: usize, seed: u64) -> Vec<Candidate<'_>> {
    if pool.len() <= max_pool {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = index::sample(&mut rng, pool.len(), max_pool).into_vec();
    keep.sort_unstable();
    let mut it = keep.into_iter().peekable();
    let mut i = 0;
    pool.retain(|_| {
        let hit = it.peek() == Some(&i);
        if hit {
            it.next();
        }
        i += 1;
        hit
    });
    pool
}

fn summarize_pool(
    candidates: &[Candidate<'_>],
    embedder: &SentenceEmbedder,
    k: usize,
    redundancy: f64,
) -> Vec<SummaryItem> {
    let vectors: Vec<Vec<f32>> = candidates.iter().map(|c| embedder.embed(c.text)).collect();
    let scores = centroid_scores(&vectors);
    let ranked = rank(candidates, &scores);
    select_greedy(&vectors, &ranked, k, redundancy)
        .into_iter()
        .map(|i| SummaryItem {
            text: candidates[i].text.to_string(),
            source_id: candidates[i].source_id,
            score: scores[i],
        })
        .collect()
}

fn subject_seed(seed: u64, subject_id: u64) -> u64 {
    seed ^ subject_id.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Documents and post metadata, indexed for summarization.
#[derive(Debug, Clone)]
pub struct SummaryCorpus<'a> {
    meta: HashMap<u64, &'a PostMeta>,
    docs: HashMap<u64, &'a CleanDocument>,
    answers: BTreeMap<u64, Vec<&'a PostMeta>>,
}

impl<'a> SummaryCorpus<'a> {
    pub fn new(meta: &'a [PostMeta], docs: &'a [CleanDocument]) -> Self {
        let mut answers: BTreeMap<u64, Vec<&PostMeta>> = BTreeMap::new();
        for m in meta.iter().filter(|m| m.is_question()) {
            answers.entry(m.id).or_default();
        }
        for m in meta.iter().filter(|m| m.is_answer()) {
            if let Some(list) = m.parent_id.and_then(|p| answers.get_mut(&p)) {
                list.push(m);
            }
        }
        SummaryCorpus {
            meta: meta.iter().map(|m| (m.id, m)).collect(),
            docs: docs.iter().map(|d| (d.post_id, d)).collect(),
            answers,
        }
    }

    pub fn answers_of(&self, question_id: u64) -> Option<&[&'a PostMeta]> {
        self.answers.get(&question_id).map(Vec::as_slice)
    }

    pub fn all_answers(&self) -> impl Iterator<Item = &'a PostMeta> + '_ {
        self.answers.values().flatten().copied()
    }
}

/// Mean score over every answer; the strict threshold for "above average".
pub fn answer_threshold<'a>(
    answers: impl IntoIterator<Item = &'a PostMeta>,
) -> Result<f64, SummarizeError> {
    let (sum, n) = answers
        .into_iter()
        .filter(|m| m.is_answer())
        .fold((0f64, 0usize), |(s, n), m| (s + m.score as f64, n + 1));
    if n == 0 {
        return Err(SummarizeError::NoAnswers);
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    AcceptedOrAboveMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerFilterPolicy {
    pub mode: FilterMode,
    pub global_mean: f64,
    pub explicit_threshold: Option<i64>,
}

impl AnswerFilterPolicy {
    pub fn from_mean(global_mean: f64) -> Self {
        AnswerFilterPolicy {
            mode: FilterMode::AcceptedOrAboveMean,
            global_mean,
            explicit_threshold: None,
        }
    }

    /// Computes the corpus-wide mean; an explicit threshold replaces it in
    /// comparisons but the mean is still reported.
    pub fn for_corpus<'a>(
        answers: impl IntoIterator<Item = &'a PostMeta>,
        explicit_threshold: Option<i64>,
    ) -> Result<Self, SummarizeError> {
        if let Some(t) = explicit_threshold.filter(|t| *t < 0) {
            return Err(SummarizeError::NegativeThreshold(t));
        }
        let mut policy = Self::from_mean(answer_threshold(answers)?);
        policy.explicit_threshold = explicit_threshold;
        Ok(policy)
    }

    pub fn threshold(&self) -> f64 {
        self.explicit_threshold
            .map_or(self.global_mean, |t| t as f64)
    }

    pub fn keeps(&self, answer: &PostMeta) -> bool {
        match self.mode {
            FilterMode::AcceptedOrAboveMean => {
                answer.accepted || answer.score as f64 > self.threshold()
            }
        }
    }
}

pub fn filter_answers<'a>(
    answers: &[&'a PostMeta],
    policy: &AnswerFilterPolicy,
) -> Vec<&'a PostMeta> {
    answers
        .iter()
        .copied()
        .filter(|a| policy.keeps(a))
        .collect()
}

pub fn summarize_topic_questions(
    topic: &Topic,
    corpus: &SummaryCorpus<'_>,
    embedder: &SentenceEmbedder,
    params: &SummaryParams,
) -> Summary {
    let subject_id = topic.topic_id as u64;
    let k = params.k_questions;
    let questions = topic.member_ids.iter().filter_map(|id| {
        corpus
            .meta
            .get(id)
            .filter(|m| m.is_question())
            .and_then(|_| corpus.docs.get(id).copied())
    });
    let candidates = pool(questions);
    if candidates.is_empty() {
        return Summary::empty(
            SummarySubject::TopicQuestions,
            subject_id,
            k,
            format!("topic {subject_id} has no question sentences to summarize"),
        );
    }
    let candidates = sample_pool(
        candidates,
        params.max_pool,
        subject_seed(params.seed, subject_id),
    );
    Summary {
        subject: SummarySubject::TopicQuestions,
        subject_id,
        items: summarize_pool(&candidates, embedder, k, params.redundancy_cos),
        k,
        warnings: Vec::new(),
    }
}

pub fn summarize_question_answers(
    question_id: u64,
    corpus: &SummaryCorpus<'_>,
    policy: &AnswerFilterPolicy,
    embedder: &SentenceEmbedder,
    params: &SummaryParams,
) -> Result<Summary, SummarizeError> {
    let k = params.k_answers;
    let answers = corpus
        .answers_of(question_id)
        .ok_or(SummarizeError::UnknownQuestion(question_id))?;
    let kept = filter_answers(answers, policy);
    if kept.is_empty() {
        return Ok(Summary::empty(
            SummarySubject::QuestionAnswers,
            question_id,
            k,
            format!(
                "question {question_id}: none of its {} answers is accepted or scores above {}",
                answers.len(),
                policy.threshold()
            ),
        ));
    }
    let candidates = pool(kept.iter().filter_map(|a| corpus.docs.get(&a.id).copied()));
    if candidates.is_empty() {
        return Ok(Summary::empty(
            SummarySubject::QuestionAnswers,
            question_id,
            k,
            format!("question {question_id}: qualifying answers have no text"),
        ));
    }
    let candidates = sample_pool(
        candidates,
        params.max_pool,
        subject_seed(params.seed, question_id),
    );
    Ok(Summary {
        subject: SummarySubject::QuestionAnswers,
        subject_id: question_id,
        items: summarize_pool(&candidates, embedder, k, params.redundancy_cos),
        k,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub text: String,
    pub answer_id: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub text: String,
    pub question_id: u64,
    pub solutions: Vec<Solution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedReport {
    pub topic_id: usize,
    pub problems: Vec<Problem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Pairs every problem sentence of a topic summary with the summary of its
/// source question's answers. Missing solutions become warnings.
pub fn problems_and_solutions(
    topic_summary: &Summary,
    corpus: &SummaryCorpus<'_>,
    policy: Option<&AnswerFilterPolicy>,
    embedder: &SentenceEmbedder,
    params: &SummaryParams,
) -> PairedReport {
    let mut warnings = Vec::new();
    let problems = topic_summary
        .items
        .iter()
        .map(|item| {
            let solutions = match policy {
                None => {
                    warnings.push(format!(
                        "question {}: corpus has no answers",
                        item.source_id
                    ));
                    Vec::new()
                }
                Some(policy) => match summarize_question_answers(
                    item.source_id,
                    corpus,
                    policy,
                    embedder,
                    params,
                ) {
                    Ok(s) => {
                        warnings.extend(s.warnings);
                        s.items
                            .into_iter()
                            .map(|i| Solution {
                                text: i.text,
                                answer_id: i.source_id,
                                score: i.score,
                            })
                            .collect()
                    }
                    Err(e) => {
                        warnings.push(e.to_string());
                        Vec::new()
                    }
                },
            };
            Problem {
                text: item.text.clone(),
                question_id: item.source_id,
                solutions,
            }
        })
        .collect();
    PairedReport {
        topic_id: topic_summary.subject_id as usize,
        problems,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PostType;
    use crate::prep::normalize;

    fn answer(id: u64, parent: u64, score: i64, accepted: bool) -> PostMeta {
        PostMeta {
            id,
            post_type: PostType::Answer,
            parent_id: Some(parent),
            accepted,
            score,
        }
    }

    fn question(id: u64) -> PostMeta {
        PostMeta {
            id,
            post_type: PostType::Question,
            parent_id: None,
            accepted: false,
            score: 0,
        }
    }

    #[test]
    fn threshold_examples() {
        let a: Vec<PostMeta> = [0, 1, 2, 4]
            .iter()
            .enumerate()
            .map(|(i, s)| answer(i as u64 + 1, 9, *s, false))
            .collect();
        assert_eq!(answer_threshold(&a).unwrap(), 1.75);
        let p = AnswerFilterPolicy::from_mean(1.75);
        let kept: Vec<i64> = a.iter().filter(|x| p.keeps(x)).map(|x| x.score).collect();
        assert_eq!(kept, vec![2, 4]);

        assert_eq!(answer_threshold(&[answer(1, 9, 5, false)]).unwrap(), 5.0);
        let same = vec![answer(1, 9, 3, false), answer(2, 9, 3, true)];
        let p = AnswerFilterPolicy::for_corpus(&same, None).unwrap();
        let refs: Vec<&PostMeta> = same.iter().collect();
        assert_eq!(
            filter_answers(&refs, &p)
                .iter()
                .map(|a| a.id)
                .collect::<Vec<_>>(),
            vec![2]
        );
        assert_eq!(
            answer_threshold(&[question(1)]),
            Err(SummarizeError::NoAnswers)
        );
    }

    #[test]
    fn filter_examples() {
        let acc = answer(1, 9, -3, true);
        let at = answer(2, 9, 2, false);
        let p = AnswerFilterPolicy::from_mean(2.0);
        assert!(p.keeps(&acc));
        assert!(!p.keeps(&at));

        let fx = [
            answer(1, 9, 0, true),
            answer(2, 9, 3, false),
            answer(3, 9, 1, false),
        ];
        let refs: Vec<&PostMeta> = fx.iter().collect();
        let kept = filter_answers(&refs, &AnswerFilterPolicy::from_mean(1.33));
        assert_eq!(kept.iter().map(|a| a.id).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn explicit_threshold_overrides_mean() {
        let a = [
            answer(1, 9, 0, false),
            answer(2, 9, 10, false),
            answer(3, 9, 3, false),
        ];
        let p = AnswerFilterPolicy::for_corpus(&a, Some(2)).unwrap();
        assert!((p.global_mean - 13.0 / 3.0).abs() < 1e-12);
        assert!(p.keeps(&a[2]));
        assert_eq!(
            AnswerFilterPolicy::for_corpus(&a, Some(-1)),
            Err(SummarizeError::NegativeThreshold(-1))
        );
    }

    #[test]
    fn scores_trivial_cases() {
        let v = vec![vec![0.6, 0.8]; 3];
        assert!(centroid_scores(&v).iter().all(|s| (s - 1.0).abs() < 1e-6));
        assert_eq!(centroid_scores(&[vec![0.0, 0.0]]), vec![-1.0]);
        assert!((centroid_scores(&[vec![0.0, 2.0]])[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_tie_break() {
        let c = |source_id, position| Candidate {
            text: "x",
            source_id,
            position,
        };
        let cands = [c(5, 1), c(3, 1), c(9, 0), c(1, 2)];
        assert_eq!(rank(&cands, &[0.5, 0.5, 0.5, 0.9]), vec![3, 2, 1, 0]);
    }

    #[test]
    fn redundant_candidates_skipped() {
        let v = vec![vec![1.0, 0.0], vec![1.0, 0.01], vec![0.0, 1.0]];
        assert_eq!(select_greedy(&v, &[0, 1, 2], 2, 0.95), vec![0, 2]);
        assert_eq!(select_greedy(&v, &[0, 1, 2], 3, 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn sampled_pool_keeps_order() {
        let d = normalize(1, &"alpha beta gamma. ".repeat(50), &StopWords::english());
        let p = pool([&d]);
        assert_eq!(p.len(), 50);
        let s = sample_pool(p.clone(), 10, 7);
        assert_eq!(s.len(), 10);
        assert!(s.windows(2).all(|w| w[0].position < w[1].position));
        assert_eq!(s, sample_pool(p, 10, 7));
    }

    #[test]
    fn single_sentence_topic() {
        let stop = StopWords::english();
        let docs = vec![normalize(1, "gradle build fails on startup", &stop)];
        let meta = vec![question(1)];
        let corpus = SummaryCorpus::new(&meta, &docs);
        let emb = SentenceEmbedder::fit(&docs, 64, 1, stop);
        let topic = Topic {
            topic_id: 1,
            count: 1,
            name: String::new(),
            representation: vec![],
            member_ids: vec![1],
            centroid: vec![],
            map_xy: None,
        };
        let s = summarize_topic_questions(&topic, &corpus, &emb, &SummaryParams::new(0));
        assert_eq!(s.items.len(), 1);
        assert_eq!(s.items[0].text, "gradle build fails on startup");
        assert!((s.items[0].score - 1.0).abs() < 1e-6);
    }

    #[test]
    fn filtered_out_answers_give_warning() {
        let stop = StopWords::english();
        let docs = vec![
            normalize(1, "how do i fix this build", &stop),
            normalize(2, "reinstall the sdk tools", &stop),
        ];
        let meta = vec![question(1), answer(2, 1, 0, false)];
        let corpus = SummaryCorpus::new(&meta, &docs);
        let emb = SentenceEmbedder::fit(&docs, 64, 1, stop);
        let p = AnswerFilterPolicy::from_mean(0.0);
        let s = summarize_question_answers(1, &corpus, &p, &emb, &SummaryParams::new(0)).unwrap();
        assert!(s.items.is_empty());
        assert_eq!(s.warnings.len(), 1);
        assert_eq!(
            summarize_question_answers(77, &corpus, &p, &emb, &SummaryParams::new(0)),
            Err(SummarizeError::UnknownQuestion(77))
        );
    }
}
