//! Seeded synthetic corpora: themed Q&A threads for demos and smoke runs,
//! and planted-topic corpora whose generating labels are known.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Post, PostType};
use crate::prep::{stem, StopWords};

/// Pronounceable pseudo-words with pairwise distinct stems, none of them a
/// stop word, split into `groups` disjoint vocabularies of `size` words.
pub fn disjoint_vocabularies(groups: usize, size: usize, seed: u64) -> Vec<Vec<String>> {
    const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aiou";
    let stop = StopWords::english();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stems = BTreeSet::new();
    let mut words = Vec::with_capacity(groups * size);
    while words.len() < groups * size {
        let syllables = rng.random_range(2..4);
        let w: String = (0..syllables)
            .flat_map(|_| {
                [
                    *CONSONANTS.choose(&mut rng).unwrap(),
                    *VOWELS.choose(&mut rng).unwrap(),
                ]
            })
            .map(char::from)
            .collect();
        let s = stem(&w);
        if !stop.contains(&w) && !stop.contains(&s) && stems.insert(s) {
            words.push(w);
        }
    }
    words.chunks(size).map(<[String]>::to_vec).collect()
}

/// Distinct words behind each noise document, drawn from the union of all
/// vocabularies so that noise documents scatter instead of forming a group.
const NOISE_WORDS: usize = 12;

/// A corpus together with the generating label of every question
/// (`None` for noise).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub posts: Vec<Post>,
    pub labels: BTreeMap<u64, Option<usize>>,
    pub vocabularies: Vec<Vec<String>>,
    /// For each question with answers, the id of the one answer meant to
    /// pass the answer filter.
    pub qualifying_answer: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub topics: usize,
    pub vocabulary: usize,
    pub questions_per_topic: usize,
    pub noise: usize,
    /// Sentences per question body (each of 6 to 10 words).
    pub question_sentences: std::ops::Range<usize>,
    /// Answers per question; 0 produces questions only.
    pub answers_per_question: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            topics: 3,
            vocabulary: 50,
            questions_per_topic: 100,
            noise: 30,
            question_sentences: 30..45,
            answers_per_question: 0,
            seed: 0,
        }
    }
}

fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 1, 1, 0, 0, 0).unwrap()
}

/// Draws words with Zipf weights (rank `r` has weight `1 / (r + 1)`).
struct ZipfVocab<'a> {
    words: Vec<&'a String>,
    dist: WeightedIndex<f64>,
}

impl<'a> ZipfVocab<'a> {
    fn new(words: Vec<&'a String>) -> Self {
        let dist = WeightedIndex::new((0..words.len()).map(|r| 1.0 / (r as f64 + 1.0)))
            .expect("non-empty vocabulary");
        ZipfVocab { words, dist }
    }

    fn uniform(words: Vec<&'a String>) -> Self {
        let dist = WeightedIndex::new(vec![1.0; words.len()]).expect("non-empty vocabulary");
        ZipfVocab { words, dist }
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> &'a str {
        self.words[self.dist.sample(rng)]
    }
}

fn sentence(rng: &mut ChaCha8Rng, vocab: &ZipfVocab<'_>, len: std::ops::Range<usize>) -> String {
    let n = rng.random_range(len);
    let words: Vec<&str> = (0..n).map(|_| vocab.word(rng)).collect();
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    format!("{s}.")
}

fn paragraph(
    rng: &mut ChaCha8Rng,
    vocab: &ZipfVocab<'_>,
    sentences: std::ops::Range<usize>,
) -> String {
    let n = rng.random_range(sentences);
    (0..n)
        .map(|_| sentence(rng, vocab, 6..11))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Questions whose words come from one of several disjoint vocabularies
/// (Zipf-weighted, like natural text), plus noise questions each drawing
/// from its own random handful of words across all vocabularies.
pub fn planted_corpus(spec: &PlantedSpec) -> PlantedCorpus {
    let vocabularies = disjoint_vocabularies(spec.topics, spec.vocabulary, spec.seed ^ 0x5eed);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut plan: Vec<Option<usize>> = (0..spec.topics)
        .flat_map(|t| std::iter::repeat_n(Some(t), spec.questions_per_topic))
        .collect();
    plan.extend(std::iter::repeat_n(None, spec.noise));
    // Interleave so ids carry no information about the label.
    for i in (1..plan.len()).rev() {
        plan.swap(i, rng.random_range(0..=i));
    }
    let all: Vec<&String> = vocabularies.iter().flatten().collect();
    let mut posts = Vec::new();
    let mut labels = BTreeMap::new();
    let mut qualifying_answer = BTreeMap::new();
    let mut next_id = 1u64;
    for (i, label) in plan.into_iter().enumerate() {
        let vocab = match label {
            Some(t) => ZipfVocab::new(vocabularies[t].iter().collect()),
            None => ZipfVocab::uniform(
                all.choose_multiple(&mut rng, NOISE_WORDS)
                    .copied()
                    .collect(),
            ),
        };
        let qid = next_id;
        next_id += 1;
        let created = epoch() + Duration::hours(i as i64);
        posts.push(Post {
            id: qid,
            post_type: PostType::Question,
            parent_id: None,
            accepted: false,
            score: rng.random_range(0..5),
            title: Some(
                sentence(&mut rng, &vocab, 4..7)
                    .trim_end_matches('.')
                    .to_string(),
            ),
            body_html: format!(
                "<p>{}</p>",
                paragraph(&mut rng, &vocab, spec.question_sentences.clone())
            ),
            tags: vec!["synthetic".into()],
            creation_date: created,
        });
        labels.insert(qid, label);
        if spec.answers_per_question == 0 {
            continue;
        }
        let winner = rng.random_range(0..spec.answers_per_question);
        for a in 0..spec.answers_per_question {
            let aid = next_id;
            next_id += 1;
            let good = a == winner;
            if good {
                qualifying_answer.insert(qid, aid);
            }
            posts.push(Post {
                id: aid,
                post_type: PostType::Answer,
                parent_id: Some(qid),
                accepted: good && rng.random_bool(0.5),
                score: if good {
                    rng.random_range(8..15)
                } else {
                    rng.random_range(-1..2)
                },
                title: None,
                body_html: format!("<p>{}</p>", paragraph(&mut rng, &vocab, 1..3)),
                tags: Vec::new(),
                creation_date: created + Duration::minutes(10 + a as i64),
            });
        }
    }
    PlantedCorpus {
        posts,
        labels,
        vocabularies,
        qualifying_answer,
    }
}

struct Theme {
    tag: &'static str,
    subjects: &'static [&'static str],
    problems: &'static [&'static str],
    fixes: &'static [&'static str],
    code: &'static [&'static str],
}

const THEMES: &[Theme] = &[
    Theme {
        tag: "gradle",
        subjects: &[
            "gradle build",
            "gradle sync",
            "the build script",
            "the dependency graph",
            "the android gradle plugin",
            "the release variant",
        ],
        problems: &[
            "fails with a duplicate class error",
            "cannot resolve the support library",
            "hangs while configuring the project",
            "reports an incompatible plugin version",
            "does not find the kotlin stdlib",
            "breaks after upgrading the wrapper",
        ],
        fixes: &[
            "update the gradle wrapper and sync the project again",
            "exclude the duplicate module from the transitive dependency",
            "add the google maven repository to the settings file",
            "invalidate caches and restart the studio",
            "align the plugin version with the gradle distribution",
        ],
        code: &[
            "implementation 'com.android.support:appcompat-v7:28.0.0'",
            "./gradlew clean assembleDebug --stacktrace",
            "classpath 'com.android.tools.build:gradle:7.1.0'",
        ],
    },
    Theme {
        tag: "emulator",
        subjects: &[
            "the emulator",
            "the virtual device",
            "the avd manager",
            "hardware acceleration",
            "the emulator image",
            "adb",
        ],
        problems: &[
            "refuses to start on windows",
            "shows a black screen after boot",
            "is extremely slow on my laptop",
            "cannot connect to the network",
            "crashes when the camera opens",
            "loses the device after a few minutes",
        ],
        fixes: &[
            "enable virtualization in the bios and install the hypervisor driver",
            "wipe the device data and cold boot the emulator",
            "switch the graphics mode to software rendering",
            "restart the adb server and reconnect the device",
            "use an x86 system image instead of the arm image",
        ],
        code: &[
            "emulator -avd Pixel_API_30 -gpu swiftshader",
            "adb kill-server && adb start-server",
            "hw.gpu.enabled=yes",
        ],
    },
    Theme {
        tag: "fragment",
        subjects: &[
            "my fragment",
            "the viewpager",
            "the back stack",
            "the fragment manager",
            "the recyclerview adapter",
            "the activity lifecycle",
        ],
        problems: &[
            "loses its state after rotation",
            "shows the wrong page when resumed",
            "throws an illegal state exception on commit",
            "keeps a stale reference to the activity",
            "does not refresh when the data changes",
            "leaks the view after navigation",
        ],
        fixes: &[
            "save the state in a viewmodel instead of the fragment",
            "commit the transaction before the activity saves its state",
            "use the child fragment manager for nested pagers",
            "call notify data set changed after updating the list",
            "clear the binding reference in on destroy view",
        ],
        code: &[
            "supportFragmentManager.beginTransaction().commitAllowingStateLoss()",
            "viewPager.offscreenPageLimit = 2",
            "override fun onDestroyView() { _binding = null }",
        ],
    },
    Theme {
        tag: "proguard",
        subjects: &[
            "proguard",
            "the minified release build",
            "the obfuscated apk",
            "code shrinking",
            "the keep rules",
            "the mapping file",
        ],
        problems: &[
            "strips my model classes",
            "breaks json serialization",
            "removes the reflection targets",
            "crashes with a class not found exception",
            "makes the stack traces unreadable",
            "warns about missing references",
        ],
        fixes: &[
            "add keep rules for the serialized model package",
            "annotate the fields so the serializer keeps their names",
            "upload the mapping file to retrace the stack traces",
            "suppress the warnings only for the optional library",
            "test the release build before publishing",
        ],
        code: &[
            "-keep class com.example.model.** { *; }",
            "minifyEnabled true",
            "-dontwarn okio.**",
        ],
    },
    Theme {
        tag: "permissions",
        subjects: &[
            "the runtime permission",
            "location access",
            "the camera permission",
            "storage access",
            "the permission dialog",
            "background location",
        ],
        problems: &[
            "is denied without showing a dialog",
            "always returns false on android eleven",
            "crashes the app when revoked",
            "is never granted on some devices",
            "does not appear after the user declines twice",
            "is ignored by the scoped storage rules",
        ],
        fixes: &[
            "request the permission at runtime and handle the callback",
            "check should show rationale before asking again",
            "declare the permission in the manifest as well",
            "open the app settings when the user declined permanently",
            "migrate file access to the media store api",
        ],
        code: &[
            "ActivityCompat.requestPermissions(this, perms, REQ)",
            "<uses-permission android:name=\"android.permission.CAMERA\"/>",
            "registerForActivityResult(RequestPermission())",
        ],
    },
];

const QUESTION_OPENERS: &[&str] = &[
    "I am trying to ship my app but",
    "After the last update",
    "Since yesterday",
    "On a fresh project",
    "Whenever I run the app",
];
const ANSWER_OPENERS: &[&str] = &[
    "You need to",
    "The fix is to",
    "In my case I had to",
    "Try to",
    "What worked for me was to",
];

/// A realistic-looking mix of themed questions and answers with code blocks,
/// entities and inline markup.
pub fn sample_corpus(
    questions: usize,
    answers_per_question: std::ops::Range<usize>,
    seed: u64,
) -> Vec<Post> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut posts = Vec::new();
    let mut next_id = 1000u64;
    for i in 0..questions {
        let theme = &THEMES[i % THEMES.len()];
        let qid = next_id;
        next_id += 1;
        let created = epoch() + Duration::hours(3 * i as i64);
        let subject = *theme.subjects.choose(&mut rng).unwrap();
        let problem = *theme.problems.choose(&mut rng).unwrap();
        let opener = *QUESTION_OPENERS.choose(&mut rng).unwrap();
        let mut body = format!("<p>{opener} {subject} {problem}.");
        for _ in 0..rng.random_range(2..5) {
            body.push_str(&format!(
                " {} {}.",
                capitalize(theme.subjects.choose(&mut rng).unwrap()),
                theme.problems.choose(&mut rng).unwrap()
            ));
        }
        body.push_str("</p>");
        if rng.random_bool(0.6) {
            body.push_str(&format!(
                "\n<pre><code>{}\n</code></pre>",
                escape(theme.code.choose(&mut rng).unwrap())
            ));
        }
        body.push_str(&format!(
            "\n<p>I&#39;ve tried to {} but {} still {}. Any <em>ideas</em>?</p>",
            theme.fixes.choose(&mut rng).unwrap(),
            theme.subjects.choose(&mut rng).unwrap(),
            theme.problems.choose(&mut rng).unwrap()
        ));
        posts.push(Post {
            id: qid,
            post_type: PostType::Question,
            parent_id: None,
            accepted: false,
            score: rng.random_range(-1..12),
            title: Some(format!("{} {}", capitalize(subject), problem)),
            body_html: body,
            tags: vec!["android".into(), theme.tag.into()],
            creation_date: created,
        });
        let n = rng.random_range(answers_per_question.clone());
        let accepted = if n > 0 && rng.random_bool(0.5) {
            Some(rng.random_range(0..n))
        } else {
            None
        };
        for a in 0..n {
            let fix = *theme.fixes.choose(&mut rng).unwrap();
            let opener = *ANSWER_OPENERS.choose(&mut rng).unwrap();
            let mut body = format!("<p>{opener} {fix}.</p>");
            if rng.random_bool(0.4) {
                body.push_str(&format!(
                    "\n<pre><code>{}</code></pre>",
                    escape(theme.code.choose(&mut rng).unwrap())
                ));
            }
            if rng.random_bool(0.5) {
                body.push_str(&format!(
                    "\n<p>This happens because {} {}. After that it should work.</p>",
                    theme.subjects.choose(&mut rng).unwrap(),
                    theme.problems.choose(&mut rng).unwrap()
                ));
            }
            posts.push(Post {
                id: next_id,
                post_type: PostType::Answer,
                parent_id: Some(qid),
                accepted: accepted == Some(a),
                score: rng.random_range(-2..9),
                title: None,
                body_html: body,
                tags: Vec::new(),
                creation_date: created + Duration::minutes(30 * (a as i64 + 1)),
            });
            next_id += 1;
        }
    }
    posts
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().collect::<String>() + c.as_str())
        .unwrap_or_default()
}

fn escape(code: &str) -> String {
    code.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabularies_disjoint_after_stemming() {
        let v = disjoint_vocabularies(3, 50, 1);
        let stems: BTreeSet<String> = v.iter().flatten().map(|w| stem(w)).collect();
        assert_eq!(stems.len(), 150);
    }

    #[test]
    fn planted_shape() {
        let c = planted_corpus(&PlantedSpec {
            answers_per_question: 3,
            ..Default::default()
        });
        assert_eq!(c.labels.len(), 330);
        assert_eq!(c.labels.values().filter(|l| l.is_none()).count(), 30);
        assert_eq!(c.posts.len(), 330 * 4);
        assert_eq!(c.qualifying_answer.len(), 330);
        assert!(c.posts.iter().all(|p| p.validate().is_ok()));
        assert_eq!(
            c,
            planted_corpus(&PlantedSpec {
                answers_per_question: 3,
                ..Default::default()
            })
        );
    }

    #[test]
    fn sample_is_valid() {
        let posts = sample_corpus(20, 1..3, 5);
        assert!(posts.iter().all(|p| p.validate().is_ok()));
        assert_eq!(posts.iter().filter(|p| p.is_question()).count(), 20);
    }
}
