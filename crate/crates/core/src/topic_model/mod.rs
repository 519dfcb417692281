//! Topics from clusters: c-TF-IDF term representations, size ranking, the
//! top-N report and the intertopic distance map.

mod ctfidf;
mod map;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::prep::CleanDocument;
use crate::vector_space::DocVector;

pub use ctfidf::{ctfidf, top_terms, TermScores};
pub use map::{intertopic_map, MapPoint, TopicMap, MAX_RADIUS};

pub const REPRESENTATION_TERMS: usize = 10;
pub const NAME_TERMS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    /// 1-based rank by descending size.
    pub topic_id: usize,
    pub count: usize,
    pub name: String,
    pub representation: Vec<String>,
    pub member_ids: Vec<u64>,
    pub centroid: Vec<f32>,
    #[serde(default)]
    pub map_xy: Option<[f64; 2]>,
}

pub fn topic_name(representation: &[String]) -> String {
    let mut picked: Vec<&str> = Vec::with_capacity(NAME_TERMS);
    for t in representation {
        if picked.len() == NAME_TERMS {
            break;
        }
        if !picked.contains(&t.as_str()) {
            picked.push(t);
        }
    }
    picked.join("_")
}

/// Builds ranked topics from a clustering. `docs` and `vectors` are aligned
/// with `clustering.labels`.
pub fn build_topics(
    clustering: &Clustering,
    docs: &[CleanDocument],
    vectors: &[DocVector],
) -> (Vec<Topic>, Vec<String>) {
    assert_eq!(
        clustering.labels.len(),
        docs.len(),
        "clustering and documents must align"
    );
    assert_eq!(
        docs.len(),
        vectors.len(),
        "documents and vectors must align"
    );
    let mut classes: BTreeMap<i64, Vec<&CleanDocument>> = BTreeMap::new();
    let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &label) in clustering.labels.iter().enumerate() {
        if label >= 0 {
            classes.entry(label).or_default().push(&docs[i]);
            members.entry(label).or_default().push(i);
        }
    }
    if classes.is_empty() {
        return (
            Vec::new(),
            vec!["no clusters found; topic list is empty".to_string()],
        );
    }
    let (scores, warnings) = ctfidf(&classes);

    let mut topics: Vec<Topic> = members
        .iter()
        .map(|(label, idx)| {
            let representation = top_terms(&scores[label], REPRESENTATION_TERMS);
            let dim = vectors[idx[0]].full.len();
            let mut centroid = vec![0f64; dim];
            for &i in idx {
                for (c, v) in centroid.iter_mut().zip(&vectors[i].full) {
                    *c += f64::from(*v);
                }
            }
            Topic {
                topic_id: 0,
                count: idx.len(),
                name: topic_name(&representation),
                representation,
                member_ids: idx.iter().map(|&i| docs[i].post_id).collect(),
                centroid: centroid
                    .iter()
                    .map(|c| (c / idx.len() as f64) as f32)
                    .collect(),
                map_xy: None,
            }
        })
        .collect();
    topics.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.member_ids.iter().min().cmp(&b.member_ids.iter().min()))
    });
    for (rank, t) in topics.iter_mut().enumerate() {
        t.topic_id = rank + 1;
    }
    (topics, warnings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub topic_id: usize,
    pub count: usize,
    pub name: String,
    pub representation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub rows: Vec<ReportRow>,
    /// Share of clustered (non-outlier) documents inside the reported topics.
    pub coverage: f64,
    pub clustered_docs: usize,
}

pub fn topic_report(topics: &[Topic], top_n: usize) -> TopicReport {
    let clustered: usize = topics.iter().map(|t| t.count).sum();
    let rows: Vec<ReportRow> = topics
        .iter()
        .take(top_n.max(1))
        .map(|t| ReportRow {
            topic_id: t.topic_id,
            count: t.count,
            name: t.name.clone(),
            representation: t.representation.clone(),
        })
        .collect();
    let covered: usize = rows.iter().map(|r| r.count).sum();
    TopicReport {
        coverage: if clustered == 0 {
            0.0
        } else {
            covered as f64 / clustered as f64
        },
        clustered_docs: clustered,
        rows,
    }
}

impl TopicReport {
    /// `topic_id,count,name,representation` with terms joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["topic_id", "count", "name", "representation"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.topic_id.to_string(),
                r.count.to_string(),
                r.name.clone(),
                r.representation.join(";"),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
    }

    pub fn from_csv(text: &str) -> Result<Vec<ReportRow>, csv::Error> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        rdr.records()
            .map(|rec| {
                let rec = rec?;
                let num = |i: usize| {
                    rec.get(i).unwrap_or("").parse::<usize>().map_err(|e| {
                        csv::Error::from(std::io::Error::new(
                            std::io::ErrorKind::InvalidData,
                            e.to_string(),
                        ))
                    })
                };
                Ok(ReportRow {
                    topic_id: num(0)?,
                    count: num(1)?,
                    name: rec.get(2).unwrap_or("").to_string(),
                    representation: rec
                        .get(3)
                        .unwrap_or("")
                        .split(';')
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect(),
                })
            })
            .collect()
    }
}
