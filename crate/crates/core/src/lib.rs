//! Topic modeling and extractive summarization over Stack Exchange Q&A corpora.

pub mod cluster;
pub mod ingest;
pub mod pipeline;
pub mod prep;
pub mod se_client;
pub mod summarize;
pub mod synth;
pub mod topic_model;
pub mod vector_space;
