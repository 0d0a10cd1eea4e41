use std::path::Path;

use imgtopic_core::{Topic, TopicImage};
use serde::{Deserialize, Serialize};

use super::{read_text, write_file, FormatError, ParseError};

#[derive(Serialize, Deserialize)]
struct TopicJson {
    topic_id: String,
    words: Vec<String>,
    images: Vec<ImageJson>,
}

#[derive(Serialize, Deserialize)]
struct ImageJson {
    id: String,
    #[serde(default)]
    relevance: f64,
}

/// JSON array of `{topic_id, words, images: [{id, relevance}]}`.
pub fn parse_topics(text: &str) -> Result<Vec<Topic>, ParseError> {
    let raw: Vec<TopicJson> = serde_json::from_str(text).map_err(|e| ParseError::line(e.line(), e.to_string()))?;
    Ok(raw
        .into_iter()
        .map(|t| Topic {
            topic_id: t.topic_id,
            groundtruth_words: t.words,
            images: t
                .images
                .into_iter()
                .map(|i| TopicImage { image_id: i.id, relevance: i.relevance })
                .collect(),
        })
        .collect())
}

pub fn load_topics(path: &Path) -> Result<Vec<Topic>, FormatError> {
    parse_topics(&read_text(path)?).map_err(|e| FormatError::parse(path, e))
}

pub fn write_topics(path: &Path, topics: &[Topic]) -> Result<(), FormatError> {
    let raw: Vec<TopicJson> = topics
        .iter()
        .map(|t| TopicJson {
            topic_id: t.topic_id.clone(),
            words: t.groundtruth_words.clone(),
            images: t
                .images
                .iter()
                .map(|i| ImageJson { id: i.image_id.clone(), relevance: i.relevance })
                .collect(),
        })
        .collect();
    let text = serde_json::to_string_pretty(&raw).expect("topics serialize");
    write_file(path, text.as_bytes())
}
