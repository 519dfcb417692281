use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Topic;
use crate::vector_space::{map_coordinates, EmbedError};

/// Radius of the largest topic, in unit-square coordinates.
pub const MAX_RADIUS: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub topic_id: usize,
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMap {
    pub points: Vec<MapPoint>,
}

/// Places topics in the unit square from their centroids; circle radius
/// grows with the square root of the topic size.
pub fn intertopic_map(topics: &[Topic], seed: u64) -> Result<TopicMap, EmbedError> {
    let centroids: Vec<Vec<f32>> = topics.iter().map(|t| t.centroid.clone()).collect();
    let coords = map_coordinates(&centroids, seed)?;
    let max_count = topics.iter().map(|t| t.count).max().unwrap_or(1).max(1) as f64;
    Ok(TopicMap {
        points: topics
            .iter()
            .zip(coords)
            .map(|(t, [x, y])| MapPoint {
                topic_id: t.topic_id,
                x,
                y,
                r: MAX_RADIUS * (t.count as f64 / max_count).sqrt(),
            })
            .collect(),
    })
}

impl TopicMap {
    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 600.0;
        const MARGIN: f64 = 60.0;
        let inner = SIZE - 2.0 * MARGIN;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" y1="{h}" x2="{e}" y2="{h}" stroke="#ccc"/><line x1="{h}" y1="{MARGIN}" x2="{h}" y2="{e}" stroke="#ccc"/>"##,
            h = SIZE / 2.0,
            e = SIZE - MARGIN
        );
        // Largest circles first so small topics stay visible on top.
        let mut order: Vec<&MapPoint> = self.points.iter().collect();
        order.sort_by(|a, b| b.r.total_cmp(&a.r).then(a.topic_id.cmp(&b.topic_id)));
        for p in order {
            let cx = MARGIN + p.x * inner;
            let cy = SIZE - MARGIN - p.y * inner;
            let r = (p.r * inner).max(2.0);
            let _ = writeln!(
                svg,
                r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="#4c78a8" fill-opacity="0.35" stroke="#2f4b7c"/><text x="{cx:.2}" y="{ty:.2}" font-size="11" text-anchor="middle" font-family="sans-serif">{id}</text>"##,
                ty = cy + 4.0,
                id = p.topic_id
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
