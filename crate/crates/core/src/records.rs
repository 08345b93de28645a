//! JSON records emitted by the command-line tool.
//!
//! Floats are written with the shortest representation that parses back to
//! the same `f64`, so repeated runs produce byte-identical files.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::archetypoid::{AdaResult, Elbow};
use crate::clustering::{ClusterResult, Quality};
use crate::threeway::{CovariateCorrelation, Direction, ProfileMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingPoint {
    pub label: String,
    /// Occasion name, or `"all"` when occasions are pooled.
    pub occasion: String,
    pub direction: Direction,
    pub x: f64,
    pub y: f64,
    /// Full coordinate vector when the embedding is not two-dimensional.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub direction: Direction,
    pub occasion: String,
    /// One-based h-plot dimension.
    pub dimension: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingRecord {
    pub eigenvalues: Vec<f64>,
    /// Cumulative goodness of fit for dimensions `1..=dims`.
    pub gof: Vec<f64>,
    pub points: Vec<EmbeddingPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Vec<CorrelationRecord>>,
}

pub const POOLED_OCCASION: &str = "all";

impl EmbeddingRecord {
    pub fn from_profile(profile: &ProfileMatrix) -> Self {
        let dims = profile.dims;
        let points = profile
            .tags
            .iter()
            .enumerate()
            .map(|(row, tag)| {
                let p = profile.point(row);
                EmbeddingPoint {
                    label: profile.labels[tag.object].clone(),
                    occasion: occasion_name(profile, tag.occasion),
                    direction: tag.direction,
                    x: p[0],
                    y: if dims > 1 { p[1] } else { 0.0 },
                    coords: (dims != 2).then(|| p.to_vec()),
                }
            })
            .collect();
        Self {
            eigenvalues: profile.hplot.eigenvalues.clone(),
            gof: profile.hplot.gof_cumulative[..dims].to_vec(),
            points,
            correlations: None,
        }
    }

    pub fn with_correlations(mut self, profile: &ProfileMatrix, values: &[CovariateCorrelation]) -> Self {
        self.correlations = Some(
            values
                .iter()
                .map(|c| CorrelationRecord {
                    direction: c.direction,
                    occasion: occasion_name(profile, c.occasion),
                    dimension: c.dimension + 1,
                    r: c.r,
                })
                .collect(),
        );
        self
    }
}

fn occasion_name(profile: &ProfileMatrix, occasion: Option<usize>) -> String {
    match occasion {
        Some(o) if !profile.case.is_conditional() => profile.occasions[o].clone(),
        _ => POOLED_OCCASION.to_owned(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElbowSelection {
    /// How `k` was picked from the curve.
    pub rule: &'static str,
    pub curve: Vec<(usize, f64)>,
    pub elbow: Elbow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaRecord {
    pub k: usize,
    pub archetypoids: Vec<String>,
    /// Row `i` holds the weights of object `i` on each archetypoid.
    pub alphas: Vec<Vec<f64>>,
    pub rss: f64,
    pub trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<ElbowSelection>,
}

impl AdaRecord {
    pub fn new(labels: &[String], result: &AdaResult, selection: Option<ElbowSelection>) -> Self {
        Self {
            k: result.k,
            archetypoids: result.indices.iter().map(|&i| labels[i].clone()).collect(),
            alphas: result.alphas.rows().into_iter().map(|r| r.to_vec()).collect(),
            rss: result.rss,
            trace: result.trace.clone(),
            selection,
        }
    }
}

/// Label to cluster map that keeps object order when serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMap(pub Vec<(String, usize)>);

impl Serialize for ClusterMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (label, cluster) in &self.0 {
            map.serialize_entry(label, cluster)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRecord {
    pub k: usize,
    pub medoids: Vec<String>,
    pub clusters: ClusterMap,
    pub objective: f64,
    pub silhouette_avg: f64,
    pub quality: Quality,
    /// Average silhouette per candidate `k` when `k` was chosen automatically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette_by_k: Option<Vec<(usize, f64)>>,
}

impl ClusterRecord {
    pub fn new(labels: &[String], result: &ClusterResult) -> Self {
        Self {
            k: result.k,
            medoids: result.medoids.iter().map(|&i| labels[i].clone()).collect(),
            clusters: ClusterMap(
                labels
                    .iter()
                    .cloned()
                    .zip(result.assignment.iter().copied())
                    .collect(),
            ),
            objective: result.objective,
            silhouette_avg: result.average_silhouette,
            quality: result.quality,
            silhouette_by_k: None,
        }
    }
}
