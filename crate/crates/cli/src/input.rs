//! Resolving an input source into the graph to embed.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gean::graph::Graph;
use gean::qubo::{
    adjacency_of, clustered_sites, conflict_distance_for_degree, graph_coloring_qubo, mis_qubo_from_points,
    protein_folding_qubo, QuboInstance,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Graph(PathBuf),
    Qubo(PathBuf),
    /// Site coordinates (`x,y` columns) turned into an MIS instance.
    Points {
        path: PathBuf,
        conflict_distance: f64,
        penalty: f64,
    },
    Generated(GeneratorSpec),
}

/// How close two sites must be to conflict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conflict {
    Distance(f64),
    /// Smallest distance whose conflict graph reaches this maximum degree.
    MaxDegree(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSpec {
    Protein {
        chain_length: usize,
        hydrophobic: Vec<usize>,
        penalty: f64,
    },
    Coloring {
        graph: Graph,
        colors: usize,
        onehot_weight: f64,
        edge_weight: f64,
    },
    Sites {
        n: usize,
        clusters: usize,
        extent: f64,
        spread: f64,
        seed: u64,
        conflict: Conflict,
        penalty: f64,
    },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<QuboInstance> {
        Ok(match self {
            GeneratorSpec::Protein {
                chain_length,
                hydrophobic,
                penalty,
            } => protein_folding_qubo(*chain_length, hydrophobic, *penalty)?,
            GeneratorSpec::Coloring {
                graph,
                colors,
                onehot_weight,
                edge_weight,
            } => graph_coloring_qubo(graph, *colors, *onehot_weight, *edge_weight)?,
            GeneratorSpec::Sites {
                n,
                clusters,
                extent,
                spread,
                seed,
                conflict,
                penalty,
            } => {
                let points = clustered_sites(*n, *clusters, *extent, *spread, *seed)?;
                let dc = match *conflict {
                    Conflict::Distance(d) => d,
                    Conflict::MaxDegree(target) => conflict_distance_for_degree(&points, target)
                        .with_context(|| format!("no conflict distance reaches degree {target}"))?,
                };
                mis_qubo_from_points(&points, dc, *penalty)?
            }
        })
    }
}

/// The graph to embed plus whatever came with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub graph: Graph,
    pub qubo: Option<QuboInstance>,
    /// Native site coordinates, available for point-based instances.
    pub points: Option<Vec<[f64; 2]>>,
}

impl Problem {
    pub fn from_qubo(q: QuboInstance) -> Self {
        Problem {
            graph: adjacency_of(&q),
            points: q.points().map(<[_]>::to_vec),
            qubo: Some(q),
        }
    }

    pub fn load(source: &InputSource) -> Result<Self> {
        Ok(match source {
            InputSource::Graph(path) => Problem {
                graph: read_json(path)?,
                qubo: None,
                points: None,
            },
            InputSource::Qubo(path) => Problem::from_qubo(read_json(path)?),
            InputSource::Points {
                path,
                conflict_distance,
                penalty,
            } => {
                let points = read_points_csv(path)?;
                Problem::from_qubo(mis_qubo_from_points(&points, *conflict_distance, *penalty)?)
            }
            InputSource::Generated(spec) => Problem::from_qubo(spec.build()?),
        })
    }
}

impl InputSource {
    /// Picks the source kind from the file: `.csv` is a point set, JSON with a
    /// `diag` field is a QUBO, other JSON is a graph.
    pub fn detect(path: &Path, conflict_distance: Option<f64>, penalty: f64) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let Some(conflict_distance) = conflict_distance else {
                bail!("{} is a point set; pass a conflict distance", path.display());
            };
            return Ok(InputSource::Points {
                path: path.to_path_buf(),
                conflict_distance,
                penalty,
            });
        }
        let value: serde_json::Value = read_json(path)?;
        if value.get("diag").is_some() {
            Ok(InputSource::Qubo(path.to_path_buf()))
        } else {
            Ok(InputSource::Graph(path.to_path_buf()))
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

/// Reads a CSV with `x` and `y` columns; other columns are ignored.
pub fn read_points_csv(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    reader
        .deserialize()
        .map(|row| {
            let PointRow { x, y } = row.with_context(|| format!("parsing {}", path.display()))?;
            Ok([x, y])
        })
        .collect()
}
