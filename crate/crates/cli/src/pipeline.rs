//! Decompose, initialize, train and merge: the full embedding run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gean::feasibility::{check_feasibility, distance_metrics, DistanceMetrics, FeasibilityReport};
use gean::graph::{
    connected_components, greedy_clique, max_clique_exact, screen_embeddability_2d, Graph, CLIQUE_SEARCH_CAP,
};
use gean::layout::{fruchterman_reingold, lift_to_3d, scale_to_register, Embedding, REGISTER_RADIUS};
use gean::physics::{PhysicsConfig, RegisterLimits};
use gean::qubo::{validate_hamiltonian_compatibility, CompatibilityReport};
use gean::train::{train_embed, TraceRecord, TrainOptions};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::input::{InputSource, Problem};
use crate::plot::plot_svg;

pub const DEFAULT_FR_K: f64 = 4.0;
pub const DEFAULT_FR_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutChoice {
    /// Native site coordinates scaled into the register.
    Scale,
    FruchtermanReingold {
        k: f64,
        iterations: usize,
    },
    /// Coordinates read from an `id,x,y[,z]` CSV.
    Provided(PathBuf),
}

impl Default for LayoutChoice {
    fn default() -> Self {
        LayoutChoice::FruchtermanReingold {
            k: DEFAULT_FR_K,
            iterations: DEFAULT_FR_ITERATIONS,
        }
    }
}

/// Replaces individual register limits; unset fields keep the physics defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LimitsOverride {
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub limits: LimitsOverride,
    #[serde(default)]
    pub layout: LayoutChoice,
    pub train: TrainOptions,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn limits(&self) -> Result<RegisterLimits> {
        let base = self.physics.limits()?;
        Ok(RegisterLimits::new(
            self.limits.d_min.unwrap_or(base.d_min),
            self.limits.d_max.unwrap_or(base.d_max),
            base.r_blockade,
            self.limits.epsilon.unwrap_or(base.epsilon),
            base.dims,
        )?)
    }
}

/// One row per trained component, in the shape of the usual results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub component: usize,
    pub n: usize,
    pub d_max: usize,
    pub k_max: usize,
    pub r_min_0: Option<f64>,
    pub r_min_f: Option<f64>,
    pub r_max_0: Option<f64>,
    pub r_max_f: Option<f64>,
    pub r_adj_0: Option<f64>,
    pub r_adj_f: Option<f64>,
    pub r_nonadj_0: Option<f64>,
    pub r_nonadj_f: Option<f64>,
    pub epochs: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeInfo {
    /// Always `"grid"`: components sit in equal square cells.
    pub convention: String,
    pub cell_um: f64,
    /// The merged register spans more than `d_max`.
    pub oversize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub dims: usize,
    pub limits: RegisterLimits,
    pub compatibility: Option<CompatibilityReport>,
    pub warnings: Vec<String>,
    pub isolated: Vec<usize>,
    pub components: Vec<SummaryRow>,
    pub merge: MergeInfo,
    /// Every component feasible on its own.
    pub components_feasible: bool,
    /// The merged register passes the checker.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub merged: Embedding,
    pub report: FeasibilityReport,
}

/// Process exit status when the run finished but the register is infeasible.
pub const EXIT_INFEASIBLE: i32 = 3;

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.feasible {
            0
        } else {
            EXIT_INFEASIBLE
        }
    }
}

/// Seed for component `index`, independent of how many workers run.
pub fn component_seed(root: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

fn clique_size(g: &Graph) -> usize {
    if g.n() <= CLIQUE_SEARCH_CAP {
        max_clique_exact(g).expect("size checked")
    } else {
        greedy_clique(g).len()
    }
}

fn subset(e: &Embedding, vertices: &[usize]) -> Embedding {
    let coords = vertices.iter().flat_map(|&v| e.point(v - 1).to_vec()).collect();
    Embedding::new(e.dims(), coords).expect("subset of a valid embedding")
}

fn centered(e: &Embedding) -> Embedding {
    let c: Vec<f64> = e.centroid().iter().map(|v| -v).collect();
    e.translated(&c)
}

/// Whole-graph starting coordinates for `layout`, as the `layout` command
/// writes them.
pub fn initial_layout(problem: &Problem, layout: &LayoutChoice, dims: usize, seed: u64) -> Result<Embedding> {
    let e = match layout {
        LayoutChoice::Scale => {
            let Some(points) = &problem.points else {
                bail!("the scale layout needs native site coordinates");
            };
            scale_to_register(points, REGISTER_RADIUS)?
        }
        LayoutChoice::FruchtermanReingold { k, iterations } => {
            fruchterman_reingold(&problem.graph, *k, *iterations, seed, REGISTER_RADIUS)?
        }
        LayoutChoice::Provided(path) => {
            let e = Embedding::read_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)?;
            if e.n() != problem.graph.n() {
                bail!(
                    "{} has {} points for {} vertices",
                    path.display(),
                    e.n(),
                    problem.graph.n()
                );
            }
            return Ok(e);
        }
    };
    Ok(if dims == 3 { lift_to_3d(&e)? } else { e })
}

struct ComponentRun {
    vertices: Vec<usize>,
    graph: Graph,
    row: SummaryRow,
    trace: Vec<TraceRecord>,
    embedding: Embedding,
}

fn embed_component(
    index: usize,
    vertices: &[usize],
    graph: &Graph,
    config: &PipelineConfig,
    limits: &RegisterLimits,
    scaled: Option<&Embedding>,
    provided: Option<&Embedding>,
) -> Result<ComponentRun> {
    let seed = component_seed(config.train.seed, index);
    let dims = limits.dims;
    let initial = match (&config.layout, scaled, provided) {
        (LayoutChoice::Provided(_), _, Some(all)) => subset(all, vertices),
        (LayoutChoice::Scale, Some(all), _) => {
            let e = centered(&subset(all, vertices));
            if dims == 3 {
                lift_to_3d(&e)?
            } else {
                e
            }
        }
        (LayoutChoice::FruchtermanReingold { k, iterations }, _, _) => {
            let e = fruchterman_reingold(graph, *k, *iterations, seed, REGISTER_RADIUS)?;
            if dims == 3 {
                lift_to_3d(&e)?
            } else {
                e
            }
        }
        _ => unreachable!("layout inputs are prepared before the components run"),
    };
    let before: DistanceMetrics = distance_metrics(&initial, graph)?;
    let report = train_embed(graph, &initial, limits, &TrainOptions { seed, ..config.train })?;
    let after = report.final_metrics;
    Ok(ComponentRun {
        vertices: vertices.to_vec(),
        graph: graph.clone(),
        row: SummaryRow {
            component: index + 1,
            n: graph.n(),
            d_max: graph.max_degree(),
            k_max: clique_size(graph),
            r_min_0: before.r_min,
            r_min_f: after.r_min,
            r_max_0: before.r_max,
            r_max_f: after.r_max,
            r_adj_0: before.r_adj,
            r_adj_f: after.r_adj,
            r_nonadj_0: before.r_nonadj,
            r_nonadj_f: after.r_nonadj,
            epochs: report.epochs_used,
            feasible: report.feasible,
        },
        trace: report.loss_trace,
        embedding: report.final_embedding,
    })
}

/// Places every piece, centered, in its own square cell of a near-square grid
/// so that atoms of different pieces are more than `clearance` apart.
/// Returns the offsets and the cell size.
fn grid_offsets(radii: &[f64], clearance: f64, dims: usize) -> (Vec<Vec<f64>>, f64) {
    let count = radii.len();
    let widest = radii.iter().copied().fold(0.0, f64::max);
    let cell = 2.0 * widest + clearance;
    let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
    let rows = count.div_ceil(cols);
    let offsets = (0..count)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let mut o = vec![0.0; dims];
            o[0] = (c as f64 - (cols as f64 - 1.0) / 2.0) * cell;
            o[1] = ((rows as f64 - 1.0) / 2.0 - r as f64) * cell;
            o
        })
        .collect();
    (offsets, cell)
}

/// Runs the whole pipeline and writes its artifacts into `config.out_dir`.
pub fn run_embed(config: &PipelineConfig) -> Result<RunOutcome> {
    let problem = Problem::load(&config.input)?;
    let limits = config.limits()?;
    let dims = limits.dims;
    let g = &problem.graph;
    if g.n() == 0 {
        bail!("the graph has no vertices");
    }
    let mut warnings = Vec::new();

    let compatibility = problem.qubo.as_ref().map(validate_hamiltonian_compatibility);
    if compatibility.is_some_and(|c| !c.compatible) {
        warnings.push("QUBO coefficients cannot be realized by a uniform drive and distance couplings".to_string());
    }

    let scaled = match &config.layout {
        LayoutChoice::Scale => Some(initial_layout(&problem, &config.layout, 2, config.train.seed)?),
        _ => None,
    };
    let provided = match &config.layout {
        LayoutChoice::Provided(_) => {
            let e = initial_layout(&problem, &config.layout, dims, config.train.seed)?;
            if e.dims() != dims {
                bail!("provided coordinates are {}-d but the run is {dims}-d", e.dims());
            }
            Some(e)
        }
        _ => None,
    };

    let parts = connected_components(g);
    if dims == 2 {
        for (k, c) in parts.components.iter().enumerate() {
            if c.graph.n() <= CLIQUE_SEARCH_CAP {
                let s = screen_embeddability_2d(&c.graph)?;
                if !s.passes() {
                    warnings.push(format!(
                        "component {} fails planar screening: {:?}",
                        k + 1,
                        s.violations
                    ));
                }
            }
        }
    }

    let runs: Vec<ComponentRun> = parts
        .components
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            embed_component(
                k,
                &c.vertices,
                &c.graph,
                config,
                &limits,
                scaled.as_ref(),
                provided.as_ref(),
            )
        })
        .collect::<Result<_>>()?;

    // merge: trained components first, then isolated vertices as single atoms
    let mut pieces: Vec<(Vec<usize>, Embedding)> = runs
        .iter()
        .map(|r| (r.vertices.clone(), centered(&r.embedding)))
        .collect();
    for &v in &parts.isolated {
        pieces.push((vec![v], Embedding::new(dims, vec![0.0; dims]).expect("origin")));
    }
    let radii: Vec<f64> = pieces.iter().map(|(_, e)| e.max_norm()).collect();
    let (offsets, cell) = grid_offsets(&radii, limits.r_blockade + limits.epsilon, dims);
    let mut coords = vec![0.0; g.n() * dims];
    for ((vertices, e), offset) in pieces.iter().zip(&offsets) {
        let placed = e.translated(offset);
        for (local, &v) in vertices.iter().enumerate() {
            coords[(v - 1) * dims..v * dims].copy_from_slice(placed.point(local));
        }
    }
    let merged = Embedding::new(dims, coords)?;
    let report = check_feasibility(&merged, g, &limits)?;
    let oversize = report.metrics.r_max.is_some_and(|d| d > limits.d_max);
    if oversize {
        warnings.push("merged register is wider than d_max; see per-component results".to_string());
    }

    let components_feasible = runs.iter().all(|r| r.row.feasible);
    let summary = RunSummary {
        n: g.n(),
        dims,
        limits,
        compatibility,
        warnings,
        isolated: parts.isolated.clone(),
        components: runs.iter().map(|r| r.row.clone()).collect(),
        merge: MergeInfo {
            convention: "grid".to_string(),
            cell_um: cell,
            oversize,
        },
        components_feasible,
        feasible: report.feasible,
    };

    write_artifacts(&config.out_dir, &runs, &merged, g, &limits, &report, &summary)?;
    Ok(RunOutcome {
        summary,
        merged,
        report,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_artifacts(
    dir: &Path,
    runs: &[ComponentRun],
    merged: &Embedding,
    g: &Graph,
    limits: &RegisterLimits,
    report: &FeasibilityReport,
    summary: &RunSummary,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for run in runs {
        let k = run.row.component;
        let mut csv = create(dir, &format!("component_{k}.csv"))?;
        run.embedding
            .write_csv_with_ids(&mut csv, run.vertices.iter().copied())?;
        csv.flush()?;
        let mut trace = create(dir, &format!("trace_{k}.jsonl"))?;
        for record in &run.trace {
            serde_json::to_writer(&mut trace, record)?;
            trace.write_all(b"\n")?;
        }
        trace.flush()?;
        let mut svg = create(dir, &format!("component_{k}.svg"))?;
        svg.write_all(plot_svg(&run.embedding, &run.graph, limits).as_bytes())?;
        svg.flush()?;
    }
    let mut csv = create(dir, "embedding.csv")?;
    merged.write_csv(&mut csv)?;
    csv.flush()?;
    let mut svg = create(dir, "embedding.svg")?;
    svg.write_all(plot_svg(merged, g, limits).as_bytes())?;
    svg.flush()?;
    write_json(dir, "feasibility.json", report)?;
    write_json(dir, "summary.json", summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_seeds_differ_and_repeat() {
        assert_eq!(component_seed(7, 0), component_seed(7, 0));
        assert_ne!(component_seed(7, 0), component_seed(7, 1));
        assert_ne!(component_seed(7, 0), component_seed(8, 0));
    }

    #[test]
    fn grid_cells_keep_pieces_apart() {
        let radii = [3.0, 0.0, 5.0, 1.0, 0.0];
        let (offsets, cell) = grid_offsets(&radii, 10.36, 2);
        assert_eq!(cell, 20.36);
        for a in 0..radii.len() {
            for b in a + 1..radii.len() {
                let d = (offsets[a][0] - offsets[b][0]).hypot(offsets[a][1] - offsets[b][1]);
                assert!(d - radii[a] - radii[b] >= 10.36);
            }
        }
        // 3 × 2 grid centered on the origin
        assert!(offsets.iter().all(|o| o[0].abs() <= cell && o[1].abs() <= cell / 2.0));
    }
}
