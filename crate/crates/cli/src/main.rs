use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gean::export::export_udgp_model;
use gean::feasibility::check_feasibility;
use gean::graph::Graph;
use gean::layout::Embedding;
use gean::physics::{PhysicsConfig, DEFAULT_C6_OVER_HBAR, DEFAULT_COHERENCE_TIME_US};
use gean::qubo::DEFAULT_PENALTY;
use gean::train::{TrainOptions, DEFAULT_MAX_EPOCHS};
use gean_cli::input::{read_json, Conflict, GeneratorSpec, InputSource, Problem};
use gean_cli::pipeline::{
    initial_layout, run_embed, LayoutChoice, LimitsOverride, PipelineConfig, DEFAULT_FR_ITERATIONS, DEFAULT_FR_K,
    EXIT_INFEASIBLE,
};
use gean_cli::plot_svg;

/// Embed QUBO interaction graphs into a neutral-atom register.
#[derive(Parser)]
#[command(name = "gean", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Root seed for layouts, training and generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Register dimensionality, 2 or 3.
    #[arg(long, global = true, default_value_t = 2)]
    dims: usize,
    /// Coherence time limit in µs.
    #[arg(long, global = true, default_value_t = DEFAULT_COHERENCE_TIME_US)]
    coherence_us: f64,
    /// Interaction coefficient C6/ħ in rad·µm⁶/µs.
    #[arg(long, global = true, default_value_t = DEFAULT_C6_OVER_HBAR)]
    c6: f64,
    /// Rabi frequency in rad/µs; defaults to the smallest one the coherence time allows.
    #[arg(long, global = true)]
    rabi: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_EPOCHS)]
    max_epochs: usize,
    /// Output file, or output directory for `embed`; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Common {
    fn physics(&self) -> PhysicsConfig {
        PhysicsConfig {
            c6_over_hbar: self.c6,
            coherence_time_us: self.coherence_us,
            rabi_rad_per_us: self.rabi,
            dims: self.dims,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Graph JSON, QUBO JSON, or a CSV of site coordinates.
    #[arg(long)]
    input: PathBuf,
    /// Conflict distance for site CSVs, in the coordinates' unit.
    #[arg(long)]
    conflict_distance: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    penalty: f64,
}

impl InputArgs {
    fn source(&self) -> Result<InputSource> {
        InputSource::detect(&self.input, self.conflict_distance, self.penalty)
    }

    fn problem(&self) -> Result<Problem> {
        Problem::load(&self.source()?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Force-directed layout of the graph.
    Fr,
    /// Native site coordinates scaled into the register.
    Scale,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long, value_enum, default_value_t = Method::Fr)]
    method: Method,
    /// Force-directed ideal edge length in µm.
    #[arg(long, default_value_t = DEFAULT_FR_K)]
    k: f64,
    #[arg(long, default_value_t = DEFAULT_FR_ITERATIONS)]
    iterations: usize,
}

impl LayoutArgs {
    fn choice(&self) -> LayoutChoice {
        match self.method {
            Method::Fr => LayoutChoice::FruchtermanReingold {
                k: self.k,
                iterations: self.iterations,
            },
            Method::Scale => LayoutChoice::Scale,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a QUBO instance as JSON.
    Generate {
        #[command(subcommand)]
        problem: GenerateCommand,
    },
    /// Write starting coordinates as CSV.
    Layout {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        layout: LayoutArgs,
    },
    /// Run the full pipeline and write all artifacts into `--out`.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        /// Start from these coordinates instead of computing a layout.
        #[arg(long)]
        coords: Option<PathBuf>,
        #[arg(long)]
        d_min: Option<f64>,
        #[arg(long)]
        d_max: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Check coordinates against the register limits and print the report.
    Check {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        coords: PathBuf,
    },
    /// Write the mixed-integer baseline model in `.udgp` text form.
    ExportModel {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Render coordinates as SVG.
    Plot {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        coords: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Maximum independent set over sites, read from CSV or generated in clusters.
    Mis {
        /// CSV with `x,y` columns; without it clustered sites are generated.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 87)]
        sites: usize,
        #[arg(long, default_value_t = 8)]
        clusters: usize,
        #[arg(long, default_value_t = 3000.0)]
        extent: f64,
        #[arg(long, default_value_t = 250.0)]
        spread: f64,
        #[arg(long, conflicts_with = "target_degree")]
        conflict_distance: Option<f64>,
        /// Pick the smallest conflict distance reaching this maximum degree.
        #[arg(long)]
        target_degree: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PENALTY)]
        penalty: f64,
    },
    /// Lattice protein folding matches.
    Protein {
        #[arg(long)]
        length: usize,
        /// Comma-separated 1-based hydrophobic positions.
        #[arg(long, value_delimiter = ',', required = true)]
        hydrophobic: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_PENALTY)]
        penalty: f64,
    },
    /// One-hot graph coloring.
    Coloring {
        /// Graph JSON to color.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        colors: usize,
        #[arg(long, default_value_t = 1.0)]
        onehot_weight: f64,
        #[arg(long, default_value_t = 1.0)]
        edge_weight: f64,
    },
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_coords(path: &Path) -> Result<Embedding> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Embedding::read_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn generate(problem: GenerateCommand, common: &Common) -> Result<()> {
    let q = match problem {
        GenerateCommand::Mis {
            points: Some(path),
            conflict_distance,
            penalty,
            ..
        } => {
            let dc = conflict_distance.context("--points needs --conflict-distance")?;
            Problem::load(&InputSource::Points {
                path,
                conflict_distance: dc,
                penalty,
            })?
            .qubo
            .expect("point inputs carry a QUBO")
        }
        GenerateCommand::Mis {
            points: None,
            sites,
            clusters,
            extent,
            spread,
            conflict_distance,
            target_degree,
            penalty,
        } => {
            let conflict = match (conflict_distance, target_degree) {
                (Some(d), _) => Conflict::Distance(d),
                (None, Some(t)) => Conflict::MaxDegree(t),
                (None, None) => anyhow::bail!("pass --conflict-distance or --target-degree"),
            };
            GeneratorSpec::Sites {
                n: sites,
                clusters,
                extent,
                spread,
                seed: common.seed,
                conflict,
                penalty,
            }
            .build()?
        }
        GenerateCommand::Protein {
            length,
            hydrophobic,
            penalty,
        } => GeneratorSpec::Protein {
            chain_length: length,
            hydrophobic,
            penalty,
        }
        .build()?,
        GenerateCommand::Coloring {
            graph,
            colors,
            onehot_weight,
            edge_weight,
        } => {
            let graph: Graph = read_json(&graph)?;
            GeneratorSpec::Coloring {
                graph,
                colors,
                onehot_weight,
                edge_weight,
            }
            .build()?
        }
    };
    let mut w = output(common.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &q)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let common = &cli.common;
    match cli.command {
        Command::Generate { problem } => generate(problem, common)?,
        Command::Layout { input, layout } => {
            let problem = input.problem()?;
            let e = initial_layout(&problem, &layout.choice(), common.dims, common.seed)?;
            let mut w = output(common.out.as_deref())?;
            e.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Embed {
            input,
            layout,
            coords,
            d_min,
            d_max,
            epsilon,
        } => {
            let config = PipelineConfig {
                input: input.source()?,
                physics: common.physics(),
                limits: LimitsOverride { d_min, d_max, epsilon },
                layout: coords.map_or_else(|| layout.choice(), LayoutChoice::Provided),
                train: TrainOptions {
                    max_epochs: common.max_epochs,
                    ..TrainOptions::default().with_seed(common.seed)
                },
                out_dir: common.out.clone().unwrap_or_else(|| PathBuf::from("gean-out")),
            };
            let outcome = run_embed(&config)?;
            for warning in &outcome.summary.warnings {
                eprintln!("warning: {warning}");
            }
            for row in &outcome.summary.components {
                eprintln!(
                    "component {}: n={} d_max={} k_max={} epochs={} feasible={}",
                    row.component, row.n, row.d_max, row.k_max, row.epochs, row.feasible
                );
            }
            eprintln!(
                "register feasible={} ({} isolated, artifacts in {})",
                outcome.summary.feasible,
                outcome.summary.isolated.len(),
                config.out_dir.display()
            );
            return Ok(outcome.exit_code());
        }
        Command::Check { input, coords } => {
            let problem = input.problem()?;
            let e = read_coords(&coords)?;
            let limits = common.physics().limits()?.with_dims(e.dims())?;
            let report = check_feasibility(&e, &problem.graph, &limits)?;
            let mut w = output(common.out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            return Ok(if report.feasible { 0 } else { EXIT_INFEASIBLE });
        }
        Command::ExportModel { input } => {
            let problem = input.problem()?;
            let text = export_udgp_model(&problem.graph, &common.physics().limits()?, common.dims)?;
            let mut w = output(common.out.as_deref())?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        Command::Plot { input, coords } => {
            let problem = input.problem()?;
            let e = read_coords(&coords)?;
            let limits = common.physics().limits()?.with_dims(e.dims())?;
            let mut w = output(common.out.as_deref())?;
            w.write_all(plot_svg(&e, &problem.graph, &limits).as_bytes())?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
