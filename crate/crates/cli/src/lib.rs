//! Pipeline, plotting and input handling behind the `gean` command.

pub mod input;
pub mod pipeline;
pub mod plot;

pub use input::{GeneratorSpec, InputSource, Problem};
pub use pipeline::{run_embed, LayoutChoice, PipelineConfig, RunOutcome, RunSummary, SummaryRow};
pub use plot::plot_svg;
