use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::Parser;

use frontmesh::pipeline::{run, RunManifest};
use frontmesh::Mode;

/// Guaranteed-quality Delaunay mesh refinement.
///
/// Reads a PSLG in .poly format, splits its segments in proportion to the
/// local feature size, eliminates skinny triangles by off-center Steiner
/// insertion, and writes Triangle-compatible .node/.ele files plus a JSON
/// quality report next to the input.
#[derive(Parser)]
#[command(name = "frontmesh", version, disable_help_subcommand = true)]
struct Cli {
    /// Input PSLG in .poly format.
    input: PathBuf,

    /// Target minimum angle in degrees, strictly between 0 and 30.
    #[arg(long, default_value_t = 25.0)]
    angle: f64,

    /// Delaunay flavor: "truly" conforms without constraint flags,
    /// "constrained" restricts circumcircle emptiness to visible vertices.
    #[arg(long, default_value = "truly", value_parser = ["truly", "constrained"])]
    mode: String,

    /// Split density override; by default it is derived from the lemma
    /// conditions for the chosen angle and mode.
    #[arg(long)]
    nstar: Option<u32>,

    /// Abort on the first encroachment event instead of recording it.
    #[arg(long)]
    strict: bool,

    /// Write an SVG rendering of the mesh to this path.
    #[arg(long)]
    svg: Option<PathBuf>,

    /// Where to write the JSON quality report (default: input with
    /// .report.json).
    #[arg(long)]
    report: Option<PathBuf>,

    /// Dump the cached feature size of every refined PSLG vertex.
    #[arg(long)]
    dump_lfs: bool,

    /// Dump the refinement event log as JSON.
    #[arg(long)]
    dump_events: bool,

    /// Insertion budget; exceeding it aborts the run as nonterminating.
    #[arg(long, default_value_t = 1_000_000)]
    max_insertions: u64,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FRONTMESH_LOG")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };

    let manifest = RunManifest {
        input: cli.input,
        theta_deg: cli.angle,
        mode: if cli.mode == "constrained" {
            Mode::Constrained
        } else {
            Mode::Truly
        },
        nstar: cli.nstar,
        strict: cli.strict,
        max_insertions: cli.max_insertions,
        svg: cli.svg,
        report: cli.report,
        dump_lfs: cli.dump_lfs,
        dump_events: cli.dump_events,
    };
    exit(run(&manifest));
}
