use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mpi-forge",
    version,
    about = "Semantic multi-plane images from occupancy grids"
)]
pub struct Cli {
    /// Worker threads for the data-parallel stages.
    #[arg(long, global = true, env = "MPI_FORGE_THREADS")]
    pub threads: Option<usize>,

    /// JSON file with defaults for any tunable flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic occupancy grid and camera rig.
    Synth(SynthArgs),
    /// Build an MPI stack from a grid and a rig.
    Build(BuildArgs),
    /// Apply a JSON edit script to a grid.
    Edit(EditArgs),
    /// Front-most semantic and depth images for one view.
    Composite(CompositeArgs),
    /// Loss weight map for one view.
    Weights(WeightsArgs),
    /// Build a dataset index from grid files.
    Index(IndexArgs),
    /// Class-balanced sampling plan over a dataset index.
    Cbgs(CbgsArgs),
    /// Finite-difference check of the toy backward passes.
    Gradcheck(GradcheckArgs),
    /// Summary counts for a grid or a stack.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(try_from = "String")]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad size {s:?}: {e}"));
        let size = Size {
            width: parse(w)?,
            height: parse(h)?,
        };
        if size.width == 0 || size.height == 0 {
            return Err(format!("size must be positive, got {s:?}"));
        }
        Ok(size)
    }
}

impl TryFrom<String> for Size {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scene recipe JSON; the built-in street scene otherwise.
    #[arg(long)]
    pub recipe: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Rig JSON path; `<out stem>.rig.json` next to the grid by default.
    #[arg(long)]
    pub rig_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub rig: PathBuf,
    #[arg(long)]
    pub planes: Option<usize>,
    #[arg(long)]
    pub dmin: Option<f64>,
    #[arg(long)]
    pub dmax: Option<f64>,
    /// Output size as WxH.
    #[arg(long)]
    pub size: Option<Size>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub script: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-class diff of the change as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("outputs").required(true).multiple(true).args(["semantic", "depth"])))]
pub struct CompositeArgs {
    #[arg(long)]
    pub stack: PathBuf,
    #[arg(long)]
    pub view: Option<usize>,
    /// Colorized semantic image (binary PPM).
    #[arg(long)]
    pub semantic: Option<PathBuf>,
    /// Normalized depth image (binary PGM).
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Palette JSON; the occupancy palette otherwise.
    #[arg(long)]
    pub palette: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub stack: PathBuf,
    #[arg(long)]
    pub view: Option<usize>,
    #[arg(long)]
    pub step: u64,
    #[arg(long)]
    pub total_steps: Option<u64>,
    /// Weight reached at the end of both ramps.
    #[arg(long)]
    pub max_weight: Option<f64>,
    /// Depth in meters where the depth ramp saturates.
    #[arg(long)]
    pub max_depth: Option<f64>,
    /// Block-mean downsampling factor, e.g. 8 for latent resolution.
    #[arg(long)]
    pub downsample: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub grids: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CbgsArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub target_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Per-op results as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["grid", "stack"])))]
pub struct StatsArgs {
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub stack: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn size_parsing() {
        assert_eq!(
            "800x448".parse::<Size>().unwrap(),
            Size {
                width: 800,
                height: 448
            }
        );
        assert!("800".parse::<Size>().is_err());
        assert!("0x4".parse::<Size>().is_err());
        assert!("ax4".parse::<Size>().is_err());
    }
}
