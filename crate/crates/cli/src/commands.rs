use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use mpi_forge::cbgs::{balance_report, build_sampling_plan, DatasetIndex, FrameRecord};
use mpi_forge::edit::{apply_edit_script, diff_grids, EditScript};
use mpi_forge::io;
use mpi_forge::mpi::{build_rig_mpi, composite_depth, composite_depth_meters, composite_semantic};
use mpi_forge::palette::{colorize, Palette};
use mpi_forge::reweigh::{build_weight_map, downsample_weight_map, ReweighConfig};
use mpi_forge::stats::{grid_stats, stack_stats};
use mpi_forge::synth::{synth_scene, SceneRecipe};
use mpi_forge::toy::run_gradcheck;
use mpi_forge::{MpiConfig, SemanticLabel};
use serde::Serialize;

use crate::args::*;
use crate::config::{pick, FileConfig};

/// A check ran to completion and did not pass.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

pub fn run(command: Command, cfg: &FileConfig) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a, cfg),
        Command::Build(a) => build(a, cfg),
        Command::Edit(a) => edit(a),
        Command::Composite(a) => composite(a, cfg),
        Command::Weights(a) => weights(a, cfg),
        Command::Index(a) => index(a),
        Command::Cbgs(a) => cbgs(a, cfg),
        Command::Gradcheck(a) => gradcheck(a, cfg),
        Command::Stats(a) => stats(a),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn default_rig_path(grid_out: &Path) -> PathBuf {
    grid_out.with_extension("rig.json")
}

fn synth(a: SynthArgs, cfg: &FileConfig) -> Result<()> {
    let mut recipe = match &a.recipe {
        Some(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading recipe {}", path.display()))?;
            serde_json::from_slice::<SceneRecipe>(&bytes)
                .with_context(|| format!("parsing recipe {}", path.display()))?
        }
        None => SceneRecipe::default(),
    };
    if let Some(seed) = a.seed.or(cfg.synth.seed) {
        recipe.seed = seed;
    }
    let (grid, rig) = synth_scene(&recipe)?;
    let rig_out = a.rig_out.unwrap_or_else(|| default_rig_path(&a.out));
    io::write_grid(&a.out, &grid)?;
    io::write_rig(&rig_out, &rig)?;
    info!(
        "wrote {} ({} occupied voxels) and {} ({} cameras)",
        a.out.display(),
        grid.occupied_count(),
        rig_out.display(),
        rig.len()
    );
    Ok(())
}

fn build(a: BuildArgs, cfg: &FileConfig) -> Result<()> {
    let c = &cfg.build;
    let size = pick(
        a.size,
        c.size,
        Size {
            width: 800,
            height: 448,
        },
    );
    let config = MpiConfig::new(
        pick(a.planes, c.planes, 256),
        pick(a.dmin, c.dmin, 0.0),
        pick(a.dmax, c.dmax, 50.0),
        size.height,
        size.width,
    )?;
    let grid = io::read_grid(&a.grid)?;
    let rig = io::read_rig(&a.rig)?;
    info!(
        "building {} views x {} planes at {}x{}",
        rig.len(),
        config.planes(),
        size.width,
        size.height
    );
    let stack = build_rig_mpi(&grid, &rig, &config);
    io::write_stack(&a.out, &stack)?;
    Ok(())
}

fn edit(a: EditArgs) -> Result<()> {
    let grid = io::read_grid(&a.grid)?;
    let bytes = std::fs::read(&a.script).with_context(|| format!("reading script {}", a.script.display()))?;
    let script: EditScript =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing script {}", a.script.display()))?;
    let edited = apply_edit_script(&grid, &script)?;
    let diff = diff_grids(&grid, &edited)?;
    info!("{} voxels changed", diff.changed);
    io::write_grid(&a.out, &edited)?;
    if let Some(report) = &a.report {
        write_json(report, &diff)?;
    }
    Ok(())
}

fn composite(a: CompositeArgs, cfg: &FileConfig) -> Result<()> {
    let stack = io::read_stack(&a.stack)?;
    let view = pick(a.view, cfg.composite.view, 0);
    if let Some(path) = &a.semantic {
        let palette = match &a.palette {
            Some(p) => io::read_palette(p)?,
            None => Palette::occupancy(),
        };
        let rgb = colorize(&composite_semantic(&stack, view)?, &palette)?;
        let mut out = create(path)?;
        rgb.write_ppm(&mut out)?;
        out.flush()?;
    }
    if let Some(path) = &a.depth {
        let mut out = create(path)?;
        composite_depth(&stack, view)?.write_pgm(&mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn weights(a: WeightsArgs, cfg: &FileConfig) -> Result<()> {
    let c = &cfg.weights;
    let Some(total_steps) = a.total_steps.or(c.total_steps) else {
        bail!(crate::Usage("--total-steps is required (flag or config)".into()));
    };
    let reweigh = ReweighConfig::new(
        pick(a.max_weight, c.max_weight, 2.0),
        total_steps,
        pick(a.max_depth, c.max_depth, 50.0),
        SemanticLabel::object_classes(),
    )?;
    let stack = io::read_stack(&a.stack)?;
    let view = pick(a.view, c.view, 0);
    let semantic = composite_semantic(&stack, view)?;
    let depth = composite_depth_meters(&stack, view)?;
    let mut map = build_weight_map(&semantic, &depth, a.step, &reweigh)?;
    if let Some(factor) = a.downsample.or(c.downsample) {
        map = downsample_weight_map(&map, factor)?;
    }
    io::write_weight_map(&a.out, &map)?;
    Ok(())
}

fn index(a: IndexArgs) -> Result<()> {
    let mut frames = Vec::with_capacity(a.grids.len());
    for path in &a.grids {
        let grid = io::read_grid(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        frames.push(FrameRecord::from_grid(id, path.display().to_string(), &grid));
    }
    let index = DatasetIndex::new(frames)?;
    io::write_index(&a.out, &index)?;
    Ok(())
}

fn cbgs(a: CbgsArgs, cfg: &FileConfig) -> Result<()> {
    let index = io::read_index(&a.index)?;
    let target = pick(a.target_len, cfg.cbgs.target_len, index.len());
    let seed = pick(a.seed, cfg.cbgs.seed, 0);
    let plan = build_sampling_plan(&index, target, seed)?;
    let report = balance_report(&plan, &index)?;
    info!(
        "{} entries, exposure ratio {:.3} -> {:.3}",
        plan.entries.len(),
        report.ratio_before,
        report.ratio_after
    );
    io::write_plan(&a.out, &plan)?;
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    Ok(())
}

fn gradcheck(a: GradcheckArgs, cfg: &FileConfig) -> Result<()> {
    let c = &cfg.gradcheck;
    let tol = pick(a.tol, c.tol, 1e-4);
    if !(tol.is_finite() && tol > 0.0) {
        bail!(crate::Usage(format!("--tol must be positive, got {tol}")));
    }
    let report = run_gradcheck(
        pick(a.seed, c.seed, 3),
        pick(a.cases, c.cases, 20),
        pick(a.h, c.h, 1e-5),
    )?;
    eprint!("{report}");
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    if !report.passes(tol) {
        bail!(CheckFailed(format!(
            "gradcheck failed: max relative error {:.3e} exceeds {tol:.1e}",
            report.max_rel_error()
        )));
    }
    eprintln!("all ops within {tol:.1e}");
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    match (&a.grid, &a.stack) {
        (Some(g), None) => write_json(&a.out, &grid_stats(&io::read_grid(g)?)),
        (None, Some(s)) => write_json(&a.out, &stack_stats(&io::read_stack(s)?)),
        _ => bail!(crate::Usage("pass exactly one of --grid and --stack".into())),
    }
}
