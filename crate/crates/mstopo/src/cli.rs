//! Pipeline commands behind the `mstopo` binary.
//!
//! Each command reads the effective [`RunConfig`], stamps every artifact
//! with the tool version, configuration hash and seed, and writes into the
//! run's output directory. Later commands default their inputs to the
//! artifacts earlier commands place there, so
//! `gen-library → fit → optimize → render` chain through a single `--out`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::gp::{fit, FitOptions};
use crate::homog::{homogenize_library, BaseMaterial, PropertyDataset};
use crate::io::{self, FieldFile, FieldRow, ManifestRow, Meta, ValidationRep};
use crate::microlib::{build_library, standard_classes};
use crate::topopt::{assemble, DesignField, Optimizer, StageResult};

/// Exit code of a run that finished its work.
pub const EXIT_OK: i32 = 0;
/// Exit code of an optimization that stopped at the iteration cap.
pub const EXIT_MAX_ITERS: i32 = 2;

/// The four pipeline commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Build the cell library and homogenized dataset.
    GenLibrary,
    /// Fit the surrogate and run the holdout validation.
    Fit,
    /// Run the multiscale optimization.
    Optimize,
    /// Render images from a saved field.
    Render,
}

/// A parsed command line: the command plus the standard overrides.
#[derive(Clone, Debug)]
pub struct Invocation {
    /// Which command to run.
    pub command: Command,
    /// Configuration file; defaults apply when absent.
    pub config: Option<PathBuf>,
    /// Seed override.
    pub seed: Option<u64>,
    /// Output directory override.
    pub out: Option<PathBuf>,
}

impl Invocation {
    /// Loads the configuration, applies overrides, and runs the command.
    /// Returns the process exit code.
    pub fn run(&self) -> Result<i32> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply_overrides(self.seed, self.out.as_deref());
        config.validate()?;
        let meta = Meta::new(config.hash(), config.run.seed);
        fs::create_dir_all(&config.run.out).map_err(|e| Error::io(&config.run.out, e))?;
        match self.command {
            Command::GenLibrary => cmd_gen_library(&config, &meta),
            Command::Fit => cmd_fit(&config, &meta),
            Command::Optimize => cmd_optimize(&config, &meta),
            Command::Render => cmd_render(&config, &meta),
        }
    }
}

/// `gen-library`: rasterize the volume-fraction sweep of every class, store
/// the grids as PGM, homogenize them, and write the manifest and dataset.
fn cmd_gen_library(config: &RunConfig, meta: &Meta) -> Result<i32> {
    let lib = &config.library;
    let entries = build_library(lib.samples_per_class, (lib.vf_range[0], lib.vf_range[1]))?;
    let material = BaseMaterial::new(config.material.youngs, config.material.poisson)?;

    let out = &config.run.out;
    let mut manifest = Vec::with_capacity(entries.len());
    for entry in &entries {
        let sample = manifest
            .iter()
            .filter(|r: &&ManifestRow| r.class_id == entry.class_id)
            .count();
        let grid_file = format!("grids/class{}_s{sample:02}.pgm", entry.class_id);
        io::write_pgm(&out.join(&grid_file), meta, &entry.grid)?;
        manifest.push(ManifestRow {
            class_id: entry.class_id,
            target_vf: entry.target_vf,
            achieved_vf: entry.achieved_vf,
            grid_file,
        });
    }
    io::write_manifest(&out.join("manifest.csv"), meta, &manifest)?;

    let dataset = homogenize_library(&entries, &material)?;
    io::write_dataset(&out.join("dataset.csv"), meta, &dataset)?;

    println!(
        "library: {} cells ({} classes x {} samples) -> {}",
        entries.len(),
        manifest.iter().map(|r| r.class_id).max().unwrap_or(0),
        lib.samples_per_class,
        out.display()
    );
    println!("dataset: {} rows -> {}", dataset.len(), out.join("dataset.csv").display());
    Ok(EXIT_OK)
}

/// A train/test split that keeps every class represented in training.
fn stratified_split(
    dataset: &PropertyDataset,
    holdout: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.samples.iter().enumerate() {
        by_class.entry(s.input.class).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut indices) in by_class {
        if indices.len() < 2 {
            train.extend(indices);
            continue;
        }
        indices.shuffle(rng);
        let n_test = ((indices.len() as f64 * holdout).round() as usize)
            .clamp(1, indices.len() - 1);
        test.extend(indices.drain(..n_test));
        train.extend(indices);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// `fit`: run the repeated holdout validation, fit the final surrogate on
/// the full dataset, and write the model, latent table and validation logs.
fn cmd_fit(config: &RunConfig, meta: &Meta) -> Result<i32> {
    let dataset_path = config.resolve(&config.fit.dataset, "dataset.csv");
    let dataset = io::read_dataset(&dataset_path)?;
    let out = &config.run.out;

    let options = |seed: u64| FitOptions {
        n_starts: config.fit.n_starts,
        max_iters: config.fit.max_iters,
        nugget: config.fit.nugget,
        seed,
        ..FitOptions::default()
    };

    // Repeated random train/test splits, each with its own logged seed.
    let mut master = ChaCha8Rng::seed_from_u64(config.run.seed);
    let mut reps = Vec::with_capacity(config.fit.validation_reps);
    for rep in 0..config.fit.validation_reps {
        let rep_seed: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        let (train_idx, test_idx) =
            stratified_split(&dataset, config.fit.holdout_fraction, &mut rng);
        let train = dataset.subset(&train_idx).to_training_set()?;
        let model = fit(&train, &options(rep_seed))?;

        let mut sq_err = vec![0.0; model.n_responses()];
        for &i in &test_idx {
            let sample = &dataset.samples[i];
            let pred = model.predict_class(sample.input.vf, sample.input.class)?;
            let actual = sample.stiffness.components();
            for (j, err) in sq_err.iter_mut().enumerate() {
                *err += (pred[j] - actual[j]).powi(2);
            }
        }
        let mse: Vec<f64> = sq_err.iter().map(|s| s / test_idx.len() as f64).collect();
        reps.push(ValidationRep {
            rep,
            seed: rep_seed,
            mse,
        });
    }

    // Final fit on everything, seeded by the master seed.
    let full = dataset.to_training_set()?;
    let model = fit(&full, &options(config.run.seed))?;

    let names = model.response_names().to_vec();
    io::write_validation(&out.join("validation.csv"), meta, &names, &reps)?;
    io::write_validation_summary(&out.join("validation_summary.csv"), meta, &names, &reps)?;
    io::write_model(&out.join("model.json"), meta, &model)?;
    io::write_latent_table(&out.join("latent.csv"), meta, &model)?;

    println!(
        "validation ({} reps, {:.0}% holdout):",
        reps.len(),
        100.0 * config.fit.holdout_fraction
    );
    println!("  {:<6} {:>13} {:>13}", "", "mse_mean", "mse_variance");
    for (j, name) in names.iter().enumerate() {
        let mean = reps.iter().map(|r| r.mse[j]).sum::<f64>() / reps.len() as f64;
        let var = if reps.len() > 1 {
            reps.iter().map(|r| (r.mse[j] - mean).powi(2)).sum::<f64>() / (reps.len() - 1) as f64
        } else {
            0.0
        };
        println!("  {name:<6} {mean:>13.6e} {var:>13.6e}");
    }
    println!(
        "model: {} training samples, phi = {:.4} -> {}",
        model.n_train(),
        model.phi(),
        out.join("model.json").display()
    );
    for (class, z) in model.export_latent() {
        println!("  class {class}: z = ({:.4}, {:.4})", z[0], z[1]);
    }
    Ok(EXIT_OK)
}

/// Everything `optimize` produces before serialization.
struct OptimizeOutcome {
    stages: Vec<StageResult>,
    field: DesignField,
    scatter: Vec<(usize, [f64; 2])>,
}

/// `optimize`: run the configured pipeline and write traces, fields,
/// renderings and the summary.
fn cmd_optimize(config: &RunConfig, meta: &Meta) -> Result<i32> {
    let model_path = config.resolve(&config.optimize.model, "model.json");
    let (_, model) = io::read_model(&model_path)?;
    let problem = config.optimize.build_problem()?;
    let optimizer = Optimizer::new(&problem, &model)?;
    let out = &config.run.out;

    let outcome = match config.optimize.mode {
        Mode::Multi => {
            let s1 = optimizer.stage1()?;
            println!(
                "stage 1: {} iterations, c = {:.6}, V = {:.4}{}",
                s1.iterations,
                s1.compliance,
                s1.volume,
                if s1.converged { "" } else { " (iteration cap)" }
            );
            // The latent points driving the class choice: the physical
            // (filtered) stage-1 field.
            let z1 = optimizer.filter().apply(&s1.field.z[0]);
            let z2 = optimizer.filter().apply(&s1.field.z[1]);
            let scatter = optimizer
                .active_elems()
                .iter()
                .zip(z1.iter().zip(&z2))
                .map(|(&e, (&a, &b))| (e, [a, b]))
                .collect();
            let s2 = optimizer.stage2(&s1.field)?;
            println!(
                "stage 2: {} iterations, c = {:.6}, V = {:.4}{}",
                s2.iterations,
                s2.compliance,
                s2.volume,
                if s2.converged { "" } else { " (iteration cap)" }
            );
            let field = s2.field.clone();
            OptimizeOutcome {
                stages: vec![s1, s2],
                field,
                scatter,
            }
        }
        Mode::Single => {
            let s = optimizer.run_single_class(config.optimize.single_class)?;
            println!(
                "single-class baseline (class {}): {} iterations, c = {:.6}, V = {:.4}{}",
                config.optimize.single_class,
                s.iterations,
                s.compliance,
                s.volume,
                if s.converged { "" } else { " (iteration cap)" }
            );
            let scatter = optimizer
                .active_elems()
                .iter()
                .zip(s.field.z[0].iter().zip(&s.field.z[1]))
                .map(|(&e, (&a, &b))| (e, [a, b]))
                .collect();
            let field = s.field.clone();
            OptimizeOutcome {
                stages: vec![s],
                field,
                scatter,
            }
        }
    };

    let converged = outcome.stages.iter().all(|s| s.converged);
    let trace: Vec<_> = outcome
        .stages
        .iter()
        .flat_map(|s| s.trace.iter().copied())
        .collect();
    io::write_trace(&out.join("trace.csv"), meta, &trace)?;

    // Field file: the realized densities plus per-element energies.
    let eval = optimizer.evaluate(&outcome.field)?;
    let energies = optimizer.compliance_density(&eval);
    let rho = optimizer.assembly_rho(&outcome.field);
    let classes_per_elem = outcome
        .field
        .class
        .clone()
        .expect("optimized fields are snapped");
    let mesh = &problem.mesh;
    let rows: Vec<FieldRow> = optimizer
        .active_elems()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let (ex, ey) = mesh.elem_coords(e);
            FieldRow {
                elem: e,
                ex,
                ey,
                rho: rho[i],
                z1: outcome.field.z[0][i],
                z2: outcome.field.z[1][i],
                class: classes_per_elem[i],
                compliance_density: energies[i],
            }
        })
        .collect();
    let field_file = FieldFile {
        nx: mesh.nx(),
        ny: mesh.ny(),
        rows,
    };
    io::write_field(&out.join("field.csv"), meta, &field_file)?;
    io::write_vtk(&out.join("field.vtk"), meta, &field_file)?;
    io::write_latent_scatter(
        &out.join("latent_scatter.csv"),
        meta,
        &model.anchors(),
        &outcome.scatter,
    )?;

    let counts = outcome
        .field
        .class_counts(model.n_levels())
        .expect("optimized fields are snapped");
    io::write_class_usage(&out.join("class_usage.csv"), meta, &counts)?;
    let total: usize = counts.iter().sum();
    println!("class usage:");
    for (i, &count) in counts.iter().enumerate() {
        if count > 0 {
            println!(
                "  class {}: {count} elements ({:.1}%)",
                i + 1,
                100.0 * count as f64 / total as f64
            );
        }
    }

    let structure = optimizer.assemble_structure(&outcome.field, &standard_classes())?;
    if !structure.clamped.is_empty() {
        println!(
            "note: {} elements clamped to their class's attainable volume fraction",
            structure.clamped.len()
        );
    }
    io::write_structure_png(&out.join("structure.png"), meta, &structure)?;

    let final_stage = outcome.stages.last().expect("at least one stage ran");
    let summary = serde_json::json!({
        "metadata": meta,
        "mode": match config.optimize.mode {
            Mode::Multi => "multi",
            Mode::Single => "single",
        },
        "stages": outcome.stages.iter().map(|s| {
            serde_json::json!({
                "stage": s.trace.first().map_or(0, |r| r.stage),
                "iterations": s.iterations,
                "converged": s.converged,
                "compliance": s.compliance,
                "volume": s.volume,
            })
        }).collect::<Vec<_>>(),
        "compliance": final_stage.compliance,
        "volume": final_stage.volume,
        "solid_fraction": structure.solid_fraction_active(),
        "clamped_elements": structure.clamped.len(),
        "class_usage": counts,
        "converged": converged,
    });
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    io::write_atomic(&out.join("summary.json"), text.as_bytes())?;

    println!(
        "final: c = {:.6}, V = {:.4}, structure {}x{} px -> {}",
        final_stage.compliance,
        final_stage.volume,
        structure.width,
        structure.height,
        out.display()
    );
    Ok(if converged { EXIT_OK } else { EXIT_MAX_ITERS })
}

/// `render`: rebuild images from a saved field file.
fn cmd_render(config: &RunConfig, meta: &Meta) -> Result<i32> {
    let field_path = config.resolve(&config.render.field, "field.csv");
    let mut field = io::read_field(&field_path)?;
    field.rows.sort_by_key(|r| r.elem);
    let out = &config.run.out;

    let classes = standard_classes();
    for row in &field.rows {
        if !classes.iter().any(|c| c.id() == row.class) {
            return Err(Error::InvalidInput(format!(
                "field references class {} which is not in the library",
                row.class
            )));
        }
    }

    let active: Vec<usize> = field.rows.iter().map(|r| r.elem).collect();
    let rho: Vec<f64> = field.rows.iter().map(|r| r.rho).collect();
    let class_ids: Vec<usize> = field.rows.iter().map(|r| r.class).collect();
    let keep: std::collections::BTreeSet<usize> = active.iter().copied().collect();
    let mesh = crate::fea::MacroMesh::with_active(field.nx, field.ny, |ex, ey| {
        keep.contains(&(ex * field.ny + ey))
    })?;

    let structure = assemble(&mesh, &active, &rho, &class_ids, &classes)?;
    io::write_structure_png(&out.join("structure.png"), meta, &structure)?;
    io::write_class_map_png(&out.join("class_map.png"), meta, &field)?;
    io::write_density_png(&out.join("density_map.png"), meta, &field)?;

    println!(
        "rendered {} elements -> {} ({}x{} px structure)",
        field.rows.len(),
        out.display(),
        structure.width,
        structure.height
    );
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_split_keeps_every_class_in_training() {
        let mut samples = Vec::new();
        for class in 1..=6usize {
            for k in 0..5 {
                samples.push(crate::homog::PropertySample {
                    input: crate::gp::MixedInput {
                        vf: 0.1 + 0.15 * k as f64,
                        class,
                    },
                    stiffness: crate::homog::StiffnessVec::from_components([
                        0.5, 0.1, 0.5, 0.2,
                    ]),
                });
            }
        }
        let dataset = PropertyDataset { samples };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (train, test) = stratified_split(&dataset, 0.2, &mut rng);
        assert_eq!(train.len() + test.len(), 30);
        assert_eq!(test.len(), 6); // one per class at 20%
        for class in 1..=6 {
            assert!(train
                .iter()
                .any(|&i| dataset.samples[i].input.class == class));
            assert!(test
                .iter()
                .any(|&i| dataset.samples[i].input.class == class));
        }
        // No overlap.
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 30);
    }

    #[test]
    fn split_is_deterministic_for_a_seed() {
        let samples: Vec<_> = (0..20)
            .map(|k| crate::homog::PropertySample {
                input: crate::gp::MixedInput {
                    vf: 0.1 + 0.04 * k as f64,
                    class: 1 + k % 4,
                },
                stiffness: crate::homog::StiffnessVec::from_components([0.5, 0.1, 0.5, 0.2]),
            })
            .collect();
        let dataset = PropertyDataset { samples };
        let a = stratified_split(&dataset, 0.25, &mut ChaCha8Rng::seed_from_u64(3));
        let b = stratified_split(&dataset, 0.25, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let c = stratified_split(&dataset, 0.25, &mut ChaCha8Rng::seed_from_u64(4));
        assert_ne!(a, c);
    }
}
