//! Run configuration: one TOML document drives every pipeline command.
//!
//! The same file can carry all four sections (`[library]`, `[fit]`,
//! `[optimize]`, `[render]`); each command reads the sections it needs and
//! ignores the rest. Unknown keys anywhere are rejected so typos fail loudly
//! instead of silently falling back to defaults. The `--seed` and `--out`
//! command-line flags override `[run]` keys; everything downstream sees only
//! the effective configuration, whose SHA-256 hash is stamped into every
//! artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fea::{LoadCase, MacroMesh};
use crate::homog::BaseMaterial;
use crate::topopt::TopOptProblem;

/// The effective configuration of one pipeline run.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed and output location.
    pub run: RunSection,
    /// Library generation (`gen-library`).
    pub library: LibrarySection,
    /// Base material for homogenization (`gen-library`).
    pub material: MaterialSection,
    /// Surrogate fitting and validation (`fit`).
    pub fit: FitSection,
    /// Optimization problem and knobs (`optimize`).
    pub optimize: OptimizeSection,
    /// Rendering inputs (`render`).
    pub render: RenderSection,
}

/// `[run]`: the two settings shared by every command.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; all randomness in a run flows from it.
    pub seed: u64,
    /// Output directory; inputs of later commands default to files here.
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// `[library]`: the volume-fraction sweep per class.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LibrarySection {
    /// Samples per class, uniformly spaced over `vf_range`.
    pub samples_per_class: usize,
    /// Inclusive endpoints of the volume-fraction sweep.
    pub vf_range: [f64; 2],
}

impl Default for LibrarySection {
    fn default() -> Self {
        Self {
            samples_per_class: 20,
            vf_range: [0.1, 0.9],
        }
    }
}

/// `[material]`: the solid phase of every cell.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    /// Young's modulus of the solid phase.
    pub youngs: f64,
    /// Poisson's ratio of the solid phase.
    pub poisson: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self {
            youngs: 1.0,
            poisson: 0.3,
        }
    }
}

/// `[fit]`: surrogate fitting and the repeated holdout validation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Dataset CSV to fit on; defaults to `<out>/dataset.csv`.
    pub dataset: Option<PathBuf>,
    /// Random multi-starts for the likelihood optimization.
    pub n_starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Diagonal nugget on the correlation matrix.
    pub nugget: f64,
    /// Repetitions of the random train/test validation protocol.
    pub validation_reps: usize,
    /// Fraction of samples held out per repetition.
    pub holdout_fraction: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            dataset: None,
            n_starts: 8,
            max_iters: 300,
            nugget: 1e-8,
            validation_reps: 10,
            holdout_fraction: 0.2,
        }
    }
}

/// Whether `optimize` runs the multiclass pipeline or a one-class baseline.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Stage 1 (joint) followed by Stage 2 (snapped classes).
    Multi,
    /// Density-only optimization with one class everywhere.
    Single,
}

/// `[optimize]`: problem, budget, and solver knobs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    /// Fitted model JSON to load; defaults to `<out>/model.json`.
    pub model: Option<PathBuf>,
    /// Multiclass pipeline or single-class baseline.
    pub mode: Mode,
    /// Class id used when `mode = "single"`.
    pub single_class: usize,
    /// Global volume-fraction budget over active elements.
    pub vmax: f64,
    /// Lower bound of each element's volume fraction.
    pub rho_min: f64,
    /// Upper bound of each element's volume fraction.
    pub rho_max: f64,
    /// Cone-filter radius in element widths.
    pub filter_radius: f64,
    /// MMA move limit as a fraction of each variable's range.
    pub move_limit: f64,
    /// Termination tolerance on the normalized design change.
    pub tol: f64,
    /// Iteration cap per stage.
    pub max_iters: usize,
    /// Measure the volume constraint on the filtered density field.
    pub volume_on_filtered: bool,
    /// Override for the latent-penalty sharpness.
    pub penalty_lambda: Option<f64>,
    /// Override for the latent-penalty decay scale.
    pub penalty_gamma: Option<f64>,
    /// Geometry, supports and loads.
    pub problem: ProblemSection,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            model: None,
            mode: Mode::Multi,
            single_class: 1,
            vmax: 0.6,
            rho_min: 0.1,
            rho_max: 0.95,
            filter_radius: 1.5,
            move_limit: 0.2,
            tol: 0.01,
            max_iters: 200,
            volume_on_filtered: false,
            penalty_lambda: None,
            penalty_gamma: None,
            problem: ProblemSection::default(),
        }
    }
}

/// Built-in geometries plus a fully explicit escape hatch.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Square domain with a passive top-right block; the left column hangs
    /// from its top edge and the lower arm carries a downward tip load.
    Lbeam,
    /// Simply supported beam with a downward midspan load on the bottom
    /// edge.
    Mbb,
    /// Left edge fixed, downward load at the right mid-height.
    Cantilever,
    /// Geometry, supports, passive blocks and load cases given explicitly.
    Custom,
}

/// `[optimize.problem]`: the macro domain and its boundary conditions.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    /// Which geometry to build.
    pub kind: ProblemKind,
    /// Elements along x.
    pub nx: usize,
    /// Elements along y.
    pub ny: usize,
    /// For `lbeam`: solid arm width as a fraction of the side length.
    pub arm_fraction: f64,
    /// For `custom`: nodal supports, shared by all load cases.
    pub supports: Vec<SupportSpec>,
    /// For `custom`: passive element rectangles (void cutouts).
    pub passive: Vec<RectSpec>,
    /// For `custom`: one entry per load case.
    pub cases: Vec<CaseSpec>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Lbeam,
            nx: 40,
            ny: 40,
            arm_fraction: 0.4,
            supports: Vec::new(),
            passive: Vec::new(),
            cases: Vec::new(),
        }
    }
}

/// A fixed node: grid coordinates plus which displacement components to pin.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SupportSpec {
    /// Node grid coordinate along x (`0..=nx`).
    pub x: usize,
    /// Node grid coordinate along y (`0..=ny`).
    pub y: usize,
    /// Which components to fix.
    pub fix: FixDir,
}

/// Displacement components pinned at a support.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FixDir {
    /// Horizontal only.
    X,
    /// Vertical only.
    Y,
    /// Both components.
    Xy,
}

/// An inclusive rectangle of passive elements.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    /// First element column.
    pub x0: usize,
    /// First element row.
    pub y0: usize,
    /// Last element column (inclusive).
    pub x1: usize,
    /// Last element row (inclusive).
    pub y1: usize,
}

/// One load case: point loads applied at nodes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    /// Point loads of this case.
    pub loads: Vec<LoadSpec>,
}

/// A nodal point load.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    /// Node grid coordinate along x (`0..=nx`).
    pub x: usize,
    /// Node grid coordinate along y (`0..=ny`).
    pub y: usize,
    /// Horizontal force component.
    pub fx: f64,
    /// Vertical force component.
    pub fy: f64,
}

/// `[render]`: inputs of the render command.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    /// Field CSV to render; defaults to `<out>/field.csv`.
    pub field: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and validates a TOML configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Applies command-line overrides; pass `None` to keep the file values.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<&Path>) {
        if let Some(seed) = seed {
            self.run.seed = seed;
        }
        if let Some(out) = out {
            self.run.out = out.to_path_buf();
        }
    }

    /// Checks every section that has standalone invariants.
    pub fn validate(&self) -> Result<()> {
        BaseMaterial::new(self.material.youngs, self.material.poisson)?;
        let [lo, hi] = self.library.vf_range;
        if self.library.samples_per_class == 0 {
            return Err(Error::Config("library.samples_per_class must be >= 1".into()));
        }
        if !(lo > 0.0 && hi > lo && hi <= 1.0) {
            return Err(Error::Config(format!(
                "library.vf_range [{lo}, {hi}] must satisfy 0 < lo < hi <= 1"
            )));
        }
        let fit = &self.fit;
        if fit.n_starts == 0 || fit.max_iters == 0 || fit.validation_reps == 0 {
            return Err(Error::Config(
                "fit.n_starts, fit.max_iters and fit.validation_reps must be >= 1".into(),
            ));
        }
        if !(fit.nugget >= 0.0 && fit.nugget.is_finite()) {
            return Err(Error::Config("fit.nugget must be finite and >= 0".into()));
        }
        if !(fit.holdout_fraction > 0.0 && fit.holdout_fraction < 1.0) {
            return Err(Error::Config(
                "fit.holdout_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.optimize.single_class == 0 {
            return Err(Error::Config("optimize.single_class is 1-based".into()));
        }
        self.optimize.problem.validate_shape()?;
        Ok(())
    }

    /// SHA-256 of the effective configuration, independent of key order and
    /// formatting in the source file.
    pub fn hash(&self) -> String {
        let canonical =
            toml::to_string(self).expect("a validated config always serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }

    /// Resolves an optional path against the output directory default.
    pub fn resolve(&self, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
        match explicit {
            Some(path) => path.clone(),
            None => self.run.out.join(default_name),
        }
    }
}

impl OptimizeSection {
    /// Builds the optimization problem this section describes.
    pub fn build_problem(&self) -> Result<TopOptProblem> {
        let (mesh, cases) = self.problem.build()?;
        let mut problem = TopOptProblem::new(mesh, cases, self.vmax)?;
        problem.rho_bounds = [self.rho_min, self.rho_max];
        problem.filter_radius = self.filter_radius;
        problem.move_limit = self.move_limit;
        problem.tol = self.tol;
        problem.max_iters = self.max_iters;
        problem.volume_on_filtered = self.volume_on_filtered;
        problem.penalty_lambda = self.penalty_lambda;
        problem.penalty_gamma = self.penalty_gamma;
        problem.validate()?;
        Ok(problem)
    }
}

impl ProblemSection {
    /// Validates what can be checked without building the mesh.
    fn validate_shape(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config("problem needs nx, ny >= 1".into()));
        }
        let explicit = !self.supports.is_empty() || !self.cases.is_empty();
        match self.kind {
            ProblemKind::Custom => {
                if self.supports.is_empty() || self.cases.is_empty() {
                    return Err(Error::Config(
                        "custom problems need explicit supports and at least one case".into(),
                    ));
                }
            }
            _ if explicit || !self.passive.is_empty() => {
                return Err(Error::Config(format!(
                    "problem kind {:?} defines its own supports, loads and passive \
                     region; use kind = \"custom\" to give them explicitly",
                    self.kind
                )));
            }
            ProblemKind::Lbeam => {
                let arm = self.arm_elems();
                if arm == 0 || arm >= self.nx.min(self.ny) {
                    return Err(Error::Config(format!(
                        "lbeam arm_fraction {} leaves no cutout on a {}x{} mesh",
                        self.arm_fraction, self.nx, self.ny
                    )));
                }
            }
            _ => {}
        }
        for s in &self.supports {
            if s.x > self.nx || s.y > self.ny {
                return Err(Error::Config(format!(
                    "support node ({}, {}) outside the {}x{} node grid",
                    s.x, s.y, self.nx, self.ny
                )));
            }
        }
        for r in &self.passive {
            if r.x1 < r.x0 || r.y1 < r.y0 || r.x1 >= self.nx || r.y1 >= self.ny {
                return Err(Error::Config(format!(
                    "passive rectangle ({}, {})..({}, {}) invalid on a {}x{} element grid",
                    r.x0, r.y0, r.x1, r.y1, self.nx, self.ny
                )));
            }
        }
        for (i, case) in self.cases.iter().enumerate() {
            if case.loads.is_empty() {
                return Err(Error::Config(format!("case {i} has no loads")));
            }
            for l in &case.loads {
                if l.x > self.nx || l.y > self.ny {
                    return Err(Error::Config(format!(
                        "load node ({}, {}) outside the {}x{} node grid",
                        l.x, l.y, self.nx, self.ny
                    )));
                }
                if !(l.fx.is_finite() && l.fy.is_finite()) {
                    return Err(Error::Config("load components must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Solid arm width of the L-beam in elements.
    fn arm_elems(&self) -> usize {
        (self.arm_fraction * self.nx.min(self.ny) as f64).round() as usize
    }

    /// Builds the mesh and load cases.
    pub fn build(&self) -> Result<(MacroMesh, Vec<LoadCase>)> {
        self.validate_shape()?;
        let (nx, ny) = (self.nx, self.ny);
        match self.kind {
            ProblemKind::Lbeam => {
                let arm = self.arm_elems();
                let mesh = MacroMesh::with_active(nx, ny, |ex, ey| ex < arm || ey < arm)?;
                let mut case = LoadCase::new().load(2 * mesh.node(nx, arm) + 1, -1.0);
                for ix in 0..=arm {
                    case = case.fix_node(mesh.node(ix, ny));
                }
                Ok((mesh, vec![case]))
            }
            ProblemKind::Mbb => {
                let mesh = MacroMesh::rectangle(nx, ny)?;
                let case = LoadCase::new()
                    .load(2 * mesh.node(nx / 2, 0) + 1, -1.0)
                    .fix_node(mesh.node(0, 0))
                    .fix(2 * mesh.node(nx, 0) + 1);
                Ok((mesh, vec![case]))
            }
            ProblemKind::Cantilever => {
                let mesh = MacroMesh::rectangle(nx, ny)?;
                let mut case = LoadCase::new().load(2 * mesh.node(nx, ny / 2) + 1, -1.0);
                for iy in 0..=ny {
                    case = case.fix_node(mesh.node(0, iy));
                }
                Ok((mesh, vec![case]))
            }
            ProblemKind::Custom => {
                let passive = self.passive.clone();
                let mesh = MacroMesh::with_active(nx, ny, |ex, ey| {
                    !passive
                        .iter()
                        .any(|r| ex >= r.x0 && ex <= r.x1 && ey >= r.y0 && ey <= r.y1)
                })?;
                let mut fixed_dofs = Vec::new();
                for s in &self.supports {
                    let node = mesh.node(s.x, s.y);
                    match s.fix {
                        FixDir::X => fixed_dofs.push(2 * node),
                        FixDir::Y => fixed_dofs.push(2 * node + 1),
                        FixDir::Xy => {
                            fixed_dofs.push(2 * node);
                            fixed_dofs.push(2 * node + 1);
                        }
                    }
                }
                let cases = self
                    .cases
                    .iter()
                    .map(|spec| {
                        let mut case = LoadCase::new();
                        for l in &spec.loads {
                            let node = mesh.node(l.x, l.y);
                            if l.fx != 0.0 {
                                case = case.load(2 * node, l.fx);
                            }
                            if l.fy != 0.0 {
                                case = case.load(2 * node + 1, l.fy);
                            }
                        }
                        for &dof in &fixed_dofs {
                            case = case.fix(dof);
                        }
                        case
                    })
                    .collect();
                Ok((mesh, cases))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = RunConfig::default();
        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
        assert_eq!(back.hash(), config.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[run]\nseeed = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("[optimizer]\nvmax = 0.5\n").is_err());
        assert!(toml::from_str::<RunConfig>("[optimize.problem]\nkindd = \"mbb\"\n").is_err());
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a: RunConfig = toml::from_str("[run]\nseed = 5\n[library]\nsamples_per_class = 4\n")
            .unwrap();
        let b: RunConfig = toml::from_str("[library]\nsamples_per_class = 4\n[run]\nseed = 5\n")
            .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c: RunConfig = toml::from_str("[run]\nseed = 6\n[library]\nsamples_per_class = 4\n")
            .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn overrides_replace_run_settings() {
        let mut config = RunConfig::default();
        config.apply_overrides(Some(42), Some(Path::new("elsewhere")));
        assert_eq!(config.run.seed, 42);
        assert_eq!(config.run.out, PathBuf::from("elsewhere"));
        config.apply_overrides(None, None);
        assert_eq!(config.run.seed, 42);
    }

    #[test]
    fn lbeam_preset_builds_the_cutout_domain() {
        let config = RunConfig::default();
        let problem = config.optimize.build_problem().unwrap();
        let mesh = &problem.mesh;
        assert_eq!((mesh.nx(), mesh.ny()), (40, 40));
        // 40x40 minus the 24x24 passive block.
        assert_eq!(mesh.n_active(), 1600 - 576);
        assert!(mesh.is_active(15, 39) && mesh.is_active(39, 15));
        assert!(!mesh.is_active(16, 16) && !mesh.is_active(39, 39));
        // Hanging from the top edge of the left column: 17 nodes, 34 dofs.
        assert_eq!(problem.cases[0].fixed.len(), 34);
        assert_eq!(
            problem.cases[0].loads,
            vec![(2 * mesh.node(40, 16) + 1, -1.0)]
        );
    }

    #[test]
    fn mbb_and_cantilever_presets_build() {
        let mut config = RunConfig::default();
        config.optimize.problem.kind = ProblemKind::Mbb;
        config.optimize.problem.nx = 60;
        config.optimize.problem.ny = 30;
        let problem = config.optimize.build_problem().unwrap();
        assert_eq!(problem.mesh.n_active(), 1800);
        assert_eq!(problem.cases[0].fixed.len(), 3);

        config.optimize.problem.kind = ProblemKind::Cantilever;
        let problem = config.optimize.build_problem().unwrap();
        assert_eq!(problem.cases[0].fixed.len(), 2 * 31);
    }

    #[test]
    fn custom_problems_validate_their_geometry() {
        let text = r#"
            [optimize.problem]
            kind = "custom"
            nx = 6
            ny = 3
            supports = [{ x = 0, y = 0, fix = "xy" }, { x = 6, y = 0, fix = "y" }]
            passive = [{ x0 = 2, y0 = 1, x1 = 3, y1 = 2 }]
            cases = [
                { loads = [{ x = 3, y = 3, fx = 0.0, fy = -1.0 }] },
                { loads = [{ x = 1, y = 3, fx = 0.0, fy = -0.5 }, { x = 5, y = 3, fx = 0.0, fy = -0.5 }] },
            ]
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        config.validate().unwrap();
        let problem = config.optimize.build_problem().unwrap();
        assert_eq!(problem.mesh.n_active(), 18 - 4);
        assert_eq!(problem.cases.len(), 2);
        assert_eq!(problem.cases[0].fixed, problem.cases[1].fixed);
        assert_eq!(problem.cases[1].loads.len(), 2);
    }

    #[test]
    fn invalid_settings_are_caught() {
        // Custom without supports.
        let bad: RunConfig = toml::from_str(
            "[optimize.problem]\nkind = \"custom\"\ncases = [{ loads = [{ x = 0, y = 0, fx = 1.0, fy = 0.0 }] }]\n",
        )
        .unwrap();
        assert!(bad.validate().is_err());
        // Preset with explicit loads.
        let bad: RunConfig = toml::from_str(
            "[optimize.problem]\nkind = \"mbb\"\ncases = [{ loads = [{ x = 0, y = 0, fx = 1.0, fy = 0.0 }] }]\n",
        )
        .unwrap();
        assert!(bad.validate().is_err());
        // Load node outside the grid.
        let bad: RunConfig = toml::from_str(
            r#"
            [optimize.problem]
            kind = "custom"
            nx = 4
            ny = 4
            supports = [{ x = 0, y = 0, fix = "xy" }]
            cases = [{ loads = [{ x = 9, y = 0, fx = 1.0, fy = 0.0 }] }]
            "#,
        )
        .unwrap();
        assert!(bad.validate().is_err());
        // Bad scalar sections.
        let mut bad = RunConfig::default();
        bad.fit.holdout_fraction = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = RunConfig::default();
        bad.material.poisson = 0.7;
        assert!(bad.validate().is_err());
        let mut bad = RunConfig::default();
        bad.library.vf_range = [0.9, 0.1];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn paths_resolve_against_the_output_directory() {
        let mut config = RunConfig::default();
        config.run.out = PathBuf::from("runs/demo");
        assert_eq!(
            config.resolve(&None, "dataset.csv"),
            PathBuf::from("runs/demo/dataset.csv")
        );
        config.fit.dataset = Some(PathBuf::from("elsewhere/data.csv"));
        assert_eq!(
            config.resolve(&config.fit.dataset.clone(), "dataset.csv"),
            PathBuf::from("elsewhere/data.csv")
        );
    }
}
