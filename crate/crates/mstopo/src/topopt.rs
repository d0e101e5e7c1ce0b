//! Three-stage multiscale topology optimization over the surrogate model.
//!
//! Each active macro element carries three design variables: a volume
//! fraction `rho` and a latent point `(z1, z2)` selecting a microstructure
//! concept. An iteration filters the design fields, predicts the element
//! stiffness components from the surrogate, scales them by the smooth
//! latent-distance penalty, solves the macro elasticity problem, and feeds
//! adjoint sensitivities to a moving-asymptote update:
//!
//! * **Stage 1** optimizes `(rho, z1, z2)` jointly from a uniform full
//!   structure of the first class at the volume budget.
//! * **Stage 2** snaps every element's latent point to the nearest class
//!   anchor, then re-optimizes `rho` alone with the classes frozen.
//! * **Stage 3** assembles a full-resolution pixel image by tiling each
//!   element with its class rasterized at the optimized volume fraction.
//!
//! A single-class baseline (the same machinery with the latent point frozen
//! at one anchor throughout) quantifies the benefit of the multiclass
//! library.

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fea::{self, BasisK, LoadCase, MacroMesh, SolveResult};
use crate::gp::MrLvgpModel;
use crate::microlib::{MicroClass, GRID_RESOLUTION};
use crate::penalty::{PenaltyParams, DEFAULT_LAMBDA};
use crate::mma::Mma;

/// Default per-element volume fraction box.
pub const DEFAULT_RHO_BOUNDS: [f64; 2] = [0.1, 0.95];
/// Default cone-filter radius in element widths.
pub const DEFAULT_FILTER_RADIUS: f64 = 1.5;
/// Default termination tolerance on the normalized design change.
pub const DEFAULT_TOL: f64 = 0.01;
/// Default iteration cap per stage.
pub const DEFAULT_MAX_ITERS: usize = 200;
/// Latent box expansion beyond the anchor bounding box, per side.
const Z_BOX_MARGIN: f64 = 0.1;
/// Relative floor for predicted diagonal stiffness components.
const STIFFNESS_FLOOR: f64 = 1e-6;
/// Margin kept between `C12^2` and `C11*C22` after projection.
const PD_MARGIN: f64 = 1e-3;

/// Projects a predicted stiffness vector `[C11, C12, C22, C66]` onto the
/// positive-definite cone, zeroing the gradients of clamped components.
///
/// The surrogate mean is unconstrained, so in sparsely sampled pockets of
/// the latent box it can leave the physical cone: a shear or diagonal term
/// dips below zero, or the coupling term outgrows the diagonal. A single
/// such element makes the macro system indefinite, so intermediate iterates
/// clamp: diagonals are floored at a small fraction of the element's own
/// scale and `C12` is confined inside the diagonal bound. Zeroed gradients
/// keep the sensitivities consistent with the projected value; the clamps
/// never engage where the surrogate tracks real microstructures.
fn project_pd(y: &mut [f64; 4], grads: &mut [&mut [f64; 4]]) -> bool {
    let scale = y.iter().fold(1e-9f64, |m, v| m.max(v.abs()));
    let floor = STIFFNESS_FLOOR * scale;
    let mut touched = false;
    for k in [0usize, 2, 3] {
        if y[k] < floor {
            y[k] = floor;
            for g in grads.iter_mut() {
                g[k] = 0.0;
            }
            touched = true;
        }
    }
    let lim = (1.0 - PD_MARGIN) * (y[0] * y[2]).sqrt();
    if y[1].abs() > lim {
        y[1] = lim.copysign(y[1]);
        for g in grads.iter_mut() {
            g[1] = 0.0;
        }
        touched = true;
    }
    touched
}

/// A macro-scale problem definition: mesh, loads, budget and knobs.
#[derive(Clone, Debug)]
pub struct TopOptProblem {
    /// Macro mesh with its active-element mask.
    pub mesh: MacroMesh,
    /// Load cases; compliance is their mean.
    pub cases: Vec<LoadCase>,
    /// Global volume fraction budget over active elements.
    pub vmax: f64,
    /// Per-element volume fraction box `[rho_min, rho_max]`.
    pub rho_bounds: [f64; 2],
    /// Cone-filter radius in element widths.
    pub filter_radius: f64,
    /// Termination tolerance on the normalized design change.
    pub tol: f64,
    /// Iteration cap per stage.
    pub max_iters: usize,
    /// MMA move limit as a fraction of each variable's range.
    pub move_limit: f64,
    /// Measure the volume constraint on the filtered field instead of the
    /// raw design variables.
    pub volume_on_filtered: bool,
    /// Override for the penalty sharpness (default 500).
    pub penalty_lambda: Option<f64>,
    /// Override for the penalty decay scale (default: anchor bounding-box
    /// diagonal).
    pub penalty_gamma: Option<f64>,
}

impl TopOptProblem {
    /// Creates a problem with default knobs and validates it.
    pub fn new(mesh: MacroMesh, cases: Vec<LoadCase>, vmax: f64) -> Result<Self> {
        let problem = Self {
            mesh,
            cases,
            vmax,
            rho_bounds: DEFAULT_RHO_BOUNDS,
            filter_radius: DEFAULT_FILTER_RADIUS,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            move_limit: crate::mma::DEFAULT_MOVE_LIMIT,
            volume_on_filtered: false,
            penalty_lambda: None,
            penalty_gamma: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Checks the mutual consistency of all settings.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.rho_bounds;
        if !(lo > 0.0) || !(hi > lo) || !(hi <= 1.0) {
            return Err(Error::Config(format!(
                "rho bounds [{lo}, {hi}] must satisfy 0 < lo < hi <= 1"
            )));
        }
        if !(self.vmax > lo) || !(self.vmax <= hi) {
            return Err(Error::Config(format!(
                "vmax {} must lie in ({lo}, {hi}]",
                self.vmax
            )));
        }
        if self.cases.is_empty() {
            return Err(Error::Config("at least one load case required".into()));
        }
        if !(self.filter_radius >= 0.0) {
            return Err(Error::Config("filter radius must be non-negative".into()));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config(
                "termination needs tol > 0 and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// The design variables of all active elements: raw (unfiltered) values.
#[derive(Clone, Debug)]
pub struct DesignField {
    /// Volume fraction per active element.
    pub rho: Vec<f64>,
    /// Latent coordinates per active element, one vector per axis.
    pub z: [Vec<f64>; 2],
    /// Snapped 1-based class ids (present from Stage 2 on).
    pub class: Option<Vec<usize>>,
}

impl DesignField {
    /// A uniform field at one volume fraction and latent point.
    pub fn uniform(n: usize, rho: f64, z: [f64; 2]) -> Self {
        Self {
            rho: vec![rho; n],
            z: [vec![z[0]; n], vec![z[1]; n]],
            class: None,
        }
    }

    /// Number of active elements covered.
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    /// Whether the field covers no elements.
    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Mean volume fraction of the raw design.
    pub fn mean_rho(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.rho.len().max(1) as f64
    }

    /// Element counts per class (index = class id − 1) for a snapped field.
    pub fn class_counts(&self, n_levels: usize) -> Option<Vec<usize>> {
        let classes = self.class.as_ref()?;
        let mut counts = vec![0usize; n_levels];
        for &c in classes {
            if c >= 1 && c <= n_levels {
                counts[c - 1] += 1;
            }
        }
        Some(counts)
    }
}

/// The filtered (physical) counterpart of a design field.
#[derive(Clone, Debug)]
pub struct FilteredField {
    /// Filtered volume fractions.
    pub rho: Vec<f64>,
    /// Filtered latent coordinates per axis.
    pub z: [Vec<f64>; 2],
}

/// Linear cone-weight smoothing over active elements.
///
/// Row `i` holds normalized weights `w_ij = max(0, r_min − dist_ij) / Σ` over
/// active neighbors `j`, so a filtered value is a convex combination of raw
/// values and a uniform field passes through unchanged. The sensitivity
/// back-map is the exact transpose.
#[derive(Clone, Debug)]
pub struct Filter {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Filter {
    /// Builds the weight table for the active elements of a mesh.
    pub fn build(mesh: &MacroMesh, active: &[usize], r_min: f64) -> Self {
        let mut index_of = vec![usize::MAX; mesh.n_elems()];
        for (i, &e) in active.iter().enumerate() {
            index_of[e] = i;
        }
        let reach = r_min.ceil() as isize;
        let (nx, ny) = (mesh.nx() as isize, mesh.ny() as isize);
        let rows = active
            .iter()
            .map(|&e| {
                let (ex, ey) = mesh.elem_coords(e);
                let (ex, ey) = (ex as isize, ey as isize);
                let mut row = Vec::new();
                let mut total = 0.0;
                for dx in -reach..=reach {
                    for dy in -reach..=reach {
                        let (jx, jy) = (ex + dx, ey + dy);
                        if jx < 0 || jy < 0 || jx >= nx || jy >= ny {
                            continue;
                        }
                        let j = index_of[mesh.elem_index(jx as usize, jy as usize)];
                        if j == usize::MAX {
                            continue;
                        }
                        let dist = ((dx * dx + dy * dy) as f64).sqrt();
                        let w = r_min - dist;
                        if w > 0.0 {
                            row.push((j, w));
                            total += w;
                        }
                    }
                }
                if row.is_empty() {
                    // Radius below one element width: identity.
                    row.push((index_of[e], 1.0));
                    total = 1.0;
                }
                for (_, w) in &mut row {
                    *w /= total;
                }
                row
            })
            .collect();
        Self { rows }
    }

    /// Number of active elements the filter covers.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Whether the filter covers no elements.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Applies the smoothing to a raw field.
    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * raw[j]).sum())
            .collect()
    }

    /// Maps a gradient with respect to the filtered field back to the raw
    /// variables (the transpose of [`Filter::apply`]).
    pub fn chain_back(&self, d_filtered: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; d_filtered.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] += w * d_filtered[i];
            }
        }
        out
    }
}

/// Per-element quantities produced by one design evaluation.
#[derive(Clone, Debug)]
struct ElemEval {
    /// Predicted stiffness components `[C11, C12, C22, C66]`.
    y: [f64; 4],
    /// Their derivatives with respect to the (filtered) volume fraction.
    dy_drho: [f64; 4],
    /// Their derivatives with respect to the (filtered) latent coordinates.
    dy_dz: [[f64; 4]; 2],
    /// Penalty value at the element's latent point.
    f: f64,
    /// Penalty gradient at the element's latent point.
    df_dz: [f64; 2],
}

/// Everything one design evaluation produces.
#[derive(Debug)]
pub struct Evaluation {
    /// Mean compliance over load cases.
    pub compliance: f64,
    /// Volume fraction charged against the budget.
    pub volume: f64,
    /// The filtered fields that drove the stiffness.
    pub filtered: FilteredField,
    /// Number of active elements whose predicted stiffness had to be
    /// projected onto the positive-definite cone.
    pub projected: usize,
    solve: SolveResult,
    elems: Vec<ElemEval>,
}

/// Objective and constraint gradients with respect to the raw variables.
#[derive(Clone, Debug)]
pub struct Sensitivities {
    /// `∂c/∂rho_e` per active element.
    pub dc_drho: Vec<f64>,
    /// `∂c/∂z_j,e` per latent axis and active element.
    pub dc_dz: [Vec<f64>; 2],
    /// `∂V/∂rho_e` per active element.
    pub dv_drho: Vec<f64>,
}

/// One row of the per-iteration optimization trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    /// Stage label (1 = joint, 2 = class-frozen).
    pub stage: usize,
    /// Iteration index within the stage; the final row reports the
    /// terminating design.
    pub iter: usize,
    /// Mean compliance of the design at this iteration.
    pub compliance: f64,
    /// Volume fraction of the design at this iteration.
    pub volume: f64,
    /// Normalized design change of the step taken from this design
    /// (zero on the final row).
    pub change: f64,
}

/// Outcome of one optimization stage.
#[derive(Clone, Debug)]
pub struct StageResult {
    /// The final design.
    pub field: DesignField,
    /// Mean compliance of the final design.
    pub compliance: f64,
    /// Volume fraction of the final design.
    pub volume: f64,
    /// Number of MMA updates performed.
    pub iterations: usize,
    /// Whether the design change dropped below tolerance before the cap.
    pub converged: bool,
    /// Per-iteration history including the final design.
    pub trace: Vec<TraceRow>,
}

/// A full-resolution pixel rendering of an optimized structure.
#[derive(Clone, Debug)]
pub struct AssembledStructure {
    /// Image width in pixels (`nx × cell resolution`).
    pub width: usize,
    /// Image height in pixels (`ny × cell resolution`).
    pub height: usize,
    /// Row-major solid mask; row 0 is the top edge (largest y).
    pub pixels: Vec<bool>,
    /// Pixel count belonging to active elements.
    pub active_pixels: usize,
    /// Elements whose volume fraction was clamped to the attainable range
    /// of their class, as `(element id, requested, used)`.
    pub clamped: Vec<(usize, f64, f64)>,
}

impl AssembledStructure {
    /// Solid fraction over the whole image.
    pub fn solid_fraction(&self) -> f64 {
        self.pixels.iter().filter(|&&p| p).count() as f64 / self.pixels.len() as f64
    }

    /// Solid fraction over the active (designable) region only.
    pub fn solid_fraction_active(&self) -> f64 {
        self.pixels.iter().filter(|&&p| p).count() as f64 / self.active_pixels.max(1) as f64
    }
}

/// Which design variables an optimization loop updates.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Variables {
    /// Stage 1: `rho` and both latent axes.
    Joint,
    /// Stage 2 and single-class baselines: `rho` only.
    RhoOnly,
}

/// The three-stage optimization driver binding a problem to a fitted model.
pub struct Optimizer<'a> {
    problem: &'a TopOptProblem,
    model: &'a MrLvgpModel,
    penalty: PenaltyParams,
    basis: BasisK,
    filter: Filter,
    active: Vec<usize>,
    z_bounds: [[f64; 2]; 2],
    passive_k: SMatrix<f64, 8, 8>,
}

impl<'a> Optimizer<'a> {
    /// Binds a problem to a model: builds the penalty from the fitted
    /// anchors (honoring overrides), the latent boxes, the filter table, and
    /// the stiffness used for passive elements.
    pub fn new(problem: &'a TopOptProblem, model: &'a MrLvgpModel) -> Result<Self> {
        problem.validate()?;
        let anchors = model.anchors();
        let defaults = PenaltyParams::from_anchors(anchors.clone())?;
        let penalty = PenaltyParams::new(
            problem.penalty_lambda.unwrap_or(DEFAULT_LAMBDA),
            problem.penalty_gamma.unwrap_or(defaults.gamma()),
            anchors.clone(),
        )?;

        // Latent boxes: anchor bounding box expanded by a margin per side;
        // degenerate axes get an absolute margin so the box stays a box.
        let mut z_bounds = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
        for a in &anchors {
            for i in 0..2 {
                z_bounds[i][0] = z_bounds[i][0].min(a[i]);
                z_bounds[i][1] = z_bounds[i][1].max(a[i]);
            }
        }
        for b in &mut z_bounds {
            let width = b[1] - b[0];
            let margin = if width > 1e-9 {
                Z_BOX_MARGIN * width
            } else {
                Z_BOX_MARGIN
            };
            b[0] -= margin;
            b[1] += margin;
        }

        let active = problem.mesh.active_elems();
        let filter = Filter::build(&problem.mesh, &active, problem.filter_radius);
        let basis = BasisK::unit_square();

        // Passive elements carry the stiffness of the first class at the
        // lower volume fraction bound; they are excluded from design
        // variables and volume accounting but keep the global system
        // non-singular across cutouts.
        let anchor1 = model.latent().coord(1);
        let pred_passive = model.predict(problem.rho_bounds[0], anchor1);
        let mut y_passive = [
            pred_passive[0],
            pred_passive[1],
            pred_passive[2],
            pred_passive[3],
        ];
        project_pd(&mut y_passive, &mut []);
        let f_passive = penalty.value(anchor1);
        let passive_k = basis.combine([
            f_passive * y_passive[0],
            f_passive * y_passive[1],
            f_passive * y_passive[2],
            f_passive * y_passive[3],
        ]);

        Ok(Self {
            problem,
            model,
            penalty,
            basis,
            filter,
            active,
            z_bounds,
            passive_k,
        })
    }

    /// The penalty in effect (anchors from the model, knobs from the
    /// problem).
    pub fn penalty(&self) -> &PenaltyParams {
        &self.penalty
    }

    /// Latent variable boxes per axis.
    pub fn z_bounds(&self) -> [[f64; 2]; 2] {
        self.z_bounds
    }

    /// Flat mesh indices of the active elements, ascending.
    pub fn active_elems(&self) -> &[usize] {
        &self.active
    }

    /// The filter in effect.
    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    /// 1-based id of the class whose anchor is nearest to `z` (ties keep
    /// the lowest id).
    pub fn snap(&self, z: [f64; 2]) -> usize {
        self.penalty.nearest_anchor(z) + 1
    }

    /// Evaluates a design: filter, predict, penalize, assemble, solve.
    ///
    /// A snapped field (Stage 2 on) keeps its latent points exactly on the
    /// anchors, so only `rho` passes through the filter there.
    pub fn evaluate(&self, field: &DesignField) -> Result<Evaluation> {
        let n = self.active.len();
        if field.len() != n || field.z[0].len() != n || field.z[1].len() != n {
            return Err(Error::InvalidInput(format!(
                "design field covers {} elements, mesh has {n} active",
                field.len()
            )));
        }
        let filtered = FilteredField {
            rho: self.filter.apply(&field.rho),
            z: if field.class.is_some() {
                [field.z[0].clone(), field.z[1].clone()]
            } else {
                [self.filter.apply(&field.z[0]), self.filter.apply(&field.z[1])]
            },
        };

        let evals: Vec<(ElemEval, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = [filtered.z[0][i], filtered.z[1][i]];
                let pred = self.model.predict_with_grad(filtered.rho[i], z);
                let (f, df_dz) = self.penalty.value_grad(z);
                let mut y = [pred.value[0], pred.value[1], pred.value[2], pred.value[3]];
                let mut dy_drho = [pred.d_vf[0], pred.d_vf[1], pred.d_vf[2], pred.d_vf[3]];
                let mut dy_dz1 = [pred.d_z[0][0], pred.d_z[0][1], pred.d_z[0][2], pred.d_z[0][3]];
                let mut dy_dz2 = [pred.d_z[1][0], pred.d_z[1][1], pred.d_z[1][2], pred.d_z[1][3]];
                let clamped =
                    project_pd(&mut y, &mut [&mut dy_drho, &mut dy_dz1, &mut dy_dz2]);
                (
                    ElemEval {
                        y,
                        dy_drho,
                        dy_dz: [dy_dz1, dy_dz2],
                        f,
                        df_dz,
                    },
                    clamped,
                )
            })
            .collect();
        let projected = evals.iter().filter(|(_, c)| *c).count();
        let elems: Vec<ElemEval> = evals.into_iter().map(|(e, _)| e).collect();

        let mut k_elems = vec![self.passive_k; self.problem.mesh.n_elems()];
        for (i, &e) in self.active.iter().enumerate() {
            let el = &elems[i];
            k_elems[e] = self.basis.combine([
                el.f * el.y[0],
                el.f * el.y[1],
                el.f * el.y[2],
                el.f * el.y[3],
            ]);
        }
        let solve = fea::solve(&self.problem.mesh, &self.problem.cases, &k_elems)?;

        let volume = if self.problem.volume_on_filtered {
            filtered.rho.iter().sum::<f64>() / n as f64
        } else {
            field.rho.iter().sum::<f64>() / n as f64
        };

        Ok(Evaluation {
            compliance: solve.compliance,
            volume,
            filtered,
            projected,
            solve,
            elems,
        })
    }

    /// Adjoint sensitivities of compliance and volume with respect to the
    /// raw design variables, chained back through the filter.
    pub fn sensitivities(&self, eval: &Evaluation) -> Sensitivities {
        let n = self.active.len();
        let mesh = &self.problem.mesh;
        let n_cases = self.problem.cases.len();

        // Per-element derivatives with respect to the filtered fields.
        let per_elem: Vec<(f64, f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let e = self.active[i];
                let el = &eval.elems[i];
                // Mean quadratic forms u_e' K_i u_e over load cases, one per
                // stiffness component.
                let mut qf = [0.0f64; 4];
                for case in 0..n_cases {
                    let u = eval.solve.elem_displacements(mesh, case, e);
                    for k in 0..4 {
                        qf[k] += u.dot(&(self.basis.component(k) * u));
                    }
                }
                for q in &mut qf {
                    *q /= n_cases as f64;
                }
                let energy: f64 = (0..4).map(|k| qf[k] * el.y[k]).sum();
                let dc_drho = -el.f * (0..4).map(|k| qf[k] * el.dy_drho[k]).sum::<f64>();
                let dc_dz = [0, 1].map(|j| {
                    -(el.f * (0..4).map(|k| qf[k] * el.dy_dz[j][k]).sum::<f64>()
                        + el.df_dz[j] * energy)
                });
                (dc_drho, dc_dz[0], dc_dz[1])
            })
            .collect();

        let dc_drho_f: Vec<f64> = per_elem.iter().map(|p| p.0).collect();
        let dc_dz1_f: Vec<f64> = per_elem.iter().map(|p| p.1).collect();
        let dc_dz2_f: Vec<f64> = per_elem.iter().map(|p| p.2).collect();

        let dv_drho = if self.problem.volume_on_filtered {
            self.filter.chain_back(&vec![1.0 / n as f64; n])
        } else {
            vec![1.0 / n as f64; n]
        };

        Sensitivities {
            dc_drho: self.filter.chain_back(&dc_drho_f),
            dc_dz: [
                self.filter.chain_back(&dc_dz1_f),
                self.filter.chain_back(&dc_dz2_f),
            ],
            dv_drho,
        }
    }

    /// Stage 1: joint `(rho, z)` optimization from the uniform first-class
    /// design at the volume budget.
    pub fn stage1(&self) -> Result<StageResult> {
        let n = self.active.len();
        let anchor1 = self.model.latent().coord(1);
        let field = DesignField::uniform(n, self.problem.vmax, anchor1);
        self.optimize(field, Variables::Joint, 1)
    }

    /// Stage 2: snap the latent field to the nearest anchors and

    /// re-optimize `rho` with the classes frozen.
    pub fn stage2(&self, stage1: &DesignField) -> Result<StageResult> {
        let field = self.snap_field(stage1);
        self.optimize(field, Variables::RhoOnly, 2)
    }

    /// Maps each element's (filtered, i.e. physical) latent point to its
    /// nearest class anchor.
    pub fn snap_field(&self, field: &DesignField) -> DesignField {
        let n = field.len();
        let (z1, z2) = if field.class.is_some() {
            (field.z[0].clone(), field.z[1].clone())
        } else {
            (self.filter.apply(&field.z[0]), self.filter.apply(&field.z[1]))
        };
        let mut classes = Vec::with_capacity(n);
        let mut z = [vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let class = self.snap([z1[i], z2[i]]);
            let anchor = self.model.latent().coord(class);
            classes.push(class);
            z[0][i] = anchor[0];
            z[1][i] = anchor[1];
        }
        DesignField {
            rho: field.rho.clone(),
            z,
            class: Some(classes),
        }
    }

    /// Baseline: the Stage-1 initialization and loop with the latent point
    /// frozen at the given class's anchor, optimizing `rho` only.
    pub fn run_single_class(&self, class: usize) -> Result<StageResult> {
        if class == 0 || class > self.model.n_levels() {
            return Err(Error::InvalidInput(format!(
                "class {class} outside 1..={}",
                self.model.n_levels()
            )));
        }
        let n = self.active.len();
        let anchor = self.model.latent().coord(class);
        let mut field = DesignField::uniform(n, self.problem.vmax, anchor);
        field.class = Some(vec![class; n]);
        self.optimize(field, Variables::RhoOnly, 1)
    }

    /// Volume fractions the assembled structure realizes: the field the
    /// volume budget was enforced on (raw by default, filtered when the
    /// constraint was measured there).
    pub fn assembly_rho(&self, field: &DesignField) -> Vec<f64> {
        if self.problem.volume_on_filtered {
            self.filter.apply(&field.rho)
        } else {
            field.rho.clone()
        }
    }

    /// Per-element compliance density of an evaluated design: the mean over
    /// load cases of the element strain energy measure `u_e' k_e u_e`.
    pub fn compliance_density(&self, eval: &Evaluation) -> Vec<f64> {
        let mesh = &self.problem.mesh;
        let n_cases = self.problem.cases.len();
        self.active
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let el = &eval.elems[i];
                let k = self.basis.combine([
                    el.f * el.y[0],
                    el.f * el.y[1],
                    el.f * el.y[2],
                    el.f * el.y[3],
                ]);
                (0..n_cases)
                    .map(|case| {
                        let u = eval.solve.elem_displacements(mesh, case, e);
                        u.dot(&(k * u))
                    })
                    .sum::<f64>()
                    / n_cases as f64
            })
            .collect()
    }

    /// Stage 3: tiles each active element with its snapped class rasterized
    /// at the element's optimized volume fraction; passive regions are void.
    /// Volume fractions outside a class's attainable range are clamped and
    /// reported.
    pub fn assemble_structure(
        &self,
        field: &DesignField,
        classes: &[MicroClass],
    ) -> Result<AssembledStructure> {
        let class_ids = field.class.as_ref().ok_or_else(|| {
            Error::InvalidInput("assembly requires a snapped (Stage 2) field".into())
        })?;
        let n = self.active.len();
        if field.len() != n {
            return Err(Error::InvalidInput(format!(
                "design field covers {} elements, mesh has {n} active",
                field.len()
            )));
        }
        let rho = self.assembly_rho(field);
        assemble(&self.problem.mesh, &self.active, &rho, class_ids, classes)
    }

    /// The shared MMA loop over whichever variables a stage exposes.
    fn optimize(
        &self,
        mut field: DesignField,
        vars: Variables,
        stage: usize,
    ) -> Result<StageResult> {
        let n = self.active.len();
        let [rho_lo, rho_hi] = self.problem.rho_bounds;
        let mut bounds: Vec<[f64; 2]> = vec![[rho_lo, rho_hi]; n];
        if vars == Variables::Joint {
            bounds.extend(std::iter::repeat(self.z_bounds[0]).take(n));
            bounds.extend(std::iter::repeat(self.z_bounds[1]).take(n));
        }
        let mut mma = Mma::new(bounds)?.with_move_limit(self.problem.move_limit)?;

        // Box widths scaling the normalized design change.
        let rho_w = rho_hi - rho_lo;
        let z_w = [
            (self.z_bounds[0][1] - self.z_bounds[0][0]).max(1e-9),
            (self.z_bounds[1][1] - self.z_bounds[1][0]).max(1e-9),
        ];

        let stage_err = |iter: usize, source: Error| Error::Stage {
            stage,
            iter,
            source: Box::new(source),
        };

        let mut trace = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        for iter in 0..self.problem.max_iters {
            let eval = self.evaluate(&field).map_err(|e| stage_err(iter, e))?;
            let sens = self.sensitivities(&eval);

            let dim = if vars == Variables::Joint { 3 * n } else { n };
            let mut x = Vec::with_capacity(dim);
            let mut df0 = Vec::with_capacity(dim);
            let mut df1 = vec![0.0; dim];
            x.extend_from_slice(&field.rho);
            df0.extend_from_slice(&sens.dc_drho);
            for j in 0..n {
                df1[j] = sens.dv_drho[j] / self.problem.vmax;
            }
            if vars == Variables::Joint {
                x.extend_from_slice(&field.z[0]);
                x.extend_from_slice(&field.z[1]);
                df0.extend_from_slice(&sens.dc_dz[0]);
                df0.extend_from_slice(&sens.dc_dz[1]);
            }
            let f1 = eval.volume / self.problem.vmax - 1.0;

            let x_new = mma
                .update(&x, eval.compliance, &df0, f1, &df1)
                .map_err(|e| stage_err(iter, e))?;

            let mut change = 0.0f64;
            for j in 0..n {
                change = change.max((x_new[j] - x[j]).abs() / rho_w);
            }
            if vars == Variables::Joint {
                for axis in 0..2 {
                    for j in 0..n {
                        let k = (axis + 1) * n + j;
                        change = change.max((x_new[k] - x[k]).abs() / z_w[axis]);
                    }
                }
            }

            field.rho.copy_from_slice(&x_new[..n]);
            if vars == Variables::Joint {
                field.z[0].copy_from_slice(&x_new[n..2 * n]);
                field.z[1].copy_from_slice(&x_new[2 * n..3 * n]);
            }

            trace.push(TraceRow {
                stage,
                iter,
                compliance: eval.compliance,
                volume: eval.volume,
                change,
            });
            iterations = iter + 1;
            if change < self.problem.tol {
                converged = true;
                break;
            }
        }

        let final_eval = self
            .evaluate(&field)
            .map_err(|e| stage_err(iterations, e))?;
        trace.push(TraceRow {
            stage,
            iter: iterations,
            compliance: final_eval.compliance,
            volume: final_eval.volume,
            change: 0.0,
        });

        Ok(StageResult {
            field,
            compliance: final_eval.compliance,
            volume: final_eval.volume,
            iterations,
            converged,
            trace,
        })
    }
}

/// Rasterizes an optimized field into a full-resolution pixel structure.
///
/// `active`, `rho` and `class_ids` run in parallel over the active elements
/// (ascending flat mesh index); each element is tiled with its class drawn
/// at its volume fraction, clamped to the class's attainable range when
/// necessary. Passive elements render void.
pub fn assemble(
    mesh: &MacroMesh,
    active: &[usize],
    rho: &[f64],
    class_ids: &[usize],
    classes: &[MicroClass],
) -> Result<AssembledStructure> {
    if rho.len() != active.len() || class_ids.len() != active.len() {
        return Err(Error::InvalidInput(format!(
            "assembly needs one density and class per active element \
             ({} elements, {} densities, {} classes)",
            active.len(),
            rho.len(),
            class_ids.len()
        )));
    }
    let res = GRID_RESOLUTION;
    let width = mesh.nx() * res;
    let height = mesh.ny() * res;
    let mut pixels = vec![false; width * height];
    let mut clamped = Vec::new();

    for (i, &e) in active.iter().enumerate() {
        let id = class_ids[i];
        let class = classes
            .iter()
            .find(|c| c.id() == id)
            .ok_or_else(|| Error::InvalidInput(format!("no class with id {id}")))?;
        let (lo, hi) = class.vf_bounds();
        let target = rho[i].clamp(lo, hi);
        if target != rho[i] {
            clamped.push((e, rho[i], target));
        }
        let thickness = class.solve_thickness(target)?.thickness;
        let grid = class.rasterize(thickness)?;
        let (ex, ey) = mesh.elem_coords(e);
        let col0 = ex * res;
        let row0 = (mesh.ny() - 1 - ey) * res;
        for ix in 0..res {
            for iy in 0..res {
                if grid.get(ix, iy) {
                    pixels[(row0 + res - 1 - iy) * width + col0 + ix] = true;
                }
            }
        }
    }

    Ok(AssembledStructure {
        width,
        height,
        pixels,
        active_pixels: active.len() * res * res,
        clamped,
    })
}
