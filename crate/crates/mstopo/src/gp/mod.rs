//! Multi-response Gaussian-process surrogate over mixed quantitative and
//! qualitative inputs.
//!
//! Each input pairs a volume fraction with a qualitative class label. Classes
//! are embedded as points (anchors) in a 2D latent space that is estimated
//! jointly with the quantitative length scale by maximum likelihood, so the
//! learned anchor geometry reflects how similarly classes respond. The
//! correlation between two inputs is
//!
//! ```text
//! r(s, s') = exp( -phi (x - x')^2 - || z(t) - z(t') ||^2 )
//! ```
//!
//! with `x` the scaled volume fraction and `z(t)` the latent anchor of class
//! `t`. All responses share this correlation; response coupling enters through
//! a profiled mean vector and a pooled covariance, both available in closed
//! form. The fitted model predicts all responses (and their derivatives with
//! respect to volume fraction and latent position) at arbitrary `(vf, z)`.
//!
//! Identifiability: the first anchor is pinned to the origin and the second to
//! the positive `z1` axis, removing translation, rotation, and reflection of
//! the latent space.

mod opt;

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One mixed input: a volume fraction plus a 1-based class label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedInput {
    pub vf: f64,
    pub class: usize,
}

/// A raw training set: mixed inputs with one row of responses each.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    inputs: Vec<MixedInput>,
    responses: DMatrix<f64>,
    response_names: Vec<String>,
    n_levels: usize,
}

impl TrainingSet {
    /// Validates and wraps a training set.
    ///
    /// Class labels must cover `1..=L` with every level present at least once;
    /// responses are one row per input.
    pub fn new(
        inputs: Vec<MixedInput>,
        responses: DMatrix<f64>,
        response_names: Vec<String>,
    ) -> Result<Self> {
        let n = inputs.len();
        if n < 2 {
            return Err(Error::InvalidInput(
                "training set needs at least two samples".into(),
            ));
        }
        if responses.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "{} response rows for {} inputs",
                responses.nrows(),
                n
            )));
        }
        if responses.ncols() == 0 {
            return Err(Error::InvalidInput("no response columns".into()));
        }
        if response_names.len() != responses.ncols() {
            return Err(Error::InvalidInput(format!(
                "{} response names for {} columns",
                response_names.len(),
                responses.ncols()
            )));
        }
        let n_levels = inputs.iter().map(|s| s.class).max().unwrap_or(0);
        if n_levels == 0 {
            return Err(Error::InvalidInput("class labels are 1-based".into()));
        }
        let mut seen = vec![false; n_levels];
        for s in &inputs {
            if s.class == 0 || s.class > n_levels {
                return Err(Error::InvalidInput(format!(
                    "class label {} outside 1..={}",
                    s.class, n_levels
                )));
            }
            if !s.vf.is_finite() {
                return Err(Error::InvalidInput("non-finite volume fraction".into()));
            }
            seen[s.class - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidInput(format!(
                "class {} has no samples",
                missing + 1
            )));
        }
        if responses.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite response value".into()));
        }
        Ok(Self {
            inputs,
            responses,
            response_names,
            n_levels,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    /// Whether the set is empty (never true for a constructed set).
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Number of qualitative levels `L`.
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Number of response columns.
    pub fn n_responses(&self) -> usize {
        self.responses.ncols()
    }

    /// The mixed inputs.
    pub fn inputs(&self) -> &[MixedInput] {
        &self.inputs
    }

    /// Raw responses, one row per input.
    pub fn responses(&self) -> &DMatrix<f64> {
        &self.responses
    }

    /// Response column names.
    pub fn response_names(&self) -> &[String] {
        &self.response_names
    }

    /// The subset at the given sample indices (order preserved).
    pub fn subset(&self, indices: &[usize]) -> Result<TrainingSet> {
        let inputs: Vec<MixedInput> = indices.iter().map(|&i| self.inputs[i]).collect();
        let mut responses = DMatrix::zeros(indices.len(), self.responses.ncols());
        for (row, &i) in indices.iter().enumerate() {
            responses.set_row(row, &self.responses.row(i));
        }
        TrainingSet::new(inputs, responses, self.response_names.clone())
    }
}

/// Latent anchor coordinates, one 2D point per qualitative level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentMap {
    coords: Vec<[f64; 2]>,
}

impl LatentMap {
    /// Wraps a coordinate list (level `k` at index `k - 1`).
    pub fn new(coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("latent map needs >= 1 level".into()));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite latent coordinate".into()));
        }
        Ok(Self { coords })
    }

    /// Number of levels.
    pub fn n_levels(&self) -> usize {
        self.coords.len()
    }

    /// Anchor of 1-based level `t`.
    pub fn coord(&self, level: usize) -> [f64; 2] {
        self.coords[level - 1]
    }

    /// All anchors in level order.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }
}

/// The Gaussian correlation between two mixed inputs given their scaled
/// quantitative coordinates and latent positions.
pub fn correlation(x: f64, z: [f64; 2], x_other: f64, z_other: [f64; 2], phi: f64) -> f64 {
    let dx = x - x_other;
    let d0 = z[0] - z_other[0];
    let d1 = z[1] - z_other[1];
    (-phi * dx * dx - d0 * d0 - d1 * d1).exp()
}

/// A training set after input scaling and response standardization; the form
/// consumed by likelihood evaluation and fitting.
#[derive(Clone, Debug)]
pub struct GpData {
    x: Vec<f64>,
    t: Vec<usize>,
    y: DMatrix<f64>,
    x_min: f64,
    x_range: f64,
    y_mean: DVector<f64>,
    y_std: DVector<f64>,
    names: Vec<String>,
    n_levels: usize,
    /// Raw inputs and responses, kept so fitted models serialize exactly what
    /// they were trained on.
    vf_raw: Vec<f64>,
    y_raw: DMatrix<f64>,
}

impl GpData {
    /// Scales volume fractions to `[0, 1]` over the observed range and
    /// standardizes each response column to zero mean and unit sample variance.
    pub fn prepare(ts: &TrainingSet) -> GpData {
        let n = ts.len();
        let q = ts.n_responses();
        let vfs: Vec<f64> = ts.inputs.iter().map(|s| s.vf).collect();
        let x_min = vfs.iter().cloned().fold(f64::INFINITY, f64::min);
        let x_max = vfs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let x_range = if x_max - x_min > 1e-12 {
            x_max - x_min
        } else {
            1.0
        };
        let x: Vec<f64> = vfs.iter().map(|&v| (v - x_min) / x_range).collect();
        let t: Vec<usize> = ts.inputs.iter().map(|s| s.class).collect();

        let mut y_mean = DVector::zeros(q);
        let mut y_std = DVector::from_element(q, 1.0);
        let mut y = ts.responses.clone();
        for j in 0..q {
            let col = ts.responses.column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n as f64 - 1.0);
            let std = var.sqrt();
            let std = if std.is_finite() && std > 0.0 { std } else { 1.0 };
            y_mean[j] = mean;
            y_std[j] = std;
            for i in 0..n {
                y[(i, j)] = (y[(i, j)] - mean) / std;
            }
        }
        GpData {
            x,
            t,
            y,
            x_min,
            x_range,
            y_mean,
            y_std,
            names: ts.response_names.clone(),
            n_levels: ts.n_levels,
            vf_raw: vfs,
            y_raw: ts.responses.clone(),
        }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Whether the set is empty (never true for a prepared set).
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of qualitative levels.
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }
}

/// Everything the likelihood evaluation produces besides its value.
struct NllEval {
    value: f64,
    /// Correlation matrix including the diagonal nugget.
    r: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    beta: DVector<f64>,
    /// `R^-1 (Y - h beta^T)`.
    a: DMatrix<f64>,
    sigma: DMatrix<f64>,
}

fn build_r(data: &GpData, latent: &LatentMap, phi: f64, nugget: f64) -> DMatrix<f64> {
    let n = data.len();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = 1.0 + nugget;
        let zi = latent.coord(data.t[i]);
        for j in (i + 1)..n {
            let zj = latent.coord(data.t[j]);
            let v = correlation(data.x[i], zi, data.x[j], zj, phi);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

fn eval_nll(data: &GpData, latent: &LatentMap, phi: f64, nugget: f64) -> Result<NllEval> {
    if latent.n_levels() != data.n_levels {
        return Err(Error::InvalidInput(format!(
            "latent map has {} levels, data has {}",
            latent.n_levels(),
            data.n_levels
        )));
    }
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::InvalidInput(format!("phi = {phi} must be positive")));
    }
    let n = data.len();
    let q = data.y.ncols();
    let r = build_r(data, latent, phi, nugget);
    let chol = Cholesky::new(r.clone()).ok_or(Error::IllConditionedData { nugget })?;
    let log_det_r = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();

    let h = DVector::<f64>::from_element(n, 1.0);
    let rinv_h = chol.solve(&h);
    let s_h = h.dot(&rinv_h);
    if !(s_h > 0.0) {
        return Err(Error::IllConditionedData { nugget });
    }
    // Profiled constant mean per response.
    let beta = (data.y.transpose() * &rinv_h) / s_h;
    let e = &data.y - &h * beta.transpose();
    let a = chol.solve(&e);
    // Pooled response covariance.
    let mut sigma = (e.transpose() * &a) / n as f64;
    let sym = (&sigma + sigma.transpose()) * 0.5;
    sigma.copy_from(&sym);
    let chol_sigma =
        Cholesky::new(sigma.clone()).ok_or(Error::IllConditionedData { nugget })?;
    let log_det_sigma = 2.0
        * chol_sigma
            .l_dirty()
            .diagonal()
            .iter()
            .map(|v| v.ln())
            .sum::<f64>();

    let value = n as f64 * log_det_sigma + q as f64 * log_det_r;
    if !value.is_finite() {
        return Err(Error::IllConditionedData { nugget });
    }
    Ok(NllEval {
        value,
        r,
        chol,
        beta,
        a,
        sigma,
    })
}

/// Gradient of the likelihood objective with respect to every latent
/// coordinate and `ln phi`.
struct NllGrad {
    d_latent: Vec<[f64; 2]>,
    d_ln_phi: f64,
}

fn eval_nll_grad(
    data: &GpData,
    latent: &LatentMap,
    phi: f64,
    nugget: f64,
) -> Result<(NllEval, NllGrad)> {
    let eval = eval_nll(data, latent, phi, nugget)?;
    let n = data.len();
    let q = data.y.ncols();

    // dL = tr(M dR) with M = q R^-1 - A Sigma^-1 A^T; the second term uses the
    // profiled-mean identity h^T R^-1 E = 0, which holds here by construction.
    let r_inv = eval.chol.inverse();
    let chol_sigma = Cholesky::new(eval.sigma.clone())
        .ok_or(Error::IllConditionedData { nugget })?;
    let w = chol_sigma.solve(&eval.a.transpose()); // Sigma^-1 A^T
    let m = r_inv * (q as f64) - &eval.a * w;

    let mut d_latent = vec![[0.0; 2]; latent.n_levels()];
    let mut d_ln_phi = 0.0;
    for i in 0..n {
        let ti = data.t[i];
        let zi = latent.coord(ti);
        for j in (i + 1)..n {
            let tj = data.t[j];
            let weight = 2.0 * m[(i, j)] * eval.r[(i, j)];
            let dx = data.x[i] - data.x[j];
            d_ln_phi += weight * (-phi * dx * dx);
            if ti != tj {
                let zj = latent.coord(tj);
                let dz = [zi[0] - zj[0], zi[1] - zj[1]];
                for k in 0..2 {
                    d_latent[ti - 1][k] += weight * (-2.0 * dz[k]);
                    d_latent[tj - 1][k] += weight * (2.0 * dz[k]);
                }
            }
        }
    }
    Ok((eval, NllGrad { d_latent, d_ln_phi }))
}

/// The likelihood objective `n ln|SigmaHat| + q ln|R|` (lower is better).
///
/// Fails when the correlation matrix cannot be factorized, e.g. duplicated
/// inputs with a zero nugget.
pub fn neg_log_likelihood(
    data: &GpData,
    latent: &LatentMap,
    phi: f64,
    nugget: f64,
) -> Result<f64> {
    eval_nll(data, latent, phi, nugget).map(|e| e.value)
}

/// Options for [`fit`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOptions {
    /// Latent dimensionality; only 2 is supported.
    pub latent_dim: usize,
    /// Number of random multi-starts for the likelihood optimization.
    pub n_starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Diagonal nugget added to the correlation matrix.
    pub nugget: f64,
    /// Seed for the start sampler.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            latent_dim: 2,
            n_starts: 8,
            max_iters: 300,
            nugget: 1e-8,
            seed: 0,
        }
    }
}

/// Free-parameter layout: `[a, z3x, z3y, ..., zLx, zLy, ln phi]` with level 1
/// pinned at the origin and level 2 at `(a, 0)`. A single-level map has only
/// `ln phi`.
fn unpack(theta: &[f64], n_levels: usize) -> (LatentMap, f64) {
    let mut coords = vec![[0.0; 2]; n_levels];
    if n_levels >= 2 {
        coords[1] = [theta[0], 0.0];
        for lev in 2..n_levels {
            coords[lev] = [theta[1 + 2 * (lev - 2)], theta[2 + 2 * (lev - 2)]];
        }
    }
    let phi = theta[theta.len() - 1].exp();
    (
        LatentMap { coords },
        phi,
    )
}

fn pack_grad(grad: &NllGrad, n_levels: usize, out: &mut [f64]) {
    if n_levels >= 2 {
        out[0] = grad.d_latent[1][0];
        for lev in 2..n_levels {
            out[1 + 2 * (lev - 2)] = grad.d_latent[lev][0];
            out[2 + 2 * (lev - 2)] = grad.d_latent[lev][1];
        }
    }
    let last = out.len() - 1;
    out[last] = grad.d_ln_phi;
}

fn free_dim(n_levels: usize) -> usize {
    if n_levels <= 1 {
        1
    } else {
        2 * n_levels - 2
    }
}

/// Fits the surrogate by multi-start maximum likelihood.
///
/// Deterministic for fixed data, options, and seed: starts are drawn from a
/// seeded generator, optimized independently, and the best final value wins
/// (ties break toward the lower start index). After fitting, the latent map is
/// reflected if needed so the second anchor lies on the positive `z1` axis.
pub fn fit(ts: &TrainingSet, opts: &FitOptions) -> Result<MrLvgpModel> {
    if opts.latent_dim != 2 {
        return Err(Error::Config(format!(
            "latent_dim = {} is unsupported; this implementation is 2D",
            opts.latent_dim
        )));
    }
    if opts.n_starts == 0 {
        return Err(Error::Config("n_starts must be >= 1".into()));
    }
    if !(opts.nugget >= 0.0) {
        return Err(Error::Config("nugget must be >= 0".into()));
    }
    let data = GpData::prepare(ts);
    let l = data.n_levels;
    let dim = free_dim(l);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.n_starts)
        .map(|_| {
            let mut theta = vec![0.0; dim];
            for slot in theta.iter_mut().take(dim - 1) {
                *slot = rng.random_range(-1.0..1.0);
            }
            theta[dim - 1] = rng.random_range(-3.0..3.0);
            theta
        })
        .collect();

    let runs: Vec<opt::MinimizeResult> = starts
        .par_iter()
        .map(|start| {
            let objective = |theta: &[f64], grad_out: &mut [f64]| -> f64 {
                let (latent, phi) = unpack(theta, l);
                match eval_nll_grad(&data, &latent, phi, opts.nugget) {
                    Ok((eval, grad)) => {
                        pack_grad(&grad, l, grad_out);
                        eval.value
                    }
                    Err(_) => {
                        grad_out.iter_mut().for_each(|g| *g = 0.0);
                        f64::INFINITY
                    }
                }
            };
            opt::minimize(objective, start, opts.max_iters, 1e-6)
        })
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value.is_finite())
        .min_by(|(ia, a), (ib, b)| {
            a.value
                .partial_cmp(&b.value)
                .expect("finite values compare")
                .then(ia.cmp(ib))
        })
        .map(|(_, r)| r)
        .ok_or(Error::FitFailure(opts.n_starts))?;

    let (mut latent, phi) = unpack(&best.x, l);
    // Canonical reflection: second anchor on the non-negative z1 half-axis.
    if l >= 2 && latent.coords[1][0] < 0.0 {
        for c in &mut latent.coords {
            c[0] = -c[0];
        }
    }
    MrLvgpModel::from_prepared(data, latent, phi, opts.nugget, opts.seed)
}

/// Joint prediction of all responses with derivatives at one point.
#[derive(Clone, Debug)]
pub struct Prediction {
    /// Predicted responses on the raw scale.
    pub value: DVector<f64>,
    /// Derivative of each response with respect to the raw volume fraction.
    pub d_vf: DVector<f64>,
    /// Derivative of each response with respect to the latent coordinates.
    pub d_z: [DVector<f64>; 2],
}

/// A fitted multi-response latent-variable Gaussian-process model.
#[derive(Clone, Debug)]
pub struct MrLvgpModel {
    latent: LatentMap,
    phi: f64,
    nugget: f64,
    seed: u64,
    x_min: f64,
    x_range: f64,
    y_mean: DVector<f64>,
    y_std: DVector<f64>,
    beta: DVector<f64>,
    sigma: DMatrix<f64>,
    neg_log_lik: f64,
    response_names: Vec<String>,
    train_vf: Vec<f64>,
    train_class: Vec<usize>,
    train_y: DMatrix<f64>,
    // Derived quantities rebuilt on load.
    train_x: Vec<f64>,
    a: DMatrix<f64>,
}

impl MrLvgpModel {
    /// Builds a model from explicit latent coordinates and length scale, without
    /// optimizing. Useful for constructing controlled surrogates.
    pub fn from_parameters(
        ts: &TrainingSet,
        latent: LatentMap,
        phi: f64,
        nugget: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::from_prepared(GpData::prepare(ts), latent, phi, nugget, seed)
    }

    fn from_prepared(
        data: GpData,
        latent: LatentMap,
        phi: f64,
        nugget: f64,
        seed: u64,
    ) -> Result<Self> {
        let eval = eval_nll(&data, &latent, phi, nugget)?;
        Ok(Self {
            latent,
            phi,
            nugget,
            seed,
            x_min: data.x_min,
            x_range: data.x_range,
            y_mean: data.y_mean.clone(),
            y_std: data.y_std.clone(),
            beta: eval.beta,
            sigma: eval.sigma,
            neg_log_lik: eval.value,
            response_names: data.names.clone(),
            train_vf: data.vf_raw.clone(),
            train_class: data.t.clone(),
            train_y: data.y_raw.clone(),
            train_x: data.x,
            a: eval.a,
        })
    }

    /// Number of qualitative levels.
    pub fn n_levels(&self) -> usize {
        self.latent.n_levels()
    }

    /// Number of response columns.
    pub fn n_responses(&self) -> usize {
        self.beta.len()
    }

    /// Number of training samples.
    pub fn n_train(&self) -> usize {
        self.train_x.len()
    }

    /// The fitted latent map.
    pub fn latent(&self) -> &LatentMap {
        &self.latent
    }

    /// Anchor coordinates in level order.
    pub fn anchors(&self) -> Vec<[f64; 2]> {
        self.latent.coords().to_vec()
    }

    /// The fitted quantitative length-scale parameter.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Diagonal nugget used during fitting.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Seed the fit was run with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Final value of the likelihood objective (lower is better).
    pub fn neg_log_likelihood(&self) -> f64 {
        self.neg_log_lik
    }

    /// Response column names.
    pub fn response_names(&self) -> &[String] {
        &self.response_names
    }

    /// Training volume fractions (raw).
    pub fn train_vf(&self) -> &[f64] {
        &self.train_vf
    }

    /// Training class labels.
    pub fn train_class(&self) -> &[usize] {
        &self.train_class
    }

    /// Training responses (raw), one row per sample.
    pub fn train_y(&self) -> &DMatrix<f64> {
        &self.train_y
    }

    /// Exports `(class_id, anchor)` pairs for plotting or snapping.
    pub fn export_latent(&self) -> Vec<(usize, [f64; 2])> {
        self.latent
            .coords()
            .iter()
            .enumerate()
            .map(|(k, &z)| (k + 1, z))
            .collect()
    }

    fn scale_x(&self, vf: f64) -> f64 {
        (vf - self.x_min) / self.x_range
    }

    /// The correlation vector between a query and every training sample.
    /// At exact input coincidence the nugget is included so training points
    /// reproduce their observations.
    fn r_star(&self, x: f64, z: [f64; 2]) -> (DVector<f64>, DVector<f64>) {
        let n = self.n_train();
        let mut r = DVector::zeros(n);
        let mut r_smooth = DVector::zeros(n);
        for i in 0..n {
            let zi = self.latent.coord(self.train_class[i]);
            let v = correlation(x, z, self.train_x[i], zi, self.phi);
            r_smooth[i] = v;
            r[i] = v;
            if x == self.train_x[i] && z == zi {
                r[i] += self.nugget;
            }
        }
        (r, r_smooth)
    }

    /// Predicts all responses at a free latent point.
    pub fn predict(&self, vf: f64, z: [f64; 2]) -> DVector<f64> {
        let x = self.scale_x(vf);
        let (r, _) = self.r_star(x, z);
        let std = &self.beta + self.a.transpose() * r;
        let mut out = DVector::zeros(self.n_responses());
        for j in 0..self.n_responses() {
            out[j] = self.y_mean[j] + self.y_std[j] * std[j];
        }
        out
    }

    /// Predicts all responses at the anchor of a class.
    pub fn predict_class(&self, vf: f64, class: usize) -> Result<DVector<f64>> {
        if class == 0 || class > self.n_levels() {
            return Err(Error::InvalidInput(format!(
                "class {class} outside 1..={}",
                self.n_levels()
            )));
        }
        Ok(self.predict(vf, self.latent.coord(class)))
    }

    /// Predicts all responses and their derivatives with respect to the raw
    /// volume fraction and the latent coordinates.
    pub fn predict_with_grad(&self, vf: f64, z: [f64; 2]) -> Prediction {
        let n = self.n_train();
        let q = self.n_responses();
        let x = self.scale_x(vf);
        let (r, r_smooth) = self.r_star(x, z);

        let mut dr_dx = DVector::zeros(n);
        let mut dr_dz0 = DVector::zeros(n);
        let mut dr_dz1 = DVector::zeros(n);
        for i in 0..n {
            let zi = self.latent.coord(self.train_class[i]);
            dr_dx[i] = -2.0 * self.phi * (x - self.train_x[i]) * r_smooth[i];
            dr_dz0[i] = -2.0 * (z[0] - zi[0]) * r_smooth[i];
            dr_dz1[i] = -2.0 * (z[1] - zi[1]) * r_smooth[i];
        }

        let at = self.a.transpose();
        let std = &self.beta + &at * r;
        let d_x = &at * dr_dx;
        let d_z0 = &at * dr_dz0;
        let d_z1 = &at * dr_dz1;

        let mut value = DVector::zeros(q);
        let mut d_vf = DVector::zeros(q);
        let mut g0 = DVector::zeros(q);
        let mut g1 = DVector::zeros(q);
        for j in 0..q {
            value[j] = self.y_mean[j] + self.y_std[j] * std[j];
            d_vf[j] = self.y_std[j] * d_x[j] / self.x_range;
            g0[j] = self.y_std[j] * d_z0[j];
            g1[j] = self.y_std[j] * d_z1[j];
        }
        Prediction {
            value,
            d_vf,
            d_z: [g0, g1],
        }
    }

    pub(crate) fn to_file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            seed: self.seed,
            nugget: self.nugget,
            n_levels: self.n_levels(),
            latent: self.latent.coords().to_vec(),
            phi: self.phi,
            x_min: self.x_min,
            x_range: self.x_range,
            y_mean: self.y_mean.iter().cloned().collect(),
            y_std: self.y_std.iter().cloned().collect(),
            beta: self.beta.iter().cloned().collect(),
            sigma: (0..self.sigma.nrows())
                .map(|i| (0..self.sigma.ncols()).map(|j| self.sigma[(i, j)]).collect())
                .collect(),
            neg_log_likelihood: self.neg_log_lik,
            response_names: self.response_names.clone(),
            train_vf: self.train_vf.clone(),
            train_class: self.train_class.clone(),
            train_y: (0..self.train_y.nrows())
                .map(|i| {
                    (0..self.train_y.ncols())
                        .map(|j| self.train_y[(i, j)])
                        .collect()
                })
                .collect(),
        }
    }

    pub(crate) fn from_file(file: ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::InvalidInput(format!(
                "unsupported model format {:?}",
                file.format
            )));
        }
        let n = file.train_vf.len();
        let q = file.response_names.len();
        if file.train_class.len() != n
            || file.train_y.len() != n
            || file.train_y.iter().any(|row| row.len() != q)
            || file.y_mean.len() != q
            || file.y_std.len() != q
            || file.beta.len() != q
            || file.latent.len() != file.n_levels
        {
            return Err(Error::InvalidInput("inconsistent model file shapes".into()));
        }
        if file
            .train_class
            .iter()
            .any(|&t| t == 0 || t > file.n_levels)
        {
            return Err(Error::InvalidInput("class label out of range".into()));
        }
        if !(file.x_range > 0.0) || !(file.phi > 0.0) {
            return Err(Error::InvalidInput("non-positive scale in model".into()));
        }
        let latent = LatentMap::new(file.latent)?;
        let y_mean = DVector::from_vec(file.y_mean);
        let y_std = DVector::from_vec(file.y_std);
        let train_y = DMatrix::from_fn(n, q, |i, j| file.train_y[i][j]);
        // Rebuild the derived pieces exactly as the fit computed them.
        let train_x: Vec<f64> = file
            .train_vf
            .iter()
            .map(|&v| (v - file.x_min) / file.x_range)
            .collect();
        let mut y_stdized = train_y.clone();
        for j in 0..q {
            for i in 0..n {
                y_stdized[(i, j)] = (y_stdized[(i, j)] - y_mean[j]) / y_std[j];
            }
        }
        let data = GpData {
            x: train_x.clone(),
            t: file.train_class.clone(),
            y: y_stdized.clone(),
            x_min: file.x_min,
            x_range: file.x_range,
            y_mean: y_mean.clone(),
            y_std: y_std.clone(),
            names: file.response_names.clone(),
            n_levels: file.n_levels,
            vf_raw: file.train_vf.clone(),
            y_raw: train_y.clone(),
        };
        let r = build_r(&data, &latent, file.phi, file.nugget);
        let chol = Cholesky::new(r).ok_or(Error::IllConditionedData {
            nugget: file.nugget,
        })?;
        let beta = DVector::from_vec(file.beta);
        let h = DVector::<f64>::from_element(n, 1.0);
        let e = &y_stdized - &h * beta.transpose();
        let a = chol.solve(&e);
        let sigma = DMatrix::from_fn(q, q, |i, j| file.sigma[i][j]);
        Ok(Self {
            latent,
            phi: file.phi,
            nugget: file.nugget,
            seed: file.seed,
            x_min: file.x_min,
            x_range: file.x_range,
            y_mean,
            y_std,
            beta,
            sigma,
            neg_log_lik: file.neg_log_likelihood,
            response_names: file.response_names,
            train_vf: file.train_vf,
            train_class: file.train_class,
            train_y,
            train_x,
            a,
        })
    }
}

pub(crate) const MODEL_FORMAT: &str = "mstopo-mrlvgp-v1";

/// Serialized form of a fitted model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct ModelFile {
    pub format: String,
    pub seed: u64,
    pub nugget: f64,
    pub n_levels: usize,
    pub latent: Vec<[f64; 2]>,
    pub phi: f64,
    pub x_min: f64,
    pub x_range: f64,
    pub y_mean: Vec<f64>,
    pub y_std: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub neg_log_likelihood: f64,
    pub response_names: Vec<String>,
    pub train_vf: Vec<f64>,
    pub train_class: Vec<usize>,
    pub train_y: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy_set(q: usize) -> TrainingSet {
        // Two classes, six samples, smooth distinct responses.
        let inputs = vec![
            MixedInput { vf: 0.2, class: 1 },
            MixedInput { vf: 0.5, class: 1 },
            MixedInput { vf: 0.8, class: 1 },
            MixedInput { vf: 0.3, class: 2 },
            MixedInput { vf: 0.6, class: 2 },
            MixedInput { vf: 0.9, class: 2 },
        ];
        let f = |vf: f64, class: usize, j: usize| {
            let base = if class == 1 { vf * vf } else { 0.5 * vf + 0.1 };
            // The sine keeps the response columns linearly independent.
            base + 0.3 * j as f64 * vf + 0.2 * ((j as f64 + 1.0) * 2.5 * vf).sin()
        };
        let responses = DMatrix::from_fn(6, q, |i, j| f(inputs[i].vf, inputs[i].class, j));
        TrainingSet::new(
            inputs,
            responses,
            (0..q).map(|j| format!("y{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn correlation_is_one_at_identical_inputs_and_halves_at_ln2() {
        assert_eq!(correlation(0.3, [0.1, -0.2], 0.3, [0.1, -0.2], 2.0), 1.0);
        let d = (2.0f64.ln()).sqrt();
        let r = correlation(0.0, [d, 0.0], 0.0, [0.0, 0.0], 5.0);
        assert_relative_eq!(r, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn correlation_matches_hand_computation() {
        let x = [0.0f64, 0.4, 1.0];
        let z = [[0.0f64, 0.0], [0.3, -0.1], [1.0, 0.5]];
        let phi = 1.7;
        for i in 0..3 {
            for j in 0..3 {
                let dx = x[i] - x[j];
                let dz0 = z[i][0] - z[j][0];
                let dz1 = z[i][1] - z[j][1];
                let want = (-phi * dx * dx - dz0 * dz0 - dz1 * dz1).exp();
                let got = correlation(x[i], z[i], x[j], z[j], phi);
                assert_relative_eq!(got, want, max_relative = 1e-15);
            }
        }
    }

    /// Single-response profile likelihood computed from first principles.
    fn sr_reference(data: &GpData, latent: &LatentMap, phi: f64, nugget: f64) -> f64 {
        let n = data.len();
        let r = build_r(data, latent, phi, nugget);
        let r_inv = r.clone().try_inverse().unwrap();
        let ones = DVector::<f64>::from_element(n, 1.0);
        let y = data.y.column(0).clone_owned();
        let beta = (ones.transpose() * &r_inv * &y)[(0, 0)]
            / (ones.transpose() * &r_inv * &ones)[(0, 0)];
        let e = &y - &ones * beta;
        let sigma2 = (e.transpose() * &r_inv * &e)[(0, 0)] / n as f64;
        n as f64 * sigma2.ln() + r.determinant().ln()
    }

    #[test]
    fn single_response_likelihood_matches_classic_formulas() {
        let ts = toy_set(1);
        let data = GpData::prepare(&ts);
        let latent = LatentMap::new(vec![[0.0, 0.0], [0.7, 0.0]]).unwrap();
        for phi in [0.5, 2.0, 10.0] {
            let mine = neg_log_likelihood(&data, &latent, phi, 1e-8).unwrap();
            let reference = sr_reference(&data, &latent, phi, 1e-8);
            assert_relative_eq!(mine, reference, max_relative = 1e-10);
        }
    }

    /// Dense multi-response likelihood via the full nq x nq Kronecker
    /// covariance: log-likelihood of vec(Y) under Sigma (x) R, dropping
    /// constants. Equals `n ln|SigmaHat| + q ln|R|` up to a data-independent
    /// offset, so the *differences* across parameter values must match.
    fn kron_reference(data: &GpData, latent: &LatentMap, phi: f64, nugget: f64) -> f64 {
        let n = data.len();
        let q = data.y.ncols();
        let r = build_r(data, latent, phi, nugget);
        let r_inv = r.clone().try_inverse().unwrap();
        let ones = DVector::<f64>::from_element(n, 1.0);
        let sh = (ones.transpose() * &r_inv * &ones)[(0, 0)];
        let beta = (data.y.transpose() * &r_inv * &ones) / sh;
        let e = &data.y - &ones * beta.transpose();
        let sigma = (e.transpose() * &r_inv * &e) / n as f64;
        // Profiled Gaussian log-likelihood (negated, scaled by 2, no constants):
        // n ln|Sigma| + q ln|R| + tr(Sigma^-1 E^T R^-1 E) where the trace is n*q.
        n as f64 * sigma.determinant().ln() + q as f64 * r.determinant().ln()
    }

    #[test]
    fn multi_response_likelihood_matches_dense_reference() {
        let ts = toy_set(3);
        let data = GpData::prepare(&ts);
        let latent = LatentMap::new(vec![[0.0, 0.0], [0.9, 0.0]]).unwrap();
        for phi in [0.8, 3.0] {
            let mine = neg_log_likelihood(&data, &latent, phi, 1e-8).unwrap();
            let reference = kron_reference(&data, &latent, phi, 1e-8);
            assert_relative_eq!(mine, reference, max_relative = 1e-10);
        }
    }

    #[test]
    fn duplicated_inputs_without_nugget_are_ill_conditioned() {
        let inputs = vec![
            MixedInput { vf: 0.5, class: 1 },
            MixedInput { vf: 0.5, class: 1 },
            MixedInput { vf: 0.8, class: 1 },
        ];
        let responses = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 2.0]);
        let ts = TrainingSet::new(inputs, responses, vec!["y".into()]).unwrap();
        let data = GpData::prepare(&ts);
        let latent = LatentMap::new(vec![[0.0, 0.0]]).unwrap();
        let err = neg_log_likelihood(&data, &latent, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::IllConditionedData { .. }));
        // The nugget rescues the same data.
        assert!(neg_log_likelihood(&data, &latent, 1.0, 1e-8).is_ok());
    }

    #[test]
    fn likelihood_is_invariant_under_latent_rotation() {
        let ts = toy_set(2);
        let data = GpData::prepare(&ts);
        let latent = LatentMap::new(vec![[0.2, -0.4], [0.9, 0.3]]).unwrap();
        let base = neg_log_likelihood(&data, &latent, 2.0, 1e-8).unwrap();
        for angle in [0.3f64, 1.2, 2.9] {
            let (s, c) = angle.sin_cos();
            let rotated: Vec<[f64; 2]> = latent
                .coords()
                .iter()
                .map(|&[x, y]| [c * x - s * y, s * x + c * y])
                .collect();
            let rot = LatentMap::new(rotated).unwrap();
            let val = neg_log_likelihood(&data, &rot, 2.0, 1e-8).unwrap();
            assert_relative_eq!(val, base, max_relative = 1e-10);
        }
    }

    #[test]
    fn likelihood_gradient_matches_finite_differences() {
        let ts = toy_set(2);
        let data = GpData::prepare(&ts);
        let theta = vec![0.6, -3.0f64.ln() / 2.0]; // a and ln phi, 2 levels
        let l = 2;
        let (latent, phi) = unpack(&theta, l);
        let (_, grad) = eval_nll_grad(&data, &latent, phi, 1e-8).unwrap();
        let mut packed = vec![0.0; theta.len()];
        pack_grad(&grad, l, &mut packed);
        let h = 1e-6;
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let (lp, pp) = unpack(&tp, l);
            let (lm, pm) = unpack(&tm, l);
            let fp = neg_log_likelihood(&data, &lp, pp, 1e-8).unwrap();
            let fm = neg_log_likelihood(&data, &lm, pm, 1e-8).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert_relative_eq!(packed[k], fd, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn likelihood_gradient_matches_fd_with_three_levels() {
        // Exercises the free coordinates of levels beyond the pinned pair.
        let inputs = vec![
            MixedInput { vf: 0.1, class: 1 },
            MixedInput { vf: 0.5, class: 1 },
            MixedInput { vf: 0.3, class: 2 },
            MixedInput { vf: 0.7, class: 2 },
            MixedInput { vf: 0.2, class: 3 },
            MixedInput { vf: 0.9, class: 3 },
        ];
        let responses = DMatrix::from_fn(6, 2, |i, j| {
            let s = &inputs[i];
            (s.class as f64) * 0.3 + s.vf * (1.0 + j as f64) + (s.vf * 3.0).sin() * 0.1
        });
        let ts = TrainingSet::new(inputs, responses, vec!["a".into(), "b".into()]).unwrap();
        let data = GpData::prepare(&ts);
        let l = 3;
        let theta = vec![0.8, -0.3, 0.5, 0.2]; // a, z3x, z3y, ln phi
        let (latent, phi) = unpack(&theta, l);
        let (_, grad) = eval_nll_grad(&data, &latent, phi, 1e-8).unwrap();
        let mut packed = vec![0.0; theta.len()];
        pack_grad(&grad, l, &mut packed);
        let h = 1e-6;
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let (lp, pp) = unpack(&tp, l);
            let (lm, pm) = unpack(&tm, l);
            let fp = neg_log_likelihood(&data, &lp, pp, 1e-8).unwrap();
            let fm = neg_log_likelihood(&data, &lm, pm, 1e-8).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert_relative_eq!(packed[k], fd, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn fit_interpolates_the_training_data() {
        let ts = toy_set(2);
        let model = fit(&ts, &FitOptions::default()).unwrap();
        for (i, s) in ts.inputs().iter().enumerate() {
            let pred = model.predict_class(s.vf, s.class).unwrap();
            for j in 0..2 {
                let want = ts.responses()[(i, j)];
                assert!(
                    (pred[j] - want).abs() <= 1e-8 * want.abs().max(1.0),
                    "sample {i} response {j}: {} vs {}",
                    pred[j],
                    want
                );
            }
        }
    }

    #[test]
    fn fit_pins_the_anchor_gauge() {
        let ts = toy_set(2);
        let model = fit(&ts, &FitOptions::default()).unwrap();
        let anchors = model.anchors();
        assert_eq!(anchors[0], [0.0, 0.0]);
        assert_eq!(anchors[1][1], 0.0);
        assert!(anchors[1][0] >= 0.0, "reflection not canonicalized");
    }

    #[test]
    fn fit_is_deterministic_for_a_fixed_seed() {
        let ts = toy_set(2);
        let m1 = fit(&ts, &FitOptions::default()).unwrap();
        let m2 = fit(&ts, &FitOptions::default()).unwrap();
        assert_eq!(m1.phi(), m2.phi());
        assert_eq!(m1.anchors(), m2.anchors());
        assert_eq!(m1.neg_log_likelihood(), m2.neg_log_likelihood());
    }

    #[test]
    fn single_level_data_fits_a_plain_gp() {
        let inputs: Vec<MixedInput> = (0..8)
            .map(|k| MixedInput {
                vf: 0.1 + 0.1 * k as f64,
                class: 1,
            })
            .collect();
        let responses = DMatrix::from_fn(8, 1, |i, _| (inputs[i].vf * 3.0).sin());
        let ts = TrainingSet::new(inputs.clone(), responses.clone(), vec!["y".into()]).unwrap();
        let model = fit(&ts, &FitOptions::default()).unwrap();
        assert_eq!(model.anchors(), vec![[0.0, 0.0]]);
        for (i, s) in inputs.iter().enumerate() {
            let p = model.predict_class(s.vf, 1).unwrap();
            assert!((p[0] - responses[(i, 0)]).abs() < 1e-8);
        }
    }

    #[test]
    fn far_latent_points_revert_to_the_mean() {
        let ts = toy_set(2);
        let model = fit(&ts, &FitOptions::default()).unwrap();
        let pred = model.predict(0.5, [100.0, -100.0]);
        // r* underflows to zero: the prediction is the de-standardized mean.
        for j in 0..2 {
            let mean_j = model.y_mean[j] + model.y_std[j] * model.beta[j];
            assert!(
                (pred[j] - mean_j).abs() <= 1e-10 * mean_j.abs().max(1.0),
                "response {j}"
            );
        }
    }

    #[test]
    fn prediction_gradient_matches_finite_differences() {
        let ts = toy_set(3);
        let model = fit(&ts, &FitOptions::default()).unwrap();
        let h = 1e-6;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let vf = rng.random_range(0.25..0.85);
            let z = [rng.random_range(-1.0..1.5), rng.random_range(-1.0..1.0)];
            let pred = model.predict_with_grad(vf, z);
            let up = model.predict(vf + h, z);
            let dn = model.predict(vf - h, z);
            for j in 0..3 {
                let fd = (up[j] - dn[j]) / (2.0 * h);
                assert_relative_eq!(pred.d_vf[j], fd, max_relative = 1e-5, epsilon = 1e-9);
            }
            for m in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[m] += h;
                zm[m] -= h;
                let up = model.predict(vf, zp);
                let dn = model.predict(vf, zm);
                for j in 0..3 {
                    let fd = (up[j] - dn[j]) / (2.0 * h);
                    assert_relative_eq!(
                        pred.d_z[m][j],
                        fd,
                        max_relative = 1e-5,
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_an_interior_maximum() {
        // Single-class toy with an interior peak in vf.
        let inputs: Vec<MixedInput> = (0..9)
            .map(|k| MixedInput {
                vf: 0.1 + 0.1 * k as f64,
                class: 1,
            })
            .collect();
        let responses = DMatrix::from_fn(9, 1, |i, _| {
            let v = inputs[i].vf;
            -(v - 0.52) * (v - 0.52)
        });
        let ts = TrainingSet::new(inputs, responses, vec!["y".into()]).unwrap();
        let model = fit(&ts, &FitOptions::default()).unwrap();
        // Golden-section search for the maximum of the prediction.
        let (mut lo, mut hi) = (0.3f64, 0.7f64);
        let gr = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - gr * (hi - lo);
            let m2 = lo + gr * (hi - lo);
            let f1 = model.predict(m1, [0.0, 0.0])[0];
            let f2 = model.predict(m2, [0.0, 0.0])[0];
            if f1 < f2 {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let vf_star = 0.5 * (lo + hi);
        let grad = model.predict_with_grad(vf_star, [0.0, 0.0]).d_vf[0];
        assert!(grad.abs() < 1e-6, "gradient at maximum: {grad}");
    }

    #[test]
    fn symmetric_anchors_give_symmetric_predictions() {
        // Three classes at mirrored anchors with mirrored responses: the
        // prediction is even in z1, so its z1-derivative vanishes on the axis.
        let inputs = vec![
            MixedInput { vf: 0.2, class: 1 },
            MixedInput { vf: 0.8, class: 1 },
            MixedInput { vf: 0.2, class: 2 },
            MixedInput { vf: 0.8, class: 2 },
            MixedInput { vf: 0.2, class: 3 },
            MixedInput { vf: 0.8, class: 3 },
        ];
        let responses = DMatrix::from_fn(6, 1, |i, _| match inputs[i].class {
            1 => 1.0 + inputs[i].vf,
            2 => 2.0 - inputs[i].vf,
            _ => 2.0 - inputs[i].vf, // class 3 mirrors class 2
        });
        let ts = TrainingSet::new(inputs, responses, vec!["y".into()]).unwrap();
        let latent =
            LatentMap::new(vec![[0.0, 0.5], [0.8, -0.2], [-0.8, -0.2]]).unwrap();
        let model = MrLvgpModel::from_parameters(&ts, latent, 2.0, 1e-8, 0).unwrap();
        for z2 in [-0.4, 0.0, 0.3] {
            let p = model.predict_with_grad(0.5, [0.0, z2]);
            assert!(
                p.d_z[0][0].abs() < 1e-12,
                "z1-gradient on the symmetry axis: {}",
                p.d_z[0][0]
            );
            let left = model.predict(0.5, [-0.3, z2]);
            let right = model.predict(0.5, [0.3, z2]);
            assert_relative_eq!(left[0], right[0], max_relative = 1e-12);
        }
    }

    #[test]
    fn model_file_round_trip_is_bit_exact() {
        let ts = toy_set(2);
        let model = fit(&ts, &FitOptions::default()).unwrap();
        let json = serde_json::to_string(&model.to_file()).unwrap();
        let back = MrLvgpModel::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        for vf in [0.2, 0.47, 0.83] {
            for z in [[0.0, 0.0], [0.4, -0.2]] {
                let p1 = model.predict(vf, z);
                let p2 = back.predict(vf, z);
                assert_eq!(p1, p2, "vf={vf} z={z:?}");
            }
        }
    }

    #[test]
    fn training_set_validation_catches_misuse() {
        let one = vec![MixedInput { vf: 0.5, class: 1 }];
        assert!(TrainingSet::new(one, DMatrix::zeros(1, 1), vec!["y".into()]).is_err());
        let skip = vec![
            MixedInput { vf: 0.2, class: 1 },
            MixedInput { vf: 0.8, class: 3 },
        ];
        assert!(TrainingSet::new(skip, DMatrix::zeros(2, 1), vec!["y".into()]).is_err());
        let zero = vec![
            MixedInput { vf: 0.2, class: 0 },
            MixedInput { vf: 0.8, class: 1 },
        ];
        assert!(TrainingSet::new(zero, DMatrix::zeros(2, 1), vec!["y".into()]).is_err());
    }

    #[test]
    fn subset_preserves_rows() {
        let ts = toy_set(2);
        let sub = ts.subset(&[0, 3, 5]).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.inputs()[1], ts.inputs()[3]);
        assert_eq!(sub.responses()[(2, 1)], ts.responses()[(5, 1)]);
    }
}

