//! Periodic homogenization of pixelated unit cells into effective plane-stress
//! stiffness.
//!
//! Each pixel becomes one bilinear quadrilateral element; solid pixels carry the
//! base Young's modulus and void pixels a small floor stiffness. The cell is
//! treated as a torus (opposite edges share nodes), three unit macroscopic
//! strain cases are applied, and the effective tensor follows from the mutual
//! energies of the corrected strain fields. For the layouts in
//! [`crate::microlib`] the result is orthotropic and is reported as the vector
//! `[C11, C12, C22, C66]`.

use crate::error::{Error, Result};
use crate::fea::quad_stiffness;
use crate::gp::{MixedInput, TrainingSet};
use crate::microlib::{LibraryEntry, PixelGrid};
use crate::sparse::SpdSolver;
use nalgebra::{DMatrix, Matrix3, SMatrix, SVector};
use rayon::prelude::*;

/// Maximum allowed normal/shear coupling, relative to `C11`.
pub const ORTHOTROPY_LIMIT_REL: f64 = 1e-3;

/// Isotropic base material for the solid phase, with a stiffness floor for void.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseMaterial {
    /// Young's modulus of the solid phase.
    pub youngs: f64,
    /// Poisson ratio, identical for both phases.
    pub poisson: f64,
    /// Young's modulus assigned to void pixels to keep the system definite.
    pub void_youngs: f64,
}

impl Default for BaseMaterial {
    fn default() -> Self {
        Self {
            youngs: 1.0,
            poisson: 0.3,
            void_youngs: 1e-9,
        }
    }
}

impl BaseMaterial {
    /// A material with the given solid modulus and Poisson ratio; the void
    /// floor is set to `1e-9` times the solid modulus.
    pub fn new(youngs: f64, poisson: f64) -> Result<Self> {
        if !(youngs > 0.0) || !youngs.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Young's modulus {youngs} must be positive"
            )));
        }
        if !(poisson > 0.0 && poisson < 0.5) {
            return Err(Error::InvalidInput(format!(
                "Poisson ratio {poisson} must lie in (0, 0.5)"
            )));
        }
        Ok(Self {
            youngs,
            poisson,
            void_youngs: 1e-9 * youngs,
        })
    }
}

/// Plane-stress constitutive matrix for an isotropic material.
pub fn isotropic_plane_stress(youngs: f64, poisson: f64) -> Matrix3<f64> {
    let f = youngs / (1.0 - poisson * poisson);
    Matrix3::new(
        f,
        f * poisson,
        0.0,
        f * poisson,
        f,
        0.0,
        0.0,
        0.0,
        f * (1.0 - poisson) / 2.0,
    )
}

/// Orthotropic plane-stress stiffness in Voigt order `[C11, C12, C22, C66]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StiffnessVec {
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub c66: f64,
}

impl StiffnessVec {
    /// Builds from `[C11, C12, C22, C66]`.
    pub fn from_components(c: [f64; 4]) -> Self {
        Self {
            c11: c[0],
            c12: c[1],
            c22: c[2],
            c66: c[3],
        }
    }

    /// Components in the order `[C11, C12, C22, C66]`.
    pub fn components(&self) -> [f64; 4] {
        [self.c11, self.c12, self.c22, self.c66]
    }

    /// The full 3x3 Voigt matrix (zero normal/shear coupling).
    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.c11, self.c12, 0.0, self.c12, self.c22, 0.0, 0.0, 0.0, self.c66,
        )
    }

    /// Whether the tensor is symmetric positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.c11 > 0.0
            && self.c22 > 0.0
            && self.c66 > 0.0
            && self.c11 * self.c22 - self.c12 * self.c12 > 0.0
    }
}

/// The three unit macroscopic strain cases in Voigt order:
/// `e11 = 1`, `e22 = 1`, engineering shear `g12 = 1`.
fn affine_corner_displacements(h: f64) -> [SVector<f64, 8>; 3] {
    // Element corners in local order: (0,0), (h,0), (h,h), (0,h).
    let e11 = SVector::<f64, 8>::from_column_slice(&[0.0, 0.0, h, 0.0, h, 0.0, 0.0, 0.0]);
    let e22 = SVector::<f64, 8>::from_column_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, h]);
    let h2 = h / 2.0;
    let g12 = SVector::<f64, 8>::from_column_slice(&[0.0, 0.0, 0.0, h2, h2, h2, h2, 0.0]);
    [e11, e22, g12]
}

/// Homogenizes one pixel grid under periodic boundary conditions.
///
/// Returns the effective orthotropic stiffness, or an error when the grid has
/// no solid pixels, produces a singular system, yields significant
/// normal/shear coupling, or an indefinite tensor.
pub fn homogenize(grid: &PixelGrid, material: &BaseMaterial) -> Result<StiffnessVec> {
    if grid.solid_count() == 0 {
        return Err(Error::DegenerateCell);
    }
    let res = grid.resolution();
    let n_nodes = res * res; // periodic wrap: one node per pixel corner
    let n_dof = 2 * n_nodes;
    let h = 1.0 / res as f64;

    let ke = quad_stiffness(&isotropic_plane_stress(1.0, material.poisson), h);
    let chi0 = affine_corner_displacements(h);
    let g: [SVector<f64, 8>; 3] = [ke * chi0[0], ke * chi0[1], ke * chi0[2]];

    let node = |ix: usize, iy: usize| -> usize { (ix % res) * res + (iy % res) };
    let elem_dofs = |ex: usize, ey: usize| -> [usize; 8] {
        let n = [
            node(ex, ey),
            node(ex + 1, ey),
            node(ex + 1, ey + 1),
            node(ex, ey + 1),
        ];
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    };
    // Pin both dofs of node 0 to remove the rigid translations the torus leaves free.
    let reduced = |dof: usize| -> Option<usize> { (dof >= 2).then(|| dof - 2) };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(res * res * 64);
    let mut rhs = vec![vec![0.0f64; n_dof - 2]; 3];
    for ex in 0..res {
        for ey in 0..res {
            let e_mod = if grid.get(ex, ey) {
                material.youngs
            } else {
                material.void_youngs
            };
            let dofs = elem_dofs(ex, ey);
            for (a, &da) in dofs.iter().enumerate() {
                let Some(ra) = reduced(da) else { continue };
                for (b, &db) in dofs.iter().enumerate() {
                    if let Some(rb) = reduced(db) {
                        triplets.push((ra, rb, e_mod * ke[(a, b)]));
                    }
                }
                for k in 0..3 {
                    rhs[k][ra] += e_mod * g[k][a];
                }
            }
        }
    }

    let solver = SpdSolver::factor(n_dof - 2, &triplets).map_err(|_| Error::DegenerateCell)?;
    let solutions = solver.solve_many(&rhs);

    // Mutual energies of the corrected strain fields; the cell has unit area.
    let mut c = SMatrix::<f64, 3, 3>::zeros();
    for ex in 0..res {
        for ey in 0..res {
            let e_mod = if grid.get(ex, ey) {
                material.youngs
            } else {
                material.void_youngs
            };
            let dofs = elem_dofs(ex, ey);
            let mut d = [SVector::<f64, 8>::zeros(); 3];
            for k in 0..3 {
                for (a, &dof) in dofs.iter().enumerate() {
                    let u = reduced(dof).map_or(0.0, |r| solutions[k][r]);
                    d[k][a] = chi0[k][a] - u;
                }
            }
            let w = [ke * d[0], ke * d[1], ke * d[2]];
            for k in 0..3 {
                for l in k..3 {
                    c[(k, l)] += e_mod * d[k].dot(&w[l]);
                }
            }
        }
    }
    for k in 0..3 {
        for l in 0..k {
            c[(k, l)] = c[(l, k)];
        }
    }

    let limit = ORTHOTROPY_LIMIT_REL * c[(0, 0)].abs();
    if c[(0, 2)].abs() >= limit || c[(1, 2)].abs() >= limit {
        return Err(Error::NonOrthotropicCell {
            c16: c[(0, 2)].abs(),
            c26: c[(1, 2)].abs(),
            limit,
        });
    }
    let out = StiffnessVec {
        c11: c[(0, 0)],
        c12: c[(0, 1)],
        c22: c[(1, 1)],
        c66: c[(2, 2)],
    };
    if !out.is_positive_definite() {
        return Err(Error::InvalidStiffness(out.c11, out.c12, out.c22, out.c66));
    }
    Ok(out)
}

/// Effective properties of one library sample.
#[derive(Clone, Copy, Debug)]
pub struct PropertySample {
    /// Mixed input: achieved volume fraction plus 1-based class label.
    pub input: MixedInput,
    /// Homogenized stiffness of the cell.
    pub stiffness: StiffnessVec,
}

/// The homogenized property table of a cell library.
#[derive(Clone, Debug, Default)]
pub struct PropertyDataset {
    pub samples: Vec<PropertySample>,
}

/// Response column names used for stiffness datasets.
pub const STIFFNESS_NAMES: [&str; 4] = ["C11", "C12", "C22", "C66"];

impl PropertyDataset {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Whether the dataset is empty.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Converts to a surrogate training set with responses `[C11, C12, C22, C66]`.
    pub fn to_training_set(&self) -> Result<TrainingSet> {
        let n = self.samples.len();
        let inputs: Vec<MixedInput> = self.samples.iter().map(|s| s.input).collect();
        let mut responses = DMatrix::<f64>::zeros(n, 4);
        for (i, s) in self.samples.iter().enumerate() {
            let c = s.stiffness.components();
            for j in 0..4 {
                responses[(i, j)] = c[j];
            }
        }
        TrainingSet::new(
            inputs,
            responses,
            STIFFNESS_NAMES.iter().map(|s| s.to_string()).collect(),
        )
    }

    /// Restricts the dataset to the given sample indices (order preserved).
    pub fn subset(&self, indices: &[usize]) -> PropertyDataset {
        PropertyDataset {
            samples: indices.iter().map(|&i| self.samples[i]).collect(),
        }
    }
}

/// Homogenizes every entry of a cell library, in parallel, preserving order.
pub fn homogenize_library(
    entries: &[LibraryEntry],
    material: &BaseMaterial,
) -> Result<PropertyDataset> {
    let samples: Vec<PropertySample> = entries
        .par_iter()
        .map(|entry| {
            let stiffness = homogenize(&entry.grid, material).map_err(|e| Error::Sample {
                class_id: entry.class_id,
                vf: entry.achieved_vf,
                source: Box::new(e),
            })?;
            Ok(PropertySample {
                input: MixedInput {
                    vf: entry.achieved_vf,
                    class: entry.class_id,
                },
                stiffness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyDataset { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microlib::{standard_classes, PixelGrid};

    /// A random grid symmetrized under both axis mirrors, so the homogenized
    /// tensor is orthotropic by construction.
    fn seeded_grid(res: usize, fill: f64, seed: u64) -> PixelGrid {
        use rand::{Rng, SeedableRng};
        assert_eq!(res % 2, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut grid = PixelGrid::filled(res, false);
        for ix in 0..res / 2 {
            for iy in 0..res / 2 {
                let solid = rng.random::<f64>() < fill;
                grid.set(ix, iy, solid);
                grid.set(res - 1 - ix, iy, solid);
                grid.set(ix, res - 1 - iy, solid);
                grid.set(res - 1 - ix, res - 1 - iy, solid);
            }
        }
        if grid.solid_count() == 0 {
            grid.set(0, 0, true);
        }
        grid
    }

    #[test]
    fn all_solid_cell_recovers_the_base_material() {
        let grid = PixelGrid::filled(10, true);
        let mat = BaseMaterial::default();
        let c = homogenize(&grid, &mat).unwrap();
        let f = 1.0 / (1.0 - 0.09);
        assert!((c.c11 - f).abs() < 1e-9 * f, "C11 {}", c.c11);
        assert!((c.c22 - f).abs() < 1e-9 * f);
        assert!((c.c12 - 0.3 * f).abs() < 1e-9 * f);
        assert!((c.c66 - 1.0 / 2.6).abs() < 1e-9, "C66 {}", c.c66);
    }

    #[test]
    fn stiffness_scales_linearly_with_youngs_modulus() {
        let grid = seeded_grid(12, 0.7, 7);
        let m1 = BaseMaterial::new(1.0, 0.3).unwrap();
        let m2 = BaseMaterial::new(2.0, 0.3).unwrap();
        let c1 = homogenize(&grid, &m1).unwrap().components();
        let c2 = homogenize(&grid, &m2).unwrap().components();
        for k in 0..4 {
            assert!(
                (c2[k] - 2.0 * c1[k]).abs() <= 1e-9 * c1[k].abs().max(1e-12),
                "component {k}: {} vs {}",
                c2[k],
                c1[k]
            );
        }
    }

    #[test]
    fn effective_stiffness_respects_the_voigt_bound() {
        let mat = BaseMaterial::default();
        let d_solid = isotropic_plane_stress(mat.youngs, mat.poisson);
        let d_void = isotropic_plane_stress(mat.void_youngs, mat.poisson);
        for seed in [1u64, 2, 3] {
            let grid = seeded_grid(12, 0.6, seed);
            let vf = grid.volume_fraction();
            let c = homogenize(&grid, &mat).unwrap();
            let voigt = |i: usize, j: usize| vf * d_solid[(i, j)] + (1.0 - vf) * d_void[(i, j)];
            assert!(c.c11 <= voigt(0, 0) + 1e-12);
            assert!(c.c22 <= voigt(1, 1) + 1e-12);
            assert!(c.c66 <= voigt(2, 2) + 1e-12);
        }
    }

    #[test]
    fn all_void_cell_is_degenerate() {
        let grid = PixelGrid::filled(8, false);
        let err = homogenize(&grid, &BaseMaterial::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCell));
    }

    #[test]
    fn cubic_class_has_equal_normal_stiffness() {
        let classes = standard_classes();
        let cross = &classes[0];
        let sol = cross.solve_thickness(0.5).unwrap();
        let grid = cross.rasterize(sol.thickness).unwrap();
        let c = homogenize(&grid, &BaseMaterial::default()).unwrap();
        assert!(
            (c.c11 - c.c22).abs() <= 1e-6 * c.c11,
            "C11 {} C22 {}",
            c.c11,
            c.c22
        );
        assert!(c.is_positive_definite());
    }

    #[test]
    fn diagonal_class_outperforms_cross_in_shear() {
        let classes = standard_classes();
        let cross = classes[0]
            .rasterize(classes[0].solve_thickness(0.5).unwrap().thickness)
            .unwrap();
        let diag = classes[1]
            .rasterize(classes[1].solve_thickness(0.5).unwrap().thickness)
            .unwrap();
        let mat = BaseMaterial::default();
        let c_cross = homogenize(&cross, &mat).unwrap();
        let c_diag = homogenize(&diag, &mat).unwrap();
        assert!(
            c_diag.c66 > c_cross.c66,
            "diagonal C66 {} vs cross C66 {}",
            c_diag.c66,
            c_cross.c66
        );
    }

    #[test]
    fn library_homogenization_is_ordered_and_converts() {
        let lib = crate::microlib::build_library(2, (0.3, 0.6)).unwrap();
        let data = homogenize_library(&lib, &BaseMaterial::default()).unwrap();
        assert_eq!(data.len(), lib.len());
        for (s, e) in data.samples.iter().zip(&lib) {
            assert_eq!(s.input.class, e.class_id);
            assert_eq!(s.input.vf, e.achieved_vf);
            assert!(s.stiffness.is_positive_definite());
        }
        let ts = data.to_training_set().unwrap();
        assert_eq!(ts.len(), lib.len());
        assert_eq!(ts.n_levels(), 6);
    }

    #[test]
    fn material_constructor_validates() {
        assert!(BaseMaterial::new(0.0, 0.3).is_err());
        assert!(BaseMaterial::new(1.0, 0.5).is_err());
        assert!(BaseMaterial::new(1.0, -0.1).is_err());
        let m = BaseMaterial::new(3.0, 0.25).unwrap();
        assert!((m.void_youngs - 3e-9).abs() < 1e-24);
    }
}
