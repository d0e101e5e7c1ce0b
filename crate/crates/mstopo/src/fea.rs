//! Plane-stress finite elements on regular quad meshes.
//!
//! Provides the bilinear element integration shared with the cell
//! homogenization, the stiffness-basis decomposition used to assemble macro
//! elements from orthotropic components, and a linear solver for compliance
//! under one or more load cases.

use crate::error::{Error, Result};
use crate::homog::StiffnessVec;
use crate::sparse::SpdSolver;
use nalgebra::{Matrix3, SMatrix, SVector};

/// Element stiffness of a bilinear quad of side `size` under the constitutive
/// matrix `d`, integrated with 2x2 Gauss quadrature.
///
/// Node order is counterclockwise from the lower-left corner; dof order is
/// `[u1, v1, u2, v2, u3, v3, u4, v4]`.
pub fn quad_stiffness(d: &Matrix3<f64>, size: f64) -> SMatrix<f64, 8, 8> {
    let mut ke = SMatrix::<f64, 8, 8>::zeros();
    let gp = 1.0 / 3.0f64.sqrt();
    // Jacobian of the map from [-1,1]^2 to a straight-sided square of side `size`.
    let jac = size / 2.0;
    for &xi in &[-gp, gp] {
        for &eta in &[-gp, gp] {
            // Shape function derivatives in natural coordinates.
            let dn_dxi = [
                -(1.0 - eta) / 4.0,
                (1.0 - eta) / 4.0,
                (1.0 + eta) / 4.0,
                -(1.0 + eta) / 4.0,
            ];
            let dn_deta = [
                -(1.0 - xi) / 4.0,
                -(1.0 + xi) / 4.0,
                (1.0 + xi) / 4.0,
                (1.0 - xi) / 4.0,
            ];
            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                let dx = dn_dxi[a] / jac;
                let dy = dn_deta[a] / jac;
                b[(0, 2 * a)] = dx;
                b[(1, 2 * a + 1)] = dy;
                b[(2, 2 * a)] = dy;
                b[(2, 2 * a + 1)] = dx;
            }
            ke += jac * jac * b.transpose() * d * b;
        }
    }
    ke
}

/// The four basis element matrices `K_i` such that an orthotropic element
/// stiffness is `k(Y) = C11*K1 + C12*K2 + C22*K3 + C66*K4`.
#[derive(Clone, Debug)]
pub struct BasisK {
    k: [SMatrix<f64, 8, 8>; 4],
}

impl BasisK {
    /// Basis matrices for a unit-square macro element.
    pub fn unit_square() -> Self {
        let unit = |i: usize, j: usize| {
            let mut d = Matrix3::<f64>::zeros();
            d[(i, j)] = 1.0;
            d[(j, i)] = 1.0;
            d
        };
        Self {
            k: [
                quad_stiffness(&unit(0, 0), 1.0),
                quad_stiffness(&unit(0, 1), 1.0),
                quad_stiffness(&unit(1, 1), 1.0),
                quad_stiffness(&unit(2, 2), 1.0),
            ],
        }
    }

    /// The basis matrix for component `i` in the order `[C11, C12, C22, C66]`.
    pub fn component(&self, i: usize) -> &SMatrix<f64, 8, 8> {
        &self.k[i]
    }

    /// Linear combination `sum_i c[i] * K_i` without a definiteness check;
    /// used for derivative directions, which need not be definite.
    pub fn combine(&self, c: [f64; 4]) -> SMatrix<f64, 8, 8> {
        let mut out = self.k[0] * c[0];
        out += self.k[1] * c[1];
        out += self.k[2] * c[2];
        out += self.k[3] * c[3];
        out
    }

    /// Element stiffness for a positive-definite orthotropic tensor.
    pub fn element_stiffness(&self, y: &StiffnessVec) -> Result<SMatrix<f64, 8, 8>> {
        if !y.is_positive_definite() {
            return Err(Error::InvalidStiffness(y.c11, y.c12, y.c22, y.c66));
        }
        Ok(self.combine(y.components()))
    }
}

/// A regular `nx` by `ny` mesh of unit-square elements, some of which may be
/// passive (carved out of the design domain).
#[derive(Clone, Debug)]
pub struct MacroMesh {
    nx: usize,
    ny: usize,
    active: Vec<bool>,
}

impl MacroMesh {
    /// A fully active rectangular mesh.
    pub fn rectangle(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput("mesh needs nx, ny >= 1".into()));
        }
        Ok(Self {
            nx,
            ny,
            active: vec![true; nx * ny],
        })
    }

    /// A mesh whose active elements are chosen per element by `keep(ex, ey)`.
    pub fn with_active(nx: usize, ny: usize, keep: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut mesh = Self::rectangle(nx, ny)?;
        for ex in 0..nx {
            for ey in 0..ny {
                let e = mesh.elem_index(ex, ey);
                mesh.active[e] = keep(ex, ey);
            }
        }
        if mesh.n_active() == 0 {
            return Err(Error::InvalidInput("mesh has no active elements".into()));
        }
        Ok(mesh)
    }

    /// Elements along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Elements along y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Total element count, active or not.
    pub fn n_elems(&self) -> usize {
        self.nx * self.ny
    }

    /// Count of active (design) elements.
    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Whether element `(ex, ey)` is part of the design domain.
    pub fn is_active(&self, ex: usize, ey: usize) -> bool {
        self.active[self.elem_index(ex, ey)]
    }

    /// Flat element index of `(ex, ey)`, x-major.
    pub fn elem_index(&self, ex: usize, ey: usize) -> usize {
        debug_assert!(ex < self.nx && ey < self.ny);
        ex * self.ny + ey
    }

    /// Inverse of [`MacroMesh::elem_index`].
    pub fn elem_coords(&self, e: usize) -> (usize, usize) {
        (e / self.ny, e % self.ny)
    }

    /// Center of element `e` in mesh coordinates.
    pub fn elem_center(&self, e: usize) -> [f64; 2] {
        let (ex, ey) = self.elem_coords(e);
        [ex as f64 + 0.5, ey as f64 + 0.5]
    }

    /// Node index of grid point `(ix, iy)` with `ix <= nx`, `iy <= ny`.
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix <= self.nx && iy <= self.ny);
        ix * (self.ny + 1) + iy
    }

    /// Total node count.
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    /// Total dof count (two per node).
    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    /// The eight dof indices of element `e`, nodes counterclockwise from the
    /// lower-left corner.
    pub fn elem_dofs(&self, e: usize) -> [usize; 8] {
        let (ex, ey) = self.elem_coords(e);
        let n = [
            self.node(ex, ey),
            self.node(ex + 1, ey),
            self.node(ex + 1, ey + 1),
            self.node(ex, ey + 1),
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
    }

    /// Flat indices of all active elements, ascending.
    pub fn active_elems(&self) -> Vec<usize> {
        (0..self.n_elems()).filter(|&e| self.active[e]).collect()
    }
}

/// Nodal loads plus supports for one analysis case.
#[derive(Clone, Debug, Default)]
pub struct LoadCase {
    /// Point loads as `(dof, value)` pairs.
    pub loads: Vec<(usize, f64)>,
    /// Dofs fixed to zero.
    pub fixed: Vec<usize>,
}

impl LoadCase {
    /// An empty case.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a point load on a dof.
    pub fn load(mut self, dof: usize, value: f64) -> Self {
        self.loads.push((dof, value));
        self
    }

    /// Fixes a dof to zero.
    pub fn fix(mut self, dof: usize) -> Self {
        self.fixed.push(dof);
        self
    }

    /// Fixes both dofs of a node.
    pub fn fix_node(self, node: usize) -> Self {
        self.fix(2 * node).fix(2 * node + 1)
    }
}

/// Displacements and compliance of a multi-case linear solve.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Full displacement vector per case (fixed dofs hold zeros).
    pub displacements: Vec<Vec<f64>>,
    /// External work `F^T U` per case.
    pub compliance_per_case: Vec<f64>,
    /// Mean of the per-case compliances — the multi-load objective.
    pub compliance: f64,
}

impl SolveResult {
    /// Element displacement vector for case `case` on element `e`.
    pub fn elem_displacements(&self, mesh: &MacroMesh, case: usize, e: usize) -> SVector<f64, 8> {
        let dofs = mesh.elem_dofs(e);
        SVector::<f64, 8>::from_fn(|a, _| self.displacements[case][dofs[a]])
    }
}

/// Solves the macro problem for every load case against one stiffness field.
///
/// `k_elems` holds the element stiffness for every element of the mesh
/// (active or passive). All cases share the supports of the first case;
/// supplying cases with differing supports is rejected.
pub fn solve(
    mesh: &MacroMesh,
    cases: &[LoadCase],
    k_elems: &[SMatrix<f64, 8, 8>],
) -> Result<SolveResult> {
    if cases.is_empty() {
        return Err(Error::InvalidInput("at least one load case required".into()));
    }
    if k_elems.len() != mesh.n_elems() {
        return Err(Error::InvalidInput(format!(
            "stiffness field has {} entries for {} elements",
            k_elems.len(),
            mesh.n_elems()
        )));
    }
    let fixed = &cases[0].fixed;
    if fixed.is_empty() {
        return Err(Error::Mechanism);
    }
    for c in cases.iter().skip(1) {
        if c.fixed != *fixed {
            return Err(Error::InvalidInput(
                "all load cases must share the same supports".into(),
            ));
        }
    }
    let n_dof = mesh.n_dofs();
    let mut is_fixed = vec![false; n_dof];
    for &d in fixed {
        if d >= n_dof {
            return Err(Error::InvalidInput(format!("fixed dof {d} out of range")));
        }
        is_fixed[d] = true;
    }
    let mut reduced = vec![usize::MAX; n_dof];
    let mut n_red = 0usize;
    for d in 0..n_dof {
        if !is_fixed[d] {
            reduced[d] = n_red;
            n_red += 1;
        }
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.n_elems() * 64);
    for e in 0..mesh.n_elems() {
        let dofs = mesh.elem_dofs(e);
        let ke = &k_elems[e];
        for (a, &da) in dofs.iter().enumerate() {
            if is_fixed[da] {
                continue;
            }
            for (b, &db) in dofs.iter().enumerate() {
                if !is_fixed[db] {
                    triplets.push((reduced[da], reduced[db], ke[(a, b)]));
                }
            }
        }
    }

    let mut rhs = Vec::with_capacity(cases.len());
    for case in cases {
        let mut f = vec![0.0f64; n_red];
        for &(dof, value) in &case.loads {
            if dof >= n_dof {
                return Err(Error::InvalidInput(format!("loaded dof {dof} out of range")));
            }
            if !is_fixed[dof] {
                f[reduced[dof]] += value;
            }
        }
        rhs.push(f);
    }

    let solver = SpdSolver::factor(n_red, &triplets)?;
    let sols = solver.solve_many(&rhs);

    let mut displacements = Vec::with_capacity(cases.len());
    let mut compliance_per_case = Vec::with_capacity(cases.len());
    for (k, sol) in sols.iter().enumerate() {
        let mut u = vec![0.0f64; n_dof];
        for d in 0..n_dof {
            if !is_fixed[d] {
                u[d] = sol[reduced[d]];
            }
        }
        let c: f64 = cases[k].loads.iter().map(|&(dof, v)| v * u[dof]).sum();
        if !c.is_finite() {
            return Err(Error::Mechanism);
        }
        displacements.push(u);
        compliance_per_case.push(c);
    }
    let compliance =
        compliance_per_case.iter().sum::<f64>() / compliance_per_case.len() as f64;
    Ok(SolveResult {
        displacements,
        compliance_per_case,
        compliance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::isotropic_plane_stress;

    fn iso_vec(e: f64, nu: f64) -> StiffnessVec {
        let f = e / (1.0 - nu * nu);
        StiffnessVec {
            c11: f,
            c12: nu * f,
            c22: f,
            c66: f * (1.0 - nu) / 2.0,
        }
    }

    #[test]
    fn basis_combination_matches_direct_integration() {
        let basis = BasisK::unit_square();
        let y = StiffnessVec {
            c11: 1.3,
            c12: 0.4,
            c22: 0.9,
            c66: 0.35,
        };
        let via_basis = basis.element_stiffness(&y).unwrap();
        let direct = quad_stiffness(&y.to_matrix(), 1.0);
        let diff = (via_basis - direct).abs().max();
        assert!(diff < 1e-12, "max diff {diff}");
    }

    #[test]
    fn element_stiffness_is_linear_in_y() {
        let basis = BasisK::unit_square();
        let y1 = iso_vec(1.0, 0.3);
        let y2 = iso_vec(2.0, 0.3);
        let k1 = basis.element_stiffness(&y1).unwrap();
        let k2 = basis.element_stiffness(&y2).unwrap();
        let diff = (k2 - k1 * 2.0).abs().max();
        assert!(diff < 1e-12);
    }

    #[test]
    fn indefinite_tensor_is_rejected() {
        let basis = BasisK::unit_square();
        let bad = StiffnessVec {
            c11: 1.0,
            c12: 1.5,
            c22: 1.0,
            c66: 0.2,
        };
        assert!(matches!(
            basis.element_stiffness(&bad),
            Err(Error::InvalidStiffness(..))
        ));
    }

    #[test]
    fn element_has_exactly_three_rigid_modes() {
        let ke = quad_stiffness(&isotropic_plane_stress(1.0, 0.3), 1.0);
        // Rigid translations and the in-plane rotation u = (-y, x).
        let tx = SVector::<f64, 8>::from_column_slice(&[1., 0., 1., 0., 1., 0., 1., 0.]);
        let ty = SVector::<f64, 8>::from_column_slice(&[0., 1., 0., 1., 0., 1., 0., 1.]);
        let rot = SVector::<f64, 8>::from_column_slice(&[0., 0., 0., 1., -1., 1., -1., 0.]);
        for v in [tx, ty, rot] {
            assert!((ke * v).amax() < 1e-12);
        }
        let eig = nalgebra::SymmetricEigen::new(ke);
        let zero_modes = eig.eigenvalues.iter().filter(|&&l| l.abs() < 1e-10).count();
        assert_eq!(zero_modes, 3);
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
    }

    fn cantilever(n: usize) -> (MacroMesh, LoadCase, Vec<SMatrix<f64, 8, 8>>) {
        let mesh = MacroMesh::rectangle(n, n).unwrap();
        let mut case = LoadCase::new();
        for iy in 0..=n {
            case = case.fix_node(mesh.node(0, iy));
        }
        case = case.load(2 * mesh.node(n, 0) + 1, -1.0);
        let basis = BasisK::unit_square();
        let ke = basis.element_stiffness(&iso_vec(1.0, 0.3)).unwrap();
        let k_elems = vec![ke; mesh.n_elems()];
        (mesh, case, k_elems)
    }

    #[test]
    fn compliance_matches_strain_energy() {
        let (mesh, case, k_elems) = cantilever(6);
        let res = solve(&mesh, &[case], &k_elems).unwrap();
        let mut energy = 0.0;
        for e in 0..mesh.n_elems() {
            let ue = res.elem_displacements(&mesh, 0, e);
            energy += (k_elems[e] * ue).dot(&ue);
        }
        let c = res.compliance;
        assert!(c > 0.0);
        assert!((c - energy).abs() <= 1e-9 * c, "F^T U = {c}, U^T K U = {energy}");
    }

    #[test]
    fn doubling_stiffness_halves_compliance() {
        let (mesh, case, k1) = cantilever(5);
        let k2: Vec<_> = k1.iter().map(|k| k * 2.0).collect();
        let c1 = solve(&mesh, &[case.clone()], &k1).unwrap().compliance;
        let c2 = solve(&mesh, &[case], &k2).unwrap().compliance;
        assert!((c2 - c1 / 2.0).abs() <= 1e-9 * c1);
    }

    #[test]
    fn unsupported_model_is_a_mechanism() {
        let mesh = MacroMesh::rectangle(3, 3).unwrap();
        let basis = BasisK::unit_square();
        let ke = basis.element_stiffness(&iso_vec(1.0, 0.3)).unwrap();
        let k_elems = vec![ke; mesh.n_elems()];
        let case = LoadCase::new().load(2 * mesh.node(3, 0) + 1, -1.0);
        assert!(matches!(
            solve(&mesh, &[case], &k_elems),
            Err(Error::Mechanism)
        ));
    }

    #[test]
    fn zero_load_gives_zero_compliance() {
        let (mesh, case, k_elems) = cantilever(4);
        let quiet = LoadCase {
            loads: vec![],
            fixed: case.fixed.clone(),
        };
        let res = solve(&mesh, &[quiet], &k_elems).unwrap();
        assert_eq!(res.compliance, 0.0);
        assert!(res.displacements[0].iter().all(|&u| u == 0.0));
    }

    #[test]
    fn mean_compliance_over_two_cases() {
        let (mesh, case, k_elems) = cantilever(4);
        let case2 = LoadCase {
            loads: vec![(2 * mesh.node(4, 4) + 1, -1.0)],
            fixed: case.fixed.clone(),
        };
        let res = solve(&mesh, &[case.clone(), case2], &k_elems).unwrap();
        let mean = (res.compliance_per_case[0] + res.compliance_per_case[1]) / 2.0;
        assert!((res.compliance - mean).abs() < 1e-15);
        let single = solve(&mesh, &[case], &k_elems).unwrap();
        assert!((res.compliance_per_case[0] - single.compliance).abs() < 1e-12);
    }

    #[test]
    fn patch_test_uniform_tension() {
        // A 2x2 patch pulled uniformly must reproduce a homogeneous strain field:
        // interior node displacements follow the affine map exactly.
        let n = 2;
        let mesh = MacroMesh::rectangle(n, n).unwrap();
        let mut case = LoadCase::new();
        for iy in 0..=n {
            case = case.fix(2 * mesh.node(0, iy)); // roller on the left edge
        }
        case = case.fix(2 * mesh.node(0, 0) + 1); // pin one corner vertically
        // Consistent nodal loads for unit traction on the right edge.
        case = case
            .load(2 * mesh.node(n, 0), 0.5)
            .load(2 * mesh.node(n, 1), 1.0)
            .load(2 * mesh.node(n, 2), 0.5);
        let y = iso_vec(1.0, 0.3);
        let basis = BasisK::unit_square();
        let ke = basis.element_stiffness(&y).unwrap();
        let res = solve(&mesh, &[case], &vec![ke; mesh.n_elems()]).unwrap();
        // sigma_xx = 1 under plane stress: eps_xx = 1/E, eps_yy = -nu/E.
        let u = &res.displacements[0];
        for ix in 0..=n {
            for iy in 0..=n {
                let node = mesh.node(ix, iy);
                let ux = u[2 * node];
                assert!(
                    (ux - ix as f64).abs() < 1e-10,
                    "node ({ix},{iy}) ux = {ux}"
                );
            }
        }
    }
}
