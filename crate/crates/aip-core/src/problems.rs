//! Finite-dimensional interpolation problem data: the fundamental identity,
//! and builders for the Nevanlinna–Pick, boundary, and Sarason problems.

use crate::error::{AipError, Result};
use crate::linalg::{
    all_finite, cr, frob, hermitian_psd_decompose, identity, opnorm, pinv, C64, CMatrix,
};

/// Where a problem came from; builders record their input so downstream
/// verification can check the original interpolation conditions.
#[derive(Debug, Clone)]
pub enum ProblemKind {
    Np {
        nodes: Vec<C64>,
        values: Vec<C64>,
    },
    Boundary {
        t0: C64,
        w0: C64,
        d_bound: f64,
    },
    Sarason {
        zeros: Vec<C64>,
        wstar: CMatrix,
        /// Gram matrix of the kernel basis, ⟨x,y⟩ = yᴴGx.
        gram: CMatrix,
    },
    Raw,
}

/// Data of the problem: the form D, the operators T₁, T₂ on X and
/// M₁: X→E₁, M₂: X→E₂, tied together by
/// T₂ᴴDT₂ − T₁ᴴDT₁ = M₁ᴴM₁ − M₂ᴴM₂.
#[derive(Debug, Clone)]
pub struct AipProblem {
    pub d: CMatrix,
    pub t1: CMatrix,
    pub t2: CMatrix,
    pub m1: CMatrix,
    pub m2: CMatrix,
    /// Whether (ζT₂−T₁) and (T₂−ζ̄T₁) are invertible off a discrete set,
    /// enabling the explicit formulas for F₊ and F₋.
    pub special_case: bool,
    pub kind: ProblemKind,
}

impl AipProblem {
    pub fn new(
        d: CMatrix,
        t1: CMatrix,
        t2: CMatrix,
        m1: CMatrix,
        m2: CMatrix,
        special_case: bool,
        kind: ProblemKind,
    ) -> Result<Self> {
        let n = d.nrows();
        for (name, m) in [("D", &d), ("T1", &t1), ("T2", &t2), ("M1", &m1), ("M2", &m2)] {
            if !all_finite(m) {
                return Err(AipError::NonFinite);
            }
            if name != "M1" && name != "M2" && (m.nrows() != n || m.ncols() != n) {
                return Err(AipError::DimensionMismatch(format!(
                    "{name} must be {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if m1.ncols() != n || m2.ncols() != n {
            return Err(AipError::DimensionMismatch(format!(
                "M1/M2 must have {n} columns"
            )));
        }
        // D Hermitian PSD within 1e-10.
        hermitian_psd_decompose(&d, 1e-10)?;
        let problem = Self {
            d,
            t1,
            t2,
            m1,
            m2,
            special_case,
            kind,
        };
        let residual = check_fundamental_identity(&problem)?;
        let scale = frob(&problem.d).max(1.0);
        if residual > 1e-10 * scale {
            return Err(AipError::InvalidData(format!(
                "fundamental identity residual {residual:e} exceeds 1e-10"
            )));
        }
        Ok(problem)
    }

    pub fn dim_x(&self) -> usize {
        self.d.nrows()
    }

    pub fn dim_e1(&self) -> usize {
        self.m1.nrows()
    }

    pub fn dim_e2(&self) -> usize {
        self.m2.nrows()
    }
}

/// Frobenius norm of T₂ᴴDT₂ − T₁ᴴDT₁ − M₁ᴴM₁ + M₂ᴴM₂.
pub fn check_fundamental_identity(p: &AipProblem) -> Result<f64> {
    let n = p.dim_x();
    if p.t1.ncols() != n || p.t2.ncols() != n || p.m1.ncols() != n || p.m2.ncols() != n {
        return Err(AipError::DimensionMismatch(
            "operators must act on X".into(),
        ));
    }
    let lhs = p.t2.adjoint() * &p.d * &p.t2 - p.t1.adjoint() * &p.d * &p.t1;
    let rhs = p.m1.adjoint() * &p.m1 - p.m2.adjoint() * &p.m2;
    Ok(frob(&(lhs - rhs)))
}

/// Nevanlinna–Pick data: nodes ζ_k in the open disk, target values w_k.
#[derive(Debug, Clone)]
pub struct NpData {
    pub nodes: Vec<C64>,
    pub values: Vec<C64>,
}

impl NpData {
    pub fn new(nodes: Vec<C64>, values: Vec<C64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(AipError::InvalidData(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(AipError::InvalidData("empty node list".into()));
        }
        for z in &nodes {
            if !(z.norm() < 1.0) {
                return Err(AipError::InvalidData(format!("node {z} not in open disk")));
            }
        }
        for (i, a) in nodes.iter().enumerate() {
            for b in nodes.iter().skip(i + 1) {
                if (a - b).norm() < 1e-12 {
                    return Err(AipError::InvalidData(format!("repeated node {a}")));
                }
            }
        }
        Ok(Self { nodes, values })
    }
}

/// Boundary interpolation data: w(ζ) → w0 as ζ → t0 with D_{w,t0} ≤ Dbound.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub t0: C64,
    pub w0: C64,
    pub d_bound: f64,
}

impl BoundaryData {
    pub fn new(t0: C64, w0: C64, d_bound: f64) -> Result<Self> {
        if (t0.norm() - 1.0).abs() > 1e-12 {
            return Err(AipError::InvalidData(format!("|t0| = {} ≠ 1", t0.norm())));
        }
        if (w0.norm() - 1.0).abs() > 1e-12 {
            return Err(AipError::InvalidData(format!("|w0| = {} ≠ 1", w0.norm())));
        }
        if !(d_bound >= 0.0) || !d_bound.is_finite() {
            return Err(AipError::InvalidData(format!("D = {d_bound} must be ≥ 0")));
        }
        Ok(Self { t0, w0, d_bound })
    }
}

/// Sarason data: a finite Blaschke product θ through its zeros, and a
/// contraction W* on K_θ (in the kernel-basis coordinates) commuting with the
/// backward shift compression.
#[derive(Debug, Clone)]
pub struct SarasonData {
    pub blaschke_zeros: Vec<C64>,
    pub wstar: CMatrix,
}

impl SarasonData {
    pub fn new(blaschke_zeros: Vec<C64>, wstar: CMatrix) -> Result<Self> {
        let n = blaschke_zeros.len();
        if n == 0 {
            return Err(AipError::InvalidData("empty zero list".into()));
        }
        for z in &blaschke_zeros {
            if !(z.norm() < 1.0) {
                return Err(AipError::InvalidData(format!("zero {z} not in open disk")));
            }
        }
        for (i, a) in blaschke_zeros.iter().enumerate() {
            for b in blaschke_zeros.iter().skip(i + 1) {
                if (a - b).norm() < 1e-12 {
                    return Err(AipError::InvalidData(format!("repeated zero {a}")));
                }
            }
        }
        if wstar.nrows() != n || wstar.ncols() != n {
            return Err(AipError::DimensionMismatch(format!(
                "W* must be {n}x{n} in the kernel basis"
            )));
        }
        if !all_finite(&wstar) {
            return Err(AipError::NonFinite);
        }
        let t2 = backward_shift_matrix(&blaschke_zeros);
        let comm = frob(&(&wstar * &t2 - &t2 * &wstar));
        if comm > 1e-9 * frob(&wstar).max(1.0) {
            return Err(AipError::InvalidData(format!(
                "W* does not commute with T*_θ (deviation {comm:e})"
            )));
        }
        let g = kernel_gram(&blaschke_zeros);
        let norm = gram_operator_norm(&g, &wstar)?;
        if norm > 1.0 + 1e-9 {
            return Err(AipError::NotContractive { norm });
        }
        Ok(Self {
            blaschke_zeros,
            wstar,
        })
    }
}

/// Gram matrix of the Szegő kernels k_j(t) = 1/(1 − conj(ζ_j) t) in the
/// convention ⟨x,y⟩ = yᴴGx: G_{kj} = k_j(ζ_k) = 1/(1 − conj(ζ_j) ζ_k).
pub fn kernel_gram(zeros: &[C64]) -> CMatrix {
    let n = zeros.len();
    CMatrix::from_fn(n, n, |k, j| (cr(1.0) - zeros[j].conj() * zeros[k]).inv())
}

/// Matrix of T*_θ (= P₊ t̄ ·) in the kernel basis: k_ζ ↦ conj(ζ)·k_ζ.
pub fn backward_shift_matrix(zeros: &[C64]) -> CMatrix {
    let n = zeros.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { zeros[i].conj() } else { cr(0.0) })
}

/// Operator norm of W in the (possibly non-orthogonal) G inner product.
fn gram_operator_norm(g: &CMatrix, w: &CMatrix) -> Result<f64> {
    let (rank, l) = hermitian_psd_decompose(g, 1e-12)?;
    if rank < g.nrows() {
        return Err(AipError::InvalidData(
            "kernel Gram matrix is singular".into(),
        ));
    }
    // ‖Wx‖_G/‖x‖_G = σ_max(Lᴴ W L^{-ᴴ}).
    let linv = pinv(&l.adjoint(), 1e-13);
    Ok(opnorm(&(l.adjoint() * w * linv)))
}

/// Build the Nevanlinna–Pick problem. Fails fast with NotPsd when the Pick
/// matrix is not positive semidefinite (the problem is infeasible).
pub fn build_np(data: &NpData) -> Result<AipProblem> {
    let n = data.nodes.len();
    let d = CMatrix::from_fn(n, n, |k, j| {
        (cr(1.0) - data.values[k].conj() * data.values[j])
            / (cr(1.0) - data.nodes[k].conj() * data.nodes[j])
    });
    // Solvability criterion: the Pick matrix must be PSD.
    hermitian_psd_decompose(&d, 1e-10)?;
    let t1 = CMatrix::from_fn(n, n, |i, j| if i == j { data.nodes[i] } else { cr(0.0) });
    let t2 = identity(n);
    let m1 = CMatrix::from_fn(1, n, |_, _| cr(1.0));
    let m2 = CMatrix::from_fn(1, n, |_, j| data.values[j]);
    AipProblem::new(
        d,
        t1,
        t2,
        m1,
        m2,
        true,
        ProblemKind::Np {
            nodes: data.nodes.clone(),
            values: data.values.clone(),
        },
    )
}

/// Build the boundary interpolation problem on X = C¹.
pub fn build_boundary(data: &BoundaryData) -> Result<AipProblem> {
    let d = CMatrix::from_fn(1, 1, |_, _| cr(data.d_bound));
    let t1 = CMatrix::from_fn(1, 1, |_, _| data.t0);
    let t2 = identity(1);
    let m1 = CMatrix::from_fn(1, 1, |_, _| cr(1.0));
    let m2 = CMatrix::from_fn(1, 1, |_, _| data.w0);
    AipProblem::new(
        d,
        t1,
        t2,
        m1,
        m2,
        true,
        ProblemKind::Boundary {
            t0: data.t0,
            w0: data.w0,
            d_bound: data.d_bound,
        },
    )
}

/// Build the Sarason problem on X = K_θ in the kernel basis. All inner
/// products go through the Gram matrix; the basis is not orthonormalized.
pub fn build_sarason(data: &SarasonData) -> Result<AipProblem> {
    let zeros_list = &data.blaschke_zeros;
    let n = zeros_list.len();
    let g = kernel_gram(zeros_list);
    // D(x,x) = ‖x‖² − ‖W*x‖² in the G inner product.
    let d = &g - data.wstar.adjoint() * &g * &data.wstar;
    match hermitian_psd_decompose(&d, 1e-9) {
        Ok(_) => {}
        Err(AipError::NotPsd { eigenvalue }) => {
            return Err(AipError::NotContractive {
                norm: 1.0 + eigenvalue.abs(),
            })
        }
        Err(e) => return Err(e),
    }
    let t1 = identity(n);
    let t2 = backward_shift_matrix(zeros_list);
    // Evaluation at 0: every kernel has k_j(0) = 1, so x(0) = Σ x_j and
    // (W*x)(0) = Σ (W*x)_j.
    let ones = CMatrix::from_fn(1, n, |_, _| cr(1.0));
    let m1 = &ones * &data.wstar;
    let m2 = ones;
    AipProblem::new(
        d,
        t1,
        t2,
        m1,
        m2,
        true,
        ProblemKind::Sarason {
            zeros: zeros_list.clone(),
            wstar: data.wstar.clone(),
            gram: g,
        },
    )
}

/// W* from interpolation values per the diagonal model: W* k_ζ_k = conj(w_k) k_ζ_k.
pub fn sarason_wstar_from_values(values: &[C64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { values[i].conj() } else { cr(0.0) })
}

/// Sample a K_θ element given by kernel-basis coefficients at a point.
pub fn kernel_eval(zeros: &[C64], coeffs: &crate::linalg::CVector, t: C64) -> C64 {
    zeros
        .iter()
        .zip(coeffs.iter())
        .map(|(&z, &x)| x / (cr(1.0) - z.conj() * t))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, zeros};
    use approx::assert_abs_diff_eq;

    #[test]
    fn np_single_node_at_origin() {
        let data = NpData::new(vec![cr(0.0)], vec![cr(0.0)]).unwrap();
        let p = build_np(&data).unwrap();
        assert_abs_diff_eq!(p.d[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.t1[(0, 0)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.m1[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.m2[(0, 0)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(check_fundamental_identity(&p).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn np_identity_residual_single_node() {
        // ζ=0.5, w=0: D = 1/0.75 and both identity sides equal 1.
        let data = NpData::new(vec![cr(0.5)], vec![cr(0.0)]).unwrap();
        let p = build_np(&data).unwrap();
        assert_abs_diff_eq!(p.d[(0, 0)].re, 1.0 / 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(check_fundamental_identity(&p).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn perturbed_m2_changes_residual_by_its_square() {
        let data = NpData::new(vec![cr(0.5)], vec![cr(0.0)]).unwrap();
        let p = build_np(&data).unwrap();
        let mut q = p.clone();
        q.m2[(0, 0)] = cr(0.1);
        assert_abs_diff_eq!(check_fundamental_identity(&q).unwrap(), 0.01, epsilon = 1e-14);
    }

    #[test]
    fn np_infeasible_fails_fast() {
        // Pick matrix [[1,1],[1,0]] has determinant −1.
        let data = NpData::new(vec![cr(0.0), cr(0.5)], vec![cr(0.0), cr(1.0)]).unwrap();
        assert!(matches!(build_np(&data), Err(AipError::NotPsd { .. })));
    }

    #[test]
    fn np_rank_one_pick_is_accepted() {
        let data = NpData::new(vec![cr(0.0), cr(0.5)], vec![cr(0.0), cr(0.5)]).unwrap();
        let p = build_np(&data).unwrap();
        for k in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p.d[(k, j)].re, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn boundary_builders() {
        for (t0, w0, db) in [
            (cr(1.0), cr(1.0), 0.0),
            (cr(1.0), cr(-1.0), 3.0),
            (c(0.0, 1.0), cr(1.0), 1.0),
        ] {
            let p = build_boundary(&BoundaryData::new(t0, w0, db).unwrap()).unwrap();
            assert_abs_diff_eq!(p.d[(0, 0)].re, db, epsilon = 1e-15);
            assert_abs_diff_eq!(
                check_fundamental_identity(&p).unwrap(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn boundary_rejects_non_unimodular() {
        assert!(BoundaryData::new(cr(0.9), cr(1.0), 1.0).is_err());
        assert!(BoundaryData::new(cr(1.0), cr(1.1), 1.0).is_err());
        assert!(BoundaryData::new(cr(1.0), cr(1.0), -0.5).is_err());
    }

    #[test]
    fn sarason_single_zero_matches_hand_arithmetic() {
        // θ with zero 0.5 and W* = multiplication by conj(0.5):
        // D = (1 − 0.25)·G with G = 1/(1−0.25).
        let wstar = sarason_wstar_from_values(&[cr(0.5)]);
        let data = SarasonData::new(vec![cr(0.5)], wstar).unwrap();
        let p = build_sarason(&data).unwrap();
        assert_abs_diff_eq!(p.d[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.t2[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m1[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(check_fundamental_identity(&p).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn sarason_two_nodes_identity_residual() {
        let zeros = vec![c(0.3, 0.2), c(-0.4, 0.1)];
        let values = vec![c(0.2, -0.1), c(0.1, 0.3)];
        let data = SarasonData::new(zeros, sarason_wstar_from_values(&values)).unwrap();
        let p = build_sarason(&data).unwrap();
        assert!(check_fundamental_identity(&p).unwrap() <= 1e-10);
    }

    #[test]
    fn sarason_zero_operator() {
        let data = SarasonData::new(vec![cr(0.5), cr(-0.3)], zeros(2, 2)).unwrap();
        let p = build_sarason(&data).unwrap();
        let g = kernel_gram(&[cr(0.5), cr(-0.3)]);
        assert!(frob(&(&p.d - &g)) < 1e-14);
    }

    #[test]
    fn sarason_rejects_expansive_wstar() {
        let wstar = sarason_wstar_from_values(&[cr(0.5), cr(2.0)]);
        assert!(matches!(
            SarasonData::new(vec![cr(0.2), cr(0.6)], wstar),
            Err(AipError::NotContractive { .. })
        ));
    }

    #[test]
    fn generic_np_data_has_full_rank_pick_matrix() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let (_, p) = crate::sampling::random_np(&mut rng, 6).unwrap();
            let (rank, _) = hermitian_psd_decompose(&p.d, 1e-10).unwrap();
            assert_eq!(rank, p.dim_x(), "generic Pick matrix must have full rank");
        }
    }

    #[test]
    fn identity_check_rejects_shape_mismatch() {
        let data = NpData::new(vec![cr(0.5)], vec![cr(0.0)]).unwrap();
        let mut p = build_np(&data).unwrap();
        p.m1 = CMatrix::from_fn(1, 2, |_, _| cr(1.0));
        assert!(matches!(
            check_fundamental_identity(&p),
            Err(AipError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sarason_rejects_non_commuting_wstar() {
        let mut wstar = zeros(2, 2);
        wstar[(0, 1)] = cr(0.3);
        assert!(SarasonData::new(vec![cr(0.2), cr(0.6)], wstar).is_err());
    }
}
