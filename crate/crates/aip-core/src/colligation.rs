//! The Gram space H₀, the isometry V defined by the problem data, its
//! universal unitary extension, and the coefficient matrix S it generates.

use crate::error::{AipError, Result};
use crate::linalg::{
    block2x2, complete_isometry_to_unitary, eigenvalues_general, frob, hermitian_psd_decompose,
    identity, opnorm, pinv, solve_resolvent, span_basis, unitarity_error, vstack, zeros, C64,
    CMatrix, CVector, Subspace,
};
use crate::problems::AipProblem;

/// Relative eigenvalue cutoff for generator span ranks.
const SPAN_TOL: f64 = 1e-12;

/// Coordinates for the completion H₀ of X under the form D:
/// ⟨embed·x, embed·y⟩ = D(x,y), so embedᴴ·embed = D.
#[derive(Debug, Clone)]
pub struct GramSpace {
    pub dim_h0: usize,
    /// dim_h0 × dim_x coordinate map `x ↦ [x]`.
    pub embed: CMatrix,
}

/// Build the Gram space at the given rank tolerance.
pub fn build_gram_space(p: &AipProblem, tol: f64) -> Result<GramSpace> {
    let (rank, factor) = hermitian_psd_decompose(&p.d, tol)?;
    Ok(GramSpace {
        dim_h0: rank,
        embed: factor.adjoint(),
    })
}

/// A unitary map [A B; C D]: H⊕In → H⊕Out.
#[derive(Debug, Clone)]
pub struct UnitaryColligation {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
    /// Spectrum of the state block, for boundary-evaluation rejection.
    state_spectrum: Vec<C64>,
}

impl UnitaryColligation {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let h = a.nrows();
        let dim_in = b.ncols();
        let dim_out = c.nrows();
        if a.ncols() != h || b.nrows() != h || c.ncols() != h || d.nrows() != dim_out
            || d.ncols() != dim_in
        {
            return Err(AipError::DimensionMismatch(
                "colligation blocks are inconsistent".into(),
            ));
        }
        let full = block2x2(&a, &b, &c, &d);
        let dev = unitarity_error(&full);
        if dev > 1e-10 {
            return Err(AipError::NotUnitary { deviation: dev });
        }
        let state_spectrum = eigenvalues_general(&a)?;
        Ok(Self {
            a,
            b,
            c,
            d,
            state_spectrum,
        })
    }

    pub fn dim_state(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_in(&self) -> usize {
        self.b.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> CMatrix {
        block2x2(&self.a, &self.b, &self.c, &self.d)
    }

    pub fn state_spectrum(&self) -> &[C64] {
        &self.state_spectrum
    }

    /// Reject boundary points within 1e-8 of a resolvent pole 1/λ.
    fn check_point(&self, z: C64) -> Result<()> {
        if z.norm() < 1.0 - 1e-8 {
            return Ok(());
        }
        for &ev in &self.state_spectrum {
            // (I − zA) is singular at z = 1/λ.
            if ev.norm() > 0.5 && (z - ev.inv()).norm() < 1e-8 {
                return Err(AipError::SingularResolvent {
                    z,
                    eigenvalue: Some(ev),
                });
            }
        }
        Ok(())
    }

    /// Characteristic function D + zC(I − zA)⁻¹B.
    pub fn char_fn(&self, z: C64) -> Result<CMatrix> {
        if self.dim_state() == 0 {
            return Ok(self.d.clone());
        }
        self.check_point(z)?;
        let x = solve_resolvent(&self.a, z, &self.b, Some(&self.state_spectrum))?;
        Ok(&self.d + (&self.c * x).map(|v| v * z))
    }

    /// Fourier representation of a state vector:
    /// plus = C(I − zA)⁻¹h, minus = z̄·Bᴴ(I − z̄Aᴴ)⁻¹h.
    pub fn fourier(&self, h: &CVector, z: C64) -> Result<(CVector, CVector)> {
        if h.len() != self.dim_state() {
            return Err(AipError::DimensionMismatch(format!(
                "state vector has {} entries, expected {}",
                h.len(),
                self.dim_state()
            )));
        }
        if self.dim_state() == 0 {
            return Ok((CVector::zeros(self.dim_out()), CVector::zeros(self.dim_in())));
        }
        self.check_point(z)?;
        let hm = CMatrix::from_column_slice(h.len(), 1, h.as_slice());
        let x = solve_resolvent(&self.a, z, &hm, Some(&self.state_spectrum))?;
        let plus = &self.c * &x;
        let conj_spec: Vec<C64> = self.state_spectrum.iter().map(|e| e.conj()).collect();
        let y = solve_resolvent(&self.a.adjoint(), z.conj(), &hm, Some(&conj_spec))?;
        let minus = (self.b.adjoint() * y).map(|v| v * z.conj());
        Ok((plus.column(0).into_owned(), minus.column(0).into_owned()))
    }
}

/// The isometry V: d_V → Δ_V built from the problem generators, with its
/// domain and range subspaces in H₀⊕E₁ and H₀⊕E₂ coordinates.
#[derive(Debug, Clone)]
pub struct IsometryParts {
    pub v: CMatrix,
    pub d_v: Subspace,
    pub delta_v: Subspace,
    pub generators_in: CMatrix,
    pub generators_out: CMatrix,
}

/// Build V on the generator span: column x_j of X maps `([T₁x_j], M₁x_j)` to
/// `([T₂x_j], M₂x_j)`. Images are fit by least squares with a residual check,
/// since T₁-images may be linearly dependent even when V is well defined.
pub fn build_isometry(p: &AipProblem, g: &GramSpace) -> Result<IsometryParts> {
    let gen1 = vstack(&(&g.embed * &p.t1), &p.m1);
    let gen2 = vstack(&(&g.embed * &p.t2), &p.m2);
    let d_v = span_basis(&gen1, SPAN_TOL)?;
    let delta_v = span_basis(&gen2, SPAN_TOL)?;
    if d_v.dim() != delta_v.dim() {
        return Err(AipError::IllDefined {
            residual: (d_v.dim() as f64 - delta_v.dim() as f64).abs(),
        });
    }
    let v = &gen2 * pinv(&gen1, 1e-12);
    let scale = frob(&gen2).max(1.0);
    let residual = frob(&(&v * &gen1 - &gen2)) / scale;
    if residual > 1e-8 {
        return Err(AipError::IllDefined { residual });
    }
    let w = &v * &d_v.basis;
    let iso_dev = frob(&(w.adjoint() * &w - identity(d_v.dim())));
    if iso_dev > 1e-9 {
        return Err(AipError::NotIsometric { deviation: iso_dev });
    }
    Ok(IsometryParts {
        v,
        d_v,
        delta_v,
        generators_in: gen1,
        generators_out: gen2,
    })
}

/// Human-readable record of the normalization convention baked into the
/// universal colligation, carried into reports.
pub const NORMALIZATION: &str = "u1=u2=identity on pivoted Gram-Schmidt complement bases; \
eigenvalues sorted descending with largest-coordinate tie-break and positive-real anchor phase";

/// Blocks of the coefficient matrix S = [s0 s2; s1 s]: E₁⊕N₂ → E₂⊕N₁.
#[derive(Debug, Clone)]
pub struct SBlocks {
    pub s0: CMatrix,
    pub s1: CMatrix,
    pub s2: CMatrix,
    pub s: CMatrix,
}

/// Evaluator for the coefficient matrix S(ζ): the characteristic function of
/// the universal colligation A₀: H₀⊕E₁⊕N₂ → H₀⊕E₂⊕N₁.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub colligation: UnitaryColligation,
    pub gram: GramSpace,
    pub dim_e1: usize,
    pub dim_e2: usize,
    pub dim_n1: usize,
    pub dim_n2: usize,
}

impl CoefficientMatrix {
    pub fn dim_in(&self) -> usize {
        self.dim_e1 + self.dim_n2
    }

    pub fn dim_out(&self) -> usize {
        self.dim_e2 + self.dim_n1
    }

    /// Full S(z): (E₂⊕N₁) × (E₁⊕N₂).
    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        self.colligation.char_fn(z)
    }

    pub fn split(&self, s_full: &CMatrix) -> SBlocks {
        let (e1, e2, n1, n2) = (self.dim_e1, self.dim_e2, self.dim_n1, self.dim_n2);
        SBlocks {
            s0: s_full.view((0, 0), (e2, e1)).into_owned(),
            s2: s_full.view((0, e1), (e2, n2)).into_owned(),
            s1: s_full.view((e2, 0), (n1, e1)).into_owned(),
            s: s_full.view((e2, e1), (n1, n2)).into_owned(),
        }
    }

    pub fn blocks(&self, z: C64) -> Result<SBlocks> {
        Ok(self.split(&self.eval(z)?))
    }

    /// Fourier representation of H₀: (C₀(I−zA₀)⁻¹h₀, z̄B₀ᴴ(I−z̄A₀ᴴ)⁻¹h₀).
    pub fn fourier_g0(&self, h0: &CVector, z: C64) -> Result<(CVector, CVector)> {
        self.colligation.fourier(h0, z)
    }

    /// The full square matrix of A₀ on H₀⊕E₁⊕N₂.
    pub fn universal_matrix(&self) -> CMatrix {
        self.colligation.matrix()
    }
}

/// Build the universal colligation: A₀ acts as V on d_V, as the complement
/// coordinate map into N₁ on d_V^⊥, and as the adjoint coordinate map from N₂
/// onto Δ_V^⊥. The deterministic complement bases fix the normalization.
pub fn build_universal_colligation(p: &AipProblem, g: &GramSpace) -> Result<CoefficientMatrix> {
    let iso = build_isometry(p, g)?;
    let r = g.dim_h0;
    let e1 = p.dim_e1();
    let e2 = p.dim_e2();
    let k = iso.d_v.dim();
    let dim_n1 = r + e1 - k;
    let dim_n2 = r + e2 - k;
    let u1 = identity(dim_n1);
    let u2 = identity(dim_n2);
    let full = complete_isometry_to_unitary(&iso.v, &iso.d_v, &iso.delta_v, &u1, &u2)?;
    // Rows: H₀, E₂, N₁; columns: H₀, E₁, N₂.
    let a = full.view((0, 0), (r, r)).into_owned();
    let b = full.view((0, r), (r, e1 + dim_n2)).into_owned();
    let c_blk = full.view((r, 0), (e2 + dim_n1, r)).into_owned();
    let d_blk = full.view((r, r), (e2 + dim_n1, e1 + dim_n2)).into_owned();
    let colligation = UnitaryColligation::new(a, b, c_blk, d_blk)?;
    let cm = CoefficientMatrix {
        colligation,
        gram: g.clone(),
        dim_e1: e1,
        dim_e2: e2,
        dim_n1,
        dim_n2,
    };
    // The structure of A₀ forces s(0) = 0.
    let s_at_zero = cm.blocks(C64::new(0.0, 0.0))?.s;
    if frob(&s_at_zero) > 1e-10 {
        return Err(AipError::InvalidData(format!(
            "s(0) = {:e} ≠ 0; construction is inconsistent",
            frob(&s_at_zero)
        )));
    }
    Ok(cm)
}

/// Residual of the restriction identity: A₀ applied to the d_V generators
/// minus the Δ_V generators, per the extension property.
pub fn restriction_residual(p: &AipProblem, cm: &CoefficientMatrix) -> f64 {
    let n = p.dim_x();
    let gen1 = vstack(&(&cm.gram.embed * &p.t1), &p.m1);
    let gen2 = vstack(&(&cm.gram.embed * &p.t2), &p.m2);
    let gen1_ext = vstack(&gen1, &zeros(cm.dim_n2, n));
    let gen2_ext = vstack(&gen2, &zeros(cm.dim_n1, n));
    frob(&(cm.universal_matrix() * gen1_ext - gen2_ext))
}

/// Largest singular value of S over a set of points (Schur-class check).
pub fn max_snorm_on(cm: &CoefficientMatrix, points: &[C64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in points {
        worst = worst.max(opnorm(&cm.eval(z)?));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr, ONE};
    use crate::problems::{
        build_boundary, build_np, BoundaryData, NpData,
    };
    use approx::assert_abs_diff_eq;

    fn np(nodes: &[C64], values: &[C64]) -> AipProblem {
        build_np(&NpData::new(nodes.to_vec(), values.to_vec()).unwrap()).unwrap()
    }

    fn universal(p: &AipProblem) -> CoefficientMatrix {
        let g = build_gram_space(p, 1e-10).unwrap();
        build_universal_colligation(p, &g).unwrap()
    }

    #[test]
    fn gram_space_of_trivial_np() {
        let p = np(&[cr(0.0)], &[cr(0.0)]);
        let g = build_gram_space(&p, 1e-10).unwrap();
        assert_eq!(g.dim_h0, 1);
        assert_abs_diff_eq!(g.embed[(0, 0)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gram_space_of_rank_one_pick() {
        let p = np(&[cr(0.0), cr(0.5)], &[cr(0.0), cr(0.5)]);
        let g = build_gram_space(&p, 1e-10).unwrap();
        assert_eq!(g.dim_h0, 1, "rank-1 Pick matrix has 1-dim Gram space");
    }

    #[test]
    fn gram_space_of_zero_form() {
        let p = build_boundary(&BoundaryData::new(cr(1.0), cr(1.0), 0.0).unwrap()).unwrap();
        let g = build_gram_space(&p, 1e-10).unwrap();
        assert_eq!(g.dim_h0, 0);
    }

    #[test]
    fn isometry_of_trivial_np() {
        // T1 = 0, M1 = 1: d_V = span{(0,1)}; T2 = 1, M2 = 0: Δ_V = span{(1,0)}.
        let p = np(&[cr(0.0)], &[cr(0.0)]);
        let g = build_gram_space(&p, 1e-10).unwrap();
        let iso = build_isometry(&p, &g).unwrap();
        assert_eq!(iso.d_v.dim(), 1);
        assert_abs_diff_eq!(iso.d_v.basis[(1, 0)].norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(iso.delta_v.basis[(0, 0)].norm(), 1.0, epsilon = 1e-12);
        let image = &iso.v * CMatrix::from_column_slice(2, 1, &[cr(0.0), cr(1.0)]);
        assert_abs_diff_eq!(image[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(image[(1, 0)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn isometry_of_boundary_problem() {
        let p = build_boundary(&BoundaryData::new(cr(1.0), cr(1.0), 1.0).unwrap()).unwrap();
        let g = build_gram_space(&p, 1e-10).unwrap();
        let iso = build_isometry(&p, &g).unwrap();
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(iso.d_v.basis[(0, 0)].norm(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(iso.d_v.basis[(1, 0)].norm(), r, epsilon = 1e-12);
        // V is the identity on the common line.
        let x = CMatrix::from_column_slice(2, 1, &[cr(r), cr(r)]);
        assert!(frob(&(&iso.v * &x - &x)) < 1e-12);
    }

    #[test]
    fn universal_colligation_of_trivial_np() {
        let p = np(&[cr(0.0)], &[cr(0.0)]);
        let cm = universal(&p);
        assert_eq!((cm.dim_n1, cm.dim_n2), (1, 1));
        // Hand-derived: A₀ is the cyclic permutation e1→N1, E1→H0, N2→E2.
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[
                cr(0.0),
                cr(1.0),
                cr(0.0),
                cr(0.0),
                cr(0.0),
                cr(1.0),
                cr(1.0),
                cr(0.0),
                cr(0.0),
            ],
        );
        assert!(frob(&(cm.universal_matrix() - expected)) < 1e-12);
        // S(z) = [[0, 1], [z, 0]].
        let s = cm.eval(c(0.3, 0.4)).unwrap();
        assert_abs_diff_eq!(s[(0, 0)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((s[(1, 0)] - c(0.3, 0.4)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 1)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn universal_colligation_single_node_value() {
        // Node 0, value w1: S(z) = [[w1, δ], [zδ, −z·conj(w1)]], δ = √(1−|w1|²).
        let w1 = c(0.2, 0.2);
        let p = np(&[cr(0.0)], &[w1]);
        let cm = universal(&p);
        let delta = (1.0 - w1.norm_sqr()).sqrt();
        let z = c(0.5, -0.3);
        let blocks = cm.blocks(z).unwrap();
        assert_abs_diff_eq!((blocks.s0[(0, 0)] - w1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((blocks.s2[(0, 0)] - cr(delta)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((blocks.s1[(0, 0)] - z * delta).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (blocks.s[(0, 0)] + z * w1.conj()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn universal_colligation_boundary_closed_form() {
        // s0 = 1/(2−z), s1 = s2 = √2(z−1)/(2−z), s = z/(2−z).
        let p = build_boundary(&BoundaryData::new(cr(1.0), cr(1.0), 1.0).unwrap()).unwrap();
        let cm = universal(&p);
        assert_eq!((cm.dim_n1, cm.dim_n2), (1, 1));
        let z = c(0.3, 0.1);
        let b = cm.blocks(z).unwrap();
        let two = cr(2.0);
        let s0 = (two - z).inv();
        let s1 = cr(2.0f64.sqrt()) * (z - ONE) / (two - z);
        let s = z / (two - z);
        assert_abs_diff_eq!((b.s0[(0, 0)] - s0).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((b.s1[(0, 0)] - s1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((b.s2[(0, 0)] - s1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((b.s[(0, 0)] - s).norm(), 0.0, epsilon = 1e-12);
        // |s(t0)| = 1 at t0 = 1.
        let bs = cm.blocks(cr(1.0)).unwrap();
        assert_abs_diff_eq!(bs.s[(0, 0)].norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_boundary_has_no_defect_spaces() {
        let p = build_boundary(&BoundaryData::new(cr(1.0), cr(1.0), 0.0).unwrap()).unwrap();
        let cm = universal(&p);
        assert_eq!((cm.dim_n1, cm.dim_n2), (0, 0));
        let s = cm.eval(cr(0.5)).unwrap();
        assert_eq!((s.nrows(), s.ncols()), (1, 1));
        assert_abs_diff_eq!((s[(0, 0)] - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_one_pick_forces_unique_solution() {
        let p = np(&[cr(0.0), cr(0.5)], &[cr(0.0), cr(0.5)]);
        let cm = universal(&p);
        assert_eq!((cm.dim_n1, cm.dim_n2), (0, 0));
        // The unique solution is w(z) = z.
        let z = c(0.2, 0.6);
        let s = cm.eval(z).unwrap();
        assert_abs_diff_eq!((s[(0, 0)] - z).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn restriction_and_unitarity_invariants() {
        // Values from the Schur function 0.7z + 0.1, so the data is feasible.
        let p = np(
            &[cr(0.0), c(0.3, 0.2), c(-0.4, 0.1)],
            &[cr(0.1), c(0.31, 0.14), c(-0.18, 0.07)],
        );
        let cm = universal(&p);
        assert!(unitarity_error(&cm.universal_matrix()) <= 1e-10);
        assert!(restriction_residual(&p, &cm) <= 1e-9);
    }

    #[test]
    fn char_fn_examples() {
        // dim H = 0: constant.
        let col = UnitaryColligation::new(
            zeros(0, 0),
            zeros(0, 2),
            zeros(2, 0),
            identity(2),
        )
        .unwrap();
        assert!(frob(&(col.char_fn(c(0.3, 0.2)).unwrap() - identity(2))) < 1e-14);
        // A = 0, B = C = 1, D = 0: char fn = z.
        let col = UnitaryColligation::new(
            zeros(1, 1),
            identity(1),
            identity(1),
            zeros(1, 1),
        )
        .unwrap();
        let z = c(0.4, 0.5);
        assert_abs_diff_eq!(
            (col.char_fn(z).unwrap()[(0, 0)] - z).norm(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(col.char_fn(cr(0.0)).unwrap()[(0, 0)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_g0_trivial_cases() {
        let p = np(&[cr(0.0)], &[cr(0.0)]);
        let cm = universal(&p);
        let h0 = CVector::from_element(1, cr(1.0));
        // z = 0: minus part vanishes because of the z̄ prefactor.
        let (plus, minus) = cm.fourier_g0(&h0, cr(0.0)).unwrap();
        assert!(minus.norm() < 1e-15);
        assert!((plus - &cm.colligation.c * CMatrix::from_column_slice(1, 1, &[cr(1.0)]))
            .norm()
            < 1e-15);
        // h0 = 0 gives zero.
        let z0 = CVector::zeros(1);
        let (plus, minus) = cm.fourier_g0(&z0, c(0.5, 0.1)).unwrap();
        assert!(plus.norm() == 0.0 && minus.norm() == 0.0);
    }

    #[test]
    fn schur_property_on_disk_samples() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let p = np(&[cr(0.1), c(0.3, 0.4), c(-0.2, -0.5)], &[cr(0.0), cr(0.3), c(0.1, 0.2)]);
        let cm = universal(&p);
        let points: Vec<C64> = (0..200)
            .map(|_| {
                let r = 0.99 * rng.gen::<f64>().sqrt();
                let th = rng.gen::<f64>() * std::f64::consts::TAU;
                c(r * th.cos(), r * th.sin())
            })
            .collect();
        assert!(max_snorm_on(&cm, &points).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn boundary_values_are_unitary() {
        let p = np(&[cr(0.1), c(0.3, 0.4)], &[cr(0.0), cr(0.3)]);
        let cm = universal(&p);
        for &t in crate::circle::grid(32).iter() {
            let s = cm.eval(t).unwrap();
            let dev = frob(&(s.adjoint() * &s - identity(cm.dim_in())));
            assert!(dev < 1e-8, "S not unitary on the circle: {dev:e}");
        }
    }

    #[test]
    fn boundary_point_near_state_eigenvalue_is_rejected() {
        // A problem whose state block has a unimodular eigenvalue: D = [1],
        // T1 = [i], T2 = [1], M1 = M2 = [0] satisfies the identity with all
        // exterior couplings dead, so A₀ acts unitarily on H₀ itself.
        let t0 = c(0.0, 1.0);
        let p = AipProblem::new(
            identity(1),
            CMatrix::from_element(1, 1, t0),
            identity(1),
            zeros(1, 1),
            zeros(1, 1),
            true,
            crate::problems::ProblemKind::Raw,
        )
        .unwrap();
        let cm = universal(&p);
        let ev = cm.colligation.state_spectrum()[0];
        assert_abs_diff_eq!(ev.norm(), 1.0, epsilon = 1e-12);
        let bad = ev.inv();
        match cm.eval(bad) {
            Err(crate::error::AipError::SingularResolvent { eigenvalue, .. }) => {
                assert!(eigenvalue.is_some());
            }
            other => panic!("expected rejection near the state eigenvalue, got {other:?}"),
        }
        // Off the eigenvalue the boundary evaluation works.
        assert!(cm.eval(cr(1.0)).is_ok());
    }

    #[test]
    fn fourier_norm_quadrature_matches_state_norm() {
        let p = np(&[cr(0.0)], &[cr(0.0)]);
        let cm = universal(&p);
        let h0 = CVector::from_element(1, cr(1.0));
        let norm2 = crate::sarason::state_norm_quadrature(&cm, &h0, 2048).unwrap();
        assert!((norm2 - 1.0).abs() <= 2e-3, "‖G₀h₀‖² = {norm2}");
    }

    #[test]
    fn rebuild_is_bitwise_identical() {
        let p = np(&[cr(0.2), c(0.1, 0.5)], &[c(0.3, 0.1), cr(-0.2)]);
        let a = universal(&p).universal_matrix();
        let b = universal(&p).universal_matrix();
        assert_eq!(a.as_slice(), b.as_slice());
    }
}
