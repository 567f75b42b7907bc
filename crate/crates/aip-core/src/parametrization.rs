//! Solutions from Schur parameters: the linear-fractional formula
//! w = s₀ + s₂ω(I − sω)⁻¹s₁, the maps φ, ψ, the solution map F, and
//! quadrature verification of solutions against the problem data.

use crate::circle;
use crate::colligation::{CoefficientMatrix, SBlocks, NORMALIZATION};
use crate::error::{AipError, Result};
use crate::linalg::{cr, identity, opnorm, pinv, zeros, C64, CMatrix, CVector};
use crate::problems::{kernel_eval, AipProblem, ProblemKind};
use crate::{colligation::UnitaryColligation, linalg::block2x2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default pseudo-inverse tolerance for the boundary weight [[I, w],[w*, I]].
pub const WEIGHT_PINV_TOL: f64 = 1e-10;

/// A Schur-class parameter ω: N₁ → N₂, either a constant contraction or the
/// characteristic function of its own unitary colligation.
#[derive(Debug, Clone)]
pub enum SchurParameter {
    Constant(CMatrix),
    Realized(UnitaryColligation),
}

impl SchurParameter {
    pub fn constant(value: CMatrix) -> Result<Self> {
        let norm = opnorm(&value);
        if norm > 1.0 + 1e-12 {
            return Err(AipError::NotContractive { norm });
        }
        Ok(Self::Constant(value))
    }

    pub fn zero(dim_n1: usize, dim_n2: usize) -> Self {
        Self::Constant(zeros(dim_n2, dim_n1))
    }

    pub fn realized(col: UnitaryColligation) -> Self {
        Self::Realized(col)
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Self::Constant(v) => (v.ncols(), v.nrows()),
            Self::Realized(col) => (col.dim_in(), col.dim_out()),
        }
    }

    /// Check the parameter maps N₁ (dim_n1) into N₂ (dim_n2).
    pub fn check_dims(&self, dim_n1: usize, dim_n2: usize) -> Result<()> {
        let (din, dout) = self.dims();
        if din != dim_n1 || dout != dim_n2 {
            return Err(AipError::DimensionMismatch(format!(
                "parameter maps C^{din}→C^{dout}, expected C^{dim_n1}→C^{dim_n2}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        match self {
            Self::Constant(v) => Ok(v.clone()),
            Self::Realized(col) => col.char_fn(z),
        }
    }
}

/// φ = (I−sω)⁻¹s₁, ψ = s₂(I−ωs)⁻¹ and the circle variants
/// φ̊ = (I−sω)⁻¹, ψ̊ = (I−ωs)⁻¹, all evaluated at one point.
#[derive(Debug, Clone)]
pub struct PhiPsi {
    pub phi: CMatrix,
    pub psi: CMatrix,
    pub phi_circ: CMatrix,
    pub psi_circ: CMatrix,
    pub omega: CMatrix,
    pub blocks: SBlocks,
}

fn inv_guarded(m: &CMatrix, z: C64) -> Result<CMatrix> {
    let n = m.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(AipError::SingularResolvent { z, eigenvalue: None })?;
    if opnorm(&inv) > 1e12 {
        return Err(AipError::SingularResolvent { z, eigenvalue: None });
    }
    Ok(inv)
}

pub fn phi_psi(cm: &CoefficientMatrix, om: &SchurParameter, z: C64) -> Result<PhiPsi> {
    om.check_dims(cm.dim_n1, cm.dim_n2)?;
    let blocks = cm.blocks(z)?;
    let omega = om.eval(z)?;
    let phi_circ = inv_guarded(&(identity(cm.dim_n1) - &blocks.s * &omega), z)?;
    let psi_circ = inv_guarded(&(identity(cm.dim_n2) - &omega * &blocks.s), z)?;
    let phi = &phi_circ * &blocks.s1;
    let psi = &blocks.s2 * &psi_circ;
    Ok(PhiPsi {
        phi,
        psi,
        phi_circ,
        psi_circ,
        omega,
        blocks,
    })
}

/// The solution value w(z) = s₀ + s₂ω(I−sω)⁻¹s₁ : E₁ → E₂.
pub fn lft_solution(cm: &CoefficientMatrix, om: &SchurParameter, z: C64) -> Result<CMatrix> {
    let pp = phi_psi(cm, om, z)?;
    Ok(&pp.blocks.s0 + &pp.blocks.s2 * &pp.omega * &pp.phi)
}

/// The solution map F applied to x ∈ X at a boundary point t:
/// `F₊ = ψω·(G₀[x])₊|N₁ + (G₀[x])₊|E₂` and
/// `F₋ = φ*ω*·(G₀[x])₋|N₂ + (G₀[x])₋|E₁`.
pub fn eval_f(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    x: &CVector,
    t: C64,
    g: &crate::colligation::GramSpace,
) -> Result<(CVector, CVector)> {
    let h0 = &g.embed * x;
    let (plus, minus) = cm.fourier_g0(&h0, t)?;
    let pp = phi_psi(cm, om, t)?;
    combine_f(cm, &pp, &plus, &minus)
}

fn combine_f(
    cm: &CoefficientMatrix,
    pp: &PhiPsi,
    plus: &CVector,
    minus: &CVector,
) -> Result<(CVector, CVector)> {
    let (e1, e2, n1, n2) = (cm.dim_e1, cm.dim_e2, cm.dim_n1, cm.dim_n2);
    let plus_e2 = plus.rows(0, e2).into_owned();
    let plus_n1 = plus.rows(e2, n1).into_owned();
    let minus_e1 = minus.rows(0, e1).into_owned();
    let minus_n2 = minus.rows(e1, n2).into_owned();
    let f_plus = &plus_e2 + (&pp.psi * &pp.omega) * plus_n1;
    let f_minus = &minus_e1 + (pp.phi.adjoint() * pp.omega.adjoint()) * minus_n2;
    Ok((f_plus, f_minus))
}

/// F by the explicit resolvent formulas available in the special case:
/// F₊x = (wM₁ − M₂)(zT₂ − T₁)⁻¹x, F₋x = z̄(M₁ − w*M₂)(T₂ − z̄T₁)⁻¹x.
pub fn eval_f_special(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    x: &CVector,
    z: C64,
) -> Result<(CVector, CVector)> {
    if !p.special_case {
        return Err(AipError::InvalidData(
            "special-case formulas require the resolvent assumption".into(),
        ));
    }
    let w = lft_solution(cm, om, z)?;
    let pencil_plus = p.t2.map(|v| v * z) - &p.t1;
    let xm = CMatrix::from_column_slice(x.len(), 1, x.as_slice());
    let y_plus = pencil_plus
        .lu()
        .solve(&xm)
        .ok_or(AipError::SingularResolvent { z, eigenvalue: None })?;
    let f_plus = (&w * &p.m1 - &p.m2) * &y_plus;
    let pencil_minus = &p.t2 - p.t1.map(|v| v * z.conj());
    let y_minus = pencil_minus
        .lu()
        .solve(&xm)
        .ok_or(AipError::SingularResolvent { z, eigenvalue: None })?;
    let f_minus = ((&p.m1 - w.adjoint() * &p.m2) * &y_minus).map(|v| v * z.conj());
    Ok((
        f_plus.column(0).into_owned(),
        f_minus.column(0).into_owned(),
    ))
}

/// Verification record for one (problem, parameter) pair.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    /// Interpolation residual: per-kind distance from the target data.
    pub interp_residual: f64,
    /// max σ_max(w(z)) − 1 over a random grid in |z| ≤ 0.99.
    pub contractivity_margin: f64,
    /// sup over the X basis of |‖F^ωx‖² − D(x,x)|.
    pub norm_equality_gap: f64,
    /// Same, relative to D(x,x) where D(x,x) is not tiny.
    pub norm_equality_rel_gap: f64,
    /// Wrong-sign Fourier mass: negative-index mass of F₊ plus
    /// nonnegative-index mass of F₋, relative.
    pub hardy_membership_residual: f64,
    /// Boundary problems: the angular-derivative estimate at t0.
    pub boundary_d_estimate: Option<f64>,
    /// Per-basis-vector (‖F^ωx‖², D(x,x)) pairs from quadrature.
    pub per_basis: Vec<NormPair>,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormPair {
    pub f_norm2: f64,
    pub dxx: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportMetadata {
    pub normalization: String,
    pub weight_pinv_tol: f64,
    pub quad_n: usize,
}

/// Deterministic sample of the open disk of the given radius.
pub fn disk_samples(n: usize, radius: f64, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            C64::new(r * th.cos(), r * th.sin())
        })
        .collect()
}

/// Quadrature of ‖f‖² in the range norm of the weight [[I, w],[w*, I]]:
/// mean over the grid of f(t)ᴴ·W(t)^[−1]·f(t).
fn range_norm_sq(f_samples: &[(CVector, CVector)], w_samples: &[CMatrix]) -> f64 {
    let n = f_samples.len();
    let mut acc = 0.0;
    for j in 0..n {
        let (fp, fm) = &f_samples[j];
        let w = &w_samples[j];
        let e2 = fp.len();
        let e1 = fm.len();
        let mut f = CVector::zeros(e2 + e1);
        f.rows_mut(0, e2).copy_from(fp);
        f.rows_mut(e2, e1).copy_from(fm);
        let weight = block2x2(&identity(e2), w, &w.adjoint(), &identity(e1));
        let winv = pinv(&weight, WEIGHT_PINV_TOL);
        let v = &winv * &f;
        let val = (v.adjoint() * &weight * &v)[(0, 0)].re;
        acc += val;
    }
    acc / n as f64
}

/// Verify a solution against the problem data by direct evaluation and
/// circle quadrature. quad_n must be at least 256.
pub fn verify_solution(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    quad_n: usize,
) -> Result<SolutionReport> {
    if quad_n < 256 {
        return Err(AipError::InvalidData(format!(
            "quad_n = {quad_n} < 256"
        )));
    }
    om.check_dims(cm.dim_n1, cm.dim_n2)?;
    let n = p.dim_x();
    let grid = circle::grid(quad_n);

    // Shared per-point evaluation for all basis vectors: G₀ columns of embed.
    let mut f_samples: Vec<Vec<(CVector, CVector)>> = vec![Vec::with_capacity(quad_n); n];
    let mut w_samples: Vec<CMatrix> = Vec::with_capacity(quad_n);
    for &t in &grid {
        let t = nudge_off_singularity(cm, t);
        let pp = phi_psi(cm, om, t)?;
        let w = &pp.blocks.s0 + &pp.blocks.s2 * &pp.omega * &pp.phi;
        w_samples.push(w);
        for j in 0..n {
            let x = basis_vector(n, j);
            let h0 = &cm.gram.embed * &x;
            let (plus, minus) = cm.fourier_g0(&h0, t)?;
            let fpm = combine_f(cm, &pp, &plus, &minus)?;
            f_samples[j].push(fpm);
        }
    }

    // (a) interpolation residual per problem kind.
    let interp_residual = interpolation_residual(p, cm, om, quad_n, &grid, &w_samples)?;

    // (b) contractivity margin over 200 disk points.
    let mut margin = f64::NEG_INFINITY;
    for z in disk_samples(200, 0.99, 0x5eed) {
        let w = lft_solution(cm, om, z)?;
        margin = margin.max(opnorm(&w) - 1.0);
    }

    // (c) norm equality per basis vector.
    let mut per_basis = Vec::with_capacity(n);
    let mut gap = 0.0f64;
    let mut rel_gap = 0.0f64;
    for j in 0..n {
        let f_norm2 = range_norm_sq(&f_samples[j], &w_samples);
        let dxx = p.d[(j, j)].re;
        per_basis.push(NormPair { f_norm2, dxx });
        let g = (f_norm2 - dxx).abs();
        gap = gap.max(g);
        if dxx > 1e-12 {
            rel_gap = rel_gap.max(g / dxx);
        }
    }

    // (d) Hardy membership: wrong-sign Fourier mass of F±.
    let mut hardy = 0.0f64;
    for j in 0..n {
        let e2 = p.dim_e2();
        let e1 = p.dim_e1();
        for comp in 0..e2 {
            let samples: Vec<C64> = f_samples[j].iter().map(|(fp, _)| fp[comp]).collect();
            if samples.iter().any(|v| v.norm() > 1e-14) {
                hardy = hardy.max(circle::h2plus_defect(&samples));
            }
        }
        for comp in 0..e1 {
            let samples: Vec<C64> = f_samples[j].iter().map(|(_, fm)| fm[comp]).collect();
            if samples.iter().any(|v| v.norm() > 1e-14) {
                hardy = hardy.max(circle::h2minus_defect(&samples));
            }
        }
    }

    let boundary_d_estimate = match &p.kind {
        ProblemKind::Boundary { t0, .. } => {
            Some(boundary_quotient_estimate(cm, om, *t0)?)
        }
        _ => None,
    };

    Ok(SolutionReport {
        interp_residual,
        contractivity_margin: margin,
        norm_equality_gap: gap,
        norm_equality_rel_gap: rel_gap,
        hardy_membership_residual: hardy,
        boundary_d_estimate,
        per_basis,
        metadata: ReportMetadata {
            normalization: NORMALIZATION.to_string(),
            weight_pinv_tol: WEIGHT_PINV_TOL,
            quad_n,
        },
    })
}

fn basis_vector(n: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[j] = cr(1.0);
    v
}

/// Push a grid point off an exact resolvent pole by a 1e-9 rotation.
fn nudge_off_singularity(cm: &CoefficientMatrix, t: C64) -> C64 {
    for &ev in cm.colligation.state_spectrum() {
        if ev.norm() > 0.5 && (t - ev.inv()).norm() < 1e-9 {
            return t * C64::new(0.0, 1e-9).exp();
        }
    }
    t
}

fn interpolation_residual(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    quad_n: usize,
    grid: &[C64],
    w_samples: &[CMatrix],
) -> Result<f64> {
    match &p.kind {
        ProblemKind::Np { nodes, values } => {
            let mut worst = 0.0f64;
            for (zk, wk) in nodes.iter().zip(values.iter()) {
                let w = lft_solution(cm, om, *zk)?;
                worst = worst.max((w[(0, 0)] - wk).norm());
            }
            Ok(worst)
        }
        ProblemKind::Boundary { t0, w0, .. } => {
            let r = 1.0 - 1e-4;
            let w = lft_solution(cm, om, t0.map_scale(r))?;
            Ok((w[(0, 0)] - w0).norm())
        }
        ProblemKind::Sarason { zeros: zk, wstar, .. } => {
            // ‖P₊(w̄x) − W*x‖_{L²} per kernel-basis vector, via the grid.
            let n = p.dim_x();
            let mut worst = 0.0f64;
            for j in 0..n {
                let xj = basis_vector(n, j);
                let gx: Vec<C64> = (0..quad_n)
                    .map(|i| {
                        let t = grid[i];
                        let x_t = kernel_eval(zk, &xj, t);
                        w_samples[i][(0, 0)].conj() * x_t
                    })
                    .collect();
                let projected = circle::project_plus(&gx);
                let wx = wstar.column(j).into_owned();
                let target: Vec<C64> = grid
                    .iter()
                    .map(|&t| kernel_eval(zk, &wx, t))
                    .collect();
                let diff2: f64 = projected
                    .iter()
                    .zip(target.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    / quad_n as f64;
                worst = worst.max(diff2.sqrt());
            }
            Ok(worst)
        }
        ProblemKind::Raw => Ok(0.0),
    }
}

/// Radial Carathéodory quotient of the solution at t0, Richardson-corrected.
fn boundary_quotient_estimate(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    t0: C64,
) -> Result<f64> {
    let q = |r: f64| -> Result<f64> {
        let w = lft_solution(cm, om, t0.map_scale(r))?;
        Ok((1.0 - w[(0, 0)].norm_sqr()) / (1.0 - r * r))
    };
    let q1 = q(1.0 - 2e-4)?;
    let q2 = q(1.0 - 1e-4)?;
    Ok((2.0 * q2 - q1).max(0.0))
}

trait MapScale {
    fn map_scale(&self, s: f64) -> C64;
}

impl MapScale for C64 {
    fn map_scale(&self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
}

/// Random constant Schur parameter with σ_max ≤ max_norm.
pub fn random_constant_parameter(
    rng: &mut impl Rng,
    dim_n1: usize,
    dim_n2: usize,
    max_norm: f64,
) -> SchurParameter {
    if dim_n1 == 0 || dim_n2 == 0 {
        return SchurParameter::Constant(zeros(dim_n2, dim_n1));
    }
    let raw = CMatrix::from_fn(dim_n2, dim_n1, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let top = opnorm(&raw).max(1e-12);
    let target = max_norm * rng.gen::<f64>();
    SchurParameter::Constant(raw.map(|v| v * cr(target / top)))
}
