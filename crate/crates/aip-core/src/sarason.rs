//! Dense-set machinery for Sarason coefficient matrices: the set F^S in H^S,
//! the factorization s₂ = θ·s̃₂, outer/∗-outer verification, and the
//! indeterminate-Sarason criterion.

use crate::circle;
use crate::colligation::CoefficientMatrix;
use crate::error::{AipError, Result};
use crate::linalg::{cr, identity, pinv, vstack, zeros, C64, CMatrix, CVector, ONE};
use crate::parametrization::WEIGHT_PINV_TOL;
use crate::problems::{kernel_eval, AipProblem, ProblemKind};

/// Finite Blaschke product with the given zeros, in the standard
/// normalization b_ζ(z) = (|ζ|/ζ)·(ζ−z)/(1−ζ̄z), with b_0(z) = z.
pub fn blaschke_product(zeros_list: &[C64], z: C64) -> C64 {
    zeros_list
        .iter()
        .map(|&zeta| {
            if zeta.norm() < 1e-14 {
                z
            } else {
                (cr(zeta.norm()) / zeta) * (zeta - z) / (ONE - zeta.conj() * z)
            }
        })
        .product()
}

/// One evaluation of the dense set: F^S x sampled on a circle grid, stacked
/// as (E₂⊕N₁⊕E₁⊕N₂)-vectors.
#[derive(Debug, Clone)]
pub struct DenseSetSample {
    pub x: CVector,
    pub grid: Vec<C64>,
    pub fs_values: Vec<CVector>,
    /// Max deviation between the explicit resolvent formulas and the direct
    /// Fourier-representation evaluation.
    pub crosscheck_residual: f64,
    /// Relative nonnegative-frequency mass of the bottom (N₂) component,
    /// which must be an H²₋ boundary function.
    pub bottom_plus_mass: f64,
}

fn m_ext(p: &AipProblem, cm: &CoefficientMatrix) -> (CMatrix, CMatrix) {
    let n = p.dim_x();
    let m1_ext = vstack(&p.m1, &zeros(cm.dim_n2, n));
    let m2_ext = vstack(&p.m2, &zeros(cm.dim_n1, n));
    (m1_ext, m2_ext)
}

/// F^S x at one point by the special-case formulas:
/// `F₊ = (S·[M₁;0] − [M₂;0])(zT₂−T₁)⁻¹x`, `F₋ = z̄([M₁;0] − S*·[M₂;0])(T₂−z̄T₁)⁻¹x`.
pub fn eval_fs_point(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    x: &CVector,
    z: C64,
) -> Result<(CVector, CVector)> {
    let (m1_ext, m2_ext) = m_ext(p, cm);
    let s = cm.eval(z)?;
    let xm = CMatrix::from_column_slice(x.len(), 1, x.as_slice());
    let pencil_plus = p.t2.map(|v| v * z) - &p.t1;
    let y_plus = pencil_plus
        .lu()
        .solve(&xm)
        .ok_or(AipError::SingularResolvent { z, eigenvalue: None })?;
    let f_plus = (&s * &m1_ext - &m2_ext) * y_plus;
    let pencil_minus = &p.t2 - p.t1.map(|v| v * z.conj());
    let y_minus = pencil_minus
        .lu()
        .solve(&xm)
        .ok_or(AipError::SingularResolvent { z, eigenvalue: None })?;
    let f_minus = ((&m1_ext - s.adjoint() * &m2_ext) * y_minus).map(|v| v * z.conj());
    Ok((
        f_plus.column(0).into_owned(),
        f_minus.column(0).into_owned(),
    ))
}

/// Evaluate F^S x on a circle grid, cross-checked against the direct
/// G₀-representation route.
pub fn eval_fs(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    x: &CVector,
    quad_n: usize,
) -> Result<DenseSetSample> {
    if !matches!(p.kind, ProblemKind::Sarason { .. }) {
        return Err(AipError::InvalidData(
            "dense-set evaluation is defined for Sarason-built problems".into(),
        ));
    }
    let grid = circle::grid(quad_n);
    let mut fs_values = Vec::with_capacity(quad_n);
    let mut crosscheck = 0.0f64;
    for &t in &grid {
        let (fp, fm) = eval_fs_point(p, cm, x, t)?;
        let h0 = &cm.gram.embed * x;
        let (gp, gm) = cm.fourier_g0(&h0, t)?;
        crosscheck = crosscheck.max((&fp - gp).norm().max((&fm - gm).norm()));
        let mut stacked = CVector::zeros(fp.len() + fm.len());
        stacked.rows_mut(0, fp.len()).copy_from(&fp);
        stacked.rows_mut(fp.len(), fm.len()).copy_from(&fm);
        fs_values.push(stacked);
    }
    let top = cm.dim_e2 + cm.dim_n1 + cm.dim_e1;
    let bottom: Vec<C64> = fs_values.iter().map(|v| v[top]).collect();
    let bottom_plus_mass = if bottom.iter().any(|v| v.norm() > 1e-14) {
        circle::h2minus_defect(&bottom)
    } else {
        0.0
    };
    Ok(DenseSetSample {
        x: x.clone(),
        grid,
        fs_values,
        crosscheck_residual: crosscheck,
        bottom_plus_mass,
    })
}

/// ‖f‖²_{H^S} by quadrature in the range norm of [[I, S],[S*, I]].
fn hs_inner(cm: &CoefficientMatrix, f: &[CVector], g: &[CVector]) -> Result<C64> {
    let n = f.len();
    let grid = circle::grid(n);
    let dim_top = cm.dim_out();
    let dim_bot = cm.dim_in();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let s = cm.eval(grid[j])?;
        let weight = crate::linalg::block2x2(
            &identity(dim_top),
            &s,
            &s.adjoint(),
            &identity(dim_bot),
        );
        let winv = pinv(&weight, WEIGHT_PINV_TOL);
        acc += (g[j].adjoint() * winv * &f[j])[(0, 0)];
    }
    Ok(acc / cr(n as f64))
}

/// Quadrature of ‖F^S x‖²_{H^S} for one sample.
pub fn hs_norm_sq(cm: &CoefficientMatrix, sample: &DenseSetSample) -> Result<f64> {
    Ok(hs_inner(cm, &sample.fs_values, &sample.fs_values)?.re)
}

/// Quadrature of ‖G₀h₀‖²_{H^S}: equals ‖h₀‖² when the universal colligation
/// is simple.
pub fn state_norm_quadrature(
    cm: &CoefficientMatrix,
    h0: &CVector,
    quad_n: usize,
) -> Result<f64> {
    let grid = circle::grid(quad_n);
    let mut values = Vec::with_capacity(quad_n);
    for &t in &grid {
        let (plus, minus) = cm.fourier_g0(h0, t)?;
        let mut stacked = CVector::zeros(plus.len() + minus.len());
        stacked.rows_mut(0, plus.len()).copy_from(&plus);
        stacked.rows_mut(plus.len(), minus.len()).copy_from(&minus);
        values.push(stacked);
    }
    Ok(hs_inner(cm, &values, &values)?.re)
}

/// Divide s₂ by the Blaschke product: s̃₂(t) = conj(θ(t))·s₂(t) on the grid.
/// The residual is the relative negative-frequency mass of s̃₂ plus any
/// excess of |s̃₂| over 1; both vanish when s₂ = θ·s̃₂ with s̃₂ Schur.
pub fn factor_s2_through_theta(
    cm: &CoefficientMatrix,
    theta_zeros: &[C64],
    quad_n: usize,
) -> Result<(Vec<C64>, f64)> {
    if cm.dim_e2 != 1 || cm.dim_n2 != 1 {
        return Err(AipError::DimensionMismatch(
            "scalar Sarason instance required".into(),
        ));
    }
    let grid = circle::grid(quad_n);
    let mut stilde = Vec::with_capacity(quad_n);
    let mut excess = 0.0f64;
    for &t in &grid {
        let s2 = cm.blocks(t)?.s2[(0, 0)];
        let val = blaschke_product(theta_zeros, t).conj() * s2;
        excess = excess.max(val.norm() - 1.0);
        stilde.push(val);
    }
    let residual = circle::h2plus_defect(&stilde) + excess.max(0.0);
    Ok((stilde, residual))
}

/// Scalar outer criterion: the gap |log|f(0)| − mean_j log|f(t_j)||, which
/// vanishes exactly for outer functions.
pub fn check_outer(f_samples: &[C64], f_at_0: C64) -> Result<f64> {
    if f_samples.is_empty() {
        return Err(AipError::InvalidData("no samples".into()));
    }
    let mut mean_log = 0.0;
    for v in f_samples {
        if v.norm() < 1e-12 {
            return Err(AipError::DegenerateInput(format!(
                "boundary sample with |f| = {:e}",
                v.norm()
            )));
        }
        mean_log += v.norm().ln();
    }
    mean_log /= f_samples.len() as f64;
    if f_at_0.norm() < 1e-300 {
        return Err(AipError::DegenerateInput("f(0) = 0".into()));
    }
    Ok((f_at_0.norm().ln() - mean_log).abs())
}

/// Unimodular constants (α, β) making s₁(0)·α and (conj(θ)s₂)(0)·β positive
/// real, plus the residual of the normalized identity s₁ = s̃₂.
#[derive(Debug, Clone)]
pub struct BlockNormalization {
    pub alpha: C64,
    pub beta: C64,
    pub s1_vs_stilde2: f64,
}

pub fn normalize_inner_blocks(
    cm: &CoefficientMatrix,
    theta_zeros: &[C64],
    quad_n: usize,
) -> Result<BlockNormalization> {
    let s1_at_0 = cm.blocks(cr(0.0))?.s1[(0, 0)];
    if s1_at_0.norm() < 1e-12 {
        return Err(AipError::DegenerateInput(format!(
            "|s1(0)| = {:e} is too small to normalize",
            s1_at_0.norm()
        )));
    }
    let (stilde, _) = factor_s2_through_theta(cm, theta_zeros, quad_n)?;
    let coeffs = circle::fourier_coeffs(&stilde);
    let stilde_at_0 = coeffs[0];
    if stilde_at_0.norm() < 1e-12 {
        return Err(AipError::DegenerateInput(format!(
            "|s̃2(0)| = {:e} is too small to normalize",
            stilde_at_0.norm()
        )));
    }
    let alpha = s1_at_0.conj() / cr(s1_at_0.norm());
    let beta = stilde_at_0.conj() / cr(stilde_at_0.norm());
    // Checked, not forced: after the phase fix the two must coincide.
    let grid = circle::grid(quad_n);
    let mut mismatch = 0.0f64;
    for (j, &t) in grid.iter().enumerate() {
        let s1 = cm.blocks(t)?.s1[(0, 0)];
        mismatch = mismatch.max((alpha * s1 - beta * stilde[j]).norm());
    }
    Ok(BlockNormalization {
        alpha,
        beta,
        s1_vs_stilde2: mismatch,
    })
}

/// The indeterminate-Sarason criterion: minimize
/// `⟨S·P₋S*(e − [x;0]), e − [x;0]⟩_{L²} = ‖P₋S*(e − [x;0])‖²`
/// over x in the span of the first `basis_size` kernels of K_θ, where e is
/// the constant N₁ unit vector. Near zero exactly for genuine coefficient
/// matrices of indeterminate Sarason problems.
pub fn indeterminate_criterion_infimum(
    cm: &CoefficientMatrix,
    p: &AipProblem,
    quad_n: usize,
    basis_size: usize,
) -> Result<f64> {
    let ProblemKind::Sarason { zeros: zk, .. } = &p.kind else {
        return Err(AipError::InvalidData(
            "criterion applies to Sarason-built problems".into(),
        ));
    };
    if cm.dim_n1 != 1 || cm.dim_n2 != 1 || cm.dim_e1 != 1 || cm.dim_e2 != 1 {
        return Err(AipError::DimensionMismatch(
            "scalar indeterminate instance required".into(),
        ));
    }
    normalize_inner_blocks(cm, zk, quad_n)?;
    let s_samples: Vec<CMatrix> = circle::grid(quad_n)
        .iter()
        .map(|&t| cm.eval(t))
        .collect::<Result<_>>()?;
    indeterminate_criterion_on_samples(&s_samples, zk, quad_n, basis_size.min(zk.len()))
}

/// Same minimization on externally supplied samples of S, used for negative
/// controls with corrupted blocks.
pub fn indeterminate_criterion_on_samples(
    s_samples: &[CMatrix],
    zk: &[C64],
    quad_n: usize,
    basis_size: usize,
) -> Result<f64> {
    let grid = circle::grid(quad_n);
    // b(t) = P₋(S*e), a_j(t) = P₋(S*[k_j; 0]); both are (E₁⊕N₂)-valued.
    let e_idx = 1; // the N₁ slot of E₂⊕N₁ in the scalar case
    let mut b_raw = vec![Vec::with_capacity(quad_n); 2];
    let mut a_raw = vec![vec![Vec::with_capacity(quad_n); 2]; basis_size];
    for (i, s) in s_samples.iter().enumerate() {
        let sh = s.adjoint();
        for comp in 0..2 {
            b_raw[comp].push(sh[(comp, e_idx)]);
        }
        let t = grid[i];
        for (j, raw) in a_raw.iter_mut().enumerate() {
            let mut xj = CVector::zeros(zk.len());
            xj[j] = ONE;
            let kj = kernel_eval(zk, &xj, t);
            for comp in 0..2 {
                raw[comp].push(sh[(comp, 0)] * kj);
            }
        }
    }
    let project = |raw: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
        raw.iter().map(|comp| circle::project_minus(comp)).collect()
    };
    let b = project(&b_raw);
    let a: Vec<Vec<Vec<C64>>> = a_raw.iter().map(project).collect();
    let l2 = |f: &Vec<Vec<C64>>, g: &Vec<Vec<C64>>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for comp in 0..2 {
            for j in 0..quad_n {
                acc += f[comp][j] * g[comp][j].conj();
            }
        }
        acc / cr(quad_n as f64)
    };
    let gram = CMatrix::from_fn(basis_size, basis_size, |i, j| l2(&a[j], &a[i]));
    let rhs = CVector::from_fn(basis_size, |i, _| l2(&b, &a[i]));
    let sol = pinv(&gram, 1e-10) * &rhs;
    let b_norm2 = l2(&b, &b).re;
    let cross = (rhs.adjoint() * &sol)[(0, 0)].re;
    Ok((b_norm2 - cross).max(0.0))
}

/// Denseness proxy: the vector built from a polynomial h₊ ∈ H²₊(N₁) must lie
/// in the span of {F^S x} up to quadrature error. Returns the worst relative
/// projection residual over monomials of degree ≤ max_degree.
pub fn denseness_residual(
    p: &AipProblem,
    cm: &CoefficientMatrix,
    max_degree: usize,
    quad_n: usize,
) -> Result<f64> {
    if cm.dim_n1 != 1 || cm.dim_n2 != 1 || cm.dim_e1 != 1 || cm.dim_e2 != 1 {
        return Err(AipError::DimensionMismatch(
            "scalar instance required".into(),
        ));
    }
    let n = p.dim_x();
    let samples: Vec<DenseSetSample> = (0..n)
        .map(|j| {
            let mut x = CVector::zeros(n);
            x[j] = ONE;
            eval_fs(p, cm, &x, quad_n)
        })
        .collect::<Result<_>>()?;
    let gram = CMatrix::from_fn(n, n, |i, j| {
        hs_inner(cm, &samples[j].fs_values, &samples[i].fs_values).unwrap()
    });
    let grid = circle::grid(quad_n);
    let mut worst = 0.0f64;
    for degree in 0..=max_degree {
        let v = dense_test_vector(cm, &grid, degree)?;
        let v_norm2 = hs_inner(cm, &v, &v)?.re;
        let rhs = CVector::from_fn(n, |i, _| hs_inner(cm, &v, &samples[i].fs_values).unwrap());
        let sol = pinv(&gram, 1e-10) * &rhs;
        let cross = (rhs.adjoint() * &sol)[(0, 0)].re;
        let residual = (v_norm2 - cross).max(0.0) / v_norm2.max(1e-12);
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// The H^S element `[[I, S],[S*, I]]·[0; h₊; −P₊(s₁*h₊); −P₊(s*h₊)]` sampled on
/// the grid, for h₊(t) = t^degree.
fn dense_test_vector(
    cm: &CoefficientMatrix,
    grid: &[C64],
    degree: usize,
) -> Result<Vec<CVector>> {
    let n = grid.len();
    let mut s_vals = Vec::with_capacity(n);
    let mut hp = Vec::with_capacity(n);
    for &t in grid {
        s_vals.push(cm.eval(t)?);
        hp.push(t.powu(degree as u32));
    }
    // w₋ = −P₊ S* [0; h₊], componentwise in E₁⊕N₂.
    let raw0: Vec<C64> = (0..n).map(|j| s_vals[j].adjoint()[(0, 1)] * hp[j]).collect();
    let raw1: Vec<C64> = (0..n).map(|j| s_vals[j].adjoint()[(1, 1)] * hp[j]).collect();
    let minus0 = circle::project_plus(&raw0);
    let minus1 = circle::project_plus(&raw1);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let w_plus = CVector::from_vec(vec![C64::new(0.0, 0.0), hp[j]]);
        let w_minus = CVector::from_vec(vec![-minus0[j], -minus1[j]]);
        let top = &w_plus + &s_vals[j] * &w_minus;
        let bot = s_vals[j].adjoint() * &w_plus + &w_minus;
        let mut stacked = CVector::zeros(4);
        stacked.rows_mut(0, 2).copy_from(&top);
        stacked.rows_mut(2, 2).copy_from(&bot);
        out.push(stacked);
    }
    Ok(out)
}
