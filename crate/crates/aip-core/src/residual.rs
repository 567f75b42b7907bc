//! Spectral function of the residual part of the coupling and the boundary
//! properties it induces on the coefficient matrix: the real-part defect,
//! properties 1′/2′/2″, and the inner-ness check of the indeterminate case.

use crate::circle;
use crate::colligation::CoefficientMatrix;
use crate::error::{AipError, Result};
use crate::linalg::{
    block2x2, frob, identity, pinv, zeros, C64, CMatrix,
};
use crate::parametrization::{phi_psi, PhiPsi, SchurParameter, WEIGHT_PINV_TOL};

/// One evaluation of the residual spectral function at a disk point.
#[derive(Debug, Clone)]
pub struct SpectralEval {
    pub z: C64,
    /// The spectral function a_ω(z) on N₂⊕N₁ (skew constant + å − Herglotz
    /// integral term), from quadrature.
    pub a_omega: CMatrix,
    /// The closed-form part å_ω(z).
    pub a_circ: CMatrix,
    /// Real-part defect a_ω(z) + a_ω(z)ᴴ = å + åᴴ − Poisson integral term.
    pub defect: CMatrix,
}

/// å_ω(z) = [ψ̊−½I, ωφ̊; sψ̊, φ̊−½I] on N₂⊕N₁.
pub fn eval_a_circ(cm: &CoefficientMatrix, om: &SchurParameter, z: C64) -> Result<CMatrix> {
    let pp = phi_psi(cm, om, z)?;
    Ok(a_circ_from(cm, &pp))
}

fn a_circ_from(cm: &CoefficientMatrix, pp: &PhiPsi) -> CMatrix {
    let half2 = identity(cm.dim_n2).map(|v| v * 0.5);
    let half1 = identity(cm.dim_n1).map(|v| v * 0.5);
    block2x2(
        &(&pp.psi_circ - half2),
        &(&pp.omega * &pp.phi_circ),
        &(&pp.blocks.s * &pp.psi_circ),
        &(&pp.phi_circ - half1),
    )
}

/// The (N₂⊕N₁) × (E₂⊕E₁) matrix R(t) = [ψ, ψω; φ*ω*, φ*]ᴴ-side factor of the
/// spectral-function integrand; the integrand is Rᴴ·W^[−1]·R.
fn integrand_factor(pp: &PhiPsi) -> CMatrix {
    block2x2(
        &pp.psi,
        &(&pp.psi * &pp.omega),
        &(pp.phi.adjoint() * pp.omega.adjoint()),
        &pp.phi.adjoint(),
    )
}

fn weight_matrix(w: &CMatrix) -> CMatrix {
    block2x2(
        &identity(w.nrows()),
        w,
        &w.adjoint(),
        &identity(w.ncols()),
    )
}

/// Real-part defect of the residual spectral function:
/// å(z) + å(z)ᴴ − ∫ Poisson_z(t) · R(t)ᴴ W(t)^[−1] R(t) dm(t).
///
/// Vanishes exactly when the coupling has a trivial residual part.
pub fn eval_defect(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    z: C64,
    quad_n: usize,
) -> Result<CMatrix> {
    Ok(eval_spectral(cm, om, z, quad_n)?.defect)
}

/// Evaluate å, the Poisson/Herglotz integrals, and assemble both the defect
/// and the full spectral function a_ω(z).
pub fn eval_spectral(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    z: C64,
    quad_n: usize,
) -> Result<SpectralEval> {
    if z.norm() >= 1.0 {
        return Err(AipError::InvalidData(
            "spectral function is evaluated inside the disk".into(),
        ));
    }
    let pp_z = phi_psi(cm, om, z)?;
    let a_circ = a_circ_from(cm, &pp_z);
    let nn = cm.dim_n1 + cm.dim_n2;
    let mut poisson_term = zeros(nn, nn);
    let mut herglotz_term = zeros(nn, nn);
    for &t in &circle::grid(quad_n) {
        let pp = phi_psi(cm, om, t)?;
        let w = &pp.blocks.s0 + &pp.blocks.s2 * &pp.omega * &pp.phi;
        let weight = weight_matrix(&w);
        let winv = pinv(&weight, WEIGHT_PINV_TOL);
        let r = integrand_factor(&pp);
        let core = r.adjoint() * winv * &r;
        let pk = circle::poisson(z, t);
        poisson_term += core.map(|v| v * pk);
        let herg = (t + z) / (t - z);
        herglotz_term += core.map(|v| v * herg);
    }
    poisson_term /= C64::new(quad_n as f64, 0.0);
    herglotz_term /= C64::new(quad_n as f64, 0.0);
    let defect = &a_circ + a_circ.adjoint() - &poisson_term;
    // a_ω(z) = ½[0, −ω(0); ω(0)*, 0] + å(z) − ½∫ (t+z)/(t−z)·(…) dm.
    let omega0 = om.eval(C64::new(0.0, 0.0))?;
    let skew = block2x2(
        &zeros(cm.dim_n2, cm.dim_n2),
        &omega0.map(|v| -v),
        &omega0.adjoint(),
        &zeros(cm.dim_n1, cm.dim_n1),
    )
    .map(|v| v * 0.5);
    let a_omega = skew + &a_circ - herglotz_term.map(|v| v * 0.5);
    Ok(SpectralEval {
        z,
        a_omega,
        a_circ,
        defect,
    })
}

/// Max Frobenius gap over the samples of the identity
/// [[I, s*],[s, I]] = [s₂*, 0; 0, s₁]·W₀^[−1]·[s₂, 0; 0, s₁*],
/// with W₀ the weight of the central solution s₀.
pub fn boundary_factorization_residual(cm: &CoefficientMatrix, t_samples: &[C64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in t_samples {
        let b = cm.blocks(t)?;
        let lhs = block2x2(
            &identity(cm.dim_n2),
            &b.s.adjoint(),
            &b.s,
            &identity(cm.dim_n1),
        );
        let w0 = weight_matrix(&b.s0);
        let w0_inv = pinv(&w0, WEIGHT_PINV_TOL);
        let left = block2x2(
            &b.s2.adjoint(),
            &zeros(cm.dim_n2, cm.dim_e1),
            &zeros(cm.dim_n1, cm.dim_e2),
            &b.s1,
        );
        let right = block2x2(
            &b.s2,
            &zeros(cm.dim_e2, cm.dim_n1),
            &zeros(cm.dim_e1, cm.dim_n2),
            &b.s1.adjoint(),
        );
        let rhs = left * w0_inv * right;
        worst = worst.max(frob(&(lhs - rhs)));
    }
    Ok(worst)
}

/// Numerical-rank identity
/// rank(I − S*S) = rank(I − s₀*s₀) − dim N₁ at every sample.
pub fn check_defect_rank_identity(
    cm: &CoefficientMatrix,
    t_samples: &[C64],
    tol: f64,
) -> Result<bool> {
    for &t in t_samples {
        let s = cm.eval(t)?;
        let b = cm.split(&s);
        let full_defect = identity(cm.dim_in()) - s.adjoint() * &s;
        let s0_defect = identity(cm.dim_e1) - b.s0.adjoint() * &b.s0;
        let lhs = numerical_rank(&full_defect, tol);
        let rhs = numerical_rank(&s0_defect, tol) as i64 - cm.dim_n1 as i64;
        if lhs as i64 != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    crate::linalg::singular_values(m)
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

/// Absolutely-continuous check for the Herglotz measures of (I+ωs)/(I−ωs)
/// and (I+sω)/(I−sω): compare the Poisson integral of the boundary real part
/// against the real part at interior test points. Returns the max relative
/// gaps (ωs side, sω side); a gap bounded away from zero means singular mass.
pub fn absolute_continuity_gaps(
    cm: &CoefficientMatrix,
    om: &SchurParameter,
    quad_n: usize,
) -> Result<(f64, f64)> {
    if cm.dim_n1 != 1 || cm.dim_n2 != 1 {
        return Err(AipError::DimensionMismatch(
            "absolute-continuity check needs scalar defect spaces".into(),
        ));
    }
    let herglotz = |t_or_z: C64, which_sw: bool| -> Result<C64> {
        let pp = phi_psi(cm, om, t_or_z)?;
        let prod = if which_sw {
            pp.blocks.s[(0, 0)] * pp.omega[(0, 0)]
        } else {
            pp.omega[(0, 0)] * pp.blocks.s[(0, 0)]
        };
        let denom = C64::new(1.0, 0.0) - prod;
        if denom.norm() < 1e-14 {
            return Err(AipError::SingularResolvent {
                z: t_or_z,
                eigenvalue: None,
            });
        }
        Ok((C64::new(1.0, 0.0) + prod) / denom)
    };
    let grid = circle::grid(quad_n);
    let mut gaps = [0.0f64; 2];
    for (idx, which_sw) in [(0usize, false), (1usize, true)] {
        let boundary_re: Vec<f64> = grid
            .iter()
            .map(|&t| herglotz(t, which_sw).map(|h| h.re.max(0.0)))
            .collect::<Result<_>>()?;
        // Interior test points, including one near the positive real axis
        // where boundary problems concentrate their mass.
        let mut test_points: Vec<C64> = (0..8)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 8.0;
                C64::new(0.95 * th.cos(), 0.95 * th.sin())
            })
            .collect();
        test_points.push(C64::new(0.99, 0.0));
        for z in test_points {
            let actual = herglotz(z, which_sw)?.re;
            let mut quad = 0.0;
            for (j, &t) in grid.iter().enumerate() {
                quad += circle::poisson(z, t) * boundary_re[j];
            }
            quad /= quad_n as f64;
            let gap = (actual - quad).abs() / actual.abs().max(1e-12);
            gaps[idx] = gaps[idx].max(gap);
        }
    }
    // (ratio for the ωs-side function, ratio for the sω side).
    Ok((gaps[1], gaps[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::{build_gram_space, build_universal_colligation};
    use crate::linalg::{c, cr, opnorm};
    use crate::problems::{
        build_boundary, build_np, build_sarason, sarason_wstar_from_values, AipProblem,
        BoundaryData, NpData, SarasonData,
    };
    use approx::assert_abs_diff_eq;

    fn universal(p: &AipProblem) -> CoefficientMatrix {
        let g = build_gram_space(p, 1e-10).unwrap();
        build_universal_colligation(p, &g).unwrap()
    }

    fn np(nodes: &[C64], values: &[C64]) -> CoefficientMatrix {
        universal(&build_np(&NpData::new(nodes.to_vec(), values.to_vec()).unwrap()).unwrap())
    }

    fn boundary_cm() -> CoefficientMatrix {
        universal(&build_boundary(&BoundaryData::new(cr(1.0), cr(1.0), 1.0).unwrap()).unwrap())
    }

    #[test]
    fn a_circ_at_zero_is_upper_triangular_half() {
        let cm = np(&[cr(0.2)], &[cr(0.3)]);
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, c(0.1, 0.4))).unwrap();
        let a = eval_a_circ(&cm, &om, cr(0.0)).unwrap();
        // s(0) = 0 forces å(0) = [[½, ω(0)], [0, ½]].
        assert_abs_diff_eq!(a[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!((a[(0, 1)] - c(0.1, 0.4)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 0)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 1)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn a_circ_with_zero_parameter() {
        let cm = np(&[cr(0.2)], &[cr(0.3)]);
        let om = SchurParameter::zero(1, 1);
        let z = c(0.3, 0.3);
        let a = eval_a_circ(&cm, &om, z).unwrap();
        let s = cm.blocks(z).unwrap().s[(0, 0)];
        assert_abs_diff_eq!(a[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(1, 0)].norm(), s.norm(), epsilon = 1e-12);
    }

    #[test]
    fn a_circ_is_herglotz_on_a_grid() {
        let cm = np(&[cr(0.1), c(0.2, 0.4)], &[cr(0.17), c(0.24, 0.28)]);
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, c(0.5, -0.3))).unwrap();
        for z in crate::parametrization::disk_samples(50, 0.95, 99) {
            let a = eval_a_circ(&cm, &om, z).unwrap();
            let re = (&a + a.adjoint()).map(|v| v * 0.5);
            let (vals, _) = crate::linalg::hermitian_eigen(&re).unwrap();
            assert!(vals.last().copied().unwrap_or(0.0) >= -1e-9);
        }
    }

    #[test]
    fn defect_vanishes_for_np_problems() {
        let cm = np(&[cr(0.1), c(0.2, 0.4)], &[cr(0.17), c(0.24, 0.28)]);
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, c(0.4, 0.2))).unwrap();
        let d = eval_defect(&cm, &om, c(0.3, 0.2), 8192).unwrap();
        assert!(frob(&d) <= 2e-3, "defect {}", frob(&d));
    }

    #[test]
    fn defect_vanishes_for_sarason_problems() {
        let data = SarasonData::new(
            vec![cr(0.5), c(-0.2, 0.3)],
            sarason_wstar_from_values(&[cr(0.3), c(0.1, -0.2)]),
        )
        .unwrap();
        let cm = universal(&build_sarason(&data).unwrap());
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, cr(0.6))).unwrap();
        let d = eval_defect(&cm, &om, cr(0.0), 8192).unwrap();
        assert!(frob(&d) <= 2e-3, "defect {}", frob(&d));
    }

    #[test]
    fn defect_nontrivial_for_matched_boundary_parameter() {
        let cm = boundary_cm();
        let s1 = cm.blocks(cr(1.0)).unwrap().s[(0, 0)];
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, s1.conj())).unwrap();
        let d = eval_defect(&cm, &om, cr(0.0), 8192).unwrap();
        // Hand computation: w ≡ 1 and the defect is [[½, ½], [½, ½]].
        assert!(opnorm(&d) > 0.05, "defect {}", opnorm(&d));
        assert_abs_diff_eq!(d[(0, 0)].re, 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(d[(0, 1)].re, 0.5, epsilon = 1e-3);
        // PSD up to quadrature noise.
        let herm = (&d + d.adjoint()).map(|v| v * 0.5);
        let (vals, _) = crate::linalg::hermitian_eigen(&herm).unwrap();
        assert!(vals.last().copied().unwrap() >= -1e-6);
    }

    #[test]
    fn defect_vanishes_for_contractive_boundary_parameter() {
        let cm = boundary_cm();
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, cr(0.4))).unwrap();
        let d = eval_defect(&cm, &om, cr(0.0), 8192).unwrap();
        assert!(frob(&d) <= 2e-3, "defect {}", frob(&d));
    }

    #[test]
    fn boundary_factorization_holds_on_all_three_kinds() {
        let samples = circle::grid(512);
        let cm1 = np(&[cr(0.0), cr(0.5)], &[cr(0.2), cr(0.5)]);
        assert!(boundary_factorization_residual(&cm1, &samples).unwrap() <= 1e-6);
        let data = SarasonData::new(
            vec![cr(0.5), c(-0.2, 0.3)],
            sarason_wstar_from_values(&[cr(0.3), c(0.1, -0.2)]),
        )
        .unwrap();
        let cm2 = universal(&build_sarason(&data).unwrap());
        assert!(boundary_factorization_residual(&cm2, &samples).unwrap() <= 1e-6);
        let cm3 = boundary_cm();
        assert!(boundary_factorization_residual(&cm3, &samples).unwrap() <= 1e-6);
    }

    #[test]
    fn defect_rank_identity_and_innerness() {
        let samples = circle::grid(512);
        // Completely indeterminate scalar instance: S inner, both ranks 0.
        let cm = np(&[cr(0.0), cr(0.5)], &[cr(0.2), cr(0.5)]);
        assert!(check_defect_rank_identity(&cm, &samples, 1e-6).unwrap());
        let mut worst = 0.0f64;
        for &t in &samples {
            let s = cm.eval(t).unwrap();
            worst = worst.max(frob(&(identity(2) - s.adjoint() * s)));
        }
        assert!(worst <= 1e-7, "inner-ness violated: {worst:e}");
        // Degenerate rank-one-Pick instance: N1 = N2 = 0, S = s0 inner.
        let cm_deg = np(&[cr(0.0), cr(0.5)], &[cr(0.0), cr(0.5)]);
        assert!(check_defect_rank_identity(&cm_deg, &samples, 1e-6).unwrap());
        // Boundary instance.
        assert!(check_defect_rank_identity(&boundary_cm(), &samples, 1e-6).unwrap());
    }

    #[test]
    fn absolute_continuity_distinguishes_singular_mass() {
        let cm = np(&[cr(0.0), cr(0.5)], &[cr(0.2), cr(0.5)]);
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, cr(0.5))).unwrap();
        let (g2, g1) = absolute_continuity_gaps(&cm, &om, 8192).unwrap();
        assert!(g2 <= 5e-3 && g1 <= 5e-3, "gaps {g2} {g1}");
        // Matched boundary parameter puts a point mass at t0.
        let cmb = boundary_cm();
        let s1 = cmb.blocks(cr(1.0)).unwrap().s[(0, 0)];
        let omb = SchurParameter::constant(CMatrix::from_element(1, 1, s1.conj())).unwrap();
        let (h2, h1) = absolute_continuity_gaps(&cmb, &omb, 8192).unwrap();
        assert!(h2 > 0.1 && h1 > 0.1, "gaps {h2} {h1}");
        // Strictly contractive parameter on the boundary instance: AC.
        let omc = SchurParameter::constant(CMatrix::from_element(1, 1, cr(0.3))).unwrap();
        let (k2, k1) = absolute_continuity_gaps(&cmb, &omc, 8192).unwrap();
        assert!(k2 <= 5e-3 && k1 <= 5e-3, "gaps {k2} {k1}");
    }

    #[test]
    fn spectral_eval_assembles_all_parts() {
        let cm = np(&[cr(0.2)], &[cr(0.1)]);
        let om = SchurParameter::constant(CMatrix::from_element(1, 1, c(0.2, 0.3))).unwrap();
        let ev = eval_spectral(&cm, &om, c(0.1, 0.2), 4096).unwrap();
        // Defect consistency with the dedicated entry point.
        let d = eval_defect(&cm, &om, c(0.1, 0.2), 4096).unwrap();
        assert!(frob(&(&ev.defect - &d)) < 1e-12);
        // Re a_ω = defect/… : a_ω + a_ωᴴ equals the defect by construction.
        let re = &ev.a_omega + ev.a_omega.adjoint();
        assert!(frob(&(re - &ev.defect)) < 1e-8);
    }
}
