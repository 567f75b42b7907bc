//! Complex dense linear algebra used by every other module: Hermitian PSD
//! factorizations, deterministic orthonormal complements, completion of
//! isometries to unitaries, pseudo-inverses, resolvent solves.
//!
//! Everything is double precision and deterministic: eigenvalues are sorted
//! descending with ties broken by the index of the eigenvector's
//! largest-magnitude coordinate, and eigenvector phases are canonicalized so
//! that coordinate is positive real. Identical inputs give identical outputs.

use crate::error::{AipError, Result};
use nalgebra::{DMatrix, DVector};

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius norm.
pub fn frob(m: &CMatrix) -> f64 {
    m.norm()
}

/// Thin singular value decomposition M = U·diag(σ)·Vᴴ by one-sided Jacobi,
/// with σ descending. Accurate to high relative precision for all singular
/// values, including (near-)zero ones; nalgebra's complex SVD mis-factors
/// near-rank-deficient matrices, so nothing here uses it.
pub fn jacobi_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let transpose = m.nrows() < m.ncols();
    let work = if transpose { m.adjoint() } else { m.clone() };
    let (rows, cols) = (work.nrows(), work.ncols());
    let mut b = work;
    let mut v = identity(cols);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let bp: CVector = b.column(p).into_owned();
                let bq: CVector = b.column(q).into_owned();
                let app = bp.norm_squared();
                let aqq = bq.norm_squared();
                let apq = (bp.adjoint() * &bq)[(0, 0)];
                if apq.norm() <= eps * (app * aqq).sqrt() || apq.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Phase-align column q, then a real Jacobi rotation.
                let phase = apq / cr(apq.norm());
                let zeta = (aqq - app) / (2.0 * apq.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let up = b[(i, p)];
                    let uq = b[(i, q)] * phase.conj();
                    b[(i, p)] = up * cs - uq * sn;
                    b[(i, q)] = up * sn + uq * cs;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * phase.conj();
                    v[(i, p)] = vp * cs - vq * sn;
                    v[(i, q)] = vp * sn + vq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| b.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));
    let mut u = zeros(rows, cols);
    let mut vv = zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..rows {
                u[(i, dst)] = b[(i, src)] / s;
            }
        }
        for i in 0..cols {
            vv[(i, dst)] = v[(i, src)];
        }
    }
    if transpose {
        (vv, sigma, u)
    } else {
        (u, sigma, vv)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    jacobi_svd(m).1
}

/// Largest singular value; 0 for empty matrices.
pub fn opnorm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(r, cols)
}

/// max(‖UᴴU−I‖, ‖UUᴴ−I‖), Frobenius.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    if n == 0 {
        return 0.0;
    }
    let e1 = frob(&(u.adjoint() * u - identity(n)));
    let e2 = frob(&(u * u.adjoint() - identity(n)));
    e1.max(e2)
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Stack [top; bottom] by rows.
pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    assert_eq!(top.ncols(), bottom.ncols(), "vstack: column mismatch");
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

/// Stack [left right] by columns.
pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    assert_eq!(left.nrows(), right.nrows(), "hstack: row mismatch");
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), (left.nrows(), left.ncols())).copy_from(left);
    out.view_mut((0, left.ncols()), (right.nrows(), right.ncols()))
        .copy_from(right);
    out
}

/// Assemble a 2x2 block matrix [[a, b], [c, d]].
pub fn block2x2(a: &CMatrix, b: &CMatrix, cc: &CMatrix, d: &CMatrix) -> CMatrix {
    vstack(&hstack(a, b), &hstack(cc, d))
}

/// A subspace of C^ambient_dim given by an orthonormal column basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub basis: CMatrix,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != ambient_dim {
            return Err(AipError::DimensionMismatch(format!(
                "subspace basis has {} rows in ambient dimension {}",
                basis.nrows(),
                ambient_dim
            )));
        }
        let k = basis.ncols();
        let dev = frob(&(basis.adjoint() * &basis - identity(k)));
        if dev > 1e-10 {
            return Err(AipError::NotUnitary { deviation: dev });
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// Canonically ordered Hermitian eigendecomposition.
///
/// Returns (eigenvalues desc, eigenvectors as columns). Ties are broken by the
/// ascending index of each eigenvector's largest-magnitude coordinate, and
/// phases are fixed so that coordinate is positive real.
pub fn hermitian_eigen(g: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if g.nrows() != g.ncols() {
        return Err(AipError::DimensionMismatch(format!(
            "hermitian_eigen on {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let n = g.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    // Symmetrize to kill roundoff asymmetry before factoring.
    let h = (g + g.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    let anchors: Vec<usize> = (0..n)
        .map(|j| {
            let col = se.eigenvectors.column(j);
            let mut best = 0usize;
            let mut best_mag = -1.0f64;
            for (i, v) in col.iter().enumerate() {
                let mag = v.norm();
                if mag > best_mag + 0.0 {
                    best_mag = mag;
                    best = i;
                }
            }
            best
        })
        .collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap()
            .then(anchors[a].cmp(&anchors[b]))
    });
    let vals: Vec<f64> = order.iter().map(|&j| se.eigenvalues[j]).collect();
    let mut vecs = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = se.eigenvectors.column(src);
        let anchor = col[anchors[src]];
        let phase = if anchor.norm() > 0.0 {
            anchor.conj() / anchor.norm()
        } else {
            ONE
        };
        for i in 0..n {
            vecs[(i, dst)] = col[i] * phase;
        }
    }
    Ok((vals, vecs))
}

/// Rank-revealing factorization G ≈ L·Lᴴ of a Hermitian PSD matrix.
///
/// rank = number of eigenvalues > tol; errors if G deviates from Hermitian by
/// more than tol·‖G‖ or has an eigenvalue below −tol·‖G‖.
pub fn hermitian_psd_decompose(g: &CMatrix, tol: f64) -> Result<(usize, CMatrix)> {
    if g.nrows() != g.ncols() {
        return Err(AipError::DimensionMismatch(format!(
            "hermitian_psd_decompose on {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let scale = frob(g);
    let herm_dev = frob(&(g - g.adjoint()));
    if herm_dev > tol * scale {
        return Err(AipError::NotHermitian { deviation: herm_dev });
    }
    let (vals, vecs) = hermitian_eigen(g)?;
    if let Some(&min) = vals.last() {
        if min < -tol * scale {
            return Err(AipError::NotPsd { eigenvalue: min });
        }
    }
    let rank = vals.iter().filter(|&&v| v > tol).count();
    let n = g.nrows();
    let mut factor = zeros(n, rank);
    for j in 0..rank {
        let s = vals[j].max(0.0).sqrt();
        for i in 0..n {
            factor[(i, j)] = vecs[(i, j)] * s;
        }
    }
    Ok((rank, factor))
}

/// Orthonormal basis of the column space of M, at a relative eigenvalue
/// cutoff on M·Mᴴ. Deterministic through `hermitian_eigen`.
pub fn span_basis(m: &CMatrix, rel_tol: f64) -> Result<Subspace> {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return Subspace::new(n, zeros(n, 0));
    }
    let gram = m * m.adjoint();
    let (vals, vecs) = hermitian_eigen(&gram)?;
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = rel_tol * top;
    let rank = vals.iter().filter(|&&v| v > cutoff && v > 0.0).count();
    Subspace::new(n, vecs.columns(0, rank).into_owned())
}

/// Orthonormal basis of the orthogonal complement of S in its ambient space.
///
/// Column-pivoted Gram–Schmidt on the identity columns projected against
/// S.basis; pivot is the largest residual norm, ties go to the lowest index.
pub fn orthonormal_complement(s: &Subspace) -> Subspace {
    let n = s.ambient_dim;
    let k = s.dim();
    let m = n - k;
    let mut cand = identity(n) - s.projector();
    let mut basis = zeros(n, m);
    for step in 0..m {
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for j in 0..n {
            let norm = cand.column(j).norm();
            if norm > best + 1e-14 * best.abs().max(1.0) {
                best = norm;
                pivot = j;
            }
        }
        let mut q: CVector = cand.column(pivot).into_owned();
        // One re-orthogonalization pass for numerical hygiene.
        let corr = s.basis.adjoint() * &q;
        q -= &s.basis * corr;
        for prev in 0..step {
            let col = basis.column(prev).into_owned();
            let coef = col.adjoint() * &q;
            q -= col * coef[(0, 0)];
        }
        let norm = q.norm();
        q /= cr(norm);
        for j in 0..n {
            let coef = q.adjoint() * cand.column(j);
            let update = &q * coef[(0, 0)];
            for i in 0..n {
                cand[(i, j)] -= update[i];
            }
        }
        basis.set_column(step, &q);
    }
    Subspace {
        ambient_dim: n,
        basis,
    }
}

/// Extend an isometry V: dom → ran to a unitary between dom's ambient space
/// ⊕ C^q and ran's ambient space ⊕ C^p, acting as u1 from dom-complement
/// coordinates into the appended output copy and as u2ᴴ from the appended
/// input copy into ran's complement.
///
/// The complements are the deterministic `orthonormal_complement` bases, so
/// identical inputs give bitwise-identical unitaries.
pub fn complete_isometry_to_unitary(
    v: &CMatrix,
    dom: &Subspace,
    ran: &Subspace,
    u1: &CMatrix,
    u2: &CMatrix,
) -> Result<CMatrix> {
    let m1 = dom.ambient_dim;
    let m2 = ran.ambient_dim;
    let k = dom.dim();
    if ran.dim() != k {
        return Err(AipError::DimensionMismatch(format!(
            "dom dim {} vs ran dim {}",
            k,
            ran.dim()
        )));
    }
    if v.nrows() != m2 || v.ncols() != m1 {
        return Err(AipError::DimensionMismatch(format!(
            "isometry matrix is {}x{}, expected {}x{}",
            v.nrows(),
            v.ncols(),
            m2,
            m1
        )));
    }
    let p = m1 - k;
    let q = m2 - k;
    if u1.nrows() != p || u1.ncols() != p || u2.nrows() != q || u2.ncols() != q {
        return Err(AipError::DimensionMismatch(format!(
            "normalization maps: u1 is {}x{} (want {p}x{p}), u2 is {}x{} (want {q}x{q})",
            u1.nrows(),
            u1.ncols(),
            u2.nrows(),
            u2.ncols()
        )));
    }
    for (name, u) in [("u1", u1), ("u2", u2)] {
        let dev = unitarity_error(u);
        if dev > 1e-10 {
            return Err(AipError::DimensionMismatch(format!(
                "normalization map {name} is not unitary (deviation {dev:e})"
            )));
        }
    }
    // Isometry check on the domain basis, and range containment in ran.
    let w = v * &dom.basis;
    let iso_dev = frob(&(w.adjoint() * &w - identity(k)));
    if iso_dev > 1e-8 {
        return Err(AipError::NotIsometric { deviation: iso_dev });
    }
    let range_dev = frob(&(&w - &ran.basis * (ran.basis.adjoint() * &w)));
    if range_dev > 1e-8 {
        return Err(AipError::NotIsometric {
            deviation: range_dev,
        });
    }

    // Polish the image columns to an exact isometry (thin polar factor) and
    // build the range complement against them, so the assembled matrix is
    // unitary to machine precision even when V came from an ill-conditioned
    // least-squares fit.
    let w_pol = polar_orthonormal(&w)?;
    let dom_c = orthonormal_complement(dom);
    let ran_pol = Subspace {
        ambient_dim: m2,
        basis: w_pol.clone(),
    };
    let ran_c = orthonormal_complement(&ran_pol);
    let top_left = &w_pol * dom.basis.adjoint();
    let top_right = &ran_c.basis * u2.adjoint();
    let bottom_left = u1 * dom_c.basis.adjoint();
    let bottom_right = zeros(p, q);
    let full = block2x2(&top_left, &top_right, &bottom_left, &bottom_right);
    let dev = unitarity_error(&full);
    if dev > 1e-10 {
        return Err(AipError::NotUnitary { deviation: dev });
    }
    Ok(full)
}

/// Moore–Penrose pseudo-inverse, zeroing singular values below tol·σ_max.
pub fn pinv(m: &CMatrix, tol: f64) -> CMatrix {
    let (r, cols) = (m.nrows(), m.ncols());
    if r == 0 || cols == 0 {
        return zeros(cols, r);
    }
    let (u, sigma, v) = jacobi_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let k = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    if k == 0 {
        return zeros(cols, r);
    }
    let uk = u.columns(0, k).into_owned();
    let vk = v.columns(0, k).into_owned();
    let mut inv_s = zeros(k, k);
    for i in 0..k {
        inv_s[(i, i)] = cr(1.0 / sigma[i]);
    }
    vk * inv_s * uk.adjoint()
}

/// Nearest matrix with orthonormal columns (thin polar factor), valid for
/// well-conditioned near-isometries.
pub fn polar_orthonormal(w: &CMatrix) -> Result<CMatrix> {
    if w.ncols() == 0 {
        return Ok(w.clone());
    }
    let (u, sigma, v) = jacobi_svd(w);
    if sigma.last().copied().unwrap_or(0.0) < 0.5 {
        return Err(AipError::NotIsometric {
            deviation: 1.0 - sigma.last().copied().unwrap_or(0.0),
        });
    }
    Ok(u * v.adjoint())
}

/// Solve (I − z·A)·X = rhs. `spectrum`, when supplied, is A's precomputed
/// spectrum used to report the offending eigenvalue near a singularity.
pub fn solve_resolvent(
    a: &CMatrix,
    z: C64,
    rhs: &CMatrix,
    spectrum: Option<&[C64]>,
) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || rhs.nrows() != n {
        return Err(AipError::DimensionMismatch(format!(
            "resolvent: A is {}x{}, rhs has {} rows",
            a.nrows(),
            a.ncols(),
            rhs.nrows()
        )));
    }
    if n == 0 {
        return Ok(zeros(0, rhs.ncols()));
    }
    let m = identity(n) - a.scale_z(z);
    let lu = m.clone().lu();
    let sol = lu.solve(rhs);
    let singular_err = || AipError::SingularResolvent {
        z,
        eigenvalue: spectrum.and_then(|evs| nearest_resolvent_pole(evs, z)),
    };
    let x = sol.ok_or_else(singular_err)?;
    let scale = frob(rhs).max(1e-300);
    let resid = frob(&(&m * &x - rhs)) / scale;
    if !resid.is_finite() || resid > 1e-6 {
        return Err(singular_err());
    }
    Ok(x)
}

fn nearest_resolvent_pole(spectrum: &[C64], z: C64) -> Option<C64> {
    // (I − zA) is singular iff z·λ = 1 for some eigenvalue λ of A.
    spectrum
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (z * a - ONE).norm();
            let db = (z * b - ONE).norm();
            da.partial_cmp(&db).unwrap()
        })
        .filter(|ev| (z * ev - ONE).norm() < 1e-4)
}

/// Eigenvalues of a general complex square matrix (Schur), sorted
/// lexicographically by (re, im) for reproducibility.
pub fn eigenvalues_general(a: &CMatrix) -> Result<Vec<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(AipError::DimensionMismatch(format!(
            "eigenvalues of {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = a
        .clone()
        .try_schur(1e-14, 200_000)
        .or_else(|| a.clone().try_schur(1e-10, 200_000))
        .ok_or(AipError::EigenFailure)?;
    let (_, t) = schur.unpack();
    let mut evs: Vec<C64> = t.diagonal().iter().copied().collect();
    evs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(evs)
}

trait ScaleZ {
    fn scale_z(&self, z: C64) -> CMatrix;
}

impl ScaleZ for CMatrix {
    fn scale_z(&self, z: C64) -> CMatrix {
        self.map(|x| x * z)
    }
}
