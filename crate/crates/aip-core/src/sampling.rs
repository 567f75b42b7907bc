//! Seeded random generation of feasible problem instances and Schur
//! parameters, for randomized verification suites.

use crate::colligation::UnitaryColligation;
use crate::error::Result;
use crate::linalg::{cr, zeros, C64, CMatrix};
use crate::parametrization::SchurParameter;
use crate::problems::{
    build_boundary, build_np, build_sarason, sarason_wstar_from_values, AipProblem, BoundaryData,
    NpData, SarasonData,
};
use rand::prelude::*;

fn random_point_in_disk(rng: &mut impl Rng, radius: f64) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let th = rng.gen::<f64>() * std::f64::consts::TAU;
    C64::new(r * th.cos(), r * th.sin())
}

/// Distinct nodes in |ζ| ≤ radius with pairwise separation ≥ 0.12.
pub fn random_nodes(rng: &mut impl Rng, count: usize, radius: f64) -> Vec<C64> {
    let mut nodes: Vec<C64> = Vec::with_capacity(count);
    while nodes.len() < count {
        let z = random_point_in_disk(rng, radius);
        if nodes.iter().all(|n| (n - z).norm() >= 0.12) {
            nodes.push(z);
        }
    }
    nodes
}

/// A random rational Schur function realized by a random unitary colligation
/// with the given state dimension (scalar input and output).
pub fn random_schur_function(rng: &mut impl Rng, state_dim: usize) -> UnitaryColligation {
    let n = state_dim + 1;
    let raw = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = raw.qr();
    let q = qr.q();
    let a = q.view((0, 0), (state_dim, state_dim)).into_owned();
    let b = q.view((0, state_dim), (state_dim, 1)).into_owned();
    let c = q.view((state_dim, 0), (1, state_dim)).into_owned();
    let d = q.view((state_dim, state_dim), (1, 1)).into_owned();
    UnitaryColligation::new(a, b, c, d).expect("QR factor is unitary")
}

/// Feasible Nevanlinna–Pick data: values sampled from a random rational
/// Schur function, so the Pick matrix is automatically PSD.
pub fn random_np(rng: &mut impl Rng, max_nodes: usize) -> Result<(NpData, AipProblem)> {
    let count = rng.gen_range(1..=max_nodes.max(1));
    let nodes = random_nodes(rng, count, 0.75);
    let state_dim = rng.gen_range(1..=3);
    let generator = random_schur_function(rng, state_dim);
    let damp = cr(0.9);
    let values: Vec<C64> = nodes
        .iter()
        .map(|&z| generator.char_fn(z).map(|m| m[(0, 0)] * damp))
        .collect::<Result<_>>()?;
    let data = NpData::new(nodes, values)?;
    let problem = build_np(&data)?;
    Ok((data, problem))
}

/// Random boundary data with t0, w0 on the circle and Dbound in [0.3, 2.3].
pub fn random_boundary(rng: &mut impl Rng) -> Result<(BoundaryData, AipProblem)> {
    let th = rng.gen::<f64>() * std::f64::consts::TAU;
    let ph = rng.gen::<f64>() * std::f64::consts::TAU;
    let t0 = C64::new(th.cos(), th.sin());
    let w0 = C64::new(ph.cos(), ph.sin());
    let d_bound = 0.3 + 2.0 * rng.gen::<f64>();
    let data = BoundaryData::new(t0, w0, d_bound)?;
    let problem = build_boundary(&data)?;
    Ok((data, problem))
}

/// Feasible Sarason data via the diagonal model: W* multiplies each kernel by
/// the conjugated value of a random Schur function at its zero.
pub fn random_sarason(rng: &mut impl Rng, max_zeros: usize) -> Result<(SarasonData, AipProblem)> {
    let count = rng.gen_range(1..=max_zeros.max(1));
    let zeros_list = random_nodes(rng, count, 0.7);
    let state_dim = rng.gen_range(1..=3);
    let generator = random_schur_function(rng, state_dim);
    let damp = cr(0.85);
    let values: Vec<C64> = zeros_list
        .iter()
        .map(|&z| generator.char_fn(z).map(|m| m[(0, 0)] * damp))
        .collect::<Result<_>>()?;
    let data = SarasonData::new(zeros_list, sarason_wstar_from_values(&values))?;
    let problem = build_sarason(&data)?;
    Ok((data, problem))
}

/// Random constant parameter with σ_max ≤ max_norm (uniform in norm).
pub fn random_constant(
    rng: &mut impl Rng,
    dim_n1: usize,
    dim_n2: usize,
    max_norm: f64,
) -> SchurParameter {
    if dim_n1 == 0 || dim_n2 == 0 {
        return SchurParameter::Constant(zeros(dim_n2, dim_n1));
    }
    crate::parametrization::random_constant_parameter(rng, dim_n1, dim_n2, max_norm)
}

/// Random realized parameter: a random rational scalar Schur function whose
/// state eigenvalues stay inside |λ| ≤ 0.85, so its boundary values are
/// resolved by moderate quadrature grids.
pub fn random_realized(rng: &mut impl Rng, state_dim: usize) -> SchurParameter {
    loop {
        let col = random_schur_function(rng, state_dim);
        if col.state_spectrum().iter().all(|ev| ev.norm() <= 0.85) {
            return SchurParameter::Realized(col);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::check_fundamental_identity;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_np_is_feasible_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (_, p) = random_np(&mut rng, 8).unwrap();
            assert!(check_fundamental_identity(&p).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn random_schur_function_is_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_schur_function(&mut rng, 3);
        for z in crate::parametrization::disk_samples(50, 0.99, 5) {
            assert!(f.char_fn(z).unwrap()[(0, 0)].norm() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_np(&mut ChaCha8Rng::seed_from_u64(9), 6).unwrap().0;
        let b = random_np(&mut ChaCha8Rng::seed_from_u64(9), 6).unwrap().0;
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.values, b.values);
    }
}
