//! Report assembly and byte-stable serialization: every float prints with 17
//! significant digits, writes are atomic (temp file + rename).

use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct Report {
    pub problem: ProblemSummary,
    pub normalization: String,
    pub quad_n: usize,
    pub seed: u64,
    pub parameters: Vec<crate::config::ParamSpec>,
    pub solutions: Vec<SolutionEntry>,
    pub analyses: AnalysisResults,
    pub checks: Vec<Check>,
    pub grids: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ProblemSummary {
    pub kind: String,
    pub dim_x: usize,
    pub dim_e1: usize,
    pub dim_e2: usize,
    pub dim_h0: usize,
    pub dim_n1: usize,
    pub dim_n2: usize,
    pub special_case: bool,
    pub identity_residual: f64,
    pub unique_solution: bool,
}

#[derive(Debug, Serialize)]
pub struct SolutionEntry {
    pub parameter: usize,
    pub interp_residual: f64,
    pub contractivity_margin: f64,
    pub norm_equality_gap: f64,
    pub norm_equality_rel_gap: f64,
    pub hardy_membership_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_d_estimate: Option<f64>,
    pub per_basis: Vec<[f64; 2]>,
    pub weight_pinv_tol: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct AnalysisResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub properties: Option<PropertyAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sarason: Option<SarasonAnalysis>,
}

#[derive(Debug, Serialize)]
pub struct BoundaryAnalysis {
    pub per_parameter: Vec<BoundaryEntry>,
}

#[derive(Debug, Serialize)]
pub struct BoundaryEntry {
    pub parameter: usize,
    pub d_liminf: f64,
    /// +∞ (divergent integral) serializes as null.
    pub d_integral: f64,
    pub quotient_converged: bool,
    pub residual_detected: bool,
}

#[derive(Debug, Serialize)]
pub struct ResidualAnalysis {
    pub eval_points: Vec<[f64; 2]>,
    pub per_parameter: Vec<ResidualEntry>,
}

#[derive(Debug, Serialize)]
pub struct ResidualEntry {
    pub parameter: usize,
    pub defect_norms: Vec<f64>,
    pub herglotz_min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_detected: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct PropertyAnalysis {
    pub boundary_factorization_residual_value: f64,
    pub defect_rank_identity_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute_continuity: Option<Vec<AbsoluteContinuityEntry>>,
}

#[derive(Debug, Serialize)]
pub struct AbsoluteContinuityEntry {
    pub parameter: usize,
    pub ac_gap_omega_s: f64,
    pub ac_gap_s_omega: f64,
}

#[derive(Debug, Serialize)]
pub struct SarasonAnalysis {
    pub theta_division_residual: f64,
    pub s1_outer_gap: f64,
    pub stilde2_star_outer_gap: f64,
    pub s1_vs_stilde2: f64,
    pub indeterminate_criterion_infimum: f64,
    pub denseness_residual: f64,
    pub fs_bottom_mass: f64,
    pub fs_crosscheck: f64,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<usize>,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, parameter: Option<usize>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            parameter,
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn flag(name: impl Into<String>, parameter: Option<usize>, ok: bool) -> Self {
        Self {
            name: name.into(),
            parameter,
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            passed: ok,
        }
    }
}

/// serde_json formatter printing every finite f64 as `{:.16e}` (17
/// significant digits), so identical runs serialize byte-identically.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("report serialization");
    out.push(b'\n');
    out
}

/// Write atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
