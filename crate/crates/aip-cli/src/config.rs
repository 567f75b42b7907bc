//! Run-configuration and problem-file schemas. Complex numbers are [re, im]
//! pairs everywhere.

use aip_core::linalg::{C64, CMatrix};
use aip_core::parametrization::SchurParameter;
use aip_core::problems::{
    build_boundary, build_np, build_sarason, AipProblem, BoundaryData, NpData, SarasonData,
};
use aip_core::colligation::UnitaryColligation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub type Cpx = [f64; 2];

pub fn to_c64(v: Cpx) -> C64 {
    C64::new(v[0], v[1])
}

pub fn from_c64(z: C64) -> Cpx {
    [z.re, z.im]
}

fn to_cmatrix(rows: &[Vec<Cpx>]) -> Result<CMatrix, String> {
    let r = rows.len();
    let cols = rows.first().map(|row| row.len()).unwrap_or(0);
    if rows.iter().any(|row| row.len() != cols) {
        return Err("ragged matrix".into());
    }
    Ok(CMatrix::from_fn(r, cols, |i, j| to_c64(rows[i][j])))
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Cpx>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| from_c64(m[(i, j)])).collect())
        .collect()
}

/// Problem file: {"type": "np" | "boundary" | "sarason", ...}.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemFile {
    Np {
        nodes: Vec<Cpx>,
        values: Vec<Cpx>,
    },
    Boundary {
        t0: Cpx,
        w0: Cpx,
        #[serde(rename = "D")]
        d_bound: f64,
    },
    Sarason {
        zeros: Vec<Cpx>,
        wstar: Vec<Vec<Cpx>>,
    },
}

impl ProblemFile {
    pub fn build(&self) -> Result<AipProblem, aip_core::AipError> {
        match self {
            Self::Np { nodes, values } => {
                let data = NpData::new(
                    nodes.iter().copied().map(to_c64).collect(),
                    values.iter().copied().map(to_c64).collect(),
                )?;
                build_np(&data)
            }
            Self::Boundary { t0, w0, d_bound } => {
                let data = BoundaryData::new(to_c64(*t0), to_c64(*w0), *d_bound)?;
                build_boundary(&data)
            }
            Self::Sarason { zeros, wstar } => {
                let w = to_cmatrix(wstar)
                    .map_err(aip_core::AipError::InvalidData)?;
                let data =
                    SarasonData::new(zeros.iter().copied().map(to_c64).collect(), w)?;
                build_sarason(&data)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Np { .. } => "np",
            Self::Boundary { .. } => "boundary",
            Self::Sarason { .. } => "sarason",
        }
    }
}

/// Parameter specification in the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamSpec {
    /// ω = 0 (the central solution w = s₀).
    Zero,
    /// A constant contraction, rows of [re, im] entries (N₂ × N₁).
    Constant { value: Vec<Vec<Cpx>> },
    /// A rational parameter given by its unitary realization.
    Realized {
        a: Vec<Vec<Cpx>>,
        b: Vec<Vec<Cpx>>,
        c: Vec<Vec<Cpx>>,
        d: Vec<Vec<Cpx>>,
    },
    /// `count` random constant contractions drawn from the run seed.
    Random {
        count: usize,
        #[serde(default = "default_max_norm")]
        max_norm: f64,
    },
}

fn default_max_norm() -> f64 {
    0.9
}

impl ParamSpec {
    /// Materialize into concrete parameters for defect dimensions (n1, n2).
    pub fn materialize(
        &self,
        dim_n1: usize,
        dim_n2: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Vec<SchurParameter>, String> {
        match self {
            Self::Zero => Ok(vec![SchurParameter::zero(dim_n1, dim_n2)]),
            Self::Constant { value } => {
                let m = to_cmatrix(value)?;
                if m.nrows() != dim_n2 || m.ncols() != dim_n1 {
                    return Err(format!(
                        "constant parameter is {}x{}, problem needs {}x{}",
                        m.nrows(),
                        m.ncols(),
                        dim_n2,
                        dim_n1
                    ));
                }
                SchurParameter::constant(m).map(|p| vec![p]).map_err(|e| e.to_string())
            }
            Self::Realized { a, b, c, d } => {
                let col = UnitaryColligation::new(
                    to_cmatrix(a)?,
                    to_cmatrix(b)?,
                    to_cmatrix(c)?,
                    to_cmatrix(d)?,
                )
                .map_err(|e| e.to_string())?;
                if col.dim_in() != dim_n1 || col.dim_out() != dim_n2 {
                    return Err(format!(
                        "realized parameter maps C^{}→C^{}, problem needs C^{dim_n1}→C^{dim_n2}",
                        col.dim_in(),
                        col.dim_out()
                    ));
                }
                Ok(vec![SchurParameter::realized(col)])
            }
            Self::Random { count, max_norm } => {
                if !(*max_norm <= 1.0 && *max_norm >= 0.0) {
                    return Err(format!("random max_norm {max_norm} not in [0, 1]"));
                }
                Ok((0..*count)
                    .map(|_| {
                        aip_core::sampling::random_constant(rng, dim_n1, dim_n2, *max_norm)
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Solve,
    Verify,
    Boundary,
    Residual,
    Properties,
    Sarason,
}

impl Analysis {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "solve" => Ok(Self::Solve),
            "verify" => Ok(Self::Verify),
            "boundary" => Ok(Self::Boundary),
            "residual" => Ok(Self::Residual),
            "properties" => Ok(Self::Properties),
            "sarason" => Ok(Self::Sarason),
            other => Err(format!("unknown analysis {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_disk_points")]
    pub disk_points: usize,
    #[serde(default = "default_circle_points")]
    pub circle_points: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_disk_points() -> usize {
    200
}

fn default_circle_points() -> usize {
    512
}

fn default_radius() -> f64 {
    0.99
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            disk_points: default_disk_points(),
            circle_points: default_circle_points(),
            radius: default_radius(),
        }
    }
}

/// Tolerance overrides; defaults match the verification suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "d_interp_np")]
    pub interp_np: f64,
    #[serde(default = "d_interp_sarason")]
    pub interp_sarason: f64,
    #[serde(default = "d_interp_boundary")]
    pub interp_boundary: f64,
    #[serde(default = "d_contractivity")]
    pub contractivity: f64,
    #[serde(default = "d_norm_equality")]
    pub norm_equality_rel: f64,
    #[serde(default = "d_hardy")]
    pub hardy: f64,
    #[serde(default = "d_defect")]
    pub defect: f64,
    #[serde(default = "d_boundary_factorization")]
    pub boundary_factorization: f64,
    #[serde(default = "d_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "d_dbound_slack")]
    pub d_bound_slack: f64,
    #[serde(default = "d_cara_consistency")]
    pub cara_consistency: f64,
    #[serde(default = "d_theta_division")]
    pub theta_division: f64,
    #[serde(default = "d_outer_gap")]
    pub outer_gap: f64,
    #[serde(default = "d_indeterminate_criterion")]
    pub indeterminate_criterion: f64,
    #[serde(default = "d_denseness")]
    pub denseness: f64,
    #[serde(default = "d_fs_mass")]
    pub fs_mass: f64,
    #[serde(default = "d_fs_crosscheck")]
    pub fs_crosscheck: f64,
}

fn d_interp_np() -> f64 {
    1e-7
}
fn d_interp_sarason() -> f64 {
    1e-6
}
fn d_interp_boundary() -> f64 {
    5e-3
}
fn d_contractivity() -> f64 {
    1e-8
}
fn d_norm_equality() -> f64 {
    5e-3
}
fn d_hardy() -> f64 {
    1e-6
}
fn d_defect() -> f64 {
    2e-3
}
fn d_boundary_factorization() -> f64 {
    1e-6
}
fn d_rank_tol() -> f64 {
    1e-6
}
fn d_dbound_slack() -> f64 {
    1e-3
}
fn d_cara_consistency() -> f64 {
    1e-2
}
fn d_theta_division() -> f64 {
    1e-6
}
fn d_outer_gap() -> f64 {
    1e-3
}
fn d_indeterminate_criterion() -> f64 {
    1e-3
}
fn d_denseness() -> f64 {
    2e-3
}
fn d_fs_mass() -> f64 {
    1e-6
}
fn d_fs_crosscheck() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: PathBuf,
    #[serde(default)]
    pub parameters: Vec<ParamSpec>,
    #[serde(default)]
    pub analyses: BTreeSet<Analysis>,
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_quad_n() -> usize {
    4096
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, ProblemFile), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))?;
        config.validate()?;
        let problem_path = if config.problem.is_absolute() {
            config.problem.clone()
        } else {
            path.parent().unwrap_or(Path::new(".")).join(&config.problem)
        };
        let ptext = std::fs::read_to_string(&problem_path)
            .map_err(|e| format!("cannot read problem {}: {e}", problem_path.display()))?;
        let problem: ProblemFile =
            serde_json::from_str(&ptext).map_err(|e| format!("invalid problem file: {e}"))?;
        Ok((config, problem))
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.grid.radius < 1.0 && self.grid.radius > 0.0) {
            return Err(format!("grid radius {} must be in (0, 1)", self.grid.radius));
        }
        if self.grid.disk_points < 16 || self.grid.circle_points < 16 {
            return Err("grid counts must be at least 16".into());
        }
        if self.quad_n < 256 {
            return Err(format!("quad_n {} must be ≥ 256", self.quad_n));
        }
        Ok(())
    }
}
