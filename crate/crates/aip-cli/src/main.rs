//! `aip` — batch front end: read a problem file, build the coefficient
//! matrix, run the requested analyses, and emit machine-readable reports.
//!
//! Exit codes: 0 all requested checks pass, 1 some check failed (failures
//! are enumerated in report.json), 2 invalid input.

mod config;
mod grids;
mod report;

use aip_core::boundary::{
    boundary_residual_detect, caratheodory_integral, caratheodory_quotient, default_radii,
};
use aip_core::colligation::{
    build_gram_space, build_universal_colligation, NORMALIZATION,
};
use aip_core::linalg::{c, cr, frob, hermitian_eigen, C64, CVector};
use aip_core::parametrization::{lft_solution, verify_solution, SchurParameter};
use aip_core::problems::{check_fundamental_identity, ProblemKind};
use aip_core::residual::{
    absolute_continuity_gaps, check_defect_rank_identity, boundary_factorization_residual, eval_a_circ,
    eval_defect,
};
use aip_core::sarason::{
    indeterminate_criterion_infimum, check_outer, denseness_residual, eval_fs, factor_s2_through_theta,
    normalize_inner_blocks,
};
use aip_core::circle;
use clap::{Parser, Subcommand};
use config::{Analysis, ParamSpec, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use report::{
    AnalysisResults, BoundaryAnalysis, BoundaryEntry, Check, PropertyAnalysis, AbsoluteContinuityEntry,
    Report, ResidualAnalysis, ResidualEntry, SarasonAnalysis, SolutionEntry,
};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "aip", version, about = "Coefficient matrices of interpolation problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses requested by a JSON config file.
    Run {
        /// Path to the run configuration (JSON).
        config: PathBuf,
        /// Output directory for report.json and grid CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the quadrature size.
        #[arg(long)]
        quad: Option<usize>,
        /// Seed for randomized parameter suites.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the analyses to run (repeatable).
        #[arg(long = "check")]
        checks: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            quad,
            seed,
            checks,
        } => match run(&config, out.as_deref(), quad, seed, &checks) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

fn run(
    config_path: &Path,
    out_override: Option<&Path>,
    quad_override: Option<usize>,
    seed: u64,
    check_names: &[String],
) -> Result<bool, String> {
    let (mut cfg, problem_file) = RunConfig::load(config_path)?;
    if let Some(q) = quad_override {
        if q < 256 {
            return Err(format!("--quad {q} must be ≥ 256"));
        }
        cfg.quad_n = q;
    }
    let mut analyses: BTreeSet<Analysis> = cfg.analyses.clone();
    if !check_names.is_empty() {
        analyses = check_names
            .iter()
            .map(|n| Analysis::parse(n))
            .collect::<Result<_, _>>()?;
    }
    if analyses.is_empty() {
        analyses.insert(Analysis::Verify);
    }

    let problem = problem_file.build().map_err(|e| e.to_string())?;
    let gram = build_gram_space(&problem, 1e-10).map_err(|e| e.to_string())?;
    let cm = build_universal_colligation(&problem, &gram).map_err(|e| e.to_string())?;

    let is_boundary = matches!(problem.kind, ProblemKind::Boundary { .. });
    let is_sarason = matches!(problem.kind, ProblemKind::Sarason { .. });
    if analyses.contains(&Analysis::Boundary) && !is_boundary {
        return Err("the boundary analysis needs a boundary-type problem".into());
    }
    if analyses.contains(&Analysis::Sarason) && !is_sarason {
        return Err("the sarason analysis needs a sarason-type problem".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parameters = Vec::new();
    let mut resolved_specs = Vec::new();
    let specs = if cfg.parameters.is_empty() {
        vec![ParamSpec::Zero]
    } else {
        cfg.parameters.clone()
    };
    for spec in &specs {
        for om in spec.materialize(cm.dim_n1, cm.dim_n2, &mut rng)? {
            resolved_specs.push(resolve_spec(&om));
            parameters.push(om);
        }
    }

    let out_dir = match (out_override, &cfg.output) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(dir)) if dir.is_absolute() => dir.clone(),
        (None, Some(dir)) => config_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(dir),
        (None, None) => PathBuf::from("."),
    };
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("cannot create output dir: {e}"))?;

    let mut checks: Vec<Check> = Vec::new();
    let mut solutions = Vec::new();
    let mut results = AnalysisResults::default();
    let mut grid_files = Vec::new();
    let tol = &cfg.tolerances;

    if analyses.contains(&Analysis::Solve) {
        match grids::s_grid_csv(&cm, &cfg.grid) {
            Ok(csv) => {
                let name = "S_grid.csv".to_string();
                report::write_atomic(&out_dir.join(&name), csv.as_bytes())
                    .map_err(|e| format!("cannot write grid: {e}"))?;
                grid_files.push(name);
            }
            Err(e) => checks.push(Check::flag(format!("solve:S_grid ({e})"), None, false)),
        }
        for (k, om) in parameters.iter().enumerate() {
            match grids::w_grid_csv(&cm, om, &cfg.grid) {
                Ok(csv) => {
                    let name = if k == 0 {
                        "w_grid.csv".to_string()
                    } else {
                        format!("w_grid_{k}.csv")
                    };
                    report::write_atomic(&out_dir.join(&name), csv.as_bytes())
                        .map_err(|e| format!("cannot write grid: {e}"))?;
                    grid_files.push(name);
                }
                Err(e) => {
                    checks.push(Check::flag(format!("solve:w_grid ({e})"), Some(k), false))
                }
            }
        }
    }

    if analyses.contains(&Analysis::Verify) {
        for (k, om) in parameters.iter().enumerate() {
            match verify_solution(&problem, &cm, om, cfg.quad_n) {
                Ok(rep) => {
                    let interp_tol = match problem.kind {
                        ProblemKind::Np { .. } => tol.interp_np,
                        ProblemKind::Sarason { .. } => tol.interp_sarason,
                        ProblemKind::Boundary { .. } => tol.interp_boundary,
                        ProblemKind::Raw => f64::INFINITY,
                    };
                    checks.push(Check::le("verify:interpolation", Some(k), rep.interp_residual, interp_tol));
                    checks.push(Check::le(
                        "verify:contractivity",
                        Some(k),
                        rep.contractivity_margin,
                        tol.contractivity,
                    ));
                    if !is_boundary {
                        checks.push(Check::le(
                            "verify:norm_equality",
                            Some(k),
                            rep.norm_equality_rel_gap,
                            tol.norm_equality_rel,
                        ));
                    }
                    checks.push(Check::le(
                        "verify:hardy_membership",
                        Some(k),
                        rep.hardy_membership_residual,
                        tol.hardy,
                    ));
                    if let (ProblemKind::Boundary { d_bound, .. }, Some(est)) =
                        (&problem.kind, rep.boundary_d_estimate)
                    {
                        checks.push(Check::le(
                            "verify:angular_derivative_bound",
                            Some(k),
                            est,
                            d_bound + tol.d_bound_slack,
                        ));
                    }
                    solutions.push(SolutionEntry {
                        parameter: k,
                        interp_residual: rep.interp_residual,
                        contractivity_margin: rep.contractivity_margin,
                        norm_equality_gap: rep.norm_equality_gap,
                        norm_equality_rel_gap: rep.norm_equality_rel_gap,
                        hardy_membership_residual: rep.hardy_membership_residual,
                        boundary_d_estimate: rep.boundary_d_estimate,
                        per_basis: rep
                            .per_basis
                            .iter()
                            .map(|pb| [pb.f_norm2, pb.dxx])
                            .collect(),
                        weight_pinv_tol: rep.metadata.weight_pinv_tol,
                    });
                }
                Err(e) => checks.push(Check::flag(format!("verify ({e})"), Some(k), false)),
            }
        }
    }

    if analyses.contains(&Analysis::Boundary) {
        let ProblemKind::Boundary { t0, w0, d_bound } = problem.kind else {
            unreachable!()
        };
        let mut entries = Vec::new();
        for (k, om) in parameters.iter().enumerate() {
            let w_eval = |z: C64| Ok(lft_solution(&cm, om, z)?[(0, 0)]);
            let run_entry = (|| -> aip_core::Result<BoundaryEntry> {
                let quot = caratheodory_quotient(w_eval, t0, &default_radii())?;
                let integral = caratheodory_integral(w_eval, t0, w0, 8192)?;
                let detected = if cm.dim_n1 == 1 && cm.dim_n2 == 1 {
                    boundary_residual_detect(&cm, om, t0)?
                } else {
                    false
                };
                Ok(BoundaryEntry {
                    parameter: k,
                    d_liminf: quot.d_liminf,
                    d_integral: integral,
                    quotient_converged: quot.converged,
                    residual_detected: detected,
                })
            })();
            match run_entry {
                Ok(entry) => {
                    checks.push(Check::le(
                        "boundary:liminf_vs_integral",
                        Some(k),
                        (entry.d_liminf - entry.d_integral).abs(),
                        tol.cara_consistency,
                    ));
                    checks.push(Check::le(
                        "boundary:liminf_bound",
                        Some(k),
                        entry.d_liminf,
                        d_bound + tol.d_bound_slack,
                    ));
                    checks.push(Check::le(
                        "boundary:integral_bound",
                        Some(k),
                        entry.d_integral,
                        d_bound + tol.d_bound_slack,
                    ));
                    entries.push(entry);
                }
                Err(e) => checks.push(Check::flag(format!("boundary ({e})"), Some(k), false)),
            }
        }
        results.boundary = Some(BoundaryAnalysis {
            per_parameter: entries,
        });
    }

    if analyses.contains(&Analysis::Residual) {
        let eval_points = vec![c(0.0, 0.0), c(0.4, 0.3), c(-0.5, 0.2)];
        let mut entries = Vec::new();
        for (k, om) in parameters.iter().enumerate() {
            let run_entry = (|| -> aip_core::Result<ResidualEntry> {
                let mut defect_norms = Vec::new();
                let mut herglotz_min = f64::INFINITY;
                for &z in &eval_points {
                    defect_norms.push(frob(&eval_defect(&cm, om, z, 8192)?));
                    let a = eval_a_circ(&cm, om, z)?;
                    let herm = (&a + a.adjoint()).map(|v| v * 0.5);
                    let (vals, _) = hermitian_eigen(&herm)?;
                    herglotz_min = herglotz_min.min(vals.last().copied().unwrap_or(0.0));
                }
                let detected = if is_boundary && cm.dim_n1 == 1 && cm.dim_n2 == 1 {
                    let ProblemKind::Boundary { t0, .. } = problem.kind else {
                        unreachable!()
                    };
                    Some(boundary_residual_detect(&cm, om, t0)?)
                } else {
                    None
                };
                Ok(ResidualEntry {
                    parameter: k,
                    defect_norms,
                    herglotz_min_eigenvalue: herglotz_min,
                    residual_detected: detected,
                })
            })();
            match run_entry {
                Ok(entry) => {
                    let worst = entry.defect_norms.iter().cloned().fold(0.0f64, f64::max);
                    match entry.residual_detected {
                        Some(true) => checks.push(Check::flag(
                            "residual:defect_nontrivial",
                            Some(k),
                            worst > 0.05,
                        )),
                        _ => checks.push(Check::le(
                            "residual:defect_vanishes",
                            Some(k),
                            worst,
                            tol.defect,
                        )),
                    }
                    checks.push(Check::flag(
                        "residual:herglotz_psd",
                        Some(k),
                        entry.herglotz_min_eigenvalue >= -1e-9,
                    ));
                    entries.push(entry);
                }
                Err(e) => checks.push(Check::flag(format!("residual ({e})"), Some(k), false)),
            }
        }
        results.residual = Some(ResidualAnalysis {
            eval_points: eval_points.iter().map(|z| [z.re, z.im]).collect(),
            per_parameter: entries,
        });
    }

    if analyses.contains(&Analysis::Properties) {
        let samples = circle::grid(cfg.grid.circle_points);
        let run_props = (|| -> aip_core::Result<PropertyAnalysis> {
            let residual_2p = boundary_factorization_residual(&cm, &samples)?;
            let holds_2pp = check_defect_rank_identity(&cm, &samples, tol.rank_tol)?;
            let one_prime = if cm.dim_n1 == 1 && cm.dim_n2 == 1 {
                let mut entries = Vec::new();
                for (k, om) in parameters.iter().enumerate() {
                    let (g2, g1) = absolute_continuity_gaps(&cm, om, cfg.quad_n.max(4096))?;
                    entries.push(AbsoluteContinuityEntry {
                        parameter: k,
                        ac_gap_omega_s: g2,
                        ac_gap_s_omega: g1,
                    });
                }
                Some(entries)
            } else {
                None
            };
            Ok(PropertyAnalysis {
                boundary_factorization_residual_value: residual_2p,
                defect_rank_identity_holds: holds_2pp,
                absolute_continuity: one_prime,
            })
        })();
        match run_props {
            Ok(props) => {
                checks.push(Check::le(
                    "properties:boundary_factorization",
                    None,
                    props.boundary_factorization_residual_value,
                    tol.boundary_factorization,
                ));
                checks.push(Check::flag(
                    "properties:defect_rank_identity",
                    None,
                    props.defect_rank_identity_holds,
                ));
                if let Some(entries) = &props.absolute_continuity {
                    for entry in entries {
                        // Singular mass appears exactly when the boundary
                        // residual detector fires; otherwise both Herglotz
                        // measures must look absolutely continuous.
                        let ac = entry.ac_gap_omega_s <= 5e-3 && entry.ac_gap_s_omega <= 5e-3;
                        let expected_ac = if is_boundary {
                            let ProblemKind::Boundary { t0, .. } = problem.kind else {
                                unreachable!()
                            };
                            !boundary_residual_detect(&cm, &parameters[entry.parameter], t0)
                                .unwrap_or(false)
                        } else {
                            true
                        };
                        checks.push(Check::flag(
                            "properties:absolute_continuity_consistent",
                            Some(entry.parameter),
                            ac == expected_ac,
                        ));
                    }
                }
                results.properties = Some(props);
            }
            Err(e) => checks.push(Check::flag(format!("properties ({e})"), None, false)),
        }
    }

    if analyses.contains(&Analysis::Sarason) {
        let ProblemKind::Sarason { zeros: ref zk, .. } = problem.kind else {
            unreachable!()
        };
        let run_sar = (|| -> aip_core::Result<SarasonAnalysis> {
            let n = problem.dim_x();
            let quad = cfg.quad_n.max(2048);
            let (stilde, theta_residual) = factor_s2_through_theta(&cm, zk, quad)?;
            let grid = circle::grid(quad);
            let s1_samples: Vec<C64> = grid
                .iter()
                .map(|&t| cm.blocks(t).map(|b| b.s1[(0, 0)]))
                .collect::<aip_core::Result<_>>()?;
            let s1_gap = check_outer(&s1_samples, cm.blocks(cr(0.0))?.s1[(0, 0)])?;
            let reflected: Vec<C64> = (0..quad).map(|j| stilde[quad - 1 - j].conj()).collect();
            let stilde_at_0 = circle::fourier_coeffs(&stilde)[0];
            let star_gap = check_outer(&reflected, stilde_at_0.conj())?;
            let norm = normalize_inner_blocks(&cm, zk, quad)?;
            let infimum = indeterminate_criterion_infimum(&cm, &problem, quad, n)?;
            let dense = denseness_residual(&problem, &cm, 3, quad.min(4096))?;
            let mut fs_mass = 0.0f64;
            let mut fs_cross = 0.0f64;
            for j in 0..n {
                let mut x = CVector::zeros(n);
                x[j] = cr(1.0);
                let sample = eval_fs(&problem, &cm, &x, quad.min(4096))?;
                fs_mass = fs_mass.max(sample.bottom_plus_mass);
                fs_cross = fs_cross.max(sample.crosscheck_residual);
            }
            Ok(SarasonAnalysis {
                theta_division_residual: theta_residual,
                s1_outer_gap: s1_gap,
                stilde2_star_outer_gap: star_gap,
                s1_vs_stilde2: norm.s1_vs_stilde2,
                indeterminate_criterion_infimum: infimum,
                denseness_residual: dense,
                fs_bottom_mass: fs_mass,
                fs_crosscheck: fs_cross,
            })
        })();
        match run_sar {
            Ok(sar) => {
                checks.push(Check::le("sarason:theta_division", None, sar.theta_division_residual, tol.theta_division));
                checks.push(Check::le("sarason:s1_outer", None, sar.s1_outer_gap, tol.outer_gap));
                checks.push(Check::le("sarason:stilde2_star_outer", None, sar.stilde2_star_outer_gap, tol.outer_gap));
                checks.push(Check::le("sarason:indeterminate_criterion", None, sar.indeterminate_criterion_infimum, tol.indeterminate_criterion));
                checks.push(Check::le("sarason:denseness", None, sar.denseness_residual, tol.denseness));
                checks.push(Check::le("sarason:fs_bottom_mass", None, sar.fs_bottom_mass, tol.fs_mass));
                checks.push(Check::le("sarason:fs_crosscheck", None, sar.fs_crosscheck, tol.fs_crosscheck));
                results.sarason = Some(sar);
            }
            Err(e) => checks.push(Check::flag(format!("sarason ({e})"), None, false)),
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        problem: report::ProblemSummary {
            kind: problem_file.kind_name().to_string(),
            dim_x: problem.dim_x(),
            dim_e1: problem.dim_e1(),
            dim_e2: problem.dim_e2(),
            dim_h0: gram.dim_h0,
            dim_n1: cm.dim_n1,
            dim_n2: cm.dim_n2,
            special_case: problem.special_case,
            identity_residual: check_fundamental_identity(&problem)
                .map_err(|e| e.to_string())?,
            unique_solution: cm.dim_n1 == 0 || cm.dim_n2 == 0,
        },
        normalization: NORMALIZATION.to_string(),
        quad_n: cfg.quad_n,
        seed,
        parameters: resolved_specs,
        solutions,
        analyses: results,
        checks,
        grids: grid_files,
        passed,
    };
    let bytes = report::to_json_bytes(&report);
    let report_path = out_dir.join("report.json");
    report::write_atomic(&report_path, &bytes)
        .map_err(|e| format!("cannot write report: {e}"))?;

    for check in &report.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        match check.parameter {
            Some(k) => println!("{status} {} [parameter {k}] value {:.3e} threshold {:.3e}", check.name, check.value, check.threshold),
            None => println!("{status} {} value {:.3e} threshold {:.3e}", check.name, check.value, check.threshold),
        }
    }
    println!(
        "{}: report written to {}",
        if passed { "ok" } else { "failed" },
        report_path.display()
    );
    Ok(passed)
}

/// Record the concrete parameter in the report (random specs materialized).
fn resolve_spec(om: &SchurParameter) -> ParamSpec {
    match om {
        SchurParameter::Constant(m) => ParamSpec::Constant {
            value: config::matrix_to_rows(m),
        },
        SchurParameter::Realized(col) => ParamSpec::Realized {
            a: config::matrix_to_rows(&col.a),
            b: config::matrix_to_rows(&col.b),
            c: config::matrix_to_rows(&col.c),
            d: config::matrix_to_rows(&col.d),
        },
    }
}
