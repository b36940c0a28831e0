use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use hyperrep_core::gluing::{face_constraints, gluing_matrices, holonomy_words, IdealTetrahedron, TetraParams};
use hyperrep_core::isometries::projective_normalize;
use hyperrep_core::variety::{
    local_dimension_with, rho0_data, solve, solve_chart, ComplexResidual, DimensionReport, EdgeSet, QuaternionicResidual,
    RealLocusResidual, ResidualMap, Solve, SolutionPoint,
};
use hyperrep_core::verify::{run_suite, Fault, Report, VerifyConfig};
use hyperrep_core::{tolerances, Mat3};

#[derive(Parser)]
#[command(name = "hyperrep", version, about = "Figure-eight representations in complex and quaternionic hyperbolic geometry")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = tolerances::FORM)]
    tol_form: f64,
    #[arg(long, global = true, default_value_t = tolerances::HOLONOMY)]
    tol_holonomy: f64,
    #[arg(long, global = true, default_value_t = tolerances::RANK_RELATIVE)]
    rank_threshold: f64,
    /// Seed for the randomized checks.
    #[arg(long, env = "HYPERREP_SEED", default_value_t = 0x5eed, global = true)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the property suite.
    Verify {
        #[arg(long)]
        fault: Option<FaultArg>,
        /// Fraction of the full case counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Gluing maps and edge holonomies of a parameter file.
    Holonomy { file: PathBuf },
    /// Local dimension of the representation variety at the discrete point.
    Dimension {
        #[arg(long, value_enum)]
        field: FieldArg,
        #[arg(long, value_enum, default_value_t = EdgesArg::First)]
        edges: EdgesArg,
    },
    /// Solve for angular-invariant targets on a grid around (pi/3, pi/3, pi/3).
    Chart {
        #[arg(long, default_value_t = 1)]
        grid: usize,
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Form,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Complex,
    Quaternion,
    Real,
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgesArg {
    First,
    Both,
}

enum Failure {
    Property,
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<hyperrep_core::Error> for Failure {
    fn from(e: hyperrep_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce(&T)) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable report"));
    } else {
        text(value);
    }
}

fn verify(cli: &Cli, fault: Option<FaultArg>, scale: f64) -> Result<(), Failure> {
    if !(scale > 0.0) {
        return Err(anyhow::anyhow!("--scale must be positive").into());
    }
    let cfg = VerifyConfig {
        seed: cli.seed,
        scale,
        fault: fault.map(|FaultArg::Form| Fault::Form),
        tol_form: cli.tol_form,
        tol_holonomy: cli.tol_holonomy,
    };
    let report = run_suite(&cfg);
    emit(cli.json, &report, |r: &Report| {
        println!("seed {}", r.seed);
        println!("{:<58} {:>6} {:>8} {:>11} {:>9}", "check", "result", "cases", "worst", "tol");
        for c in &r.checks {
            println!("{:<58} {:>6} {:>8} {:>11.3e} {:>9.1e}", c.name, if c.passed { "pass" } else { "FAIL" }, c.cases, c.worst, c.tolerance);
            if let Some(f) = &c.failure {
                println!("    failing case: {f}");
            }
        }
    });
    if report.passed { Ok(()) } else { Err(Failure::Property) }
}

#[derive(Serialize)]
struct HolonomyReport {
    params: TetraParams,
    face_constraints: Vec<f64>,
    gluing_consistent: bool,
    g: [Mat3; 3],
    h1: Mat3,
    h2: Mat3,
    h1_residual: f64,
    h2_residual: f64,
    identity: bool,
    face_invariants: [[f64; 4]; 2],
}

fn holonomy(cli: &Cli, file: &PathBuf) -> Result<(), Failure> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let params: TetraParams = serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    params.validate()?;
    let fc = face_constraints(&params)?;
    let g = gluing_matrices(&params)?;
    let (h1, h2) = holonomy_words(&g)?;
    let res = |h: &Mat3| projective_normalize(h).max_abs_diff(&Mat3::IDENTITY);
    let pts = params.points();
    let t1 = IdealTetrahedron::new([pts[0], pts[1], pts[2], pts[3]])?;
    let t2 = IdealTetrahedron::new([pts[0], pts[1], pts[3], pts[4]])?;
    let report = HolonomyReport {
        params,
        gluing_consistent: fc.iter().all(|v| v.abs() <= tolerances::INVARIANT_MATCH),
        face_constraints: fc,
        g,
        h1,
        h2,
        h1_residual: res(&h1),
        h2_residual: res(&h2),
        identity: res(&h1) <= cli.tol_holonomy && res(&h2) <= cli.tol_holonomy,
        face_invariants: [t1.face_invariants, t2.face_invariants],
    };
    emit(cli.json, &report, |r| {
        for (k, m) in r.g.iter().enumerate() {
            println!("g{}:\n{m}", k + 1);
        }
        println!("H1:\n{}H2:\n{}", r.h1, r.h2);
        println!("H1 residual {:.3e}, H2 residual {:.3e}, identity: {}", r.h1_residual, r.h2_residual, r.identity);
        println!("face constraints {:?} (consistent: {})", r.face_constraints, r.gluing_consistent);
        println!("face invariants {:?}", r.face_invariants);
    });
    Ok(())
}

#[derive(Serialize)]
struct DimensionOutput {
    field: &'static str,
    edges: EdgeSet,
    expected: i64,
    matches: bool,
    solve: Solve,
    report: DimensionReport,
    solution: SolutionPoint,
}

fn dimension(cli: &Cli, field: FieldArg, edges: EdgesArg) -> Result<(), Failure> {
    let edges = match edges {
        EdgesArg::First => EdgeSet::First,
        EdgesArg::Both => EdgeSet::Both,
    };
    let rho0 = rho0_data()?;
    let (map, x0, expected, name): (Box<dyn ResidualMap>, Vec<f64>, i64, &'static str) = match field {
        FieldArg::Complex => (Box::new(ComplexResidual { edges }), rho0.complex_vec(), 3, "complex"),
        FieldArg::Quaternion => (Box::new(QuaternionicResidual { edges }), rho0.quaternionic_vec(), 3, "quaternion"),
        FieldArg::Real => {
            let (c, s) = (0.5, 3f64.sqrt() / 2.0);
            (Box::new(RealLocusResidual { edges }), vec![c, s, c, s], 2, "real")
        }
    };
    let sol = solve(map.as_ref(), &x0)?;
    let report = local_dimension_with(map.as_ref(), &sol.x, cli.rank_threshold)?;
    let solution = SolutionPoint::new(map.as_ref(), &sol.x)?;
    let out = DimensionOutput { field: name, edges, expected, matches: report.dimension == expected, solve: sol, report, solution };
    emit(cli.json, &out, |o| {
        let r = &o.report;
        println!("field {} ({} parameters, {} residuals)", o.field, r.params, r.residuals);
        println!("solver: residual {:.3e} after {} iterations", o.solve.residual_norm, o.solve.iterations);
        println!("singular values:");
        for s in &r.singular_values {
            println!("  {s:.6e}");
        }
        println!("rank {} (threshold {:.0e}, gap {:.3e})", r.rank, r.threshold, r.gap);
        println!("gauge: documented {}, measured inside kernel {}", r.documented_gauge, r.measured_gauge);
        if let Some(l) = r.off_complex_leak {
            println!("off-complex component of kernel modulo gauge: {l:.3e}");
        }
        println!("dimension {} (measured-gauge variant {}), expected {}", r.dimension, r.measured_dimension, o.expected);
        if let Some(w) = &r.warning {
            println!("warning: {w}");
        }
    });
    if out.matches { Ok(()) } else { Err(Failure::Property) }
}

#[derive(Serialize)]
struct ChartRow {
    index: usize,
    target: [f64; 3],
    converged: bool,
    residual_norm: f64,
    iterations: usize,
    parameters: Vec<f64>,
}

#[derive(Serialize)]
struct ChartOutput {
    grid: usize,
    radius: f64,
    converged: usize,
    rows: Vec<ChartRow>,
}

fn chart(cli: &Cli, grid: usize, radius: f64) -> Result<(), Failure> {
    if grid == 0 {
        return Err(anyhow::anyhow!("--grid must be at least 1").into());
    }
    let x0 = rho0_data()?.complex_vec();
    let c = std::f64::consts::FRAC_PI_3;
    let offset = |i: usize| if grid == 1 { 0.0 } else { radius * (2.0 * i as f64 / (grid - 1) as f64 - 1.0) };
    let targets: Vec<[f64; 3]> = (0..grid.pow(3)).map(|n| [c + offset(n / (grid * grid)), c + offset((n / grid) % grid), c + offset(n % grid)]).collect();
    let rows: Vec<ChartRow> = targets
        .par_iter()
        .enumerate()
        .map(|(index, &target)| match solve_chart(target, &x0) {
            Ok(s) => ChartRow { index, target, converged: s.converged, residual_norm: s.residual_norm, iterations: s.iterations, parameters: s.x },
            Err(_) => ChartRow { index, target, converged: false, residual_norm: f64::INFINITY, iterations: 0, parameters: x0.clone() },
        })
        .collect();
    let out = ChartOutput { grid, radius, converged: rows.iter().filter(|r| r.converged).count(), rows };
    emit(cli.json, &out, |o| {
        println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>11}", "row", "A1", "A2", "A3", "converged", "residual");
        for r in &o.rows {
            println!("{:>5} {:>10.6} {:>10.6} {:>10.6} {:>10} {:>11.3e}", r.index, r.target[0], r.target[1], r.target[2], r.converged, r.residual_norm);
        }
        println!("{} of {} rows converged", o.converged, o.rows.len());
    });
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Verify { fault, scale } => verify(&cli, *fault, *scale),
        Cmd::Holonomy { file } => holonomy(&cli, file),
        Cmd::Dimension { field, edges } => dimension(&cli, *field, *edges),
        Cmd::Chart { grid, radius } => chart(&cli, *grid, *radius),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
