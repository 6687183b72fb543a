use std::f64::consts::PI;
use std::path::Path;

use offdiag_core::entanglement::{ppt_check, separability_boundary};
use offdiag_core::linalg::ComplexMatrix;
use offdiag_core::model::{build_state, state_eigenbasis, state_vector};
use offdiag_core::phases::{
    adjudicate_radicand, gp_with_tol, op2_analytic_value, op2_trace, op_n, op_pure, RadicandVariant,
};
use offdiag_core::scanner::{boundary_scan, scan_free, scan_ising, scan_ising_fixed_coupling, LevelCurve, PlaneScan};
use offdiag_core::selftest::{run_selftest, SelfTestOptions};
use offdiag_core::transport::{check_density_matrix, Dynamics};
use offdiag_core::{ComplexScalar, Error, HamiltonianKind, ModelParams, PhaseResult, StateParams, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Cli, Format};
use crate::job::{JobCommand, JobConfig};
use crate::output::{num, sibling, write_json, write_text, Field, Record, Table};
use crate::{CliError, EXIT_FAILURE, EXIT_OK, EXIT_UNDEFINED};

/// Default seed of the radicand cross-check and the self-test suite.
const DEFAULT_SEED: u64 = 20_240_601;
/// Points in the radicand adjudication behind `--check-analytic`.
const RADICAND_POINTS: usize = 200;
const RADICAND_TOL: f64 = 1e-10;
/// Purity levels of `scan free` when none are given.
const FREE_SCAN_LEVELS: usize = 10;

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let mut job = match &cli.flags.job {
        Some(path) => JobConfig::load(path)?,
        None => JobConfig::default(),
    };
    job.overlay(cli.command, &cli.flags)?;
    let command = job
        .command
        .ok_or_else(|| CliError::invalid("invalid value for `command`: no subcommand given (see --help)"))?;
    match job.workers {
        Some(0) => Err(CliError::invalid("invalid value for `workers`: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::io(e.to_string()))?
            .install(|| dispatch(command, &job)),
        None => dispatch(command, &job),
    }
}

fn dispatch(command: JobCommand, job: &JobConfig) -> Result<u8, CliError> {
    match command {
        JobCommand::Gp => cmd_gp(job),
        JobCommand::Op2 => cmd_op2(job),
        JobCommand::Opn => cmd_opn(job),
        JobCommand::OpPure => cmd_op_pure(job),
        JobCommand::ScanFree => cmd_scan_free(job),
        JobCommand::ScanIsing => cmd_scan_ising(job),
        JobCommand::ScanBoundary => cmd_scan_boundary(job),
        JobCommand::Ppt => cmd_ppt(job),
        JobCommand::Selftest => cmd_selftest(job),
    }
}

fn dest(job: &JobConfig) -> Option<&Path> {
    job.output_path.as_deref()
}

fn phase_record(name: &'static str, result: &PhaseResult) -> Record {
    let mut record = Record::default();
    record
        .push(name, result.value.into())
        .push("re_trace", Field::Num(result.trace.re))
        .push("im_trace", Field::Num(result.trace.im))
        .push("nodal", Field::Bool(result.nodal));
    record
}

fn exit_for(result: &PhaseResult) -> u8 {
    if result.nodal {
        EXIT_UNDEFINED
    } else {
        EXIT_OK
    }
}

fn cmd_gp(job: &JobConfig) -> Result<u8, CliError> {
    let (state, model, tol) = (job.state()?, job.model()?, job.tol()?);
    let result = gp_with_tol(&state, &model, job.kind(), tol)?;
    phase_record("gamma_gp", &result).emit(job.format(), dest(job))?;
    Ok(exit_for(&result))
}

fn seed(job: &JobConfig) -> u64 {
    job.seed.unwrap_or(DEFAULT_SEED)
}

fn random_states(seed: u64, n: usize) -> Vec<StateParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| StateParams {
            variant: if rng.gen_bool(0.5) { Variant::Phi } else { Variant::Psi },
            r: 1.0 - rng.gen_range(0.0..1.0),
            theta: rng.gen_range(0.0..PI),
            beta: rng.gen_range(0.0..PI),
        })
        .collect()
}

fn cmd_op2(job: &JobConfig) -> Result<u8, CliError> {
    let (state, model, tol) = (job.state()?, job.model()?, job.tol()?);
    let kind = job.kind();
    let dynamics = Dynamics::new(&model, kind)?;
    let result = PhaseResult::from_trace(op2_trace(&dynamics, &state)?, tol);
    let mut record = phase_record("gamma_op2", &result);
    if job.check_analytic {
        if kind != HamiltonianKind::Free || (model.t - PI).abs() > 1e-6 {
            return Err(CliError::invalid(
                "invalid value for `check_analytic`: the closed form holds for the free model at omega_t = pi",
            ));
        }
        let report = adjudicate_radicand(&random_states(seed(job), RADICAND_POINTS), RADICAND_TOL)?;
        let err = |v| (result.trace - ComplexScalar::new(op2_analytic_value(&state, v), 0.0)).norm();
        record
            .push(
                "radicand",
                report.selected.map_or(Field::Missing, |v| Field::Text(v.to_string())),
            )
            .push("err_as_printed", Field::Num(err(RadicandVariant::AsPrinted)))
            .push("err_doubled", Field::Num(err(RadicandVariant::Doubled)));
    }
    record.emit(job.format(), dest(job))?;
    Ok(exit_for(&result))
}

/// `[[[re, im], ...], ...]`, one 4×4 array per chain member.
fn load_chain(path: &Path) -> Result<Vec<ComplexMatrix>, CliError> {
    let bad = |reason: String| CliError::invalid(format!("invalid value for `chain`: {reason}"));
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let raw: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    raw.iter()
        .enumerate()
        .map(|(k, m)| {
            let rows: Vec<Vec<ComplexScalar>> =
                m.iter().map(|row| row.iter().map(|&[re, im]| ComplexScalar::new(re, im)).collect()).collect();
            let rho = ComplexMatrix::from_rows(&rows).map_err(|e| bad(format!("member {k}: {e}")))?;
            if rho.dim() != 4 {
                return Err(bad(format!("member {k} is {0}x{0}, expected 4x4", rho.dim())));
            }
            check_density_matrix(&rho)?;
            Ok(rho)
        })
        .collect()
}

fn cmd_opn(job: &JobConfig) -> Result<u8, CliError> {
    let (state, model, tol) = (job.state()?, job.model()?, job.tol()?);
    let kind = job.kind();
    let chain = match (&job.chain, job.order) {
        (Some(path), _) => load_chain(path)?,
        (None, Some(n)) if n >= 2 => {
            // ρ(l·t/(n−1)) for l = 1..n−1.
            let rho0 = build_state(&state);
            (1..n)
                .map(|l| {
                    let at = ModelParams { t: model.t * l as f64 / (n - 1) as f64, ..model };
                    Ok(Dynamics::new(&at, kind)?.evolve_state(&rho0))
                })
                .collect::<Result<_, Error>>()?
        }
        (None, Some(n)) => return Err(CliError::invalid(format!("invalid value for `order`: must be at least 2, got {n}"))),
        (None, None) => return Err(CliError::invalid("invalid value for `order`: give --order or --chain")),
    };
    let traced = op_n(&state, &model, kind, &chain)?;
    let result = PhaseResult::from_trace(traced.trace, tol);
    let mut record = phase_record("gamma_op", &result);
    record.push("order", Field::Int(chain.len() as u64 + 1));
    record.emit(job.format(), dest(job))?;
    Ok(exit_for(&result))
}

fn pure_state(label: &str, job: &JobConfig, field: &str) -> Result<Vec<ComplexScalar>, CliError> {
    let basis = |k: usize| (0..4).map(|m| ComplexScalar::new(if m == k { 1.0 } else { 0.0 }, 0.0)).collect();
    let variant = |v: &str| if v.starts_with("phi") { Variant::Phi } else { Variant::Psi };
    Ok(match label {
        "11" => basis(0),
        "10" => basis(1),
        "01" => basis(2),
        "00" => basis(3),
        "phi" | "psi" => state_vector(variant(label), job.theta()?, job.beta()).to_vec(),
        "phi_perp" | "psi_perp" => {
            let s = StateParams::new(variant(label), 1.0, job.theta()?, job.beta())?;
            state_eigenbasis(&s).vector(1)
        }
        other => {
            return Err(CliError::invalid(format!(
                "invalid value for `{field}`: unknown state `{other}` (expected 11, 10, 01, 00, phi, psi, phi_perp or psi_perp)"
            )))
        }
    })
}

fn cmd_op_pure(job: &JobConfig) -> Result<u8, CliError> {
    let label = |v: &Option<String>, field: &'static str| {
        v.clone().ok_or_else(|| CliError::invalid(format!("invalid value for `{field}`: is required")))
    };
    let i = pure_state(&label(&job.i, "i")?, job, "i")?;
    let j = pure_state(&label(&job.j, "j")?, job, "j")?;
    let model = job.model()?;
    let (value, code) = match op_pure(&i, &j, &model, job.kind()) {
        Ok(v) => (Some(v), EXIT_OK),
        Err(Error::ZeroOverlap(_)) => (None, EXIT_UNDEFINED),
        Err(e) => return Err(e.into()),
    };
    let mut record = Record::default();
    record.push("gamma_op", value.into()).push("nodal", Field::Bool(value.is_none()));
    record.emit(job.format(), dest(job))?;
    Ok(code)
}

fn cmd_ppt(job: &JobConfig) -> Result<u8, CliError> {
    let state = job.state()?;
    let verdict = ppt_check(&build_state(&state))?;
    let mut record = Record::default();
    record
        .push("min_pt_eigenvalue", Field::Num(verdict.min_pt_eigenvalue))
        .push("entangled", Field::Bool(verdict.entangled))
        .push("r_separable", Field::Num(separability_boundary(state.theta)));
    record.emit(job.format(), dest(job))?;
    Ok(EXIT_OK)
}

fn cmd_selftest(job: &JobConfig) -> Result<u8, CliError> {
    let report = run_selftest(&SelfTestOptions { seed: seed(job), inject_fault: job.inject_fault })?;
    match job.format() {
        Format::Json => write_json(&report, dest(job))?,
        Format::Csv => write_text(&report.table(), dest(job))?,
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

/// Without `-o` only the main table is printed; sibling tables need a path.
fn write_siblings(job: &JobConfig, tables: &[(&str, &Table)]) -> Result<(), CliError> {
    if let Some(path) = dest(job) {
        for (suffix, table) in tables {
            table.write(Some(&sibling(path, suffix)))?;
        }
    }
    Ok(())
}

fn cmd_scan_free(job: &JobConfig) -> Result<u8, CliError> {
    let mut job = job.clone();
    if job.grid.r_values.is_none() {
        job.grid.r_values = Some(offdiag_core::scanner::r_levels(FREE_SCAN_LEVELS));
    }
    let grid = job.free_grid()?;
    let result = scan_free(job.variant(), &grid)?;
    if job.format() == Format::Json {
        write_json(&result, dest(&job))?;
        return Ok(EXIT_OK);
    }
    let (thetas, betas) = (grid.theta.values(), grid.beta.values());
    let mut main = Table::new(&["theta", "beta", "r", "re_trace", "im_trace", "abs_trace"]);
    for (ir, &r) in grid.r_values.iter().enumerate() {
        for (it, &theta) in thetas.iter().enumerate() {
            for (ib, &beta) in betas.iter().enumerate() {
                let t = result.trace(ir, it, ib);
                main.row(vec![num(theta), num(beta), num(r), num(t), num(0.0), num(t.abs())]);
            }
        }
    }
    let mut nodal = Table::new(&["theta", "beta", "r", "residual"]);
    for p in &result.nodal_points {
        nodal.row(vec![num(p.theta), num(p.beta), num(p.r), num(p.residual)]);
    }
    main.write(dest(&job))?;
    write_siblings(&job, &[("nodal", &nodal)])?;
    Ok(EXIT_OK)
}

fn curve_rows(table: &mut Table, curves: &[LevelCurve], id_offset: usize) {
    for c in curves {
        for [x, y] in &c.points {
            table.row(vec![(c.id + id_offset).to_string(), c.kind.to_string(), num(*x), num(*y)]);
        }
    }
}

fn cmd_scan_ising(job: &JobConfig) -> Result<u8, CliError> {
    let (variant, beta) = (job.variant(), job.beta());
    if let Some(coupling) = job.model.coupling_j {
        return scan_fixed_coupling(job, variant, coupling, beta);
    }
    let grid = job.ising_grid()?;
    let result = scan_ising(variant, &grid, beta)?;
    if job.format() == Format::Json {
        write_json(&result, dest(job))?;
        return Ok(EXIT_OK);
    }
    let (thetas, couplings) = (grid.theta.values(), grid.coupling.values());
    let mut main = Table::new(&["theta", "J", "r", "re_trace", "im_trace"]);
    let mut curves = Table::new(&["curve_id", "kind", "theta", "J"]);
    let mut nodal = Table::new(&["theta", "J", "r", "residual", "grazing"]);
    let mut offset = 0;
    for slice in &result.slices {
        let plane: &PlaneScan = &slice.plane;
        for (i, &theta) in thetas.iter().enumerate() {
            for (j, &coupling) in couplings.iter().enumerate() {
                let z = plane.value(i, j);
                main.row(vec![num(theta), num(coupling), num(slice.r), num(z.re), num(z.im)]);
            }
        }
        curve_rows(&mut curves, &plane.curves, offset);
        offset += plane.curves.len();
        for p in &plane.intersections {
            nodal.row(vec![num(p.x), num(p.y), num(slice.r), num(p.residual), p.grazing.to_string()]);
        }
    }
    main.write(dest(job))?;
    write_siblings(job, &[("curves", &curves), ("nodal", &nodal)])?;
    Ok(EXIT_OK)
}

fn scan_fixed_coupling(job: &JobConfig, variant: Variant, coupling: f64, beta: f64) -> Result<u8, CliError> {
    let (theta_axis, r_axis) = job.purity_plane()?;
    let result = scan_ising_fixed_coupling(variant, coupling, theta_axis, r_axis, beta, job.omega_t()?)?;
    if job.format() == Format::Json {
        write_json(&result, dest(job))?;
        return Ok(EXIT_OK);
    }
    let plane = &result.plane;
    let (thetas, rs) = (theta_axis.values(), r_axis.values());
    let mut main = Table::new(&["theta", "J", "r", "re_trace", "im_trace"]);
    for (i, &theta) in thetas.iter().enumerate() {
        for (j, &r) in rs.iter().enumerate() {
            let z = plane.value(i, j);
            main.row(vec![num(theta), num(coupling), num(r), num(z.re), num(z.im)]);
        }
    }
    let mut curves = Table::new(&["curve_id", "kind", "theta", "r"]);
    curve_rows(&mut curves, &plane.curves, 0);
    let mut nodal = Table::new(&["theta", "J", "r", "residual", "grazing"]);
    for p in &plane.intersections {
        nodal.row(vec![num(p.x), num(coupling), num(p.y), num(p.residual), p.grazing.to_string()]);
    }
    main.write(dest(job))?;
    write_siblings(job, &[("curves", &curves), ("nodal", &nodal)])?;
    Ok(EXIT_OK)
}

fn cmd_scan_boundary(job: &JobConfig) -> Result<u8, CliError> {
    let (n_theta, mode) = job.boundary()?;
    let rows = boundary_scan(job.variant(), n_theta, mode)?;
    if job.format() == Format::Json {
        write_json(&rows, dest(job))?;
        return Ok(EXIT_OK);
    }
    let mut table = Table::new(&["theta", "r_nodal_max", "r_separable"]);
    for row in &rows {
        table.row(vec![num(row.theta), row.r_nodal_max.map_or(String::new(), num), num(row.r_separable)]);
    }
    table.write(dest(job))?;
    Ok(EXIT_OK)
}
