//! The four driver commands. Each one loads a scenario file, runs the
//! solver (and, for the batch commands, the reference solvers alongside),
//! and writes CSV artifacts. All of them return outcome structs instead of
//! printing, so the integration tests exercise them in-process.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Vector3;
use rayon::prelude::*;
use tfc_lambert::basis::BasisKind;
use tfc_lambert::reference::{
    dc_solve, lambert_universal, propagate, propagate_dense, DcProblem, PropagatorConfig,
};
use tfc_lambert::tfc::StopReason;
use tfc_lambert::{solve, BoundaryValueProblem, Solution, SolverConfig};

use crate::scenario::{Scenario, SweepAxis, WarmStart};
use crate::{resolve_out_dir, svg, CliError};

/// Rows in a `<name>_solution.csv` (and points on the SVG polyline).
const SOLUTION_SAMPLES: usize = 1000;
/// Rows in a `<name>_compare.csv` difference-curve file.
const COMPARE_SAMPLES: usize = 500;

/// Output routing shared by all commands.
#[derive(Default)]
pub struct OutputOptions {
    /// Explicit output directory; falls back to `TFC_LAMBERT_OUT`, then
    /// the working directory.
    pub out_dir: Option<PathBuf>,
    /// Also write an SVG trajectory plot (only `solve` honors this).
    pub svg: bool,
}

/// What a single solve produced. `solved` means the iteration terminated
/// at one of its tolerance stops — residual below tolerance, or a step too
/// small to matter — as opposed to running out of budget or diverging;
/// the binary maps `!solved` to exit code 4.
pub struct SolveOutcome {
    pub name: String,
    pub solved: bool,
    pub stop: StopReason,
    pub iterations: usize,
    pub residual_final: f64,
    pub v0: Vector3<f64>,
    pub vf: Vector3<f64>,
    /// Endpoint miss when the solved initial velocity is handed to the
    /// numerical propagator, in scenario length units.
    pub closure_error: f64,
    /// The same miss in the solver's canonical units.
    pub closure_error_nd: f64,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.solved {
            0
        } else {
            4
        }
    }
}

/// One solver's result at one grid point of a sweep.
#[derive(Clone, Copy)]
pub struct CellResult {
    pub converged: bool,
    pub iterations: usize,
    /// Endpoint miss in scenario length units; NaN when the run broke down
    /// before producing a velocity.
    pub error: f64,
    pub wall_ms: f64,
}

impl CellResult {
    fn failed(wall_ms: f64) -> Self {
        Self { converged: false, iterations: 0, error: f64::NAN, wall_ms }
    }
}

/// One grid point of a sweep: the axis value(s) plus each solver's result.
pub struct SweepRow {
    /// Axis coordinates: one value, or `[degree, alpha]` for the
    /// two-dimensional axis.
    pub coords: Vec<f64>,
    pub tfc: CellResult,
    pub dc: CellResult,
    /// Universal-variable Lambert closure; only for unperturbed
    /// zero-revolution scenarios (iteration counts are internal to it, so
    /// only error and wall time are reported).
    pub oracle: Option<(f64, f64)>,
}

pub struct SweepOutcome {
    pub name: String,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// One cell of the degree-α scan.
#[derive(Clone, Copy)]
pub struct ScanRow {
    pub degree: usize,
    pub alpha: f64,
    pub ratio: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Two-body propagation miss at the terminal point, scenario length
    /// units: the scan's error metric regardless of perturbations.
    pub endpoint_error: f64,
}

pub struct ScanOutcome {
    pub name: String,
    pub rows: Vec<ScanRow>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// One sampled time on the compare curves. Differences are position-vector
/// norms in scenario length units.
pub struct CompareRow {
    pub t: f64,
    pub tfc_vs_dc: f64,
    /// Only when the scenario has perturbations.
    pub perturbed_vs_unperturbed: Option<f64>,
    /// Only when the unperturbed oracle applies.
    pub tfc_vs_oracle: Option<f64>,
}

pub struct CompareOutcome {
    pub name: String,
    pub solved: bool,
    pub rows: Vec<CompareRow>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl CompareOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.solved {
            0
        } else {
            4
        }
    }
}

/// Did the iteration terminate at a tolerance stop (as opposed to
/// exhausting its budget or leaving the basin)?
fn tolerance_stop(stop: StopReason) -> bool {
    matches!(stop, StopReason::ResidualTolerance | StopReason::StepTolerance)
}

/// Solves a scenario's problem honoring its warm-start policy; returns the
/// solution plus the unperturbed one when the warm start computed it.
fn solve_scenario(
    scn: &Scenario,
    bvp: &BoundaryValueProblem,
) -> Result<(Solution, Option<Solution>), tfc_lambert::Error> {
    if scn.warm_start == WarmStart::Unperturbed && !bvp.perturbations.is_empty() {
        let cold = solve(&bvp.unperturbed(), &scn.config, None)?;
        let sol = solve(bvp, &scn.config, Some(&cold.coefficients))?;
        Ok((sol, Some(cold)))
    } else {
        Ok((solve(bvp, &scn.config, None)?, None))
    }
}

/// Hands a departure velocity to the numerical propagator (in canonical
/// units, where the integrator tolerances are meaningful) and measures the
/// terminal position miss. Nondimensional on return.
fn closure_error_nd(
    bvp: &BoundaryValueProblem,
    v0: &Vector3<f64>,
) -> Result<f64, tfc_lambert::Error> {
    let (nd, scaling) = bvp.nondimensionalized();
    let v0_nd = v0 / scaling.velocity();
    let (r_end, _) = propagate(
        nd.mu,
        &nd.r0,
        &v0_nd,
        nd.tof,
        &nd.perturbations,
        &PropagatorConfig::default(),
    )?;
    Ok((r_end - nd.rf).norm())
}

/// Shortest round-trip float formatting with an exponent, so CSV content
/// is deterministic and compact. NaN prints as `NaN`.
fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(header.len() + 1 + rows.len() * 64);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs `f` on a dedicated worker pool when a job count is given, on the
/// global one otherwise.
fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Solves one scenario file and writes `<name>_solution.csv`,
/// `<name>_diag.csv`, `<name>_summary.csv`, and optionally an SVG plot.
/// The summary is written even when the iteration fails, so a non-zero
/// exit still leaves the diagnostics on disk.
pub fn run_solve(path: &Path, opts: &OutputOptions) -> Result<SolveOutcome, CliError> {
    let scn = Scenario::load(path)?;
    let bvp = scn.bvp()?;
    let (sol, _) = solve_scenario(&scn, &bvp).map_err(CliError::from_core)?;
    let closure_nd = closure_error_nd(&bvp, &sol.v0).map_err(CliError::from_core)?;
    let length = bvp.scaling().length;

    let dir = resolve_out_dir(opts.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();

    let mut samples = Vec::with_capacity(SOLUTION_SAMPLES);
    for i in 0..SOLUTION_SAMPLES {
        let t = scn.tof * i as f64 / (SOLUTION_SAMPLES - 1) as f64;
        let (r, v) = sol.sample(t).map_err(CliError::from_core)?;
        samples.push((t, r, v));
    }
    let solution_rows: Vec<String> = samples
        .iter()
        .map(|(t, r, v)| {
            format!(
                "{},{},{},{},{},{},{}",
                fmt_f(*t),
                fmt_f(r.x),
                fmt_f(r.y),
                fmt_f(r.z),
                fmt_f(v.x),
                fmt_f(v.y),
                fmt_f(v.z)
            )
        })
        .collect();
    let solution_path = dir.join(format!("{}_solution.csv", scn.name));
    write_csv(&solution_path, "t,x,y,z,vx,vy,vz", &solution_rows)?;
    files.push(solution_path);

    let diag_rows: Vec<String> = sol
        .diagnostics
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, res)| format!("{i},{}", fmt_f(*res)))
        .collect();
    let diag_path = dir.join(format!("{}_diag.csv", scn.name));
    write_csv(&diag_path, "iteration,residual_norm", &diag_rows)?;
    files.push(diag_path);

    let solved = tolerance_stop(sol.diagnostics.stop);
    let summary_row = format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        scn.name,
        solved,
        sol.diagnostics.stop.as_str(),
        sol.diagnostics.iterations,
        fmt_f(sol.diagnostics.residual_final()),
        fmt_f(sol.v0.x),
        fmt_f(sol.v0.y),
        fmt_f(sol.v0.z),
        fmt_f(sol.vf.x),
        fmt_f(sol.vf.y),
        fmt_f(sol.vf.z),
        fmt_f(closure_nd * length),
    );
    let summary_path = dir.join(format!("{}_summary.csv", scn.name));
    write_csv(
        &summary_path,
        "name,converged,stop,iterations,residual_final,v0x,v0y,v0z,vfx,vfy,vfz,closure_error",
        &[summary_row],
    )?;
    files.push(summary_path);

    if opts.svg {
        let track: Vec<Vector3<f64>> = samples.iter().map(|(_, r, _)| *r).collect();
        let svg_path = dir.join(format!("{}_trajectory.svg", scn.name));
        std::fs::write(&svg_path, svg::transfer_plane_plot(&track, &sol.frame))?;
        files.push(svg_path);
    }

    Ok(SolveOutcome {
        name: scn.name.clone(),
        solved,
        stop: sol.diagnostics.stop,
        iterations: sol.diagnostics.iterations,
        residual_final: sol.diagnostics.residual_final(),
        v0: sol.v0,
        vf: sol.vf,
        closure_error: closure_nd * length,
        closure_error_nd: closure_nd,
        warnings: scn.warnings.clone(),
        files,
    })
}

/// A sweep grid point, fully specified.
enum GridPoint {
    /// Varies geometry or time; the solver configuration stays nominal.
    Geometry { coords: Vec<f64>, rf: Vector3<f64>, tof: f64, long_way: bool },
    /// Varies the basis on the nominal geometry.
    Basis { degree: usize, alpha: f64 },
}

fn sweep_points(scn: &Scenario) -> Result<Vec<GridPoint>, CliError> {
    let grid = scn
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Parse("the scenario file has no sweep block".into()))?;
    let mut points = Vec::new();
    match grid.axis {
        SweepAxis::Tof => {
            for &t in &grid.values {
                points.push(GridPoint::Geometry {
                    coords: vec![t],
                    rf: scn.rf,
                    tof: t,
                    long_way: scn.long_way,
                });
            }
        }
        SweepAxis::Angle => {
            let r0_hat = scn.r0 / scn.r0.norm();
            let h_hat = {
                let h = scn.r0.cross(&scn.rf);
                h / h.norm()
            };
            let in_plane = h_hat.cross(&r0_hat);
            let rf_mag = scn.rf.norm();
            for &deg in &grid.values {
                let theta = deg.to_radians();
                let rf = rf_mag * (theta.cos() * r0_hat + theta.sin() * in_plane);
                points.push(GridPoint::Geometry {
                    coords: vec![deg],
                    rf,
                    tof: scn.tof,
                    long_way: deg > 180.0,
                });
            }
        }
        SweepAxis::Chord => {
            let r0n = scn.r0.norm();
            let rf_hat = scn.rf / scn.rf.norm();
            let sweep = (scn.r0.dot(&scn.rf) / (r0n * scn.rf.norm()))
                .clamp(-1.0, 1.0)
                .acos();
            for &c in &grid.values {
                // Law of cosines, solved for the terminal radius along the
                // fixed direction: the positive root always exists because
                // the loader checked c against the minimum distance to the
                // ray.
                let rf_mag = r0n * sweep.cos() + (c * c - (r0n * sweep.sin()).powi(2)).sqrt();
                points.push(GridPoint::Geometry {
                    coords: vec![c],
                    rf: rf_mag * rf_hat,
                    tof: scn.tof,
                    long_way: scn.long_way,
                });
            }
        }
        SweepAxis::DegreeAlpha => {
            for &d in &grid.values {
                for &alpha in &grid.alphas {
                    points.push(GridPoint::Basis { degree: d as usize, alpha });
                }
            }
        }
    }
    Ok(points)
}

fn run_sweep_cell(scn: &Scenario, point: &GridPoint) -> SweepRow {
    let (coords, rf, tof, long_way, config) = match point {
        GridPoint::Geometry { coords, rf, tof, long_way } => {
            (coords.clone(), *rf, *tof, *long_way, scn.config.clone())
        }
        GridPoint::Basis { degree, alpha } => (
            vec![*degree as f64, *alpha],
            scn.rf,
            scn.tof,
            scn.long_way,
            SolverConfig {
                kind: BasisKind::Gegenbauer { alpha: *alpha },
                degree: *degree,
                ..scn.config
            },
        ),
    };

    let bvp = match scn.bvp_with(rf, tof, long_way) {
        Ok(b) => b,
        Err(_) => {
            // Degenerate grid point (e.g. a 180° transfer mid-sweep):
            // recorded, never fatal.
            return SweepRow {
                coords,
                tfc: CellResult::failed(0.0),
                dc: CellResult::failed(0.0),
                oracle: None,
            };
        }
    };
    let length = bvp.scaling().length;

    let start = Instant::now();
    let tfc = (|| -> Result<CellResult, tfc_lambert::Error> {
        let sol = if scn.warm_start == WarmStart::Unperturbed && !bvp.perturbations.is_empty() {
            let cold = solve(&bvp.unperturbed(), &config, None)?;
            solve(&bvp, &config, Some(&cold.coefficients))?
        } else {
            solve(&bvp, &config, None)?
        };
        let err = closure_error_nd(&bvp, &sol.v0)? * length;
        Ok(CellResult {
            converged: tolerance_stop(sol.diagnostics.stop),
            iterations: sol.diagnostics.iterations,
            error: err,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    })()
    .unwrap_or_else(|_| CellResult::failed(start.elapsed().as_secs_f64() * 1e3));

    let start = Instant::now();
    let dc = (|| -> Result<CellResult, tfc_lambert::Error> {
        let mut problem = DcProblem::new(bvp.clone());
        problem.tol = scn.config.tol;
        let dc = dc_solve(&problem)?;
        Ok(CellResult {
            converged: dc.converged,
            iterations: dc.iterations,
            // The shooter's miss distance is already the propagated
            // endpoint error, in canonical units.
            error: dc.miss_distance * length,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    })()
    .unwrap_or_else(|_| CellResult::failed(start.elapsed().as_secs_f64() * 1e3));

    let oracle = if scn.oracle_applies() {
        let start = Instant::now();
        let result = lambert_universal(scn.mu, &scn.r0, &bvp.rf, tof, long_way)
            .and_then(|(v0, _)| closure_error_nd(&bvp, &v0));
        let wall = start.elapsed().as_secs_f64() * 1e3;
        Some(match result {
            Ok(err_nd) => (err_nd * length, wall),
            Err(_) => (f64::NAN, wall),
        })
    } else {
        None
    };

    SweepRow { coords, tfc, dc, oracle }
}

/// Runs every grid point of a sweep file — the solver, the shooter, and
/// (where it applies) the Lambert oracle — and writes one CSV in grid
/// order. Individual failures are recorded as unconverged rows.
pub fn run_sweep(
    path: &Path,
    jobs: Option<usize>,
    opts: &OutputOptions,
) -> Result<SweepOutcome, CliError> {
    let scn = Scenario::load(path)?;
    let points = sweep_points(&scn)?;
    let rows: Vec<SweepRow> =
        with_pool(jobs, || points.par_iter().map(|p| run_sweep_cell(&scn, p)).collect())?;

    let grid = scn.sweep.as_ref().expect("sweep_points checked the block");
    let axis_header = match grid.axis {
        SweepAxis::Tof => format!("tof_{}", scn.units.time_suffix()),
        SweepAxis::Angle => "angle_deg".to_string(),
        SweepAxis::Chord => format!("chord_{}", scn.units.length_suffix()),
        SweepAxis::DegreeAlpha => "degree,alpha".to_string(),
    };
    let ls = scn.units.length_suffix();
    let mut header = format!(
        "{axis_header},tfc_converged,tfc_iterations,tfc_error_{ls},tfc_wall_ms,\
         dc_converged,dc_iterations,dc_error_{ls},dc_wall_ms"
    );
    let with_oracle = scn.oracle_applies();
    if with_oracle {
        header.push_str(&format!(",oracle_error_{ls},oracle_wall_ms"));
    }

    let csv_rows: Vec<String> = rows
        .iter()
        .map(|row| {
            let mut line = row
                .coords
                .iter()
                .map(|c| fmt_f(*c))
                .collect::<Vec<_>>()
                .join(",");
            line.push_str(&format!(
                ",{},{},{},{},{},{},{},{}",
                row.tfc.converged,
                row.tfc.iterations,
                fmt_f(row.tfc.error),
                fmt_f(row.tfc.wall_ms),
                row.dc.converged,
                row.dc.iterations,
                fmt_f(row.dc.error),
                fmt_f(row.dc.wall_ms),
            ));
            if with_oracle {
                let (err, wall) = row.oracle.unwrap_or((f64::NAN, 0.0));
                line.push_str(&format!(",{},{}", fmt_f(err), fmt_f(wall)));
            }
            line
        })
        .collect();

    let dir = resolve_out_dir(opts.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}_sweep.csv", scn.name));
    write_csv(&csv_path, &header, &csv_rows)?;

    Ok(SweepOutcome {
        name: scn.name.clone(),
        rows,
        warnings: scn.warnings.clone(),
        files: vec![csv_path],
    })
}

/// Runs the degree-α scan cells for a loaded scenario. `basis_override`
/// swaps every cell's basis (the α value then only labels the row); the
/// tests use it to replay a scan under Legendre for comparison.
pub fn scan_cells(
    scn: &Scenario,
    jobs: Option<usize>,
    basis_override: Option<BasisKind>,
) -> Result<Vec<ScanRow>, CliError> {
    let grid = scn
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Parse("the scenario file has no scan block".into()))?;
    let rf_dir = scn.rf / scn.rf.norm();
    let r0n = scn.r0.norm();

    let mut cells = Vec::new();
    for &ratio in &grid.ratios {
        for &degree in &grid.degrees {
            for &alpha in &grid.alphas {
                cells.push((degree, alpha, ratio));
            }
        }
    }

    with_pool(jobs, || {
        cells
            .par_iter()
            .map(|&(degree, alpha, ratio)| {
                let config = SolverConfig {
                    kind: basis_override.unwrap_or(BasisKind::Gegenbauer { alpha }),
                    degree,
                    // The scan's convention: a fixed generous budget, so
                    // slow cells and divergent cells are distinguishable.
                    max_iter: 200,
                    ..scn.config
                };
                let run = (|| -> Result<ScanRow, CliError> {
                    let bvp = scn.bvp_with(rf_dir * (ratio * r0n), scn.tof, scn.long_way)?;
                    let length = bvp.scaling().length;
                    let sol = solve(&bvp, &config, None).map_err(CliError::from_core)?;
                    // The scan's error metric is deliberately two-body: how
                    // far the returned velocity misses under pure Kepler
                    // dynamics.
                    let err = closure_error_nd(&bvp.unperturbed(), &sol.v0)
                        .map_err(CliError::from_core)?
                        * length;
                    Ok(ScanRow {
                        degree,
                        alpha,
                        ratio,
                        converged: tolerance_stop(sol.diagnostics.stop),
                        iterations: sol.diagnostics.iterations,
                        endpoint_error: err,
                    })
                })();
                run.unwrap_or(ScanRow {
                    degree,
                    alpha,
                    ratio,
                    converged: false,
                    iterations: 0,
                    endpoint_error: f64::NAN,
                })
            })
            .collect()
    })
}

/// Runs a scan file's full (degree, α, radius-ratio) grid and writes one
/// CSV row per cell, in grid order, never aborting on divergent cells.
pub fn run_polyscan(
    path: &Path,
    jobs: Option<usize>,
    opts: &OutputOptions,
) -> Result<ScanOutcome, CliError> {
    let scn = Scenario::load(path)?;
    let rows = scan_cells(&scn, jobs, None)?;

    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.degree,
                fmt_f(r.alpha),
                fmt_f(r.ratio),
                r.converged,
                r.iterations,
                fmt_f(r.endpoint_error)
            )
        })
        .collect();

    let dir = resolve_out_dir(opts.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}_polyscan.csv", scn.name));
    write_csv(
        &csv_path,
        &format!(
            "degree,alpha,ratio,converged,iterations,endpoint_error_{}",
            scn.units.length_suffix()
        ),
        &csv_rows,
    )?;

    Ok(ScanOutcome {
        name: scn.name.clone(),
        rows,
        warnings: scn.warnings.clone(),
        files: vec![csv_path],
    })
}

/// Solves one scenario with the collocation solver, the shooting method,
/// and (unperturbed) the Lambert oracle, and writes their pairwise
/// position-difference curves over time.
pub fn run_compare(path: &Path, opts: &OutputOptions) -> Result<CompareOutcome, CliError> {
    let scn = Scenario::load(path)?;
    let bvp = scn.bvp()?;
    let (sol, warm_unperturbed) = solve_scenario(&scn, &bvp).map_err(CliError::from_core)?;
    let (nd, scaling) = bvp.nondimensionalized();
    let propagator = PropagatorConfig::default();

    // Shooting reference. Multi-revolution problems seed from the
    // collocation answer (the oracle inside the shooter is single-rev
    // only); otherwise the shooter stays fully independent.
    let mut problem = DcProblem::new(bvp.clone());
    problem.tol = scn.config.tol;
    if scn.k > 0 {
        problem = problem.with_guess(sol.v0);
    }
    let dc = dc_solve(&problem).map_err(CliError::from_core)?;
    let dc_track = propagate_dense(
        nd.mu,
        &nd.r0,
        &(dc.v0 / scaling.velocity()),
        nd.tof,
        &nd.perturbations,
        &propagator,
    )
    .map_err(CliError::from_core)?;

    // Unperturbed twin of the same transfer, for the effect-of-the-model
    // curve.
    let unperturbed = if bvp.perturbations.is_empty() {
        None
    } else {
        Some(match warm_unperturbed {
            Some(s) => s,
            None => solve(&bvp.unperturbed(), &scn.config, None).map_err(CliError::from_core)?,
        })
    };

    let oracle_track = if scn.oracle_applies() {
        let (v0, _) = lambert_universal(scn.mu, &scn.r0, &scn.rf, scn.tof, scn.long_way)
            .map_err(CliError::from_core)?;
        Some(
            propagate_dense(
                nd.mu,
                &nd.r0,
                &(v0 / scaling.velocity()),
                nd.tof,
                &[],
                &propagator,
            )
            .map_err(CliError::from_core)?,
        )
    } else {
        None
    };

    let mut rows = Vec::with_capacity(COMPARE_SAMPLES);
    for i in 0..COMPARE_SAMPLES {
        let t = scn.tof * i as f64 / (COMPARE_SAMPLES - 1) as f64;
        let t_nd = (t / scaling.time).min(nd.tof);
        let (r_tfc, _) = sol.sample(t).map_err(CliError::from_core)?;
        let (r_dc, _) = dc_track.sample(t_nd).map_err(CliError::from_core)?;
        let tfc_vs_dc = (r_tfc - r_dc * scaling.length).norm();
        let perturbed_vs_unperturbed = match &unperturbed {
            Some(u) => {
                let (r_u, _) = u.sample(t).map_err(CliError::from_core)?;
                Some((r_tfc - r_u).norm())
            }
            None => None,
        };
        let tfc_vs_oracle = match &oracle_track {
            Some(track) => {
                let (r_o, _) = track.sample(t_nd).map_err(CliError::from_core)?;
                Some((r_tfc - r_o * scaling.length).norm())
            }
            None => None,
        };
        rows.push(CompareRow { t, tfc_vs_dc, perturbed_vs_unperturbed, tfc_vs_oracle });
    }

    let ls = scn.units.length_suffix();
    let mut header = format!("t_{},tfc_vs_dc_{ls}", scn.units.time_suffix());
    if unperturbed.is_some() {
        header.push_str(&format!(",perturbed_vs_unperturbed_{ls}"));
    }
    if oracle_track.is_some() {
        header.push_str(&format!(",tfc_vs_oracle_{ls}"));
    }
    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            let mut line = format!("{},{}", fmt_f(r.t), fmt_f(r.tfc_vs_dc));
            if let Some(d) = r.perturbed_vs_unperturbed {
                line.push_str(&format!(",{}", fmt_f(d)));
            }
            if let Some(d) = r.tfc_vs_oracle {
                line.push_str(&format!(",{}", fmt_f(d)));
            }
            line
        })
        .collect();

    let dir = resolve_out_dir(opts.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}_compare.csv", scn.name));
    write_csv(&csv_path, &header, &csv_rows)?;

    Ok(CompareOutcome {
        name: scn.name.clone(),
        solved: tolerance_stop(sol.diagnostics.stop),
        rows,
        warnings: scn.warnings.clone(),
        files: vec![csv_path],
    })
}
