//! End-to-end checks of the four commands: the headline numbers each
//! shipped scenario exists to demonstrate, artifact shape, rerun
//! determinism, scenario-file validation, and the binary's exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use nalgebra::Vector3;
use tfc_lambert::basis::BasisKind;
use tfc_lambert_cli::commands::{
    run_compare, run_polyscan, run_solve, run_sweep, scan_cells, OutputOptions,
};
use tfc_lambert_cli::scenario::{scenario_from_str, Scenario};

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A per-test scratch directory under the target tree, so artifacts from
/// different tests (and reruns) never collide.
fn out_dir(test: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(test);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn opts(dir: &Path) -> OutputOptions {
    OutputOptions { out_dir: Some(dir.to_path_buf()), svg: false }
}

fn read_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn solve_writes_solution_diag_and_summary() {
    let dir = out_dir("solve_artifacts");
    let outcome = run_solve(&scenario_path("leo.json"), &opts(&dir)).unwrap();

    assert!(outcome.solved, "the LEO transfer is a converging baseline");
    assert_eq!(outcome.files.len(), 3);

    let solution = read_lines(&dir.join("leo_solution.csv"));
    assert_eq!(solution[0], "t,x,y,z,vx,vy,vz");
    assert_eq!(solution.len(), 1001, "header plus 1000 uniform samples");

    let diag = read_lines(&dir.join("leo_diag.csv"));
    assert_eq!(diag[0], "iteration,residual_norm");
    assert!(diag.len() >= 2, "at least the pre-iteration residual");

    let summary = read_lines(&dir.join("leo_summary.csv"));
    assert_eq!(
        summary[0],
        "name,converged,stop,iterations,residual_final,v0x,v0y,v0z,vfx,vfy,vfz,closure_error"
    );
    let fields: Vec<&str> = summary[1].split(',').collect();
    assert_eq!(fields[0], "leo");
    assert_eq!(fields[1], "true");
    let closure_km: f64 = fields[11].parse().unwrap();
    assert!(
        closure_km < 1e-2,
        "propagated endpoint miss should be meters-level, got {closure_km} km"
    );
}

#[test]
fn quarter_circle_departure_velocity_is_circular() {
    // A 90° arc of the unit circular orbit in canonical units: the exact
    // transfer departs with v0 = (0, 1, 0) and arrives with vf = (-1, 0, 0).
    let dir = out_dir("quarter_circle");
    let outcome = run_solve(&scenario_path("quarter_circle.json"), &opts(&dir)).unwrap();

    assert!(outcome.solved);
    assert!((outcome.v0 - Vector3::new(0.0, 1.0, 0.0)).norm() <= 1e-8);
    assert!((outcome.vf - Vector3::new(-1.0, 0.0, 0.0)).norm() <= 1e-8);
}

#[test]
fn cislunar_solution_closes_at_arrival() {
    let dir = out_dir("cislunar_closure");
    let outcome = run_solve(&scenario_path("cislunar.json"), &opts(&dir)).unwrap();

    assert!(outcome.solved);
    assert!(
        outcome.closure_error_nd <= 1e-6,
        "GEO-to-Moon-vicinity endpoint miss {} exceeds 1e-6 canonical",
        outcome.closure_error_nd
    );
}

#[test]
fn svg_plot_written_on_request() {
    let dir = out_dir("svg_plot");
    let outcome = run_solve(
        &scenario_path("quarter_circle.json"),
        &OutputOptions { out_dir: Some(dir.clone()), svg: true },
    )
    .unwrap();

    assert_eq!(outcome.files.len(), 4);
    let svg = fs::read_to_string(dir.join("quarter_circle_trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("</svg>"));
    assert!(svg.contains("polyline"), "the transfer track itself must be plotted");
}

#[test]
fn tof_sweep_tracks_the_shooting_reference() {
    let dir = out_dir("tof_sweep");
    let outcome = run_sweep(&scenario_path("tof_sweep.json"), None, &opts(&dir)).unwrap();

    assert_eq!(outcome.rows.len(), 11);
    let scn = Scenario::load(&scenario_path("tof_sweep.json")).unwrap();
    // Both solvers drive the same endpoint condition, so wherever the
    // collocation solve converges its propagated miss must be no worse
    // than the shooter's — up to the solve tolerance expressed as a
    // length, since each method is free to stop anywhere below it.
    let tol_length = scn.config.tol * scn.r0.norm();
    let mut converged = 0;
    for row in &outcome.rows {
        if row.tfc.converged {
            converged += 1;
            assert!(row.dc.converged, "the shooter is the easier method here");
            let bound = row.dc.error.max(tol_length);
            assert!(
                row.tfc.error <= bound,
                "at tof {} the solver missed by {} km vs shooter {} km",
                row.coords[0],
                row.tfc.error,
                row.dc.error
            );
        }
    }
    assert!(converged >= 9, "only the longest arcs may fall outside the basin");

    // Unperturbed zero-rev sweep: the Lambert oracle columns must be there.
    let lines = read_lines(&dir.join("tof_sweep_sweep.csv"));
    assert!(lines[0].starts_with("tof_s,tfc_converged,"));
    assert!(lines[0].ends_with("oracle_error_km,oracle_wall_ms"));
    assert_eq!(lines.len(), 12);
}

#[test]
fn chord_sweep_records_every_grid_point() {
    let dir = out_dir("chord_sweep");
    let outcome = run_sweep(&scenario_path("chord_sweep.json"), None, &opts(&dir)).unwrap();

    // 15406 .. 45906 km in 1525 km steps: 21 chords, recorded in order
    // whether or not the cell converged.
    assert_eq!(outcome.rows.len(), 21);
    for (i, row) in outcome.rows.iter().enumerate() {
        let expected = 15406.0 + 1525.0 * i as f64;
        assert!((row.coords[0] - expected).abs() < 1e-9);
    }
    let converged = outcome.rows.iter().filter(|r| r.tfc.converged).count();
    assert!(converged >= 15, "most of the chord range converges, got {converged}");
    assert_eq!(read_lines(&dir.join("chord_sweep_sweep.csv")).len(), 22);
}

#[test]
fn scan_grid_is_complete_and_alpha_half_matches_legendre() {
    let scn = Scenario::load(&fixture_path("scan_small.json")).unwrap();
    let rows = scan_cells(&scn, None, None).unwrap();

    // 5 degrees x 3 alphas x 1 ratio, every cell present in grid order.
    assert_eq!(rows.len(), 15);
    let mut expected = Vec::new();
    for degree in 20..=24 {
        for alpha in [0.5, 1.0, 1.5] {
            expected.push((degree, alpha));
        }
    }
    for (row, (degree, alpha)) in rows.iter().zip(&expected) {
        assert_eq!(row.degree, *degree);
        assert!((row.alpha - alpha).abs() < 1e-12);
        assert!((row.ratio - 1.0).abs() < 1e-12);
    }

    let base = rows[0];
    assert!(base.converged, "the nominal (20, 0.5) cell is a converging baseline");
    assert!(base.endpoint_error < 1.0, "got {} km", base.endpoint_error);

    // α = 1/2 Gegenbauer weight is the Legendre weight, so those columns
    // must reproduce the Legendre iteration trajectory cell for cell.
    let legendre = scan_cells(&scn, None, Some(BasisKind::Legendre)).unwrap();
    for (g, l) in rows.iter().zip(&legendre) {
        if (g.alpha - 0.5).abs() < 1e-12 {
            assert_eq!(g.converged, l.converged, "degree {}", g.degree);
            assert_eq!(g.iterations, l.iterations, "degree {}", g.degree);
        }
    }
}

#[test]
fn polyscan_csv_has_one_row_per_cell() {
    let dir = out_dir("polyscan_small");
    let outcome = run_polyscan(&fixture_path("scan_small.json"), None, &opts(&dir)).unwrap();

    let lines = read_lines(&dir.join("scan_small_polyscan.csv"));
    assert_eq!(lines[0], "degree,alpha,ratio,converged,iterations,endpoint_error_km");
    assert_eq!(lines.len(), outcome.rows.len() + 1);
}

#[test]
fn solve_artifacts_are_deterministic() {
    let dir_a = out_dir("determinism_a");
    let dir_b = out_dir("determinism_b");
    run_solve(&scenario_path("meo_geo.json"), &opts(&dir_a)).unwrap();
    run_solve(&scenario_path("meo_geo.json"), &opts(&dir_b)).unwrap();

    for name in ["meo_geo_solution.csv", "meo_geo_diag.csv", "meo_geo_summary.csv"] {
        let a = fs::read(dir_a.join(name)).unwrap();
        let b = fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn sweep_rerun_matches_outside_wall_time() {
    let dir_a = out_dir("sweep_determinism_a");
    let dir_b = out_dir("sweep_determinism_b");
    run_sweep(&fixture_path("tof_sweep_small.json"), None, &opts(&dir_a)).unwrap();
    run_sweep(&fixture_path("tof_sweep_small.json"), None, &opts(&dir_b)).unwrap();

    let a = read_lines(&dir_a.join("tof_sweep_small_sweep.csv"));
    let b = read_lines(&dir_b.join("tof_sweep_small_sweep.csv"));
    assert_eq!(a[0], b[0]);
    assert_eq!(a.len(), b.len());

    // Wall-clock columns are informational; every numeric result column
    // must reproduce exactly.
    let wall: Vec<usize> = a[0]
        .split(',')
        .enumerate()
        .filter(|(_, name)| name.ends_with("_wall_ms"))
        .map(|(i, _)| i)
        .collect();
    assert!(!wall.is_empty());
    for (row_a, row_b) in a.iter().zip(&b).skip(1) {
        let fa: Vec<&str> = row_a.split(',').collect();
        let fb: Vec<&str> = row_b.split(',').collect();
        assert_eq!(fa.len(), fb.len());
        for i in 0..fa.len() {
            if !wall.contains(&i) {
                assert_eq!(fa[i], fb[i], "column {i} differs between reruns");
            }
        }
    }
}

#[test]
fn compare_on_unperturbed_scenario_carries_the_oracle_column() {
    let dir = out_dir("compare_quarter");
    let outcome = run_compare(&scenario_path("quarter_circle.json"), &opts(&dir)).unwrap();

    assert!(outcome.solved);
    assert_eq!(outcome.rows.len(), 500);
    for row in &outcome.rows {
        assert!(row.tfc_vs_oracle.is_some());
        assert!(row.perturbed_vs_unperturbed.is_none());
    }
    let worst = outcome.rows.iter().map(|r| r.tfc_vs_dc).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "both methods are near-exact here, got {worst}");

    let lines = read_lines(&dir.join("quarter_circle_compare.csv"));
    assert_eq!(lines[0], "t_nd,tfc_vs_dc_nd,tfc_vs_oracle_nd");
    assert_eq!(lines.len(), 501);
}

#[test]
fn scenario_validation_rejects_contradictions() {
    let cases: &[(&str, &str)] = &[
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],"tof":1800,
                "elements":{"periapsis_altitude":500,"eccentricity":0.1,
                            "inclination_deg":0,"raan_deg":0,"arc_deg":90},
                "basis":{"kind":"legendre","degree":10}}"#,
            "mutually exclusive",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],
                "basis":{"kind":"legendre","degree":10}}"#,
            "tof is required",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],"tof":1800,
                "basis":{"kind":"gegenbauer","degree":10}}"#,
            "needs alpha",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],"tof":1800,
                "basis":{"kind":"legendre","degree":10,"alpha":1.5}}"#,
            "alpha only applies",
        ),
        (
            r#"{"name":"x","mu":1.0,"units":"nd",
                "r0":[1,0,0],"rf":[0,1,0],"tof":1.5,
                "basis":{"kind":"legendre","degree":10},
                "srp":{"area_m2":20,"mass_kg":5,"rho_absorbed":0.1,
                       "rho_specular":0.9,"rho_diffuse":0.0,"normal":[1,0,0]}}"#,
            "assumes km units",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],"tof":1800,
                "basis":{"kind":"legendre","degree":30},"n_points":20}"#,
            "n_points",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "elements":{"periapsis_altitude":500,"eccentricity":1.2,
                            "inclination_deg":0,"raan_deg":0,"arc_deg":90},
                "basis":{"kind":"legendre","degree":10}}"#,
            "eccentricity",
        ),
        (
            r#"{"name":"x","mu":398600.4418,"units":"km",
                "r0":[7000,0,0],"rf":[0,7000,0],"tof":1800,
                "basis":{"kind":"legendre","degree":10},"typo_field":1}"#,
            "typo_field",
        ),
    ];
    for (text, needle) in cases {
        let err = scenario_from_str(text, Path::new("."))
            .err()
            .unwrap_or_else(|| panic!("a scenario mentioning {needle:?} must be rejected"));
        let msg = err.to_string();
        assert!(
            msg.contains(needle),
            "expected error mentioning {needle:?}, got: {msg}"
        );
        assert_eq!(err.exit_code(), 2, "validation failures are input errors");
    }
}

#[test]
fn ephemeris_table_loads_and_enforces_coverage() {
    let dir = out_dir("ephemeris_table");

    // A slow circular companion sampled every 100 s out to 700 s, with a
    // header line the loader must tolerate.
    let n = 2.6617e-6_f64; // rad/s, lunar-ish mean motion
    let mut table = String::from("t_s,x_km,y_km,z_km\n");
    for i in 0..=7 {
        let t = 100.0 * i as f64;
        let (s, c) = (n * t).sin_cos();
        table.push_str(&format!("{t},{},{},0.0\n", 384400.0 * c, 384400.0 * s));
    }
    fs::write(dir.join("companion.csv"), &table).unwrap();

    let scenario = |tof: f64| {
        format!(
            r#"{{"name":"eph","mu":398600.4418,"units":"km",
                "r0":[6878.137,0,0],"rf":[3439.0685,5956.522668,0],"tof":{tof},
                "basis":{{"kind":"legendre","degree":12}},
                "third_body":{{"mu":4902.8,"ephemeris":{{"file":"companion.csv"}}}}}}"#
        )
    };

    // Covered time of flight: loads, solves, and the third body actually
    // pulled on the arc (the solution differs from the two-body one).
    let scn = scenario_from_str(&scenario(600.0), &dir).unwrap();
    fs::write(dir.join("eph.json"), scenario(600.0)).unwrap();
    let outcome = run_solve(&dir.join("eph.json"), &opts(&dir)).unwrap();
    assert!(outcome.solved);
    assert_eq!(scn.models.len(), 1);

    // A time of flight past the last table row must be refused up front.
    let err = scenario_from_str(&scenario(900.0), &dir)
        .err()
        .expect("a table ending at 700 s cannot support a 900 s arc");
    assert!(err.to_string().contains("does not cover"), "got: {err}");
}

#[test]
fn reflectance_budget_warning_is_carried_to_the_outcome() {
    let scn = Scenario::load(&scenario_path("earth_venus.json")).unwrap();
    assert_eq!(scn.warnings.len(), 1);
    assert!(scn.warnings[0].contains("sum to 1.1"), "got: {}", scn.warnings[0]);
}

#[test]
fn binary_reports_input_geometry_and_runtime_failures_distinctly() {
    let bin = env!("CARGO_BIN_EXE_tfc-lambert");
    let dir = out_dir("binary_exits");

    // Unparseable scenario: input error.
    let out = Command::new(bin)
        .args(["solve", fixture_path("garbage.json").to_str().unwrap()])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    // Collinear boundary vectors: the transfer plane is undefined.
    let out = Command::new(bin)
        .args(["solve", fixture_path("singular.json").to_str().unwrap()])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // A scenario outside the basis's reach: iteration-limit stop, exit 4,
    // with the summary CSV still on disk and the reflectance warning on
    // stderr.
    let out = Command::new(bin)
        .args(["solve", scenario_path("earth_venus.json").to_str().unwrap()])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning:"));
    let summary = read_lines(&dir.join("earth_venus_summary.csv"));
    let fields: Vec<&str> = summary[1].split(',').collect();
    assert_eq!(fields[1], "false");
    assert_eq!(fields[2], "iteration_limit");
}

#[test]
fn binary_output_directory_precedence() {
    let bin = env!("CARGO_BIN_EXE_tfc-lambert");
    let env_dir = out_dir("outdir_env");
    let flag_dir = out_dir("outdir_flag");
    let file = scenario_path("quarter_circle.json");

    // The environment variable alone routes the artifacts.
    let out = Command::new(bin)
        .args(["solve", file.to_str().unwrap()])
        .env("TFC_LAMBERT_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("quarter_circle_summary.csv").exists());

    // An explicit --out wins over the environment.
    let out = Command::new(bin)
        .args(["solve", file.to_str().unwrap()])
        .args(["--out", flag_dir.to_str().unwrap()])
        .env("TFC_LAMBERT_OUT", out_dir("outdir_env_unused"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("quarter_circle_summary.csv").exists());
    assert!(!out_dir("outdir_env_unused").join("quarter_circle_summary.csv").exists());
}
