//! Scenario files: JSON descriptions of one boundary-value problem — its
//! geometry (explicit vectors or an orbital-element recipe), basis and
//! solver settings, and optional perturbation blocks — plus an optional
//! sweep or scan grid layered on top for the batch commands.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;
use tfc_lambert::basis::BasisKind;
use tfc_lambert::perturbations::{
    CircularEphemeris, J2Perturbation, PerturbationModel, SrpPerturbation, TabulatedEphemeris,
    ThirdBodyPerturbation,
};
use tfc_lambert::{BoundaryValueProblem, SolverConfig};

use crate::CliError;

/// Earth equatorial radius (km); element recipes measure periapsis altitude
/// above this.
pub const EARTH_RADIUS_KM: f64 = 6378.137;

/// Converts a radiation pressure given in N/m² (= kg·m⁻¹·s⁻²) to the
/// km-based acceleration scale the dynamics use: P·A/m then comes out in
/// km/s² instead of m/s².
const PRESSURE_TO_KM: f64 = 1e-3;

/// Length/time unit system of a scenario file. Everything in one file —
/// vectors, times, sweep axes, output CSVs — shares this system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Kilometres and seconds.
    Km,
    /// Dimensionless; the caller has already scaled the problem.
    Nd,
}

impl Units {
    /// Suffix used in CSV column names so a file never leaves its units
    /// ambiguous.
    pub fn length_suffix(self) -> &'static str {
        match self {
            Units::Km => "km",
            Units::Nd => "nd",
        }
    }

    pub fn time_suffix(self) -> &'static str {
        match self {
            Units::Km => "s",
            Units::Nd => "nd",
        }
    }
}

/// How to seed the Gauss-Newton iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmStart {
    /// Zero coefficients: the constrained functional's built-in linear
    /// sweep.
    #[default]
    None,
    /// Solve the same problem without perturbations first and reuse its
    /// coefficients. The basis, frame, and scaling all match, so they carry
    /// over directly.
    Unperturbed,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    mu: f64,
    units: Units,
    r0: Option<[f64; 3]>,
    rf: Option<[f64; 3]>,
    elements: Option<ElementsBlock>,
    /// Time of flight. Required with explicit vectors; with an element
    /// recipe it defaults to the Kepler time across the arc.
    tof: Option<f64>,
    /// Whole revolutions added to the sweep.
    #[serde(default)]
    k: u32,
    #[serde(default)]
    long_way: bool,
    basis: BasisBlock,
    n_points: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    j2: Option<J2Block>,
    third_body: Option<ThirdBodyBlock>,
    srp: Option<SrpBlock>,
    #[serde(default)]
    warm_start: WarmStart,
    /// Grid for the `sweep` command; other commands ignore it.
    sweep: Option<SweepBlock>,
    /// Grid for the `polyscan` command; other commands ignore it.
    scan: Option<ScanBlock>,
}

/// Conic-arc recipe: both endpoints lie on one orbit, starting at
/// periapsis. Only meaningful in km units.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementsBlock {
    periapsis_altitude: f64,
    eccentricity: f64,
    inclination_deg: f64,
    raan_deg: f64,
    arc_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisBlock {
    kind: BasisKindName,
    degree: usize,
    alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BasisKindName {
    Legendre,
    Chebyshev,
    Gegenbauer,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct J2Block {
    /// Oblateness coefficient; defaults to Earth's.
    j2: Option<f64>,
    /// Equatorial reference radius; defaults to Earth's.
    r_eq: Option<f64>,
    /// Artificial amplification factor (1 = physical).
    scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThirdBodyBlock {
    mu: f64,
    ephemeris: EphemerisSpec,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum EphemerisSpec {
    /// A named built-in: `"moon"` is a circular equatorial lunar orbit
    /// starting on the +x axis.
    #[serde(rename = "moon")]
    Moon,
    /// Circular orbit of the given radius about the primary, phase in
    /// radians at t = 0.
    Circular { radius: f64, phase: f64 },
    /// CSV table `t_s,x_km,y_km,z_km`, linearly interpolated; must cover
    /// the whole time of flight. Relative paths resolve against the
    /// scenario file.
    File(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SrpBlock {
    /// Radiation pressure in N/m²; defaults to the solar value near 1 AU.
    pressure: Option<f64>,
    area_m2: f64,
    mass_kg: f64,
    rho_absorbed: f64,
    rho_specular: f64,
    rho_diffuse: f64,
    normal: [f64; 3],
}

const SOLAR_PRESSURE_N_PER_M2: f64 = 4.57e-6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepBlock {
    axis: SweepAxis,
    start: f64,
    stop: f64,
    step: f64,
    /// Second grid dimension, used only by the `degree_alpha` axis.
    alpha_start: Option<f64>,
    alpha_stop: Option<f64>,
    alpha_step: Option<f64>,
}

/// Which scenario field a sweep varies, everything else held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Time of flight, in the scenario's time units.
    Tof,
    /// Transfer angle in degrees; `rf` keeps its magnitude and rotates in
    /// the nominal transfer plane.
    Angle,
    /// Boundary-chord length in the scenario's length units; `rf` keeps
    /// its direction and rescales to match.
    Chord,
    /// Basis degree × Gegenbauer α grid on the fixed geometry.
    DegreeAlpha,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanBlock {
    degree_start: usize,
    degree_stop: usize,
    /// Defaults to 1.
    degree_step: Option<usize>,
    alpha_start: f64,
    alpha_stop: f64,
    alpha_step: f64,
    /// Boundary-radius ratios |rf|/|r0| to scan; `rf` keeps its direction.
    ratios: Vec<f64>,
}

/// A validated scenario, ready to build boundary-value problems from.
pub struct Scenario {
    pub name: String,
    pub units: Units,
    pub mu: f64,
    pub r0: Vector3<f64>,
    pub rf: Vector3<f64>,
    pub tof: f64,
    pub k: u32,
    pub long_way: bool,
    pub models: Vec<Arc<dyn PerturbationModel>>,
    pub config: SolverConfig,
    pub warm_start: WarmStart,
    /// Non-fatal findings from validation (e.g. reflectance fractions that
    /// do not sum to one); the driver prints them to stderr.
    pub warnings: Vec<String>,
    pub sweep: Option<SweepGrid>,
    pub scan: Option<ScanGrid>,
}

/// Expanded sweep grid: the axis values in file order.
pub struct SweepGrid {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// α values for the `degree_alpha` axis; empty otherwise.
    pub alphas: Vec<f64>,
}

/// Expanded polynomial-scan grid.
pub struct ScanGrid {
    pub degrees: Vec<usize>,
    pub alphas: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl Scenario {
    /// Reads and validates a scenario file. Everything that can be checked
    /// without running the solver is checked here.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Parse(format!("cannot read {}: {e}", path.display()))
        })?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file(file, base_dir)
    }

    fn from_file(file: ScenarioFile, base_dir: &Path) -> Result<Self, CliError> {
        if !(file.mu > 0.0) || !file.mu.is_finite() {
            return Err(CliError::Parse("mu must be positive and finite".into()));
        }

        let mut warnings = Vec::new();

        // Geometry: explicit vectors or an element recipe, never both.
        let (r0, rf, kepler_tof, recipe_long_way) = match (&file.r0, &file.rf, &file.elements) {
            (Some(_), Some(_), Some(_)) | (Some(_), None, Some(_)) | (None, Some(_), Some(_)) => {
                return Err(CliError::Parse(
                    "r0/rf and an element recipe are mutually exclusive".into(),
                ));
            }
            (Some(r0), Some(rf), None) => {
                (Vector3::from(*r0), Vector3::from(*rf), None, file.long_way)
            }
            (None, None, Some(elements)) => {
                if file.units != Units::Km {
                    return Err(CliError::Parse(
                        "element recipes assume km units (altitudes above the Earth radius)"
                            .into(),
                    ));
                }
                if file.long_way {
                    return Err(CliError::Parse(
                        "long_way is implied by arc_deg > 180; do not set it with a recipe"
                            .into(),
                    ));
                }
                let (r0, rf, tof) = expand_elements(file.mu, elements)?;
                (r0, rf, Some(tof), elements.arc_deg > 180.0)
            }
            _ => {
                return Err(CliError::Parse(
                    "give either both r0 and rf, or an element recipe".into(),
                ));
            }
        };

        let tof = match (file.tof, kepler_tof) {
            (Some(t), _) => t,
            (None, Some(t)) => t,
            (None, None) => {
                return Err(CliError::Parse(
                    "tof is required with explicit boundary vectors".into(),
                ));
            }
        };
        if !(tof > 0.0) || !tof.is_finite() {
            return Err(CliError::Parse("tof must be positive and finite".into()));
        }

        let kind = match (file.basis.kind, file.basis.alpha) {
            (BasisKindName::Legendre, None) => BasisKind::Legendre,
            (BasisKindName::Chebyshev, None) => BasisKind::Chebyshev,
            (BasisKindName::Gegenbauer, Some(alpha)) => BasisKind::Gegenbauer { alpha },
            (BasisKindName::Gegenbauer, None) => {
                return Err(CliError::Parse("the gegenbauer basis needs alpha".into()));
            }
            (_, Some(_)) => {
                return Err(CliError::Parse(
                    "alpha only applies to the gegenbauer basis".into(),
                ));
            }
        };

        let defaults = SolverConfig::default();
        let config = SolverConfig {
            n_points: file.n_points.unwrap_or(defaults.n_points),
            tol: file.tol.unwrap_or(defaults.tol),
            max_iter: file.max_iter.unwrap_or(defaults.max_iter),
            kind,
            degree: file.basis.degree,
            ..defaults
        };
        if !(config.tol > 0.0) || !config.tol.is_finite() {
            return Err(CliError::Parse("tol must be positive and finite".into()));
        }
        if config.n_points < config.degree + 2 {
            return Err(CliError::Parse(format!(
                "n_points ({}) must be at least degree + 2 ({})",
                config.n_points,
                config.degree + 2
            )));
        }

        let mut models: Vec<Arc<dyn PerturbationModel>> = Vec::new();
        if let Some(j2) = &file.j2 {
            let base = match (j2.j2, j2.r_eq) {
                (None, None) => J2Perturbation::earth(file.mu),
                (coeff, r_eq) => J2Perturbation::new(
                    file.mu,
                    coeff.unwrap_or(1.082_626_68e-3),
                    r_eq.unwrap_or(EARTH_RADIUS_KM),
                ),
            };
            models.push(Arc::new(base.with_scale(j2.scale.unwrap_or(1.0))));
        }
        if let Some(tb) = &file.third_body {
            let ephemeris = build_ephemeris(&tb.ephemeris, file.units, file.mu, tof, base_dir)?;
            models.push(Arc::new(ThirdBodyPerturbation::new(tb.mu, ephemeris)));
        }
        if let Some(srp) = &file.srp {
            if file.units != Units::Km {
                return Err(CliError::Parse(
                    "the srp block assumes km units (pressure is given in N/m²)".into(),
                ));
            }
            let rho_sum = srp.rho_absorbed + srp.rho_specular + srp.rho_diffuse;
            if (rho_sum - 1.0).abs() > 1e-9 {
                warnings.push(format!(
                    "srp reflectance fractions sum to {rho_sum}, not 1; the plate is not \
                     physically consistent"
                ));
            }
            let pressure =
                srp.pressure.unwrap_or(SOLAR_PRESSURE_N_PER_M2) * PRESSURE_TO_KM;
            let model = SrpPerturbation::new(
                pressure,
                srp.area_m2,
                srp.mass_kg,
                srp.rho_absorbed,
                srp.rho_specular,
                srp.rho_diffuse,
                Vector3::from(srp.normal),
                // The radiation source is the primary at the origin, as in a
                // heliocentric transfer.
                Box::new(|_| Vector3::zeros()),
            )
            .map_err(|e| CliError::Parse(format!("srp block: {e}")))?;
            models.push(Arc::new(model));
        }

        let sweep = file.sweep.as_ref().map(expand_sweep).transpose()?;
        if let Some(grid) = &sweep {
            validate_sweep_geometry(grid, &r0, &rf)?;
        }
        let scan = file.scan.as_ref().map(expand_scan).transpose()?;

        Ok(Self {
            name: file.name,
            units: file.units,
            mu: file.mu,
            r0,
            rf,
            tof,
            k: file.k,
            long_way: recipe_long_way,
            models,
            config,
            warm_start: file.warm_start,
            warnings,
            sweep,
            scan,
        })
    }

    /// The scenario's nominal boundary-value problem, perturbations
    /// attached.
    pub fn bvp(&self) -> Result<BoundaryValueProblem, CliError> {
        self.bvp_with(self.rf, self.tof, self.long_way)
    }

    /// A grid variant of the problem: same primary, same perturbations,
    /// different terminal vector / time of flight.
    pub fn bvp_with(
        &self,
        rf: Vector3<f64>,
        tof: f64,
        long_way: bool,
    ) -> Result<BoundaryValueProblem, CliError> {
        let mut bvp = BoundaryValueProblem::new(self.mu, self.r0, rf, tof)
            .map_err(CliError::from_core)?
            .with_revolutions(self.k)
            .with_long_way(long_way);
        bvp.perturbations = self.models.clone();
        Ok(bvp)
    }

    /// Whether the unperturbed single-revolution oracle applies to this
    /// scenario.
    pub fn oracle_applies(&self) -> bool {
        self.models.is_empty() && self.k == 0
    }
}

/// Turns a conic-arc recipe into boundary vectors and the Kepler time of
/// flight across the arc. The arc starts at periapsis; the orbit's
/// periapsis sits at the ascending node (no argument-of-periapsis field in
/// the recipe).
fn expand_elements(
    mu: f64,
    e: &ElementsBlock,
) -> Result<(Vector3<f64>, Vector3<f64>, f64), CliError> {
    if !(e.eccentricity >= 0.0 && e.eccentricity < 1.0) {
        return Err(CliError::Parse(
            "recipe eccentricity must lie in [0, 1): the arc needs a closed orbit".into(),
        ));
    }
    if !(e.arc_deg > 0.0 && e.arc_deg < 360.0) {
        return Err(CliError::Parse("arc_deg must lie in (0, 360)".into()));
    }
    let rp = EARTH_RADIUS_KM + e.periapsis_altitude;
    if !(rp > 0.0) {
        return Err(CliError::Parse("periapsis radius must be positive".into()));
    }
    let a = rp / (1.0 - e.eccentricity);
    let p = rp * (1.0 + e.eccentricity);

    let nu1 = e.arc_deg.to_radians();
    let rot = orbit_rotation(e.raan_deg.to_radians(), e.inclination_deg.to_radians());
    let in_plane = |nu: f64| {
        let radius = p / (1.0 + e.eccentricity * nu.cos());
        rot * Vector3::new(radius * nu.cos(), radius * nu.sin(), 0.0)
    };
    let tof = kepler_arc_time(mu, a, e.eccentricity, nu1);
    Ok((in_plane(0.0), in_plane(nu1), tof))
}

/// Rotation taking perifocal coordinates to the inertial frame:
/// Rz(Ω)·Rx(i), with the periapsis on the node line.
fn orbit_rotation(raan: f64, inc: f64) -> Matrix3<f64> {
    let (so, co) = raan.sin_cos();
    let (si, ci) = inc.sin_cos();
    let rz = Matrix3::new(co, -so, 0.0, so, co, 0.0, 0.0, 0.0, 1.0);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, ci, -si, 0.0, si, ci);
    rz * rx
}

/// Time from periapsis to true anomaly `nu ∈ (0, 2π)` on an ellipse.
fn kepler_arc_time(mu: f64, a: f64, ecc: f64, nu: f64) -> f64 {
    let e_anom = 2.0 * ((1.0 - ecc).sqrt() * (nu / 2.0).sin())
        .atan2((1.0 + ecc).sqrt() * (nu / 2.0).cos());
    let e_anom = if e_anom < 0.0 { e_anom + 2.0 * PI } else { e_anom };
    let mean = e_anom - ecc * e_anom.sin();
    mean * (a.powi(3) / mu).sqrt()
}

fn build_ephemeris(
    spec: &EphemerisSpec,
    units: Units,
    mu_primary: f64,
    tof: f64,
    base_dir: &Path,
) -> Result<Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync>, CliError> {
    match spec {
        EphemerisSpec::Moon => {
            if units != Units::Km {
                return Err(CliError::Parse(
                    "the built-in moon ephemeris assumes km units".into(),
                ));
            }
            Ok(CircularEphemeris::moon(mu_primary).into_fn())
        }
        EphemerisSpec::Circular { radius, phase } => {
            let eph = CircularEphemeris::new(*radius, mu_primary, *phase)
                .map_err(|e| CliError::Parse(format!("circular ephemeris: {e}")))?;
            Ok(eph.into_fn())
        }
        EphemerisSpec::File(file) => {
            if units != Units::Km {
                return Err(CliError::Parse(
                    "ephemeris tables are km-based; the scenario must use km units".into(),
                ));
            }
            let path = base_dir.join(file);
            let table = load_ephemeris_table(&path)?;
            if !table.covers(0.0, tof) {
                return Err(CliError::Parse(format!(
                    "ephemeris {} does not cover the full time of flight [0, {tof}]",
                    path.display()
                )));
            }
            Ok(table.into_fn())
        }
    }
}

/// Parses a `t_s,x_km,y_km,z_km` table. A non-numeric first line is
/// treated as a header.
fn load_ephemeris_table(path: &Path) -> Result<TabulatedEphemeris, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut positions = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(CliError::Parse(format!(
                "{}:{}: expected 4 comma-separated fields, got {}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let numbers: Option<Vec<f64>> =
            fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        match numbers {
            Some(v) => {
                times.push(v[0]);
                positions.push(Vector3::new(v[1], v[2], v[3]));
            }
            // Only the first line may be non-numeric (a header).
            None if idx == 0 => continue,
            None => {
                return Err(CliError::Parse(format!(
                    "{}:{}: non-numeric field",
                    path.display(),
                    idx + 1
                )));
            }
        }
    }
    TabulatedEphemeris::new(times, positions)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn expand_sweep(block: &SweepBlock) -> Result<SweepGrid, CliError> {
    let values = expand_range(block.start, block.stop, block.step, "sweep")?;
    let alphas = if block.axis == SweepAxis::DegreeAlpha {
        match (block.alpha_start, block.alpha_stop, block.alpha_step) {
            (Some(a0), Some(a1), Some(da)) => expand_range(a0, a1, da, "alpha")?,
            _ => {
                return Err(CliError::Parse(
                    "the degree_alpha axis needs alpha_start/alpha_stop/alpha_step".into(),
                ));
            }
        }
    } else {
        if block.alpha_start.is_some() || block.alpha_stop.is_some() || block.alpha_step.is_some()
        {
            return Err(CliError::Parse(
                "alpha_start/alpha_stop/alpha_step only apply to the degree_alpha axis".into(),
            ));
        }
        Vec::new()
    };
    if block.axis == SweepAxis::DegreeAlpha {
        for &d in &values {
            if d.fract() != 0.0 || d < 2.0 {
                return Err(CliError::Parse(
                    "degree_alpha degrees must be integers of at least 2".into(),
                ));
            }
        }
    }
    Ok(SweepGrid { axis: block.axis, values, alphas })
}

/// Inclusive `start..=stop` by `step`, tolerating the usual floating-point
/// shortfall at the far end.
fn expand_range(start: f64, stop: f64, step: f64, what: &str) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Parse(format!("{what} step must be positive")));
    }
    if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Parse(format!(
            "{what} range must be finite with stop >= start"
        )));
    }
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn validate_sweep_geometry(
    grid: &SweepGrid,
    r0: &Vector3<f64>,
    rf: &Vector3<f64>,
) -> Result<(), CliError> {
    match grid.axis {
        SweepAxis::Angle | SweepAxis::Chord => {
            // Both axes reshape rf inside the nominal transfer plane, so the
            // nominal vectors must span one.
            if r0.cross(rf).norm() <= 1e-10 * r0.norm() * rf.norm() {
                return Err(CliError::Parse(
                    "angle/chord sweeps need non-collinear nominal boundary vectors".into(),
                ));
            }
        }
        SweepAxis::Tof => {
            for &v in &grid.values {
                if !(v > 0.0) {
                    return Err(CliError::Parse("tof sweep values must be positive".into()));
                }
            }
        }
        SweepAxis::DegreeAlpha => {}
    }
    if grid.axis == SweepAxis::Chord {
        let r0n = r0.norm();
        let sweep = (r0.dot(rf) / (r0n * rf.norm())).clamp(-1.0, 1.0).acos();
        for &c in &grid.values {
            // The chord must reach the ray at the nominal transfer angle.
            if c <= r0n * sweep.sin() {
                return Err(CliError::Parse(format!(
                    "chord {c} is shorter than the minimum {:.3} for this geometry",
                    r0n * sweep.sin()
                )));
            }
        }
    }
    Ok(())
}

fn expand_scan(block: &ScanBlock) -> Result<ScanGrid, CliError> {
    let step = block.degree_step.unwrap_or(1);
    if step == 0 {
        return Err(CliError::Parse("degree_step must be positive".into()));
    }
    if block.degree_start < 2 || block.degree_stop < block.degree_start {
        return Err(CliError::Parse(
            "scan degrees must be >= 2 with degree_stop >= degree_start".into(),
        ));
    }
    let degrees: Vec<usize> =
        (block.degree_start..=block.degree_stop).step_by(step).collect();
    let alphas = expand_range(block.alpha_start, block.alpha_stop, block.alpha_step, "alpha")?;
    for &a in &alphas {
        if !(a > 0.0) {
            return Err(CliError::Parse("scan alphas must be positive".into()));
        }
    }
    if block.ratios.is_empty() {
        return Err(CliError::Parse("scan needs at least one radius ratio".into()));
    }
    for &r in &block.ratios {
        if !(r > 0.0) || !r.is_finite() {
            return Err(CliError::Parse("radius ratios must be positive".into()));
        }
    }
    Ok(ScanGrid { degrees, alphas, ratios: block.ratios.clone() })
}

/// Builds a scenario from a JSON string; the library tests use this to
/// avoid fixture files for malformed inputs.
pub fn scenario_from_str(text: &str, base_dir: &Path) -> Result<Scenario, CliError> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Scenario::from_file(file, base_dir)
}
