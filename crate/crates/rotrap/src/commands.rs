//! The four subcommands. Each writes its files into an output directory and
//! returns the JSON report it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;

use rotrap_core::analytic;
use rotrap_core::dynamics::{self, GrowthFit, GrowthOptions, Trajectory};
use rotrap_core::linalg::{CVec3, Vec3};
use rotrap_core::resonance::{self, Placement};
use rotrap_core::spectrum;
use rotrap_core::{Tolerances, TrapConfig};

use crate::config::ResolvedConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, num, write_csv, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRecord {
    pub omega: f64,
    pub omega_hz: Option<f64>,
    pub below: &'static str,
    pub above: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub config: ResolvedConfig,
    pub table: PathBuf,
    pub regions: Vec<&'static str>,
    pub instability_windows: usize,
    pub boundaries: Vec<BoundaryRecord>,
    /// Lower exponential window from the closed-form critical rates.
    pub omega1: f64,
    pub omega2: f64,
    pub marginal_rows: usize,
}

pub fn stability(cfg: &ResolvedConfig, out: &Path) -> Result<StabilityReport, CliError> {
    let [lo, hi] = cfg
        .omega_range
        .ok_or_else(|| CliError::Config("field `omega_range`: a scan range is required".into()))?;
    let tol = Tolerances::default();
    let v = cfg.potential();
    let scan = spectrum::stability_scan(&v, &cfg.axis, lo, hi, cfg.scan_steps, &tol)?;
    ensure_dir(out)?;
    let header = [
        "omega",
        "chi1_re",
        "chi1_im",
        "chi2_re",
        "chi2_im",
        "chi3_re",
        "chi3_im",
        "classification",
    ];
    let rows = scan.rows.iter().map(|r| {
        let mut row = vec![num(r.omega)];
        for z in r.chi_roots {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.push(r.classification.as_str().to_string());
        row
    });
    let table = write_csv(&out.join("stability.csv"), &header, rows)?;
    let crit = spectrum::lower_instability_bounds(&v, &cfg.axis);
    let report = StabilityReport {
        config: cfg.clone(),
        table,
        regions: scan.regions().iter().map(|s| s.as_str()).collect(),
        instability_windows: scan.instability_windows(),
        boundaries: scan
            .boundaries
            .iter()
            .map(|b| BoundaryRecord {
                omega: b.omega,
                omega_hz: cfg.hz(b.omega),
                below: b.below.as_str(),
                above: b.above.as_str(),
            })
            .collect(),
        omega1: crit.omega1,
        omega2: crit.omega2,
        marginal_rows: scan.rows.iter().filter(|r| r.marginal).count(),
    };
    write_json(&out.join("stability.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlacementRecord {
    pub region: &'static str,
    pub on_boundary: bool,
}

impl From<Placement> for PlacementRecord {
    fn from(p: Placement) -> Self {
        Self {
            region: p.region.as_str(),
            on_boundary: p.on_boundary,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MergedRecord {
    pub omega: f64,
    pub axis: Vec3,
    pub fully_anisotropic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceFileReport {
    pub config: ResolvedConfig,
    pub d_coef: f64,
    pub e_coef: f64,
    pub f_coef: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub omega_minus_hz: Option<f64>,
    pub omega_plus_hz: Option<f64>,
    pub degenerate: bool,
    pub placement_minus: PlacementRecord,
    pub placement_plus: PlacementRecord,
    pub omega1: f64,
    pub omega2: f64,
    pub omega1_hz: Option<f64>,
    pub omega2_hz: Option<f64>,
    pub discriminant_term1: f64,
    pub discriminant_term2: f64,
    /// `omega1 - omega_minus`
    pub lower_resonance_margin: f64,
    pub merged_resonance: Option<MergedRecord>,
}

pub fn resonance(cfg: &ResolvedConfig, out: &Path) -> Result<ResonanceFileReport, CliError> {
    let tol = Tolerances::default();
    let v = cfg.potential();
    let r = resonance::resonant_omegas(&v, &cfg.axis, &tol);
    let split = resonance::discriminant_split(&v, &cfg.axis);
    let merged = resonance::degeneracy_condition(&v, &tol).map(|m| MergedRecord {
        omega: m.omega,
        axis: m.axis,
        fully_anisotropic: m.fully_anisotropic,
    });
    let report = ResonanceFileReport {
        config: cfg.clone(),
        d_coef: r.d_coef,
        e_coef: r.e_coef,
        f_coef: r.f_coef,
        omega_minus: r.omega_minus,
        omega_plus: r.omega_plus,
        omega_minus_hz: cfg.hz(r.omega_minus),
        omega_plus_hz: cfg.hz(r.omega_plus),
        degenerate: r.degenerate,
        placement_minus: r.placement_minus.into(),
        placement_plus: r.placement_plus.into(),
        omega1: r.critical.omega1,
        omega2: r.critical.omega2,
        omega1_hz: cfg.hz(r.critical.omega1),
        omega2_hz: cfg.hz(r.critical.omega2),
        discriminant_term1: split.term1,
        discriminant_term2: split.term2,
        lower_resonance_margin: r.critical.omega1 - r.omega_minus,
        merged_resonance: merged,
    };
    ensure_dir(out)?;
    write_json(&out.join("resonance.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnapRecord {
    pub requested: Option<f64>,
    pub resonance: f64,
    /// `resonance - requested`
    pub distance: Option<f64>,
}

/// Rotation rate to use, optionally moved to the nearest resonance.
fn effective_omega(cfg: &ResolvedConfig) -> Result<(f64, Option<SnapRecord>), CliError> {
    if !cfg.snap_to_resonance {
        return Ok((cfg.require_omega()?, None));
    }
    let r = resonance::resonant_omegas(&cfg.potential(), &cfg.axis, &Tolerances::default());
    let target = match cfg.omega {
        Some(w) if (r.omega_plus - w).abs() < (r.omega_minus - w).abs() => r.omega_plus,
        _ => r.omega_minus,
    };
    Ok((
        target,
        Some(SnapRecord {
            requested: cfg.omega,
            resonance: target,
            distance: cfg.omega.map(|w| target - w),
        }),
    ))
}

fn require_duration(cfg: &ResolvedConfig) -> Result<f64, CliError> {
    cfg.duration
        .ok_or_else(|| CliError::Config("field `duration`: a simulation length is required".into()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthRecord {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub correlation: f64,
    pub peaks: usize,
}

impl From<GrowthFit> for GrowthRecord {
    fn from(f: GrowthFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            rms_residual: f.rms_residual,
            correlation: f.correlation,
            peaks: f.peaks,
        }
    }
}

fn growth(tr: &Trajectory, start: f64) -> (Option<GrowthRecord>, Option<String>) {
    let opts = GrowthOptions {
        start_time: start,
        ..Default::default()
    };
    match dynamics::growth_rate(tr, &opts) {
        Ok(f) => (Some(f.into()), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn trajectory_rows(tr: &Trajectory, stride: usize) -> impl Iterator<Item = Vec<String>> + '_ {
    tr.times.iter().zip(&tr.states).step_by(stride).map(|(t, s)| {
        let mut row = vec![num(*t)];
        row.extend(s.r.iter().chain(&s.p).map(|x| num(*x)));
        row
    })
}

const TRAJECTORY_HEADER: [&str; 7] = ["t", "x", "y", "z", "px", "py", "pz"];

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSummary {
    pub max: f64,
    pub max_first_half: f64,
    pub max_second_half: f64,
}

fn radius_summary(tr: &Trajectory) -> RadiusSummary {
    let radii = tr.radii();
    let half = radii.len() / 2;
    let max = |s: &[f64]| s.iter().cloned().fold(0.0, f64::max);
    RadiusSummary {
        max: max(&radii),
        max_first_half: max(&radii[..half]),
        max_second_half: max(&radii[half..]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModesRecord {
    pub table: Option<PathBuf>,
    pub max_position_difference: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub config: ResolvedConfig,
    pub omega: f64,
    pub omega_hz: Option<f64>,
    pub snapped: Option<SnapRecord>,
    pub integrator: &'static str,
    pub dt: f64,
    pub samples: usize,
    pub overflow: bool,
    pub table: PathBuf,
    pub growth: Option<GrowthRecord>,
    pub growth_error: Option<String>,
    pub radius: RadiusSummary,
    pub modes: Option<ModesRecord>,
}

pub fn simulate_trajectory(cfg: &ResolvedConfig) -> Result<(TrapConfig, Trajectory, Option<SnapRecord>), CliError> {
    let (omega, snapped) = effective_omega(cfg)?;
    let config = cfg.trap_config(omega)?;
    let dt = cfg
        .dt
        .unwrap_or_else(|| dynamics::default_dt(&config, &Tolerances::default()));
    let tr = dynamics::integrate_rk4(&config, &cfg.initial_state(&config), require_duration(cfg)?, dt)?;
    Ok((config, tr, snapped))
}

pub fn simulate(cfg: &ResolvedConfig, out: &Path) -> Result<SimulateReport, CliError> {
    let (config, tr, snapped) = simulate_trajectory(cfg)?;
    ensure_dir(out)?;
    let table = write_csv(
        &out.join("trajectory.csv"),
        &TRAJECTORY_HEADER,
        trajectory_rows(&tr, cfg.output_stride),
    )?;
    let modes = if cfg.modes_output {
        Some(
            match dynamics::propagate_modes(&config, &cfg.initial_state(&config), &tr.times) {
                Ok(md) => ModesRecord {
                    table: Some(write_csv(
                        &out.join("modes.csv"),
                        &TRAJECTORY_HEADER,
                        trajectory_rows(&md, cfg.output_stride),
                    )?),
                    max_position_difference: Some(tr.max_position_difference(&md)),
                    error: None,
                },
                Err(e) => ModesRecord {
                    table: None,
                    max_position_difference: None,
                    error: Some(e.to_string()),
                },
            },
        )
    } else {
        None
    };
    let (growth, growth_error) = growth(&tr, cfg.growth_start);
    let omega = config.rotation.omega();
    let report = SimulateReport {
        config: cfg.clone(),
        omega,
        omega_hz: cfg.hz(omega),
        snapped,
        integrator: tr.integrator.as_str(),
        dt: tr.dt,
        samples: tr.len(),
        overflow: tr.overflow,
        table,
        growth,
        growth_error,
        radius: radius_summary(&tr),
        modes,
    };
    write_json(&out.join("simulate.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRecord {
    pub res_a: f64,
    pub res_b: f64,
    pub res_c: f64,
    pub res_b_alternative: f64,
}

fn complex_pairs(v: &CVec3) -> [[f64; 2]; 3] {
    v.map(|z| [z.re, z.im])
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticReport {
    pub config: ResolvedConfig,
    pub omega: f64,
    pub omega_hz: Option<f64>,
    pub snapped: Option<SnapRecord>,
    pub residuals: ResidualRecord,
    /// Components as `[re, im]`.
    pub a_vec: [[f64; 2]; 3],
    pub b_vec: [[f64; 2]; 3],
    pub c_vec: Vec3,
    /// Envelope growth rate of `|r(t)|`.
    pub growth_amplitude: f64,
    pub lambda_zero: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub closed_form_lambdas: [f64; 2],
    pub used_fallback: bool,
    pub dt: f64,
    pub samples: usize,
    pub table: PathBuf,
    pub growth: Option<GrowthRecord>,
    pub growth_error: Option<String>,
}

pub fn analytic(cfg: &ResolvedConfig, out: &Path) -> Result<AnalyticReport, CliError> {
    let (omega, snapped) = effective_omega(cfg)?;
    let config = cfg.trap_config(omega)?;
    let sol = analytic::resonant_vectors(&config).map_err(|e| match e {
        rotrap_core::Error::NotResonant { residual } => CliError::Numerical(format!(
            "rotation rate {omega} is not resonant (relative null eigenvalue {residual:e}); \
             set `snap_to_resonance` to move to the nearest resonance"
        )),
        other => other.into(),
    })?;
    let dt = cfg
        .dt
        .unwrap_or_else(|| dynamics::default_dt(&config, &Tolerances::default()));
    let times = dynamics::uniform_grid(require_duration(cfg)?, dt);
    let tr = analytic::resonant_trajectory(&sol, &config, &times);
    ensure_dir(out)?;
    let table = write_csv(
        &out.join("analytic.csv"),
        &TRAJECTORY_HEADER,
        trajectory_rows(&tr, cfg.output_stride),
    )?;
    let (growth, growth_error) = growth(&tr, cfg.growth_start);
    let sd = &sol.spectral;
    let report = AnalyticReport {
        config: cfg.clone(),
        omega,
        omega_hz: cfg.hz(omega),
        snapped,
        residuals: ResidualRecord {
            res_a: sol.residuals.res_a,
            res_b: sol.residuals.res_b,
            res_c: sol.residuals.res_c,
            res_b_alternative: sol.residuals.res_b_alternative,
        },
        a_vec: complex_pairs(&sol.a_vec),
        b_vec: complex_pairs(&sol.b_vec),
        c_vec: sol.c_vec,
        growth_amplitude: analytic::growth_amplitude(&sol),
        lambda_zero: sd.lambda_zero,
        lambda_plus: sd.lambda_plus,
        lambda_minus: sd.lambda_minus,
        closed_form_lambdas: sd.closed_form_lambdas,
        used_fallback: sd.used_fallback,
        dt,
        samples: tr.len(),
        table,
        growth,
        growth_error,
    };
    write_json(&out.join("analytic.json"), &report)?;
    Ok(report)
}
