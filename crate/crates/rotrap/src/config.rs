//! Run configuration: JSON documents, figure presets, and their resolution
//! into validated physical parameters.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use rotrap_core::linalg::{self, Vec3};
use rotrap_core::{PhaseState, RotationSpec, TrapConfig, TrapPotential};

use crate::error::CliError;

/// Raw configuration as read from JSON or built from command-line flags.
/// Every field is optional so that layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Diagonal of the potential matrix (s^-2, or dimensionless).
    pub potential_diagonal: Option<Vec3>,
    /// Trap frequencies along the principal axes, in Hz.
    pub trap_frequencies_hz: Option<Vec3>,
    pub dimensionless: Option<bool>,
    /// Rotation axis; normalized on load.
    pub axis: Option<Vec3>,
    /// Rotation rate in rad/s (or dimensionless).
    pub omega: Option<f64>,
    pub omega_hz: Option<f64>,
    pub omega_range: Option<[f64; 2]>,
    pub omega_range_hz: Option<[f64; 2]>,
    pub scan_steps: Option<usize>,
    pub mass: Option<f64>,
    /// Magnitude of the gravitational acceleration.
    pub gravity: Option<f64>,
    /// Direction of gravity in the trap frame at t = 0.
    pub gravity_direction: Option<Vec3>,
    pub initial_position: Option<Vec3>,
    /// Initial velocity in the rotating frame.
    pub initial_velocity: Option<Vec3>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    /// Replace the rotation rate by the nearest resonance.
    pub snap_to_resonance: Option<bool>,
    /// Also write the mode-expansion trajectory when simulating.
    pub modes_output: Option<bool>,
    /// Write every n-th sample of trajectories.
    pub output_stride: Option<usize>,
    /// Ignore envelope peaks before this time in growth fits.
    pub growth_start: Option<f64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields set in `top` replace those in `self`.
    pub fn merged(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top;
            potential_diagonal, trap_frequencies_hz, dimensionless, axis, omega, omega_hz,
            omega_range, omega_range_hz, scan_steps, mass, gravity, gravity_direction,
            initial_position, initial_velocity, dt, duration, snap_to_resonance, modes_output,
            output_stride, growth_start,
        )
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let text = preset_source(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset `{name}` (available: {})",
                PRESET_NAMES.join(", ")
            ))
        })?;
        Self::from_json(text, &format!("preset {name}"))
    }
}

pub const PRESET_NAMES: [&str; 12] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
];

pub fn preset_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../presets/fig1.json"),
        "fig2" => include_str!("../presets/fig2.json"),
        "fig3" => include_str!("../presets/fig3.json"),
        "fig4" => include_str!("../presets/fig4.json"),
        "fig5" => include_str!("../presets/fig5.json"),
        "fig6" => include_str!("../presets/fig6.json"),
        "fig7" => include_str!("../presets/fig7.json"),
        "fig8" => include_str!("../presets/fig8.json"),
        "fig9" => include_str!("../presets/fig9.json"),
        "fig10" => include_str!("../presets/fig10.json"),
        "fig11" => include_str!("../presets/fig11.json"),
        "fig12" => include_str!("../presets/fig12.json"),
        _ => return None,
    })
}

pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_GRAVITY_DIRECTION: Vec3 = [0.0, 0.0, 1.0];
pub const DEFAULT_SCAN_STEPS: usize = 601;

/// Validated configuration with units normalized: rates in rad/s (or
/// dimensionless), lengths in m, mass in kg.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub dimensionless: bool,
    pub potential_diagonal: Vec3,
    pub trap_frequencies_hz: Option<Vec3>,
    pub axis: Vec3,
    pub omega: Option<f64>,
    pub omega_range: Option<[f64; 2]>,
    pub scan_steps: usize,
    pub mass: f64,
    pub gravity: Vec3,
    pub initial_position: Vec3,
    pub initial_velocity: Vec3,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub snap_to_resonance: bool,
    pub modes_output: bool,
    pub output_stride: usize,
    pub growth_start: f64,
}

fn bad(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {why}"))
}

fn finite3(field: &str, v: Vec3) -> Result<Vec3, CliError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(bad(field, "components must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, format!("must be positive and finite, got {v}")))
    }
}

fn direction(field: &str, v: Vec3) -> Result<Vec3, CliError> {
    let v = finite3(field, v)?;
    let n = linalg::norm(&v);
    if n > 0.0 {
        Ok(linalg::scale(&v, 1.0 / n))
    } else {
        Err(bad(field, "must be a non-zero vector"))
    }
}

fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

impl RunConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig, CliError> {
        let dimensionless = self.dimensionless.unwrap_or(false);
        let (potential_diagonal, trap_frequencies_hz) = match (self.potential_diagonal, self.trap_frequencies_hz) {
            (Some(_), Some(_)) => {
                return Err(bad(
                    "trap_frequencies_hz",
                    "give either `potential_diagonal` or `trap_frequencies_hz`, not both",
                ))
            }
            (None, None) => {
                return Err(bad(
                    "potential_diagonal",
                    "a trap is required (`potential_diagonal` or `trap_frequencies_hz`)",
                ))
            }
            (Some(v), None) => {
                let v = finite3("potential_diagonal", v)?;
                (v, None)
            }
            (None, Some(f)) => {
                if dimensionless {
                    return Err(bad("trap_frequencies_hz", "not allowed in dimensionless mode"));
                }
                let f = finite3("trap_frequencies_hz", f)?;
                for x in f {
                    positive("trap_frequencies_hz", x)?;
                }
                (f.map(|x| hz_to_rad(x) * hz_to_rad(x)), Some(f))
            }
        };
        TrapPotential::from_diagonal(potential_diagonal).map_err(|e| bad("potential_diagonal", e))?;

        let axis = direction(
            "axis",
            self.axis.ok_or_else(|| bad("axis", "a rotation axis is required"))?,
        )?;

        if dimensionless && (self.omega_hz.is_some() || self.omega_range_hz.is_some()) {
            return Err(bad(
                "omega_hz",
                "Hz-valued fields are not allowed in dimensionless mode",
            ));
        }
        let omega = match (self.omega, self.omega_hz) {
            (Some(_), Some(_)) => return Err(bad("omega_hz", "give either `omega` or `omega_hz`, not both")),
            (Some(w), None) => Some(w),
            (None, Some(f)) => Some(hz_to_rad(f)),
            (None, None) => None,
        };
        if let Some(w) = omega {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(bad("omega", format!("must be non-negative and finite, got {w}")));
            }
        }
        let omega_range = match (self.omega_range, self.omega_range_hz) {
            (Some(_), Some(_)) => {
                return Err(bad(
                    "omega_range_hz",
                    "give either `omega_range` or `omega_range_hz`, not both",
                ))
            }
            (Some(r), None) => Some(r),
            (None, Some(r)) => Some(r.map(hz_to_rad)),
            (None, None) => None,
        };
        if let Some([lo, hi]) = omega_range {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(bad("omega_range", format!("need 0 <= min < max, got [{lo}, {hi}]")));
            }
        }
        let scan_steps = self.scan_steps.unwrap_or(DEFAULT_SCAN_STEPS);
        if scan_steps < 2 {
            return Err(bad("scan_steps", "at least 2 grid points are required"));
        }
        let mass = positive("mass", self.mass.unwrap_or(1.0))?;
        let g_mag = self.gravity.unwrap_or(DEFAULT_GRAVITY);
        if !(g_mag >= 0.0 && g_mag.is_finite()) {
            return Err(bad("gravity", format!("must be non-negative and finite, got {g_mag}")));
        }
        let g_dir = direction(
            "gravity_direction",
            self.gravity_direction.unwrap_or(DEFAULT_GRAVITY_DIRECTION),
        )?;
        let dt = self.dt.map(|x| positive("dt", x)).transpose()?;
        let duration = self.duration.map(|x| positive("duration", x)).transpose()?;
        let output_stride = self.output_stride.unwrap_or(1);
        if output_stride == 0 {
            return Err(bad("output_stride", "must be at least 1"));
        }
        let growth_start = self.growth_start.unwrap_or(0.0);
        if !(growth_start >= 0.0 && growth_start.is_finite()) {
            return Err(bad("growth_start", "must be non-negative and finite"));
        }
        Ok(ResolvedConfig {
            dimensionless,
            potential_diagonal,
            trap_frequencies_hz,
            axis,
            omega,
            omega_range,
            scan_steps,
            mass,
            gravity: linalg::scale(&g_dir, g_mag),
            initial_position: finite3("initial_position", self.initial_position.unwrap_or([0.0; 3]))?,
            initial_velocity: finite3("initial_velocity", self.initial_velocity.unwrap_or([0.0; 3]))?,
            dt,
            duration,
            snap_to_resonance: self.snap_to_resonance.unwrap_or(false),
            modes_output: self.modes_output.unwrap_or(false),
            output_stride,
            growth_start,
        })
    }
}

impl ResolvedConfig {
    pub fn potential(&self) -> TrapPotential {
        TrapPotential::from_diagonal(self.potential_diagonal).expect("validated on resolve")
    }

    pub fn require_omega(&self) -> Result<f64, CliError> {
        self.omega
            .ok_or_else(|| bad("omega", "a rotation rate is required (`omega` or `omega_hz`)"))
    }

    pub fn trap_config(&self, omega: f64) -> Result<TrapConfig, CliError> {
        let rotation = RotationSpec::from_axis(self.axis, omega).map_err(|e| bad("axis", e))?;
        Ok(TrapConfig::new(self.potential(), rotation, self.gravity, self.mass)?)
    }

    pub fn initial_state(&self, config: &TrapConfig) -> PhaseState {
        PhaseState::from_velocity(config, self.initial_position, self.initial_velocity)
    }

    /// Rate in Hz for reporting, absent in dimensionless mode.
    pub fn hz(&self, omega: f64) -> Option<f64> {
        (!self.dimensionless).then(|| omega / (2.0 * PI))
    }
}
