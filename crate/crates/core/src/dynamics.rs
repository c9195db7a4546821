//! Time evolution in the frame rotating with the trap.
//!
//! State vector `R = (r, p)` obeys `dR/dt = M R + Re(G_par + G_perp e^{i Omega t})`.
//! Two independent propagators are provided: fixed-step RK4 on the real
//! equations, and the closed-form solution of the mode-expansion equations.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, fabs, sin, sqrt};
use num_complex::Complex64 as C64;

use crate::linalg::{self, CVec, Vec3};
use crate::spectrum::{self, PrincipalFrame};
use crate::{Error, GravitySpec, PhaseState, Result, RotationSpec, Tolerances, TrapConfig};

pub type Mat6 = [[f64; 6]; 6];

/// Below this value of `|z| t` the drive integral uses its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Minimum number of envelope peaks for a growth-rate fit.
pub const MIN_PEAKS: usize = 20;

/// Gravity seen in the rotating frame at time `t`.
pub fn gravity_rotating_frame(gravity: &GravitySpec, rotation: &RotationSpec, t: f64) -> Vec3 {
    let phase = rotation.omega() * t;
    let (s, c) = (sin(phase), cos(phase));
    let g_perp = gravity.perpendicular();
    let turned = linalg::cross(rotation.axis(), g_perp);
    let mut out = *gravity.parallel();
    for i in 0..3 {
        out[i] += g_perp[i] * c - turned[i] * s;
    }
    out
}

/// Linear part and drive amplitudes of the first-order equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix {
    /// Blocks `[[-W, I/m], [-m V, -W]]` with `W x = Omega x`.
    pub m_mat: Mat6,
    /// Static drive `m (0, g_par)`.
    pub g_par: [f64; 6],
    /// Rotating drive `m (0, g_perp + i n x g_perp)`, multiplied by `e^{i Omega t}`.
    pub g_perp: CVec<6>,
    /// Angular frequency of the rotating drive.
    pub drive_frequency: f64,
}

impl SystemMatrix {
    pub fn trace(&self) -> f64 {
        (0..6).map(|i| self.m_mat[i][i]).sum()
    }

    pub fn complex(&self) -> linalg::CMat<6> {
        linalg::to_complex(&self.m_mat)
    }
}

pub fn system_matrix(config: &TrapConfig) -> SystemMatrix {
    let w = config.rotation.omega_matrix();
    let v = config.potential.matrix();
    let m = config.mass;
    let mut m_mat = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            m_mat[i][j] = -w[i][j];
            m_mat[i + 3][j + 3] = -w[i][j];
            m_mat[i + 3][j] = -m * v[i][j];
        }
        m_mat[i][i + 3] = 1.0 / m;
    }
    let g = config.gravity.parallel();
    let h = config.drive();
    let zero = C64::new(0.0, 0.0);
    SystemMatrix {
        m_mat,
        g_par: [0.0, 0.0, 0.0, m * g[0], m * g[1], m * g[2]],
        g_perp: [zero, zero, zero, h[0] * m, h[1] * m, h[2] * m],
        drive_frequency: config.rotation.omega(),
    }
}

/// Right-hand side of the real equations of motion.
pub fn derivative(config: &TrapConfig, state: &[f64; 6], t: f64) -> [f64; 6] {
    let m = config.mass;
    let r = [state[0], state[1], state[2]];
    let p = [state[3], state[4], state[5]];
    let w = config.rotation.omega_matrix();
    let wr = linalg::mat_vec(w, &r);
    let wp = linalg::mat_vec(w, &p);
    let vr = linalg::mat_vec(config.potential.matrix(), &r);
    let g = gravity_rotating_frame(&config.gravity, &config.rotation, t);
    [
        p[0] / m - wr[0],
        p[1] / m - wr[1],
        p[2] / m - wr[2],
        -m * vr[0] - wp[0] + m * g[0],
        -m * vr[1] - wp[1] + m * g[1],
        -m * vr[2] - wp[2] + m * g[2],
    ]
}

/// `H = p^2/2m + r.(Omega x p) + (m/2) r.V.r - m r.g(t)`
pub fn hamiltonian_value(config: &TrapConfig, state: &PhaseState, t: f64) -> f64 {
    let m = config.mass;
    let (r, p) = (&state.r, &state.p);
    let wp = linalg::mat_vec(config.rotation.omega_matrix(), p);
    let g = gravity_rotating_frame(&config.gravity, &config.rotation, t);
    linalg::dot(p, p) / (2.0 * m) + linalg::dot(r, &wp) + 0.5 * m * linalg::quad(r, config.potential.matrix(), r)
        - m * linalg::dot(r, &g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    ModeExpansion,
    Analytic,
}

impl Integrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::ModeExpansion => "mode_expansion",
            Integrator::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub config: TrapConfig,
    pub integrator: Integrator,
    pub dt: f64,
    /// Integration stopped early on a non-finite state.
    pub overflow: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.states.iter().map(|s| linalg::norm(&s.r)).collect()
    }

    /// Largest position difference against another trajectory on the same grid.
    pub fn max_position_difference(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| linalg::norm(&linalg::sub(&a.r, &b.r)))
            .fold(0.0, f64::max)
    }
}

/// Uniform grid `0, dt, 2 dt, ...` reaching `t_end` (to within rounding).
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let steps = libm::round(t_end / dt) as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

/// One two-hundredth of the shortest mode period, or of the shortest trap
/// period when some mode is unstable.
pub fn default_dt(config: &TrapConfig, tol: &Tolerances) -> f64 {
    let s = spectrum::mode_spectrum(&config.potential, config.rotation.axis(), config.rotation.omega(), tol);
    let w_max = s
        .max_real_frequency()
        .filter(|w| *w > 0.0)
        .unwrap_or_else(|| sqrt(PrincipalFrame::of(&config.potential).values[2]));
    2.0 * PI / w_max / 200.0
}

fn check_grid(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter { name: "dt", value: dt });
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "duration",
            value: t_end,
        });
    }
    Ok(())
}

/// Classical fixed-step fourth-order Runge-Kutta.
pub fn integrate_rk4(config: &TrapConfig, initial: &PhaseState, t_end: f64, dt: f64) -> Result<Trajectory> {
    check_grid(t_end, dt)?;
    let times = uniform_grid(t_end, dt);
    let mut states = Vec::with_capacity(times.len());
    let mut y = initial.to_array();
    states.push(*initial);
    let mut overflow = false;
    for k in 1..times.len() {
        let t = times[k - 1];
        let h = times[k] - t;
        let k1 = derivative(config, &y, t);
        let k2 = derivative(config, &axpy(&y, 0.5 * h, &k1), t + 0.5 * h);
        let k3 = derivative(config, &axpy(&y, 0.5 * h, &k2), t + 0.5 * h);
        let k4 = derivative(config, &axpy(&y, h, &k3), t + h);
        for i in 0..6 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let s = PhaseState::from_array(&y);
        if !s.is_finite() {
            overflow = true;
            break;
        }
        states.push(s);
    }
    let mut times = times;
    times.truncate(states.len());
    Ok(Trajectory {
        times,
        states,
        config: *config,
        integrator: Integrator::Rk4,
        dt,
        overflow,
    })
}

fn axpy(y: &[f64; 6], a: f64, k: &[f64; 6]) -> [f64; 6] {
    let mut out = *y;
    for i in 0..6 {
        out[i] += a * k[i];
    }
    out
}

/// `(e^{z t} - 1) / z`, continuous through `z = 0` where it equals `t`.
pub fn drive_integral(z: C64, t: f64) -> C64 {
    let zt = z * t;
    if zt.norm() < SERIES_THRESHOLD {
        C64::from(t) * (C64::from(1.0) + zt / 2.0 + zt * zt / 6.0)
    } else {
        ((zt).exp() - 1.0) / z
    }
}

/// Solution of the equations of motion expanded in the eigenmodes of the system matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    /// Eigenvalues `lambda_k = i omega_k` of the system matrix.
    pub eigenvalues: CVec<6>,
    /// Right eigenvectors `X_k`.
    pub right: [CVec<6>; 6],
    /// Dual covectors `Y_k` with `Y_i^dagger X_j = delta_ij`.
    pub left: [CVec<6>; 6],
    pub gamma_par: CVec<6>,
    pub gamma_perp: CVec<6>,
    pub alpha0: CVec<6>,
    pub drive_frequency: f64,
}

impl ModeExpansion {
    pub fn new(config: &TrapConfig, initial: &PhaseState) -> Result<Self> {
        let sys = system_matrix(config);
        let eig = linalg::eig_complex(&sys.complex())?;
        let g_par = linalg::to_complex_vec(&sys.g_par);
        let x0 = linalg::to_complex_vec(&initial.to_array());
        Ok(Self {
            gamma_par: eig.coefficients(&g_par),
            gamma_perp: eig.coefficients(&sys.g_perp),
            alpha0: eig.coefficients(&x0),
            eigenvalues: eig.values,
            right: eig.right,
            left: eig.left,
            drive_frequency: sys.drive_frequency,
        })
    }

    /// Mode frequencies `omega_k = -i lambda_k`.
    pub fn frequencies(&self) -> CVec<6> {
        let mut out = self.eigenvalues;
        for w in out.iter_mut() {
            *w *= C64::new(0.0, -1.0);
        }
        out
    }

    /// Mode amplitudes `alpha_k(t)`, including the `e^{lambda_k t}` factor.
    pub fn coefficients_at(&self, t: f64) -> CVec<6> {
        let iw = C64::new(0.0, self.drive_frequency);
        let mut out = [C64::new(0.0, 0.0); 6];
        for k in 0..6 {
            let lam = self.eigenvalues[k];
            let slow = self.alpha0[k]
                + self.gamma_par[k] * drive_integral(-lam, t)
                + self.gamma_perp[k] * drive_integral(iw - lam, t);
            out[k] = slow * (lam * t).exp();
        }
        out
    }

    /// Complex state `W(t)`; the physical state is its real part.
    pub fn complex_state_at(&self, t: f64) -> CVec<6> {
        let a = self.coefficients_at(t);
        let mut w = [C64::new(0.0, 0.0); 6];
        for k in 0..6 {
            for i in 0..6 {
                w[i] += a[k] * self.right[k][i];
            }
        }
        w
    }

    pub fn state_at(&self, t: f64) -> PhaseState {
        PhaseState::from_array(&linalg::re(&self.complex_state_at(t)))
    }

    /// Largest relative error in reconstructing the drives and an arbitrary
    /// vector from their mode coefficients.
    pub fn completeness_error(&self, sys: &SystemMatrix) -> f64 {
        let combine = |c: &CVec<6>| {
            let mut out = [C64::new(0.0, 0.0); 6];
            for k in 0..6 {
                for i in 0..6 {
                    out[i] += c[k] * self.right[k][i];
                }
            }
            out
        };
        let coeffs = |v: &CVec<6>| {
            let mut out = [C64::new(0.0, 0.0); 6];
            for k in 0..6 {
                out[k] = linalg::cdot(&self.left[k], v);
            }
            out
        };
        let probe: CVec<6> = core::array::from_fn(|i| C64::new(1.0 + i as f64, 0.5 - i as f64));
        let g_par = linalg::to_complex_vec(&sys.g_par);
        [probe, g_par, sys.g_perp]
            .iter()
            .filter(|v| linalg::cnorm(v) > 0.0)
            .map(|v| linalg::cnorm(&linalg::csub(&combine(&coeffs(v)), v)) / linalg::cnorm(v))
            .fold(0.0, f64::max)
    }
}

/// Closed-form propagation through the mode expansion, sampled at `times`.
pub fn propagate_modes(config: &TrapConfig, initial: &PhaseState, times: &[f64]) -> Result<Trajectory> {
    let modes = ModeExpansion::new(config, initial)?;
    let mut states = Vec::with_capacity(times.len());
    let mut overflow = false;
    for &t in times {
        let s = modes.state_at(t);
        if !s.is_finite() {
            overflow = true;
            break;
        }
        states.push(s);
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    Ok(Trajectory {
        times: times[..states.len()].to_vec(),
        states,
        config: *config,
        integrator: Integrator::ModeExpansion,
        dt,
        overflow,
    })
}

/// Straight-line fit through the envelope peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    /// Growth rate of the envelope (m/s for positions).
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the peaks from the line.
    pub rms_residual: f64,
    /// Pearson correlation between peak time and peak height.
    pub correlation: f64,
    pub peaks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions {
    /// Peaks closer than this are merged, keeping the higher one.
    /// Defaults to half the drive period.
    pub min_separation: Option<f64>,
    /// Ignore samples before this time.
    pub start_time: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            min_separation: None,
            start_time: 0.0,
        }
    }
}

/// Local maxima of `values`, thinned so that kept peaks are at least `min_separation` apart.
pub fn envelope_peaks(times: &[f64], values: &[f64], min_separation: f64, start_time: f64) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if times[i] < start_time {
            continue;
        }
        let (prev, cur, next) = (values[i - 1], values[i], values[i + 1]);
        if !(cur > prev && cur >= next) {
            continue;
        }
        match peaks.last_mut() {
            Some(last) if times[i] - last.0 < min_separation => {
                if cur > last.1 {
                    *last = (times[i], cur);
                }
            }
            _ => peaks.push((times[i], cur)),
        }
    }
    peaks
}

/// Least-squares line through the peaks of a sampled signal.
pub fn envelope_fit(times: &[f64], values: &[f64], min_separation: f64, start_time: f64) -> Result<GrowthFit> {
    let peaks = envelope_peaks(times, values, min_separation, start_time);
    if peaks.len() < MIN_PEAKS {
        return Err(Error::InsufficientData {
            found: peaks.len(),
            required: MIN_PEAKS,
        });
    }
    let n = peaks.len() as f64;
    let (mt, my) = peaks.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in &peaks {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let rss: f64 = peaks
        .iter()
        .map(|(t, y)| {
            let e = y - (intercept + slope * t);
            e * e
        })
        .sum();
    let correlation = if syy > 0.0 { sty / sqrt(stt * syy) } else { 0.0 };
    Ok(GrowthFit {
        slope,
        intercept,
        rms_residual: sqrt(rss / n),
        correlation,
        peaks: peaks.len(),
    })
}

/// Linear growth rate of the envelope of `|r(t)|`.
pub fn growth_rate(trajectory: &Trajectory, options: &GrowthOptions) -> Result<GrowthFit> {
    let w = trajectory.config.rotation.omega();
    let separation = options.min_separation.unwrap_or(if w > 0.0 { PI / w } else { 0.0 });
    envelope_fit(&trajectory.times, &trajectory.radii(), separation, options.start_time)
}

/// Largest exponential growth rate among the modes, `max |Im omega_k|`.
pub fn max_growth_exponent(config: &TrapConfig, tol: &Tolerances) -> f64 {
    let s = spectrum::mode_spectrum(&config.potential, config.rotation.axis(), config.rotation.omega(), tol);
    s.omega_values.iter().map(|w| fabs(w.im)).fold(0.0, f64::max)
}
