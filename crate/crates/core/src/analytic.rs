//! Closed-form resonant trajectory.
//!
//! At a resonant rotation rate the position obeys
//! `r(t) = Re((a t + b) e^{i Omega t} + c)`, where
//!
//! * `N(Omega) a = 0`,
//! * `N(Omega) b = 2 (i Omega + W) a - h`,
//! * `N(0) c = -g_par`,
//!
//! with `N(w) = w^2 I - 2 i w W - W^2 - V`, `W x = Omega x` and
//! `h = g_perp + i n x g_perp` the rotating gravity amplitude. The vectors
//! are built from the spectral projectors of the Hermitian matrix `N(Omega)`.

use alloc::vec::Vec;

use libm::{fabs, sqrt};
use num_complex::Complex64 as C64;

use crate::dynamics::{Integrator, Trajectory};
use crate::linalg::{self, CMat3, CVec3, Vec3};
use crate::spectrum::PrincipalFrame;
use crate::{Error, PhaseState, Result, RotationSpec, TrapConfig, TrapPotential};

/// Largest normalized residual accepted from [`resonant_vectors`].
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// Smallest eigenvalue of `N(Omega)`, relative to its norm, still treated as zero.
pub const RESONANCE_LIMIT: f64 = 1e-8;

/// Relative size below which a projected vector is treated as vanishing.
pub const PROJECTION_FLOOR: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// `N(w) = w^2 I - 2 i w W - W^2 - V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NMatrix {
    pub n_mat: CMat3,
    pub omega_eval: f64,
}

impl NMatrix {
    pub fn apply(&self, v: &CVec3) -> CVec3 {
        linalg::cmat_vec(&self.n_mat, v)
    }

    pub fn norm(&self) -> f64 {
        linalg::cfrobenius(&self.n_mat)
    }

    pub fn det(&self) -> C64 {
        let m = &self.n_mat;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `max |N - N^dagger|`
    pub fn hermitian_defect(&self) -> f64 {
        let a = linalg::cadjoint(&self.n_mat);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.n_mat[i][j] - a[i][j]).norm());
            }
        }
        worst
    }
}

pub fn n_matrix(potential: &TrapPotential, rotation: &RotationSpec, omega_eval: f64) -> NMatrix {
    let w = rotation.omega_matrix();
    let w2 = linalg::mat_mul(w, w);
    let v = potential.matrix();
    let mut n_mat = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let diag = if i == j { omega_eval * omega_eval } else { 0.0 };
            n_mat[i][j] = C64::new(diag - w2[i][j] - v[i][j], -2.0 * omega_eval * w[i][j]);
        }
    }
    NMatrix { n_mat, omega_eval }
}

/// Spectral decomposition of `N(Omega)` at a resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    pub n: NMatrix,
    /// Eigenvalue closest to zero, as found numerically.
    pub lambda_zero: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub p0: CMat3,
    pub p_plus: CMat3,
    pub p_minus: CMat3,
    /// Unit vectors `P h / |P h|`.
    pub e0: CVec3,
    pub e_plus: CVec3,
    pub e_minus: CVec3,
    /// The drive lay too close to an eigenspace and a perturbed generic vector was projected instead.
    pub used_fallback: bool,
    /// `lambda_plus, lambda_minus` from the closed form in the trap invariants; a cross-check only.
    pub closed_form_lambdas: [f64; 2],
}

impl SpectralData {
    /// `|P0 + P+ + P- - I|`
    pub fn completeness_error(&self) -> f64 {
        let mut sum = linalg::cmat_axpy(&self.p0, C64::from(1.0), &self.p_plus);
        sum = linalg::cmat_axpy(&sum, C64::from(1.0), &self.p_minus);
        sum = linalg::cmat_axpy(&sum, C64::from(-1.0), &linalg::cidentity());
        linalg::cfrobenius(&sum)
    }

    /// Largest deviation from `P_i P_j = delta_ij P_i`.
    pub fn projector_algebra_error(&self) -> f64 {
        let ps = [self.p0, self.p_plus, self.p_minus];
        let mut worst = 0.0_f64;
        for (i, a) in ps.iter().enumerate() {
            for (j, b) in ps.iter().enumerate() {
                let prod = linalg::cmat_mul(a, b);
                let target = if i == j { *a } else { [[ZERO; 3]; 3] };
                let diff = linalg::cmat_axpy(&prod, C64::from(-1.0), &target);
                worst = worst.max(linalg::cfrobenius(&diff));
            }
        }
        worst
    }

    pub fn closed_form_discrepancy(&self) -> f64 {
        fabs(self.closed_form_lambdas[0] - self.lambda_plus).max(fabs(self.closed_form_lambdas[1] - self.lambda_minus))
    }
}

/// `lambda_pm` of `N(Omega)` on resonance, in terms of principal values and axis components.
pub fn closed_form_lambdas(potential: &TrapPotential, n: &Vec3, omega: f64) -> [f64; 2] {
    let frame = PrincipalFrame::of(potential);
    let v = frame.values;
    let c = frame.components(n);
    let w2 = omega * omega;
    let sum: f64 = v.iter().sum();
    let weighted: f64 = (0..3).map(|i| v[i] * (1.0 + 2.0 * c[i] * c[i])).sum();
    let squares: f64 = v.iter().map(|x| x * x).sum::<f64>() - 2.0 * (v[0] * v[1] + v[1] * v[2] + v[0] * v[2]);
    let mid = 0.5 * (5.0 * w2 - sum);
    let half = 0.5 * sqrt((9.0 * w2 * w2 + 2.0 * w2 * weighted + squares).max(0.0));
    [mid + half, mid - half]
}

fn generic_direction() -> CVec3 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, -1.0)]
}

/// Projectors and eigenvectors of `N(Omega)`, with the drive `h` as the generic vector.
pub fn spectral_data(potential: &TrapPotential, rotation: &RotationSpec, drive: &CVec3) -> Result<SpectralData> {
    let omega = rotation.omega();
    let n = n_matrix(potential, rotation, omega);
    let scale = n.norm();
    let eig = linalg::eig_hermitian(&n.n_mat)?;
    let zero_idx = (0..3)
        .min_by(|&i, &j| fabs(eig.values[i]).total_cmp(&fabs(eig.values[j])))
        .unwrap_or(0);
    let lambda_zero = eig.values[zero_idx];
    if fabs(lambda_zero) > RESONANCE_LIMIT * scale {
        return Err(Error::NotResonant {
            residual: fabs(lambda_zero) / scale,
        });
    }
    let others: Vec<f64> = (0..3).filter(|&i| i != zero_idx).map(|i| eig.values[i]).collect();
    let (lambda_minus, lambda_plus) = (others[0], others[1]);
    let gap = 1e-9 * scale;
    if lambda_plus - lambda_minus <= gap || fabs(lambda_minus) <= gap || fabs(lambda_plus) <= gap {
        return Err(Error::DegenerateSpectrum);
    }

    let id: CMat3 = linalg::cidentity();
    let shifted = |l: f64| linalg::cmat_axpy(&n.n_mat, C64::from(-l), &id);
    let (n_m, n_p) = (shifted(lambda_minus), shifted(lambda_plus));
    let scaled = |m: &CMat3, s: f64| -> CMat3 {
        let mut out = *m;
        for row in out.iter_mut() {
            for x in row.iter_mut() {
                *x /= s;
            }
        }
        out
    };
    let p0 = scaled(&linalg::cmat_mul(&n_p, &n_m), lambda_plus * lambda_minus);
    let p_plus = scaled(
        &linalg::cmat_mul(&n.n_mat, &n_m),
        lambda_plus * (lambda_plus - lambda_minus),
    );
    let p_minus = scaled(
        &linalg::cmat_mul(&n.n_mat, &n_p),
        lambda_minus * (lambda_minus - lambda_plus),
    );

    let project = |v: &CVec3| {
        [
            linalg::cmat_vec(&p0, v),
            linalg::cmat_vec(&p_plus, v),
            linalg::cmat_vec(&p_minus, v),
        ]
    };
    let too_small = |ps: &[CVec3; 3], v: &CVec3| {
        let floor = PROJECTION_FLOOR * linalg::cnorm(v);
        ps.iter().any(|p| linalg::cnorm(p) <= floor)
    };
    let mut generic = *drive;
    let mut projected = project(&generic);
    let mut used_fallback = false;
    if linalg::cnorm(&generic) == 0.0 || too_small(&projected, &generic) {
        let h_norm = linalg::cnorm(drive);
        let eps = if h_norm > 0.0 { 1e-3 * h_norm } else { 1.0 };
        generic = linalg::cadd(drive, &linalg::cscale(&generic_direction(), C64::from(eps)));
        projected = project(&generic);
        used_fallback = true;
        if too_small(&projected, &generic) {
            return Err(Error::DegenerateSpectrum);
        }
    }
    let unit = |v: &CVec3| linalg::cscale(v, C64::from(1.0 / linalg::cnorm(v)));

    Ok(SpectralData {
        n,
        lambda_zero,
        lambda_plus,
        lambda_minus,
        p0,
        p_plus,
        p_minus,
        e0: unit(&projected[0]),
        e_plus: unit(&projected[1]),
        e_minus: unit(&projected[2]),
        used_fallback,
        closed_form_lambdas: closed_form_lambdas(potential, rotation.axis(), omega),
    })
}

/// Normalized residuals of the three defining equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `|N(Omega) a|`
    pub res_a: f64,
    /// `|N(Omega) b - 2 (i Omega + W) a + h|`
    pub res_b: f64,
    /// `|N(0) c + g_par|`
    pub res_c: f64,
    /// `|N(Omega) b - (i Omega b + a - h)|`, the alternative form of the `b`
    /// equation; reported for comparison, not enforced.
    pub res_b_alternative: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.res_a.max(self.res_b).max(self.res_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantSolution {
    /// Coefficient of the secular term, along the null vector of `N(Omega)`.
    pub a_vec: CVec3,
    /// Oscillating offset, with no component along `a`.
    pub b_vec: CVec3,
    /// Static displacement caused by the gravity component along the axis.
    pub c_vec: Vec3,
    pub omega_res: f64,
    pub spectral: SpectralData,
    pub residuals: Residuals,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 && num.is_finite() {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Residuals of `a`, `b`, `c` against their defining equations, each
/// normalized by the size of the terms involved.
pub fn residual_check(a: &CVec3, b: &CVec3, c: &Vec3, config: &TrapConfig) -> Residuals {
    let rot = &config.rotation;
    let omega = rot.omega();
    let n_res = n_matrix(&config.potential, rot, omega);
    let n_zero = n_matrix(&config.potential, rot, 0.0);
    let w = linalg::to_complex(rot.omega_matrix());
    let h = config.drive();
    let g_par = linalg::to_complex_vec(config.gravity.parallel());
    let (na, nb) = (linalg::cnorm(a), linalg::cnorm(b));

    let res_a = ratio(linalg::cnorm(&n_res.apply(a)), n_res.norm() * na);

    let wa = linalg::cmat_vec(&w, a);
    let forcing = linalg::csub(
        &linalg::cscale(&linalg::cadd(&linalg::cscale(a, I * omega), &wa), C64::from(2.0)),
        &h,
    );
    let r_b = linalg::csub(&n_res.apply(b), &forcing);
    let res_b = ratio(
        linalg::cnorm(&r_b),
        n_res.norm() * nb + 2.0 * (omega + linalg::cfrobenius(&w)) * na + linalg::cnorm(&h),
    );

    let printed_rhs = linalg::csub(&linalg::cadd(&linalg::cscale(b, I * omega), a), &h);
    let res_b_alternative = ratio(
        linalg::cnorm(&linalg::csub(&n_res.apply(b), &printed_rhs)),
        n_res.norm() * nb + omega * nb + na + linalg::cnorm(&h),
    );

    let cc = linalg::to_complex_vec(c);
    let r_c = linalg::cadd(&n_zero.apply(&cc), &g_par);
    let res_c = ratio(
        linalg::cnorm(&r_c),
        n_zero.norm() * linalg::norm(c) + linalg::cnorm(&g_par),
    );
    Residuals {
        res_a,
        res_b,
        res_c,
        res_b_alternative,
    }
}

/// Static displacement solving `N(0) c = -g_par`, evaluated in the principal frame.
pub fn static_offset(config: &TrapConfig) -> Vec3 {
    let frame = PrincipalFrame::of(&config.potential);
    let v = frame.values;
    let n = config.rotation.axis();
    let k = frame.components(n);
    let gn = linalg::dot(n, config.gravity.vector());
    if gn == 0.0 {
        return [0.0; 3];
    }
    let w2 = config.rotation.omega() * config.rotation.omega();
    let d = [w2 - v[0], w2 - v[1], w2 - v[2]];
    let pair = |i: usize| -> f64 { (0..3).filter(|&j| j != i).map(|j| d[j]).product() };
    let den = d[0] * d[1] * d[2] - w2 * (0..3).map(|i| k[i] * k[i] * pair(i)).sum::<f64>();
    let comps = [
        -gn * k[0] * pair(0) / den,
        -gn * k[1] * pair(1) / den,
        -gn * k[2] * pair(2) / den,
    ];
    frame.to_original(&comps)
}

/// Vectors `a`, `b`, `c` of the resonant solution, verified against their equations.
pub fn resonant_vectors(config: &TrapConfig) -> Result<ResonantSolution> {
    let h = config.drive();
    let g_scale = linalg::norm(config.gravity.vector());
    if linalg::cnorm(&h) <= 1e-12 * g_scale || linalg::cnorm(&h) == 0.0 {
        return Err(Error::NoResonantDrive);
    }
    let rot = &config.rotation;
    let omega = rot.omega();
    let sd = spectral_data(&config.potential, rot, &h)?;
    let w = linalg::to_complex(rot.omega_matrix());
    // (i Omega + W) applied to a vector.
    let spin = |v: &CVec3| linalg::cadd(&linalg::cscale(v, I * omega), &linalg::cmat_vec(&w, v));

    let denom = linalg::cdot(&sd.e0, &spin(&sd.e0)) * 2.0;
    let alpha = if denom.norm() > 0.0 {
        linalg::cdot(&sd.e0, &h) / denom
    } else {
        return Err(Error::DegenerateSpectrum);
    };
    let a_vec = linalg::cscale(&sd.e0, alpha);

    let forcing = linalg::csub(&linalg::cscale(&spin(&a_vec), C64::from(2.0)), &h);
    let mut b_vec = [ZERO; 3];
    for (e, lam) in [(sd.e_plus, sd.lambda_plus), (sd.e_minus, sd.lambda_minus)] {
        let beta = linalg::cdot(&e, &forcing) / (linalg::cdot(&e, &e) * lam);
        b_vec = linalg::cadd(&b_vec, &linalg::cscale(&e, beta));
    }

    let c_vec = static_offset(config);
    let residuals = residual_check(&a_vec, &b_vec, &c_vec, config);
    let worst = residuals.max();
    if !(worst <= RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge {
            residual: worst,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok(ResonantSolution {
        a_vec,
        b_vec,
        c_vec,
        omega_res: omega,
        spectral: sd,
        residuals,
    })
}

impl ResonantSolution {
    pub fn position(&self, t: f64) -> Vec3 {
        let e = C64::new(0.0, self.omega_res * t).exp();
        core::array::from_fn(|i| ((self.a_vec[i] * t + self.b_vec[i]) * e).re + self.c_vec[i])
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        let e = C64::new(0.0, self.omega_res * t).exp();
        core::array::from_fn(|i| ((self.a_vec[i] + I * self.omega_res * (self.a_vec[i] * t + self.b_vec[i])) * e).re)
    }

    /// Phase-space state, with `p = m (dr/dt + Omega x r)`.
    pub fn state(&self, t: f64, config: &TrapConfig) -> PhaseState {
        let r = self.position(t);
        PhaseState::from_velocity(config, r, self.velocity(t))
    }

    /// Solution with `b` shifted along `a` by `tau`, which describes the same
    /// motion started `tau` later in time (up to the drive phase).
    pub fn shifted(&self, tau: f64) -> Self {
        Self {
            b_vec: linalg::cadd(&self.b_vec, &linalg::cscale(&self.a_vec, C64::from(tau))),
            ..*self
        }
    }
}

/// Rate at which the envelope of `|r(t)|` grows: the semi-major axis of the
/// ellipse traced by `Re(a e^{i phi})`.
pub fn growth_amplitude(solution: &ResonantSolution) -> f64 {
    let a = &solution.a_vec;
    let sq = linalg::cdot(a, a).re;
    let plain = linalg::cdot_plain(a, a).norm();
    sqrt(0.5 * (sq + plain))
}

/// Sample the closed form at the given times.
pub fn resonant_trajectory(solution: &ResonantSolution, config: &TrapConfig, times: &[f64]) -> Trajectory {
    let states = times.iter().map(|&t| solution.state(t, config)).collect();
    Trajectory {
        times: times.to_vec(),
        states,
        config: *config,
        integrator: Integrator::Analytic,
        dt: if times.len() > 1 { times[1] - times[0] } else { 0.0 },
        overflow: false,
    }
}
