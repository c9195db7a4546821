//! Rotation rates at which the rotating gravity drive is resonant.
//!
//! A resonance occurs when `Omega^2` is itself a root of the characteristic
//! cubic at that same `Omega`. Substituting `chi = Omega^2` collapses the cubic
//! to a quadratic in `Omega^2`: `D Omega^4 + E Omega^2 + F = 0`.

use libm::{fabs, sqrt};

use crate::linalg::Vec3;
use crate::spectrum::{self, CriticalBounds, PrincipalFrame, Stability};
use crate::{Tolerances, TrapPotential};

/// Relative offset used to classify the spectrum on either side of a resonance.
pub const PLACEMENT_OFFSET: f64 = 1e-6;

/// Where a resonant rotation rate sits in the stability diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionPlacement {
    LowerStable,
    LowerInstability,
    UpperStable,
    OscillatoryInstability,
}

impl RegionPlacement {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionPlacement::LowerStable => "lower_stable",
            RegionPlacement::LowerInstability => "lower_instability",
            RegionPlacement::UpperStable => "upper_stable",
            RegionPlacement::OscillatoryInstability => "oscillatory_instability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub region: RegionPlacement,
    /// The classification differs just below and just above the resonance.
    /// `region` then describes the side below.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceReport {
    pub d_coef: f64,
    pub e_coef: f64,
    pub f_coef: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub degenerate: bool,
    pub placement_minus: Placement,
    pub placement_plus: Placement,
    /// Lower instability window for the same axis.
    pub critical: CriticalBounds,
}

impl ResonanceReport {
    pub fn omegas(&self) -> [f64; 2] {
        [self.omega_minus, self.omega_plus]
    }

    /// `D x^2 + E x + F` at `x = Omega^2`.
    pub fn resonance_polynomial(&self, x: f64) -> f64 {
        (self.d_coef * x + self.e_coef) * x + self.f_coef
    }
}

/// Discriminant `E^2 - 4DF` written as a sum of two manifestly nonnegative parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminantSplit {
    pub term1: f64,
    pub term2: f64,
}

impl DiscriminantSplit {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2
    }
}

/// Coefficients `(D, E, F)` of the resonance condition.
pub fn resonance_coefficients(potential: &TrapPotential, n: &Vec3) -> (f64, f64, f64) {
    let tr = potential.trace();
    let a = potential.along(n);
    let d = -2.0 * (tr - a);
    let e = 0.5 * (tr * tr - potential.trace_of_square()) + tr * a - potential.square_along(n);
    let f = -potential.det();
    (d, e, f)
}

/// Evaluated in the principal frame with principal values ascending, so that
/// both terms are sums of nonnegative products.
pub fn discriminant_split(potential: &TrapPotential, n: &Vec3) -> DiscriminantSplit {
    let frame = PrincipalFrame::of(potential);
    let [vx, vy, vz] = frame.values;
    let c = frame.components(n);
    let (nx2, ny2, nz2) = (c[0] * c[0], c[1] * c[1], c[2] * c[2]);
    let inner = (1.0 - 0.5 * nx2) * vy * vz - (1.0 + 0.5 * ny2) * vx * vz - (1.0 + 0.5 * nz2) * vx * vy;
    let term1 = inner * inner;
    let term2 = 4.0 * vx * (nz2 * (vz - vx) * (vy * vz + 0.5 * vy * vy) + ny2 * (vy - vx) * (vy * vz + 0.5 * vz * vz));
    // The grouping above yields a quarter of E^2 - 4DF.
    DiscriminantSplit {
        term1: 4.0 * term1,
        term2: 4.0 * term2,
    }
}

fn place(potential: &TrapPotential, n: &Vec3, omega: f64, omega1: f64, tol: &Tolerances) -> Placement {
    let class = |w: f64| spectrum::mode_spectrum(potential, n, w, tol).classification;
    let below = class(omega * (1.0 - PLACEMENT_OFFSET));
    let above = class(omega * (1.0 + PLACEMENT_OFFSET));
    let region = match below {
        Stability::Stable if omega <= omega1 => RegionPlacement::LowerStable,
        Stability::Stable => RegionPlacement::UpperStable,
        Stability::ExponentialInstability => RegionPlacement::LowerInstability,
        Stability::OscillatoryInstability => RegionPlacement::OscillatoryInstability,
    };
    Placement {
        region,
        on_boundary: below != above,
    }
}

pub fn resonant_omegas(potential: &TrapPotential, n: &Vec3, tol: &Tolerances) -> ResonanceReport {
    let (d, e, f) = resonance_coefficients(potential, n);
    let disc = discriminant_split(potential, n).total().max(0.0);
    let (x_minus, x_plus) = if fabs(d) <= 1e-14 * fabs(e) {
        let x = -f / e;
        (x, x)
    } else {
        // Larger-magnitude root first, the other from the product F / D.
        let q = -0.5 * (e + e.signum() * sqrt(disc));
        let (x1, x2) = (q / d, f / q);
        if x1 <= x2 {
            (x1, x2)
        } else {
            (x2, x1)
        }
    };
    let omega_minus = sqrt(x_minus.max(0.0));
    let omega_plus = sqrt(x_plus.max(0.0));
    let critical = spectrum::lower_instability_bounds(potential, n);
    ResonanceReport {
        d_coef: d,
        e_coef: e,
        f_coef: f,
        omega_minus,
        omega_plus,
        degenerate: omega_plus - omega_minus <= tol.relative * omega_plus,
        placement_minus: place(potential, n, omega_minus, critical.omega1, tol),
        placement_plus: place(potential, n, omega_plus, critical.omega1, tol),
        critical,
    }
}

/// The two resonances merge for rotation about the lowest-frequency axis when
/// `1/(2 V_low) = 1/V_mid + 1/V_high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedResonance {
    /// Common resonant rate, equal to the lowest trap frequency.
    pub omega: f64,
    /// Lowest-frequency principal axis, about which the rotation must occur.
    pub axis: Vec3,
    pub fully_anisotropic: bool,
}

pub fn degeneracy_condition(potential: &TrapPotential, tol: &Tolerances) -> Option<MergedResonance> {
    let frame = PrincipalFrame::of(potential);
    let [vx, vy, vz] = frame.values;
    let lhs = 0.5 / vx;
    let rhs = 1.0 / vy + 1.0 / vz;
    if fabs(lhs - rhs) > tol.relative * lhs {
        return None;
    }
    Some(MergedResonance {
        omega: sqrt(vx),
        axis: frame.axes[0],
        fully_anisotropic: frame.fully_anisotropic(tol),
    })
}

/// Audit record comparing the lower resonance with the lower stability boundary.
///
/// Both `D x^2 + E x + F` and `C(x)` start at `-Det V` for `x = 0`; the
/// resonance curve is steeper there, so it reaches zero first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerResonanceAudit {
    pub omega_minus: f64,
    pub omega1: f64,
    /// `omega1 - omega_minus`
    pub margin: f64,
    /// Common value of the two curves at `Omega^2 = 0`.
    pub crossing_value_resonance: f64,
    pub crossing_value_critical: f64,
    /// Slopes with respect to `Omega^2` at the common point.
    pub slope_resonance: f64,
    pub slope_critical: f64,
}

impl LowerResonanceAudit {
    pub fn holds(&self) -> bool {
        self.margin >= -1e-9 * self.omega1.max(1.0)
    }
}

pub fn verify_lower_resonance_stable(potential: &TrapPotential, n: &Vec3, tol: &Tolerances) -> LowerResonanceAudit {
    let report = resonant_omegas(potential, n, tol);
    let crit = report.critical;
    LowerResonanceAudit {
        omega_minus: report.omega_minus,
        omega1: crit.omega1,
        margin: crit.omega1 - report.omega_minus,
        crossing_value_resonance: report.resonance_polynomial(0.0),
        crossing_value_critical: crit.critical_polynomial(0.0),
        slope_resonance: report.e_coef,
        slope_critical: crit.b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn diag(v: [f64; 3]) -> TrapPotential {
        TrapPotential::from_diagonal(v).unwrap()
    }

    fn n111() -> Vec3 {
        let s = 1.0 / sqrt(3.0);
        [s, s, s]
    }

    #[test]
    fn coefficients_unit_trap() {
        let (d, e, f) = resonance_coefficients(&diag([1.0, 2.0, 3.0]), &n111());
        assert!((d + 8.0).abs() < 1e-13);
        assert!((e - 55.0 / 3.0).abs() < 1e-13);
        assert!((f + 6.0).abs() < 1e-13);
    }

    #[test]
    fn omegas_unit_trap() {
        let tol = Tolerances::default();
        let r = resonant_omegas(&diag([1.0, 2.0, 3.0]), &n111(), &tol);
        assert!((r.omega_minus - 0.628_922_92).abs() < 1e-7, "{}", r.omega_minus);
        assert!((r.omega_plus - 1.376_997_69).abs() < 1e-7, "{}", r.omega_plus);
        assert!(!r.degenerate);
        assert_eq!(r.placement_minus.region, RegionPlacement::LowerStable);
    }

    #[test]
    fn resonance_is_self_consistent() {
        let tol = Tolerances::default();
        let v = diag([1.0, 2.0, 3.0]);
        let r = resonant_omegas(&v, &n111(), &tol);
        for w in r.omegas() {
            let q = spectrum::char_poly_coeffs(&v, &n111(), w);
            let x = w * w;
            let scale = x * x * x + q.a_coef.abs() * x * x + q.b_coef.abs() * x + q.c_coef.abs();
            assert!(q.eval_real(x).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn figure_eight_trap_in_hz() {
        let tol = Tolerances::default();
        let v = TrapPotential::from_frequencies_hz([10.0, 15.0, 20.0]).unwrap();
        let r = resonant_omegas(&v, &n111(), &tol);
        assert!((r.omega_minus / (2.0 * PI) - 6.494_21).abs() < 1e-5);
    }

    #[test]
    fn merged_resonance_is_exact() {
        let tol = Tolerances::default();
        let v = diag([1.0, 10.0 / 3.0, 5.0]);
        let r = resonant_omegas(&v, &[1.0, 0.0, 0.0], &tol);
        assert!((r.omega_minus - 1.0).abs() < 1e-12);
        assert!((r.omega_plus - 1.0).abs() < 1e-12);
        assert!(r.degenerate);
        let s = discriminant_split(&v, &[1.0, 0.0, 0.0]);
        assert!(s.term1.abs() < 1e-12 && s.term2.abs() < 1e-12);
    }

    #[test]
    fn split_sums_to_discriminant() {
        let v = diag([1.0, 2.0, 3.0]);
        for n in [n111(), [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.6, 0.8]] {
            let (d, e, f) = resonance_coefficients(&v, &n);
            let s = discriminant_split(&v, &n);
            let disc = e * e - 4.0 * d * f;
            assert!((s.total() - disc).abs() < 1e-9 * disc.abs());
            assert!(s.term1 >= -1e-12 && s.term2 >= -1e-12);
        }
    }

    #[test]
    fn split_examples() {
        let v = diag([1.0, 2.0, 3.0]);
        assert!(discriminant_split(&v, &[0.0, 0.0, 1.0]).term2 > 0.0);
        let sx = discriminant_split(&v, &[1.0, 0.0, 0.0]);
        assert_eq!(sx.term2, 0.0);
        assert!(sx.term1 >= 0.0);
    }

    #[test]
    fn split_ignores_diagonal_order() {
        let a = discriminant_split(&diag([1.0, 2.0, 3.0]), &[0.0, 0.6, 0.8]);
        let b = discriminant_split(&diag([3.0, 1.0, 2.0]), &[0.8, 0.0, 0.6]);
        assert!((a.term1 - b.term1).abs() < 1e-12);
        assert!((a.term2 - b.term2).abs() < 1e-12);
    }

    #[test]
    fn degeneracy_condition_cases() {
        let tol = Tolerances::default();
        let m = degeneracy_condition(&diag([1.0, 10.0 / 3.0, 5.0]), &tol).unwrap();
        assert!((m.omega - 1.0).abs() < 1e-15);
        assert!(m.fully_anisotropic);
        assert!((m.axis[0].abs() - 1.0).abs() < 1e-15);
        let m = degeneracy_condition(&diag([1.0, 4.0, 4.0]), &tol).unwrap();
        assert!((m.omega - 1.0).abs() < 1e-15);
        assert!(!m.fully_anisotropic);
        assert!(degeneracy_condition(&diag([1.0, 2.0, 3.0]), &tol).is_none());
    }

    #[test]
    fn double_root_for_axially_symmetric_merge() {
        let tol = Tolerances::default();
        let r = resonant_omegas(&diag([1.0, 4.0, 4.0]), &[1.0, 0.0, 0.0], &tol);
        assert!((r.omega_minus - 1.0).abs() < 1e-9);
        assert!((r.omega_plus - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lower_resonance_below_critical() {
        let tol = Tolerances::default();
        let a = verify_lower_resonance_stable(&diag([1.0, 2.0, 3.0]), &n111(), &tol);
        assert!(a.holds());
        assert!(a.margin > 0.4);
        assert_eq!(a.crossing_value_resonance, a.crossing_value_critical);
        assert!(a.slope_resonance > a.slope_critical);
    }

    #[test]
    fn merged_case_lower_critical_is_mid_frequency() {
        // Rotation about the weakest axis opens the exponential window at the
        // middle trap frequency, so the merged resonance keeps a finite margin.
        let tol = Tolerances::default();
        let a = verify_lower_resonance_stable(&diag([1.0, 10.0 / 3.0, 5.0]), &[1.0, 0.0, 0.0], &tol);
        assert!((a.omega_minus - 1.0).abs() < 1e-12);
        assert!((a.omega1 - sqrt(10.0 / 3.0)).abs() < 1e-12);
        assert!(a.holds());
    }

    #[test]
    fn mass_free_and_scale_covariant() {
        let tol = Tolerances::default();
        let v = diag([1.0, 2.0, 3.0]);
        let r = resonant_omegas(&v, &n111(), &tol);
        let r4 = resonant_omegas(&v.scaled(4.0).unwrap(), &n111(), &tol);
        assert!((r4.omega_minus - 2.0 * r.omega_minus).abs() < 1e-12);
        assert!((r4.omega_plus - 2.0 * r.omega_plus).abs() < 1e-12);
    }
}
