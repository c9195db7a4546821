//! Mode spectrum in the rotating frame and the resulting stability regions.
//!
//! The squared mode frequencies `chi = omega^2` are the roots of a monic
//! cubic `Q(chi) = chi^3 + A chi^2 + B chi + C` whose coefficients depend on
//! the trap only through rotation invariants (`Tr V`, `Tr V^2`, `Det V`,
//! `n.V.n`, `n.V^2.n`).

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{acos, asin, cbrt, cos, fabs, sqrt};
use num_complex::Complex64 as C64;

use crate::linalg::{self, Vec3};
use crate::{Error, Result, Tolerances, TrapPotential};

/// Coefficients of `Q(chi) = chi^3 + a chi^2 + b chi + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a_coef: f64,
    pub b_coef: f64,
    pub c_coef: f64,
}

impl CubicCoefficients {
    pub fn eval(&self, chi: C64) -> C64 {
        ((chi + self.a_coef) * chi + self.b_coef) * chi + self.c_coef
    }

    pub fn eval_real(&self, chi: f64) -> f64 {
        ((chi + self.a_coef) * chi + self.b_coef) * chi + self.c_coef
    }

    fn derivative(&self, chi: C64) -> C64 {
        (chi * 3.0 + 2.0 * self.a_coef) * chi + self.b_coef
    }

    /// The three roots, real roots first in ascending order, then a complex pair
    /// (positive imaginary part first).
    pub fn roots(&self, tol: &Tolerances) -> [C64; 3] {
        tidy_roots(solve_cubic(self), tol)
    }
}

/// Coefficients of the characteristic cubic for rotation rate `omega` about unit axis `n`.
pub fn char_poly_coeffs(potential: &TrapPotential, n: &Vec3, omega: f64) -> CubicCoefficients {
    let w2 = omega * omega;
    let tr = potential.trace();
    let tr2 = potential.trace_of_square();
    let a = potential.along(n);
    let a2 = potential.square_along(n);
    CubicCoefficients {
        a_coef: -2.0 * w2 - tr,
        b_coef: w2 * w2 + w2 * (3.0 * a - tr) + 0.5 * (tr * tr - tr2),
        c_coef: w2 * (tr - w2) * a - w2 * a2 - potential.det(),
    }
}

/// Raw roots: trigonometric/Cardano closed form, falling back to the
/// companion-matrix eigenvalues when the discriminant is nearly zero, and
/// polished by Newton steps.
pub fn solve_cubic(q: &CubicCoefficients) -> [C64; 3] {
    let (a, b, c) = (q.a_coef, q.b_coef, q.c_coef);
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * qq;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let disc_scale = half_q * half_q + fabs(third_p * third_p * third_p);

    let mut roots = if disc_scale > 0.0 && fabs(disc) <= 1e-10 * disc_scale {
        companion_roots(q).unwrap_or_else(|| closed_form(half_q, third_p, disc, shift))
    } else {
        closed_form(half_q, third_p, disc, shift)
    };
    for r in roots.iter_mut() {
        *r = polish(q, *r);
    }
    roots
}

fn closed_form(half_q: f64, third_p: f64, disc: f64, shift: f64) -> [C64; 3] {
    if disc < 0.0 {
        // Three distinct real roots.
        let r = sqrt(-third_p);
        let arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = acos(arg);
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = C64::from(2.0 * r * cos((phi - 2.0 * PI * k as f64) / 3.0) - shift);
        }
        out
    } else {
        let s = sqrt(disc);
        let u = cbrt(if half_q > 0.0 { -half_q - s } else { -half_q + s });
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        let real = u + v;
        let im = 0.5 * sqrt(3.0) * (u - v);
        [
            C64::from(real - shift),
            C64::new(-0.5 * real - shift, im),
            C64::new(-0.5 * real - shift, -im),
        ]
    }
}

fn companion_roots(q: &CubicCoefficients) -> Option<[C64; 3]> {
    let companion = [[-q.a_coef, -q.b_coef, -q.c_coef], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    linalg::eigenvalues(&linalg::to_complex(&companion)).ok()
}

fn polish(q: &CubicCoefficients, mut z: C64) -> C64 {
    let mut f = q.eval(z);
    for _ in 0..4 {
        let d = q.derivative(z);
        if d.norm() == 0.0 || f.norm() == 0.0 {
            break;
        }
        let next = z - f / d;
        let fn_next = q.eval(next);
        if !(fn_next.norm() < f.norm()) {
            break;
        }
        z = next;
        f = fn_next;
    }
    z
}

fn is_real(z: &C64, tol: &Tolerances) -> bool {
    fabs(z.im) <= tol.root_real * z.norm().max(1.0)
}

/// Enforce the structure of a real cubic: either three real roots or one real
/// root and an exact conjugate pair.
fn tidy_roots(raw: [C64; 3], tol: &Tolerances) -> [C64; 3] {
    let real_count = raw.iter().filter(|z| is_real(z, tol)).count();
    if real_count >= 2 {
        let mut r = [raw[0].re, raw[1].re, raw[2].re];
        r.sort_by(f64::total_cmp);
        return [C64::from(r[0]), C64::from(r[1]), C64::from(r[2])];
    }
    // One real root: the one closest to the real axis.
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| fabs(raw[i].im).total_cmp(&fabs(raw[j].im)));
    let real = C64::from(raw[idx[0]].re);
    let (z1, z2) = (raw[idx[1]], raw[idx[2]]);
    let mean = (z1 + z2.conj()) * 0.5;
    let pair = if mean.im >= 0.0 { mean } else { mean.conj() };
    [real, pair, pair.conj()]
}

/// Stability character of the motion at a given rotation rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    /// All `chi` real and positive: bounded oscillations.
    Stable,
    /// A negative real `chi`: exponential escape.
    ExponentialInstability,
    /// A complex-conjugate pair of `chi`: growing oscillations.
    OscillatoryInstability,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::ExponentialInstability => "exponential_instability",
            Stability::OscillatoryInstability => "oscillatory_instability",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

/// Classified roots of the characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumReport {
    pub omega: f64,
    pub coefficients: CubicCoefficients,
    /// Roots in `chi = omega^2`, real roots ascending, then the complex pair.
    pub chi_roots: [C64; 3],
    /// The six mode frequencies `+-sqrt(chi)` (rad/s).
    pub omega_values: [C64; 6],
    pub classification: Stability,
    pub negative_real_count: usize,
    pub complex_count: usize,
    /// A root sits within tolerance of a classification threshold.
    pub marginal: bool,
}

impl SpectrumReport {
    /// Largest real mode frequency, if all modes are real.
    pub fn max_real_frequency(&self) -> Option<f64> {
        if !self.classification.is_stable() {
            return None;
        }
        self.chi_roots.iter().map(|z| sqrt(z.re.max(0.0))).reduce(f64::max)
    }
}

fn classify_roots(raw: &[C64; 3], tol: &Tolerances) -> (Stability, usize, usize) {
    let roots = tidy_roots(*raw, tol);
    let complex = roots.iter().filter(|z| z.im != 0.0).count();
    let negative = roots
        .iter()
        .filter(|z| z.im == 0.0 && z.re < -tol.root_negative * z.norm().max(1.0))
        .count();
    let class = if complex > 0 {
        Stability::OscillatoryInstability
    } else if negative > 0 {
        Stability::ExponentialInstability
    } else {
        Stability::Stable
    };
    (class, negative, complex)
}

fn scaled(tol: &Tolerances, f: f64) -> Tolerances {
    Tolerances {
        root_real: tol.root_real * f,
        root_negative: tol.root_negative * f,
        ..*tol
    }
}

/// Roots of the characteristic cubic and the stability classification.
pub fn mode_spectrum(potential: &TrapPotential, n: &Vec3, omega: f64, tol: &Tolerances) -> SpectrumReport {
    let coefficients = char_poly_coeffs(potential, n, omega);
    let raw = solve_cubic(&coefficients);
    let chi_roots = tidy_roots(raw, tol);
    let (classification, negative_real_count, complex_count) = classify_roots(&raw, tol);
    let near_zero = chi_roots
        .iter()
        .any(|z| z.im == 0.0 && fabs(z.re) <= tol.root_negative * z.norm().max(1.0));
    let marginal = near_zero
        || classify_roots(&raw, &scaled(tol, 10.0)).0 != classification
        || classify_roots(&raw, &scaled(tol, 0.1)).0 != classification;
    let mut omega_values = [C64::new(0.0, 0.0); 6];
    for (k, chi) in chi_roots.iter().enumerate() {
        let w = chi.sqrt();
        omega_values[2 * k] = w;
        omega_values[2 * k + 1] = -w;
    }
    SpectrumReport {
        omega,
        coefficients,
        chi_roots,
        omega_values,
        classification,
        negative_real_count,
        complex_count,
        marginal,
    }
}

/// Boundaries of the lower (exponential) instability window: the positive
/// zeros of `C(Omega) = -a Omega^4 + b Omega^2 - c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBounds {
    /// `n.V.n`
    pub a: f64,
    /// `Tr(V) n.V.n - n.V^2.n`
    pub b: f64,
    /// `Det V`
    pub c: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl CriticalBounds {
    /// `C(Omega)` as a function of `x = Omega^2`.
    pub fn critical_polynomial(&self, x: f64) -> f64 {
        -self.a * x * x + self.b * x - self.c
    }
}

pub fn lower_instability_bounds(potential: &TrapPotential, n: &Vec3) -> CriticalBounds {
    let a = potential.along(n);
    let b = potential.trace() * a - potential.square_along(n);
    let c = potential.det();
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // Larger root first, smaller from the product c / a.
    let upper = (b + sqrt(disc)) / (2.0 * a);
    let lower = if upper > 0.0 { c / (a * upper) } else { 0.0 };
    CriticalBounds {
        a,
        b,
        c,
        omega1: sqrt(lower.max(0.0)),
        omega2: sqrt(upper.max(0.0)),
    }
}

/// Principal axes of the trap, ordered by ascending principal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalFrame {
    pub values: Vec3,
    pub axes: [Vec3; 3],
}

impl PrincipalFrame {
    pub fn of(potential: &TrapPotential) -> Self {
        let e = potential.principal();
        Self {
            values: e.values,
            axes: e.vectors,
        }
    }

    /// Components of `v` along the principal axes.
    pub fn components(&self, v: &Vec3) -> Vec3 {
        [
            linalg::dot(&self.axes[0], v),
            linalg::dot(&self.axes[1], v),
            linalg::dot(&self.axes[2], v),
        ]
    }

    /// Vector with principal-frame components `c`, expressed in the original frame.
    pub fn to_original(&self, c: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for k in 0..3 {
            out = linalg::add(&out, &linalg::scale(&self.axes[k], c[k]));
        }
        out
    }

    /// For each principal axis, the coordinate axis it coincides with, when
    /// the potential is diagonal in the given coordinates.
    pub fn permutation(&self) -> Option<[usize; 3]> {
        let mut perm = [0usize; 3];
        for (k, axis) in self.axes.iter().enumerate() {
            perm[k] = (0..3).find(|&i| fabs(fabs(axis[i]) - 1.0) < 1e-12)?;
        }
        Some(perm)
    }

    pub fn fully_anisotropic(&self, tol: &Tolerances) -> bool {
        let v = &self.values;
        v[1] - v[0] > tol.relative * v[1] && v[2] - v[1] > tol.relative * v[2]
    }
}

/// Axis orientation for which the lower instability window closes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltDegeneracy {
    /// Axis `sin(theta) e_low + cos(theta) e_high`, in the plane of the
    /// lowest- and highest-frequency principal axes.
    Tilted {
        sin2_theta: f64,
        theta: f64,
        axis: Vec3,
        frame: PrincipalFrame,
    },
    /// Two principal values coincide; the window closes for every axis in the degenerate plane.
    NotFullyAnisotropic,
}

pub fn degeneracy_tilt(potential: &TrapPotential, tol: &Tolerances) -> TiltDegeneracy {
    let frame = PrincipalFrame::of(potential);
    if !frame.fully_anisotropic(tol) {
        return TiltDegeneracy::NotFullyAnisotropic;
    }
    let [vx, vy, vz] = frame.values;
    let sin2_theta = (1.0 - vx / vy) / (1.0 - vx / vz);
    let theta = asin(sqrt(sin2_theta));
    let (s, c) = libm::sincos(theta);
    let axis = frame.to_original(&[s, 0.0, c]);
    TiltDegeneracy::Tilted {
        sin2_theta,
        theta,
        axis,
        frame,
    }
}

/// Spectrum for rotation about a principal axis, where the cubic factorizes
/// into the axial frequency and a quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAlignedSpectrum {
    /// Index (in the ascending principal order) of the rotation axis.
    pub axis_index: usize,
    /// Axial root, which does not depend on the rotation rate.
    pub axial: f64,
    /// Roots of the quadratic factor, ascending.
    pub transverse: [f64; 2],
    /// Discriminant of the quadratic factor, `8 Omega^2 (V1 + V2) + (V1 - V2)^2`.
    pub delta: f64,
}

impl AxisAlignedSpectrum {
    pub fn sorted(&self) -> Vec3 {
        let mut r = [self.axial, self.transverse[0], self.transverse[1]];
        r.sort_by(f64::total_cmp);
        r
    }
}

pub fn axis_aligned_spectrum(
    potential: &TrapPotential,
    n: &Vec3,
    omega: f64,
    tol: &Tolerances,
) -> Result<AxisAlignedSpectrum> {
    let frame = PrincipalFrame::of(potential);
    let comps = frame.components(n);
    let axis_index = (0..3)
        .find(|&i| fabs(comps[i]) >= 1.0 - tol.axis_alignment)
        .ok_or(Error::NotAxisAligned)?;
    let others: Vec<f64> = (0..3).filter(|&i| i != axis_index).map(|i| frame.values[i]).collect();
    let (v1, v2) = (others[0], others[1]);
    let w2 = omega * omega;
    let sum = 2.0 * w2 + v1 + v2;
    let product = w2 * w2 - w2 * (v1 + v2) + v1 * v2;
    let delta = 8.0 * w2 * (v1 + v2) + (v1 - v2) * (v1 - v2);
    let upper = 0.5 * (sum + sqrt(delta));
    let lower = product / upper;
    Ok(AxisAlignedSpectrum {
        axis_index,
        axial: frame.values[axis_index],
        transverse: [lower, upper],
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub omega: f64,
    pub chi_roots: [C64; 3],
    pub classification: Stability,
    pub marginal: bool,
}

/// Rotation rate at which the classification changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub omega: f64,
    pub below: Stability,
    pub above: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityScan {
    pub rows: Vec<ScanRow>,
    pub boundaries: Vec<Boundary>,
}

impl StabilityScan {
    /// Sequence of distinct regions met in order of increasing rotation rate.
    pub fn regions(&self) -> Vec<Stability> {
        let mut out: Vec<Stability> = Vec::new();
        for row in &self.rows {
            if out.last() != Some(&row.classification) {
                out.push(row.classification);
            }
        }
        out
    }

    pub fn instability_windows(&self) -> usize {
        self.regions().iter().filter(|s| !s.is_stable()).count()
    }
}

/// Classify a uniform grid of rotation rates and locate region boundaries by bisection.
pub fn stability_scan(
    potential: &TrapPotential,
    n: &Vec3,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<StabilityScan> {
    if !(omega_min < omega_max) || omega_min < 0.0 || !omega_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega_range",
            value: omega_max - omega_min,
        });
    }
    if steps < 2 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: steps as f64,
        });
    }
    let class_at = |w: f64| mode_spectrum(potential, n, w, tol).classification;
    let span = omega_max - omega_min;
    let rows: Vec<ScanRow> = (0..steps)
        .map(|i| {
            let w = if i + 1 == steps {
                omega_max
            } else {
                omega_min + span * i as f64 / (steps - 1) as f64
            };
            let s = mode_spectrum(potential, n, w, tol);
            ScanRow {
                omega: w,
                chi_roots: s.chi_roots,
                classification: s.classification,
                marginal: s.marginal,
            }
        })
        .collect();

    let mut boundaries = Vec::new();
    for pair in rows.windows(2) {
        let (below, above) = (pair[0].classification, pair[1].classification);
        if below == above {
            continue;
        }
        let (mut lo, mut hi) = (pair[0].omega, pair[1].omega);
        while hi - lo > tol.boundary * hi.max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if class_at(mid) == below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        boundaries.push(Boundary {
            omega: 0.5 * (lo + hi),
            below,
            above,
        });
    }
    Ok(StabilityScan { rows, boundaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: [f64; 3]) -> TrapPotential {
        TrapPotential::from_diagonal(v).unwrap()
    }

    fn n111() -> Vec3 {
        let s = 1.0 / sqrt(3.0);
        [s, s, s]
    }

    #[test]
    fn coefficients_at_rest() {
        for n in [[0.0, 0.0, 1.0], n111()] {
            let q = char_poly_coeffs(&diag([1.0, 2.0, 3.0]), &n, 0.0);
            assert!((q.a_coef + 6.0).abs() < 1e-14);
            assert!((q.b_coef - 11.0).abs() < 1e-14);
            assert!((q.c_coef + 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficients_tilted_unit_rotation() {
        let q = char_poly_coeffs(&diag([1.0, 2.0, 3.0]), &n111(), 1.0);
        assert!((q.a_coef + 8.0).abs() < 1e-12);
        assert!((q.b_coef - 12.0).abs() < 1e-12);
        assert!((q.c_coef + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_c_vanishes_on_boundary() {
        let q = char_poly_coeffs(&diag([1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0], 1.0);
        assert!(q.c_coef.abs() < 1e-14);
    }

    #[test]
    fn spectrum_at_rest() {
        let s = mode_spectrum(&diag([1.0, 2.0, 3.0]), &n111(), 0.0, &Tolerances::default());
        assert_eq!(s.classification, Stability::Stable);
        for (z, want) in s.chi_roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn lower_window_is_exponential() {
        let s = mode_spectrum(&diag([1.0, 2.0, 3.0]), &n111(), 1.3, &Tolerances::default());
        assert_eq!(s.classification, Stability::ExponentialInstability);
        assert_eq!(s.negative_real_count, 1);
        assert_eq!(s.complex_count, 0);
    }

    #[test]
    fn axial_root_is_pinned() {
        let tol = Tolerances::default();
        for w in [0.0, 0.4, 1.2, 1.9, 3.7] {
            let s = mode_spectrum(&diag([1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0], w, &tol);
            let closest = s
                .chi_roots
                .iter()
                .map(|z| (z - 3.0).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-9, "omega {w}: {:?}", s.chi_roots);
        }
    }

    #[test]
    fn root_residuals_are_small() {
        let tol = Tolerances::default();
        for w in [0.0, 0.5, 1.11, 1.3, 2.0, 2.41, 3.0, 3.2207, 5.0] {
            let s = mode_spectrum(&diag([1.0, 2.0, 3.0]), &n111(), w, &tol);
            for z in s.chi_roots {
                let r = s.coefficients.eval(z).norm();
                assert!(r < 1e-8 * z.norm().max(1.0).powi(3), "omega {w}: |Q| = {r}");
            }
        }
    }

    #[test]
    fn marginal_on_boundary() {
        let s = mode_spectrum(&diag([1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0], 1.0, &Tolerances::default());
        assert!(s.marginal);
        assert_eq!(s.classification, Stability::Stable);
    }

    #[test]
    fn bounds_axis_aligned() {
        let b = lower_instability_bounds(&diag([1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0]);
        assert!((b.omega1 - 1.0).abs() < 1e-14);
        assert!((b.omega2 - sqrt(2.0)).abs() < 1e-14);
    }

    #[test]
    fn bounds_tilted() {
        let v = diag([1.0, 2.0, 3.0]);
        let b = lower_instability_bounds(&v, &n111());
        assert!((b.a - 2.0).abs() < 1e-14);
        assert!((b.b - 22.0 / 3.0).abs() < 1e-13);
        assert!((b.c - 6.0).abs() < 1e-13);
        // Frozen from independent bisection of C(Omega) = 0.
        assert!((b.omega1 - 1.110_138_784_5).abs() < 1e-6, "{}", b.omega1);
        assert!((b.omega2 - 1.560_211_060_0).abs() < 1e-6, "{}", b.omega2);
        for w in [b.omega1, b.omega2] {
            let c = char_poly_coeffs(&v, &n111(), w).c_coef;
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn bounds_isotropic_collapse() {
        let b = lower_instability_bounds(&diag([1.0, 1.0, 1.0]), &n111());
        assert!((b.omega1 - 1.0).abs() < 1e-7);
        assert!((b.omega2 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn tilt_degeneracy_values() {
        let tol = Tolerances::default();
        match degeneracy_tilt(&diag([1.0, 2.0, 3.0]), &tol) {
            TiltDegeneracy::Tilted {
                sin2_theta,
                theta,
                axis,
                ..
            } => {
                assert!((sin2_theta - 0.75).abs() < 1e-14);
                assert!((theta - PI / 3.0).abs() < 1e-12);
                let b = lower_instability_bounds(&diag([1.0, 2.0, 3.0]), &axis);
                assert!((b.omega1 - b.omega2).abs() < 1e-6);
                assert!((b.b * b.b - 4.0 * b.a * b.c).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        match degeneracy_tilt(&diag([1.0, 2.0, 4.0]), &tol) {
            TiltDegeneracy::Tilted { sin2_theta, .. } => assert!((sin2_theta - 2.0 / 3.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            degeneracy_tilt(&diag([1.0, 1.0, 3.0]), &tol),
            TiltDegeneracy::NotFullyAnisotropic
        );
    }

    #[test]
    fn tilt_reorders_unsorted_diagonal() {
        let tol = Tolerances::default();
        match degeneracy_tilt(&diag([3.0, 1.0, 2.0]), &tol) {
            TiltDegeneracy::Tilted { axis, frame, .. } => {
                assert_eq!(frame.permutation(), Some([1, 2, 0]));
                let b = lower_instability_bounds(&diag([3.0, 1.0, 2.0]), &axis);
                assert!((b.b * b.b - 4.0 * b.a * b.c).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn axis_aligned_factorization() {
        let tol = Tolerances::default();
        let v = diag([1.0, 2.0, 3.0]);
        let z = [0.0, 0.0, 1.0];
        let s0 = axis_aligned_spectrum(&v, &z, 0.0, &tol).unwrap();
        assert_eq!(s0.sorted(), [1.0, 2.0, 3.0]);
        let s1 = axis_aligned_spectrum(&v, &z, 1.0, &tol).unwrap();
        assert_eq!(s1.axial, 3.0);
        assert!(s1.transverse[0].abs() < 1e-14);
        assert!((s1.transverse[1] - 5.0).abs() < 1e-14);
        assert_eq!(s1.delta, 25.0);
        assert_eq!(
            axis_aligned_spectrum(&v, &n111(), 1.0, &tol),
            Err(Error::NotAxisAligned)
        );
    }

    #[test]
    fn axis_aligned_matches_general_solver() {
        let tol = Tolerances::default();
        let v = diag([1.0, 2.0, 3.0]);
        let z = [0.0, 0.0, 1.0];
        for w in [0.3, 0.9, 1.2, 1.8, 2.5] {
            let fact = axis_aligned_spectrum(&v, &z, w, &tol).unwrap().sorted();
            let gen = mode_spectrum(&v, &z, w, &tol);
            for (a, b) in fact.iter().zip(gen.chi_roots.iter()) {
                assert!(
                    (b - a).norm() < 1e-9 * a.abs().max(1.0),
                    "omega {w}: {fact:?} vs {:?}",
                    gen.chi_roots
                );
            }
        }
    }

    #[test]
    fn scan_tilted_reaches_upper_stable_region() {
        let tol = Tolerances::default();
        let scan = stability_scan(&diag([1.0, 2.0, 3.0]), &n111(), 0.0, 3.5, 351, &tol).unwrap();
        use Stability::*;
        assert_eq!(
            scan.regions(),
            [Stable, ExponentialInstability, Stable, OscillatoryInstability, Stable]
        );
        assert_eq!(scan.boundaries.len(), 4);
        assert!((scan.boundaries[0].omega - 1.110_138_784_5).abs() < 1e-6);
        assert!((scan.boundaries[1].omega - 1.560_211_060_0).abs() < 1e-6);
    }

    #[test]
    fn scan_axis_aligned_single_window() {
        let tol = Tolerances::default();
        let scan = stability_scan(&diag([1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0], 0.0, 3.0, 301, &tol).unwrap();
        assert_eq!(scan.instability_windows(), 1);
        assert_eq!(scan.boundaries.len(), 2);
        assert!((scan.boundaries[0].omega - 1.0).abs() < 1e-6, "{:?}", scan.boundaries);
        assert!(
            (scan.boundaries[1].omega - sqrt(2.0)).abs() < 1e-6,
            "{:?}",
            scan.boundaries
        );
    }

    #[test]
    fn scan_below_first_boundary_all_stable() {
        let tol = Tolerances::default();
        let scan = stability_scan(&diag([1.0, 2.0, 3.0]), &n111(), 0.0, 1.0, 50, &tol).unwrap();
        assert!(scan.rows.iter().all(|r| r.classification == Stability::Stable));
        assert!(scan.boundaries.is_empty());
    }

    #[test]
    fn scan_rejects_bad_range() {
        let tol = Tolerances::default();
        assert!(stability_scan(&diag([1.0, 2.0, 3.0]), &n111(), 1.0, 1.0, 10, &tol).is_err());
        assert!(stability_scan(&diag([1.0, 2.0, 3.0]), &n111(), 0.0, 1.0, 1, &tol).is_err());
    }
}
