use core::f64::consts::TAU;

use libm::fabs;
use num_complex::Complex64 as C64;

use crate::linalg::{self, CVec3, Mat3, SymEigen, Vec3};
use crate::{Error, Result};

/// Symmetric positive-definite matrix of squared trap frequencies (rad^2/s^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapPotential {
    v: Mat3,
}

impl TrapPotential {
    pub fn new(v: Mat3) -> Result<Self> {
        let asymmetry = linalg::asymmetry(&v);
        if asymmetry > 1e-12 || !v.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let eig = linalg::eig_sym3(&v)?;
        if eig.values[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.values[0],
            });
        }
        Ok(Self { v })
    }

    /// Principal-frame potential `diag(v_x, v_y, v_z)`.
    pub fn from_diagonal(d: Vec3) -> Result<Self> {
        Self::new(linalg::diag(&d))
    }

    /// Angular trap frequencies (rad/s) on the coordinate axes.
    pub fn from_angular_frequencies(w: Vec3) -> Result<Self> {
        Self::from_diagonal([w[0] * w[0], w[1] * w[1], w[2] * w[2]])
    }

    /// Linear trap frequencies (Hz) on the coordinate axes; entries are `(2 pi f)^2`.
    pub fn from_frequencies_hz(f: Vec3) -> Result<Self> {
        Self::from_angular_frequencies([TAU * f[0], TAU * f[1], TAU * f[2]])
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.v
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.v)
    }

    pub fn trace_of_square(&self) -> f64 {
        linalg::trace(&linalg::mat_mul(&self.v, &self.v))
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.v)
    }

    /// `n . V . n`
    pub fn along(&self, n: &Vec3) -> f64 {
        linalg::quad(n, &self.v, n)
    }

    /// `n . V^2 . n`
    pub fn square_along(&self, n: &Vec3) -> f64 {
        let vn = linalg::mat_vec(&self.v, n);
        linalg::dot(&vn, &vn)
    }

    /// Principal values in ascending order with their axes.
    pub fn principal(&self) -> SymEigen {
        // The constructor already ran the same decomposition successfully.
        linalg::eig_sym3(&self.v).expect("validated potential")
    }

    /// Potential conjugated by an orthogonal matrix: `R V R^T`.
    pub fn rotated(&self, r: &Mat3) -> Result<Self> {
        let m = linalg::mat_mul(&linalg::mat_mul(r, &self.v), &linalg::transpose(r));
        let mut sym = m;
        for i in 0..3 {
            for j in 0..3 {
                sym[i][j] = 0.5 * (m[i][j] + m[j][i]);
            }
        }
        Self::new(sym)
    }

    pub fn scaled(&self, s2: f64) -> Result<Self> {
        let mut v = self.v;
        v.iter_mut().flatten().for_each(|x| *x *= s2);
        Self::new(v)
    }
}

/// Angular velocity of the trap: unit axis `n` and magnitude `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    n: Vec3,
    omega: f64,
    omega_matrix: Mat3,
}

impl RotationSpec {
    /// `n` must be a unit vector (within 1e-12).
    pub fn new(n: Vec3, omega: f64) -> Result<Self> {
        let len = linalg::norm(&n);
        if !len.is_finite() || fabs(len - 1.0) > 1e-12 {
            return Err(Error::InvalidAxis);
        }
        Self::build(n, omega)
    }

    /// Normalizes `axis` first.
    pub fn from_axis(axis: Vec3, omega: f64) -> Result<Self> {
        let len = linalg::norm(&axis);
        if !len.is_finite() || len == 0.0 {
            return Err(Error::InvalidAxis);
        }
        Self::build(linalg::scale(&axis, 1.0 / len), omega)
    }

    fn build(n: Vec3, omega: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
            });
        }
        Ok(Self {
            n,
            omega,
            omega_matrix: linalg::cross_matrix(&linalg::scale(&n, omega)),
        })
    }

    pub fn axis(&self) -> &Vec3 {
        &self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Antisymmetric matrix with entries `eps_ijk Omega_j`; `omega_matrix . r = Omega x r`.
    pub fn omega_matrix(&self) -> &Mat3 {
        &self.omega_matrix
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::build(self.n, omega)
    }
}

/// Gravitational acceleration at `t = 0` split along and across the rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravitySpec {
    g: Vec3,
    g_par: Vec3,
    g_perp: Vec3,
}

impl GravitySpec {
    pub fn new(g: Vec3, n: &Vec3) -> Self {
        let g_par = linalg::scale(n, linalg::dot(n, &g));
        let g_perp = linalg::sub(&g, &g_par);
        Self { g, g_par, g_perp }
    }

    pub fn vector(&self) -> &Vec3 {
        &self.g
    }

    /// `n (n . g)`
    pub fn parallel(&self) -> &Vec3 {
        &self.g_par
    }

    /// `g - n (n . g)`
    pub fn perpendicular(&self) -> &Vec3 {
        &self.g_perp
    }

    /// Complex amplitude of the rotating part, `g_perp + i (n x g_perp)`.
    pub fn drive(&self, n: &Vec3) -> CVec3 {
        let w = linalg::cross(n, &self.g_perp);
        [
            C64::new(self.g_perp[0], w[0]),
            C64::new(self.g_perp[1], w[1]),
            C64::new(self.g_perp[2], w[2]),
        ]
    }
}

/// Point in phase space: position (m) and canonical momentum (kg m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub r: Vec3,
    pub p: Vec3,
}

impl PhaseState {
    pub fn new(r: Vec3, p: Vec3) -> Self {
        Self { r, p }
    }

    /// State at position `r` moving with rotating-frame velocity `v`.
    ///
    /// The canonical momentum is `m (v + Omega x r)`.
    pub fn from_velocity(config: &TrapConfig, r: Vec3, v: Vec3) -> Self {
        let spin = linalg::mat_vec(config.rotation.omega_matrix(), &r);
        Self {
            r,
            p: linalg::scale(&linalg::add(&v, &spin), config.mass),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.r[0], self.r[1], self.r[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn from_array(a: &[f64; 6]) -> Self {
        Self {
            r: [a[0], a[1], a[2]],
            p: [a[3], a[4], a[5]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.p).all(|x| x.is_finite())
    }
}

/// Complete physical scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub potential: TrapPotential,
    pub rotation: RotationSpec,
    pub gravity: GravitySpec,
    pub mass: f64,
}

impl TrapConfig {
    pub fn new(potential: TrapPotential, rotation: RotationSpec, g: Vec3, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: mass,
            });
        }
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gravity",
                value: linalg::norm(&g),
            });
        }
        Ok(Self {
            potential,
            gravity: GravitySpec::new(g, rotation.axis()),
            rotation,
            mass,
        })
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Ok(Self {
            rotation: self.rotation.with_omega(omega)?,
            ..*self
        })
    }

    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Self::new(self.potential, self.rotation, *self.gravity.vector(), mass)
    }

    pub fn with_gravity(&self, g: Vec3) -> Result<Self> {
        Self::new(self.potential, self.rotation, g, self.mass)
    }

    /// Complex drive amplitude `h = g_perp + i (n x g_perp)`.
    pub fn drive(&self) -> CVec3 {
        self.gravity.drive(self.rotation.axis())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn hz_constructor_is_exact() {
        let v = TrapPotential::from_frequencies_hz([10.0, 15.0, 20.0]).unwrap();
        let m = v.matrix();
        assert_eq!(m[0][0], (2.0 * PI * 10.0) * (2.0 * PI * 10.0));
        assert_eq!(m[1][1], (2.0 * PI * 15.0) * (2.0 * PI * 15.0));
        assert_eq!(m[2][2], (2.0 * PI * 20.0) * (2.0 * PI * 20.0));
        assert_eq!(m[0][1], 0.0);
    }

    #[test]
    fn potential_rejects_indefinite() {
        assert!(matches!(
            TrapPotential::from_diagonal([1.0, -2.0, 3.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let mut m = linalg::diag(&[1.0, 2.0, 3.0]);
        m[0][2] = 1e-6;
        assert!(matches!(TrapPotential::new(m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn omega_matrix_is_cross_product() {
        let rot = RotationSpec::from_axis([1.0, -2.0, 0.5], 1.7).unwrap();
        let m = rot.omega_matrix();
        let r = [0.3, 0.9, -1.1];
        let want = linalg::cross(&linalg::scale(rot.axis(), 1.7), &r);
        let got = linalg::mat_vec(m, &r);
        for i in 0..3 {
            assert!((got[i] - want[i]).abs() < 1e-15);
            for j in 0..3 {
                assert_eq!(m[i][j], -m[j][i]);
            }
        }
        let null = linalg::mat_vec(m, rot.axis());
        assert!(linalg::norm(&null) < 1e-15);
    }

    #[test]
    fn rotation_requires_unit_axis() {
        assert_eq!(RotationSpec::new([1.0, 1.0, 0.0], 1.0), Err(Error::InvalidAxis));
        assert!(RotationSpec::new([0.0, 0.0, 1.0], 1.0).is_ok());
        assert_eq!(RotationSpec::from_axis([0.0; 3], 1.0), Err(Error::InvalidAxis));
        assert!(matches!(
            RotationSpec::from_axis([0.0, 0.0, 1.0], -1.0),
            Err(Error::InvalidParameter { name: "omega", .. })
        ));
    }

    #[test]
    fn gravity_split() {
        let n = linalg::scale(&[1.0, 1.0, 1.0], 1.0 / libm::sqrt(3.0));
        let g = [0.0, 0.0, 9.81];
        let spec = GravitySpec::new(g, &n);
        let sum = linalg::add(spec.parallel(), spec.perpendicular());
        assert_eq!(sum, g);
        assert!(linalg::dot(spec.parallel(), spec.perpendicular()).abs() < 1e-12 * 9.81 * 9.81);
    }

    #[test]
    fn mass_must_be_positive() {
        let v = TrapPotential::from_diagonal([1.0, 2.0, 3.0]).unwrap();
        let rot = RotationSpec::new([0.0, 0.0, 1.0], 1.0).unwrap();
        assert!(TrapConfig::new(v, rot, [0.0; 3], 0.0).is_err());
        assert!(TrapConfig::new(v, rot, [0.0; 3], 2.0).is_ok());
    }
}
