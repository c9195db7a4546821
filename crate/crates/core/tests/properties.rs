use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rotrap_core::analytic;
use rotrap_core::dynamics;
use rotrap_core::linalg::{self, Mat3, Vec3};
use rotrap_core::resonance;
use rotrap_core::spectrum::{self, Stability};
use rotrap_core::{PhaseState, RotationSpec, Tolerances, TrapConfig, TrapPotential};

fn rotation_from_quaternion(q: [f64; 4]) -> Mat3 {
    let n = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn unit(v: Vec3) -> Vec3 {
    linalg::scale(&v, 1.0 / linalg::norm(&v))
}

prop_compose! {
    fn principal_values()(a in 0.5f64..5.0, b in 0.5f64..5.0, c in 0.5f64..5.0) -> Vec3 { [a, b, c] }
}

prop_compose! {
    fn quaternion()(q in prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-degenerate", |q| q.iter().map(|x| x * x).sum::<f64>() > 0.05)) -> [f64; 4] { q }
}

prop_compose! {
    fn axis()(v in prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("non-zero", |v| linalg::norm(v) > 0.1)) -> Vec3 { unit(v) }
}

prop_compose! {
    fn trap()(d in principal_values(), q in quaternion()) -> TrapPotential {
        TrapPotential::from_diagonal(d).unwrap().rotated(&rotation_from_quaternion(q)).unwrap()
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det6(mut m: [[f64; 6]; 6]) -> f64 {
    let mut det = 1.0;
    for col in 0..6 {
        let piv = (col..6)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..6 {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
        }
    }
    det
}

fn config(v: TrapPotential, n: Vec3, omega: f64, g: Vec3, mass: f64) -> TrapConfig {
    TrapConfig::new(v, RotationSpec::new(n, omega).unwrap(), g, mass).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cubic_matches_six_by_six_determinant(v in trap(), n in axis(), omega in 0.0f64..3.0,
                                            mass in 0.2f64..5.0, lam in -2.0f64..2.0) {
        let q = spectrum::char_poly_coeffs(&v, &n, omega);
        let sys = dynamics::system_matrix(&config(v, n, omega, [0.0; 3], mass));
        let mut shifted = sys.m_mat;
        for (i, row) in shifted.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j { lam } else { 0.0 } - *x;
            }
        }
        // det(lam - M) = -Q(-lam^2)
        let direct = det6(shifted);
        let via_cubic = -q.eval_real(-lam * lam);
        let scale = 1.0 + q.a_coef.abs().powi(3) + q.b_coef.abs().powf(1.5) + q.c_coef.abs() + lam.powi(6);
        prop_assert!((direct - via_cubic).abs() < 1e-9 * scale, "{direct} vs {via_cubic}");
    }

    #[test]
    fn system_eigenvalues_are_roots(v in trap(), n in axis(), omega in 0.0f64..3.0, mass in 0.2f64..5.0) {
        let tol = Tolerances::default();
        let s = spectrum::mode_spectrum(&v, &n, omega, &tol);
        let sys = dynamics::system_matrix(&config(v, n, omega, [0.0; 3], mass));
        if let Ok(vals) = linalg::eigenvalues(&sys.complex()) {
            for lam in vals {
                let chi = -(lam * lam);
                let r = s.coefficients.eval(chi).norm();
                let scale = 1.0 + chi.norm().powi(3) + s.coefficients.c_coef.abs();
                prop_assert!(r < 1e-7 * scale, "residual {r}");
            }
        }
    }

    #[test]
    fn coefficients_are_rotation_invariant(d in principal_values(), q in quaternion(), n in axis(),
                                           omega in 0.0f64..3.0) {
        let r = rotation_from_quaternion(q);
        let v = TrapPotential::from_diagonal(d).unwrap();
        let a = spectrum::char_poly_coeffs(&v, &n, omega);
        let b = spectrum::char_poly_coeffs(&v.rotated(&r).unwrap(), &linalg::mat_vec(&r, &n), omega);
        for (x, y) in [(a.a_coef, b.a_coef), (a.b_coef, b.b_coef), (a.c_coef, b.c_coef)] {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn roots_scale_with_trap(v in trap(), n in axis(), omega in 0.0f64..3.0, s in 0.3f64..4.0) {
        let tol = Tolerances::default();
        let a = spectrum::mode_spectrum(&v, &n, omega, &tol);
        let b = spectrum::mode_spectrum(&v.scaled(s * s).unwrap(), &n, s * omega, &tol);
        if !a.marginal && !b.marginal {
            prop_assert_eq!(a.classification, b.classification);
        }
        for (x, y) in a.chi_roots.iter().zip(b.chi_roots.iter()) {
            prop_assert!((x * (s * s) - y).norm() < 1e-7 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn complex_roots_come_in_conjugate_pairs(v in trap(), n in axis(), omega in 0.0f64..4.0) {
        let s = spectrum::mode_spectrum(&v, &n, omega, &Tolerances::default());
        let complex: Vec<C64> = s.chi_roots.iter().copied().filter(|z| z.im != 0.0).collect();
        prop_assert!(complex.is_empty() || complex.len() == 2);
        if complex.len() == 2 {
            prop_assert_eq!(complex[0], complex[1].conj());
        }
        for pair in s.omega_values.chunks(2) {
            prop_assert_eq!(pair[0], -pair[1]);
        }
    }

    #[test]
    fn principal_axis_rotation_never_oscillatory(d in principal_values(), k in 0usize..3, omega in 0.0f64..5.0) {
        let v = TrapPotential::from_diagonal(d).unwrap();
        let mut n = [0.0; 3];
        n[k] = 1.0;
        let s = spectrum::mode_spectrum(&v, &n, omega, &Tolerances::default());
        prop_assert!(s.classification != Stability::OscillatoryInstability || s.marginal);
        let f = spectrum::axis_aligned_spectrum(&v, &n, omega, &Tolerances::default()).unwrap();
        prop_assert!(f.delta >= 0.0);
    }

    #[test]
    fn stable_below_first_critical_rate(v in trap(), n in axis(), frac in 0.0f64..0.999) {
        let b = spectrum::lower_instability_bounds(&v, &n);
        let s = spectrum::mode_spectrum(&v, &n, frac * b.omega1, &Tolerances::default());
        prop_assert!(s.classification == Stability::Stable || s.marginal);
    }

    #[test]
    fn gravity_rotates_rigidly(n in axis(), g in prop::array::uniform3(-10.0f64..10.0),
                               omega in 0.0f64..5.0, t in 0.0f64..20.0) {
        let rot = RotationSpec::new(n, omega).unwrap();
        let spec = rotrap_core::GravitySpec::new(g, &n);
        let gt = dynamics::gravity_rotating_frame(&spec, &rot, t);
        prop_assert!((linalg::norm(&gt) - linalg::norm(&g)).abs() < 1e-12 * (1.0 + linalg::norm(&g)));
        prop_assert!((linalg::dot(&gt, &n) - linalg::dot(&g, &n)).abs() < 1e-12 * (1.0 + linalg::norm(&g)));
    }

    #[test]
    fn n_matrix_hermitian(v in trap(), n in axis(), omega in 0.0f64..3.0, w in -3.0f64..3.0) {
        let rot = RotationSpec::new(n, omega).unwrap();
        prop_assert!(analytic::n_matrix(&v, &rot, w).hermitian_defect() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lower_resonance_never_exceeds_critical_rate(v in trap(), n in axis()) {
        let audit = resonance::verify_lower_resonance_stable(&v, &n, &Tolerances::default());
        prop_assert!(audit.holds(), "{audit:?}");
        prop_assert!(audit.slope_resonance >= audit.slope_critical);
    }

    #[test]
    fn resonances_are_self_consistent(v in trap(), n in axis()) {
        let r = resonance::resonant_omegas(&v, &n, &Tolerances::default());
        prop_assert!(r.omega_minus <= r.omega_plus);
        for w in r.omegas() {
            let q = spectrum::char_poly_coeffs(&v, &n, w);
            let x = w * w;
            let scale = x.powi(3) + q.a_coef.abs() * x * x + q.b_coef.abs() * x + q.c_coef.abs();
            prop_assert!(q.eval_real(x).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn discriminant_split_is_nonnegative(v in trap(), n in axis()) {
        let (d, e, f) = resonance::resonance_coefficients(&v, &n);
        let s = resonance::discriminant_split(&v, &n);
        let disc = e * e - 4.0 * d * f;
        prop_assert!(s.term1 >= -1e-12 && s.term2 >= -1e-12);
        prop_assert!((s.total() - disc).abs() < 1e-9 * (e * e + (4.0 * d * f).abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonances_scale_and_ignore_mass(v in trap(), n in axis(), s in 0.3f64..4.0) {
        let tol = Tolerances::default();
        let a = resonance::resonant_omegas(&v, &n, &tol);
        let b = resonance::resonant_omegas(&v.scaled(s * s).unwrap(), &n, &tol);
        prop_assert!((b.omega_minus - s * a.omega_minus).abs() < 1e-10 * b.omega_minus);
        prop_assert!((b.omega_plus - s * a.omega_plus).abs() < 1e-10 * b.omega_plus);
    }

    #[test]
    fn mass_does_not_change_mode_frequencies(v in trap(), n in axis(), omega in 0.0f64..2.0, mass in 0.2f64..5.0) {
        let a = linalg::eigenvalues(&dynamics::system_matrix(&config(v, n, omega, [0.0; 3], 1.0)).complex());
        let b = linalg::eigenvalues(&dynamics::system_matrix(&config(v, n, omega, [0.0; 3], mass)).complex());
        if let (Ok(a), Ok(b)) = (a, b) {
            for x in a {
                let best = b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-7 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn resonant_projectors_resolve_identity(v in trap(), n in axis(), upper in any::<bool>(),
                                            g in prop::array::uniform3(-1.0f64..1.0)) {
        let r = resonance::resonant_omegas(&v, &n, &Tolerances::default());
        let w = if upper { r.omega_plus } else { r.omega_minus };
        let rot = RotationSpec::new(n, w).unwrap();
        let nm = analytic::n_matrix(&v, &rot, w);
        let smallest = linalg::eig_hermitian(&nm.n_mat).unwrap().values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(smallest < 1e-8 * nm.norm());
        let cfg = TrapConfig::new(v, rot, g, 1.0).unwrap();
        if let Ok(sd) = analytic::spectral_data(&v, &rot, &cfg.drive()) {
            prop_assert!(sd.completeness_error() < 1e-9);
            prop_assert!(sd.projector_algebra_error() < 1e-9);
        }
    }

    #[test]
    fn rk4_matches_mode_expansion(d in principal_values(), q in quaternion(), n in axis(), frac in 0.05f64..0.9,
                                  r0 in prop::array::uniform3(-1e-3f64..1e-3)) {
        let tol = Tolerances::default();
        let v = TrapPotential::from_diagonal(d).unwrap().rotated(&rotation_from_quaternion(q)).unwrap();
        let omega = frac * spectrum::lower_instability_bounds(&v, &n).omega1;
        let cfg = config(v, n, omega, [0.0, 0.0, -0.01], 1.0);
        let res = resonance::resonant_omegas(&v, &n, &tol);
        prop_assume!(res.omegas().iter().all(|w| (w - omega).abs() > 0.02 * w));
        let init = PhaseState::new(r0, [0.0; 3]);
        let dt = dynamics::default_dt(&cfg, &tol);
        let t_end = 10.0 * 2.0 * std::f64::consts::PI / linalg::eig_sym3(v.matrix()).unwrap().values[0].sqrt();
        let rk = dynamics::integrate_rk4(&cfg, &init, t_end, dt).unwrap();
        let md = dynamics::propagate_modes(&cfg, &init, &rk.times).unwrap();
        prop_assert!(rk.max_position_difference(&md) < 1e-6);
    }
}
