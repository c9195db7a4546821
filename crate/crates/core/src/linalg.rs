//! Fixed-size dense linear algebra for the 3x3 and 6x6 problems of the trap.
//!
//! Real vectors and matrices are plain arrays. Complex matrices are
//! `[[C64; N]; N]` with const `N`, stored row-major.

use libm::{fabs, sqrt};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type CVec<const N: usize> = [C64; N];
pub type CMat<const N: usize> = [[C64; N]; N];
pub type CVec3 = CVec<3>;
pub type CMat3 = CMat<3>;

pub const ZERO3: Vec3 = [0.0; 3];
pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const CZERO: C64 = C64::new(0.0, 0.0);
const CONE: C64 = C64::new(1.0, 0.0);

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Vec3) -> f64 {
    sqrt(dot(a, a))
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Quadratic form `a . m . b`.
pub fn quad(a: &Vec3, m: &Mat3, b: &Vec3) -> f64 {
    dot(a, &mat_vec(m, b))
}

pub fn frobenius(m: &Mat3) -> f64 {
    sqrt(m.iter().flatten().map(|x| x * x).sum())
}

pub fn diag(d: &Vec3) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

/// Antisymmetric matrix with `cross_matrix(w) . r == w x r`.
pub fn cross_matrix(w: &Vec3) -> Mat3 {
    [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
}

pub fn to_complex_vec<const N: usize>(v: &[f64; N]) -> CVec<N> {
    core::array::from_fn(|i| C64::from(v[i]))
}

pub fn to_complex<const N: usize>(m: &[[f64; N]; N]) -> CMat<N> {
    let mut out = [[CZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = C64::from(m[i][j]);
        }
    }
    out
}

pub fn re<const N: usize>(v: &CVec<N>) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = v[i].re;
    }
    out
}

/// Hermitian inner product `x^dagger y`.
pub fn cdot<const N: usize>(x: &CVec<N>, y: &CVec<N>) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Bilinear (non-conjugated) product `x^T y`.
pub fn cdot_plain<const N: usize>(x: &CVec<N>, y: &CVec<N>) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn cnorm<const N: usize>(x: &CVec<N>) -> f64 {
    sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

pub fn cscale<const N: usize>(x: &CVec<N>, s: C64) -> CVec<N> {
    let mut out = *x;
    out.iter_mut().for_each(|z| *z *= s);
    out
}

pub fn cadd<const N: usize>(x: &CVec<N>, y: &CVec<N>) -> CVec<N> {
    let mut out = *x;
    out.iter_mut().zip(y).for_each(|(a, b)| *a += b);
    out
}

pub fn csub<const N: usize>(x: &CVec<N>, y: &CVec<N>) -> CVec<N> {
    let mut out = *x;
    out.iter_mut().zip(y).for_each(|(a, b)| *a -= b);
    out
}

pub fn cmat_vec<const N: usize>(m: &CMat<N>, v: &CVec<N>) -> CVec<N> {
    let mut out = [CZERO; N];
    for i in 0..N {
        out[i] = m[i].iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn cmat_mul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = [[CZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn cadjoint<const N: usize>(m: &CMat<N>) -> CMat<N> {
    let mut out = [[CZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = m[j][i].conj();
        }
    }
    out
}

pub fn cidentity<const N: usize>() -> CMat<N> {
    let mut out = [[CZERO; N]; N];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = CONE;
    }
    out
}

pub fn cfrobenius<const N: usize>(m: &CMat<N>) -> f64 {
    sqrt(m.iter().flatten().map(|z| z.norm_sqr()).sum())
}

/// `a + s * b` elementwise.
pub fn cmat_axpy<const N: usize>(a: &CMat<N>, s: C64, b: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] += s * b[i][j];
        }
    }
    out
}

/// `m - shift * I`.
pub fn cshift<const N: usize>(m: &CMat<N>, shift: C64) -> CMat<N> {
    let mut out = *m;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= shift;
    }
    out
}

/// Eigen-decomposition of a real symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    /// Ascending eigenvalues.
    pub values: Vec3,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [Vec3; 3],
}

impl SymEigen {
    pub fn reconstruct(&self) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for k in 0..3 {
            let e = &self.vectors[k];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += self.values[k] * e[i] * e[j];
                }
            }
        }
        out
    }
}

pub(crate) fn asymmetry(m: &Mat3) -> f64 {
    let scale = frobenius(m);
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max(fabs(m[i][j] - m[j][i]));
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        0.0
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric 3x3 matrix.
pub fn eig_sym3(m: &Mat3) -> Result<SymEigen> {
    let asym = asymmetry(m);
    if asym > 1e-12 || !m.iter().flatten().all(|x| x.is_finite()) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let mut sym = *m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            sym[i][j] = avg;
            sym[j][i] = avg;
        }
    }
    let herm = eig_hermitian(&to_complex(&sym))?;
    let mut vectors = [ZERO3; 3];
    for (k, v) in herm.vectors.iter().enumerate() {
        vectors[k] = re(v);
        let len = norm(&vectors[k]);
        vectors[k] = scale(&vectors[k], 1.0 / len);
    }
    Ok(SymEigen {
        values: herm.values,
        vectors,
    })
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen<const N: usize> {
    /// Ascending real eigenvalues.
    pub values: [f64; N],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [CVec<N>; N],
}

/// Cyclic complex Jacobi sweeps.
///
/// Real symmetric input stays real throughout: the phase of every pivot is
/// then `0` or `pi`.
pub fn eig_hermitian<const N: usize>(m: &CMat<N>) -> Result<HermitianEigen<N>> {
    let scale = cfrobenius(m);
    let mut worst = 0.0_f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    if scale > 0.0 && worst > 1e-10 * scale {
        return Err(Error::NotSymmetric {
            asymmetry: worst / scale,
        });
    }
    let mut a = *m;
    for i in 0..N {
        a[i][i] = C64::from(a[i][i].re);
    }
    let mut v: CMat<N> = cidentity();

    let off = |a: &CMat<N>| -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    s += a[i][j].norm_sqr();
                }
            }
        }
        sqrt(s)
    };

    let mut converged = false;
    for _sweep in 0..100 {
        if off(&a) <= 1e-15 * scale || scale == 0.0 {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let theta = 0.5 * libm::atan2(2.0 * r, aqq - app);
                let (s, c) = libm::sincos(theta);
                // U = D R with D = diag(1, conj(phase)) on (p, q).
                let u_pp = C64::from(c);
                let u_pq = C64::from(s);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                // A <- A U (columns p, q)
                for row in a.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = xp * u_pp + xq * u_qp;
                    row[q] = xp * u_pq + xq * u_qq;
                }
                // A <- U^dagger A (rows p, q)
                for col in 0..N {
                    let xp = a[p][col];
                    let xq = a[q][col];
                    a[p][col] = u_pp.conj() * xp + u_qp.conj() * xq;
                    a[q][col] = u_pq.conj() * xp + u_qq.conj() * xq;
                }
                a[p][q] = CZERO;
                a[q][p] = CZERO;
                a[p][p] = C64::from(a[p][p].re);
                a[q][q] = C64::from(a[q][q].re);
                for row in v.iter_mut() {
                    let xp = row[p];
                    let xq = row[q];
                    row[p] = xp * u_pp + xq * u_qp;
                    row[q] = xp * u_pq + xq * u_qq;
                }
            }
        }
    }
    if !converged && off(&a) > 1e-12 * scale {
        return Err(Error::NoConvergence);
    }

    let mut order = [0usize; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let mut values = [0.0; N];
    let mut vectors = [[CZERO; N]; N];
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[i][i].re;
        for row in 0..N {
            vectors[k][row] = v[row][i];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigen-decomposition of a general complex matrix with a biorthogonal dual basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigen<const N: usize> {
    pub values: CVec<N>,
    /// `right[k]`: unit vector with `m x = values[k] x`.
    pub right: [CVec<N>; N],
    /// `left[k]`: `y^dagger m = values[k] y^dagger`, scaled so that `left[i]^dagger right[j] = delta_ij`.
    pub left: [CVec<N>; N],
}

impl<const N: usize> ComplexEigen<N> {
    /// Coefficients of `v` in the right eigenbasis.
    pub fn coefficients(&self, v: &CVec<N>) -> CVec<N> {
        let mut out = [CZERO; N];
        for k in 0..N {
            out[k] = cdot(&self.left[k], v);
        }
        out
    }

    /// `sum_k c_k right[k]`.
    pub fn combine(&self, c: &CVec<N>) -> CVec<N> {
        let mut out = [CZERO; N];
        for k in 0..N {
            for i in 0..N {
                out[i] += c[k] * self.right[k][i];
            }
        }
        out
    }
}

/// Eigenvalues with right and left eigenvectors of a 3x3 or 6x6 complex matrix.
///
/// Eigenvalues come from a shifted QR iteration on the Hessenberg form;
/// eigenvectors from inverse iteration. Clusters of (numerically) equal
/// eigenvalues are accepted only if they carry a full eigenspace; otherwise
/// [`Error::DegenerateSpectrum`] is returned.
pub fn eig_complex<const N: usize>(m: &CMat<N>) -> Result<ComplexEigen<N>> {
    if N != 3 && N != 6 {
        return Err(Error::UnsupportedSize(N));
    }
    let values = eigenvalues(m)?;
    let scale = cfrobenius(m).max(f64::MIN_POSITIVE);
    let adj = cadjoint(m);

    let mut right = [[CZERO; N]; N];
    let mut left = [[CZERO; N]; N];
    let cluster_tol = 1e-6 * scale;
    let mut assigned = [false; N];
    for k in 0..N {
        if assigned[k] {
            continue;
        }
        // Members of the cluster containing eigenvalue k.
        let mut members = [0usize; N];
        let mut count = 0;
        for j in k..N {
            if !assigned[j] && (values[j] - values[k]).norm() <= cluster_tol {
                members[count] = j;
                count += 1;
                assigned[j] = true;
            }
        }
        let members = &members[..count];
        let mut center = CZERO;
        for &j in members {
            center += values[j];
        }
        center /= count as f64;

        for (slot, &j) in members.iter().enumerate() {
            let shift = if count == 1 { values[j] } else { center };
            right[j] = inverse_iteration(m, shift, slot, &right, &members[..slot], scale);
            left[j] = inverse_iteration(&adj, shift.conj(), slot, &left, &members[..slot], scale);
        }

        for &j in members {
            let resid = cnorm(&csub(&cmat_vec(m, &right[j]), &cscale(&right[j], values[j])));
            let resid_left = cnorm(&csub(&cmat_vec(&adj, &left[j]), &cscale(&left[j], values[j].conj())));
            if resid > 1e-9 * scale || resid_left > 1e-9 * scale {
                return Err(Error::DegenerateSpectrum);
            }
        }

        // Biorthogonalise inside the cluster: left <- left * G^{-dagger}, G = left^dagger right.
        let mut gram = [[CZERO; N]; N];
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                gram[a][b] = cdot(&left[i], &right[j]);
            }
        }
        let gram_inv = invert_small(&gram, count).ok_or(Error::DegenerateSpectrum)?;
        // Condition check: a defective block gives left and right vectors that are nearly orthogonal.
        let mut min_overlap = f64::INFINITY;
        for a in 0..count {
            min_overlap = min_overlap.min(gram[a][a].norm());
        }
        if count == 1 && min_overlap < 1e-7 {
            return Err(Error::DegenerateSpectrum);
        }
        let mut new_left = [[CZERO; N]; N];
        for (b, _) in members.iter().enumerate() {
            for row in 0..N {
                let mut s = CZERO;
                for (a, &i) in members.iter().enumerate() {
                    // (G^{-dagger})_{a b} = conj(G^{-1}_{b a})
                    s += left[i][row] * gram_inv[b][a].conj();
                }
                new_left[b][row] = s;
            }
        }
        for (b, &j) in members.iter().enumerate() {
            left[j] = new_left[b];
        }
    }

    Ok(ComplexEigen { values, right, left })
}

/// Inverse of a `count x count` leading block (count <= 6) by Gauss-Jordan.
fn invert_small<const N: usize>(g: &CMat<N>, count: usize) -> Option<[[C64; N]; N]> {
    let mut a = *g;
    let mut inv: CMat<N> = cidentity();
    let scale = (0..count)
        .flat_map(|i| (0..count).map(move |j| (i, j)))
        .map(|(i, j)| g[i][j].norm())
        .fold(0.0, f64::max);
    for col in 0..count {
        let pivot = (col..count).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() <= 1e-7 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..count {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..count {
            if i != col {
                let f = a[i][col];
                for j in 0..count {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[i][j] -= f * ac;
                    inv[i][j] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

fn start_vector<const N: usize>(slot: usize) -> CVec<N> {
    let mut x = [CZERO; N];
    for (i, xi) in x.iter_mut().enumerate() {
        let t = (i + 1) as f64 * 0.754_877_666 + slot as f64 * 0.569_840_290;
        *xi = C64::new(1.0 + libm::sin(3.1 * t), 0.5 * libm::cos(1.7 * t + 0.3));
    }
    x
}

fn inverse_iteration<const N: usize>(
    m: &CMat<N>,
    shift: C64,
    slot: usize,
    found: &[CVec<N>; N],
    previous: &[usize],
    scale: f64,
) -> CVec<N> {
    let lu = Lu::factor_perturbed(&cshift(m, shift), 1e-15 * scale);
    let mut x = start_vector::<N>(slot);
    for _ in 0..4 {
        x = lu.solve(&x);
        for &j in previous {
            let proj = cdot(&found[j], &x);
            x = csub(&x, &cscale(&found[j], proj));
        }
        let len = cnorm(&x);
        if len == 0.0 || !len.is_finite() {
            x = start_vector::<N>(slot + 7);
            continue;
        }
        x = cscale(&x, C64::from(1.0 / len));
    }
    x
}

/// LU factorisation with partial pivoting.
pub struct Lu<const N: usize> {
    lu: CMat<N>,
    perm: [usize; N],
    singular: bool,
}

impl<const N: usize> Lu<N> {
    pub fn factor(m: &CMat<N>) -> Self {
        Self::factor_inner(m, None)
    }

    /// Zero pivots are replaced by `floor`, which is what inverse iteration needs.
    fn factor_perturbed(m: &CMat<N>, floor: f64) -> Self {
        Self::factor_inner(m, Some(floor.max(f64::MIN_POSITIVE)))
    }

    fn factor_inner(m: &CMat<N>, floor: Option<f64>) -> Self {
        let mut lu = *m;
        let mut perm = [0usize; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut singular = false;
        for col in 0..N {
            let mut pivot = col;
            for row in (col + 1)..N {
                if lu[row][col].norm() > lu[pivot][col].norm() {
                    pivot = row;
                }
            }
            lu.swap(col, pivot);
            perm.swap(col, pivot);
            if let Some(f) = floor {
                if lu[col][col].norm() < f {
                    lu[col][col] = C64::from(f);
                }
            }
            let d = lu[col][col];
            if d.norm() == 0.0 {
                singular = true;
                continue;
            }
            for row in (col + 1)..N {
                let factor = lu[row][col] / d;
                lu[row][col] = factor;
                for j in (col + 1)..N {
                    let u = lu[col][j];
                    lu[row][j] -= factor * u;
                }
            }
        }
        Self { lu, perm, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &CVec<N>) -> CVec<N> {
        let mut y = [CZERO; N];
        for i in 0..N {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i][j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..N).rev() {
            let mut s = y[i];
            for j in (i + 1)..N {
                s -= self.lu[i][j] * y[j];
            }
            y[i] = s / self.lu[i][i];
        }
        y
    }
}

/// Solve `m x = b`; `None` if `m` is exactly singular.
pub fn csolve<const N: usize>(m: &CMat<N>, b: &CVec<N>) -> Option<CVec<N>> {
    let lu = Lu::factor(m);
    if lu.is_singular() {
        None
    } else {
        Some(lu.solve(b))
    }
}

/// Eigenvalues by Householder reduction to Hessenberg form followed by
/// single-shift complex QR with Wilkinson shifts.
pub fn eigenvalues<const N: usize>(m: &CMat<N>) -> Result<CVec<N>> {
    let mut h = *m;
    hessenberg(&mut h);
    let mut values = [CZERO; N];
    if N == 0 {
        return Ok(values);
    }
    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Deflation search.
        let mut l = hi;
        while l > 0 {
            let s = h[l][l].norm() + h[l - 1][l - 1].norm();
            let s = if s == 0.0 { cfrobenius(&h) } else { s };
            if h[l][l - 1].norm() <= f64::EPSILON * s {
                h[l][l - 1] = CZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            values[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * N {
            return Err(Error::NoConvergence);
        }

        let a = h[hi - 1][hi - 1];
        let b = h[hi - 1][hi];
        let c = h[hi][hi - 1];
        let d = h[hi][hi];
        let mut mu = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            d + C64::from(h[hi][hi - 1].norm() * 0.75)
        } else {
            let half = (a - d) * 0.5;
            let root = (half * half + b * c).sqrt();
            let m1 = d - b * c / (half + root);
            let m2 = d - b * c / (half - root);
            let pick = |x: C64| if x.is_finite() { Some(x) } else { None };
            match (pick(m1), pick(m2)) {
                (Some(x), Some(y)) => {
                    if (x - d).norm() <= (y - d).norm() {
                        x
                    } else {
                        y
                    }
                }
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => d,
            }
        };
        if !mu.is_finite() {
            mu = d;
        }

        // One implicit-free QR sweep on the active block [l, hi].
        for i in l..=hi {
            h[i][i] -= mu;
        }
        let mut rotations = [(0.0_f64, CZERO); N];
        for k in l..hi {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = sqrt(x.norm_sqr() + y.norm_sqr());
            let (c, s) = if r == 0.0 {
                (1.0, CZERO)
            } else {
                (
                    x.norm() / r,
                    if x.norm() == 0.0 {
                        y.conj() / r
                    } else {
                        (x / x.norm()) * y.conj() / r
                    },
                )
            };
            // G = [[c, s], [-conj(s), c]] acting on rows k, k+1: zeroes h[k+1][k].
            rotations[k] = (c, s);
            for j in k..=hi {
                let p = h[k][j];
                let q = h[k + 1][j];
                h[k][j] = p * c + s * q;
                h[k + 1][j] = -s.conj() * p + q * c;
            }
        }
        for k in l..hi {
            let (c, s) = rotations[k];
            // Right-multiply by G^dagger on columns k, k+1.
            let top = (k + 2).min(hi);
            for i in l..=top {
                let p = h[i][k];
                let q = h[i][k + 1];
                h[i][k] = p * c + q * s.conj();
                h[i][k + 1] = -p * s + q * c;
            }
        }
        for i in l..=hi {
            h[i][i] += mu;
        }
    }
    values[0] = h[0][0];
    Ok(values)
}

fn hessenberg<const N: usize>(h: &mut CMat<N>) {
    if N < 3 {
        return;
    }
    for k in 0..N - 2 {
        let alpha_norm = sqrt(((k + 1)..N).map(|i| h[i][k].norm_sqr()).sum::<f64>());
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() == 0.0 { CONE } else { x0 / x0.norm() };
        let mut v = [CZERO; N];
        for i in (k + 1)..N {
            v[i] = h[i][k];
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- P H P with P = I - 2 v v^dagger / |v|^2.
        for j in 0..N {
            let s: C64 = ((k + 1)..N).map(|i| v[i].conj() * h[i][j]).sum();
            let f = s * 2.0 / vnorm2;
            for i in (k + 1)..N {
                h[i][j] -= v[i] * f;
            }
        }
        for i in 0..N {
            let s: C64 = ((k + 1)..N).map(|j| h[i][j] * v[j]).sum();
            let f = s * 2.0 / vnorm2;
            for j in (k + 1)..N {
                h[i][j] -= f * v[j].conj();
            }
        }
        for i in (k + 2)..N {
            h[i][k] = CZERO;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn rotation(axis: &Vec3, angle: f64) -> Mat3 {
        let k = cross_matrix(&scale(axis, 1.0 / norm(axis)));
        let k2 = mat_mul(&k, &k);
        let mut r = IDENTITY3;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += libm::sin(angle) * k[i][j] + (1.0 - libm::cos(angle)) * k2[i][j];
            }
        }
        r
    }

    #[test]
    fn sym3_diagonal() {
        let e = eig_sym3(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, [1.0, 2.0, 3.0]);
        assert!((fabs(e.vectors[0][1]) - 1.0).abs() < 1e-15);
        assert!((fabs(e.vectors[2][0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sym3_identity_any_orthonormal_basis() {
        let e = eig_sym3(&IDENTITY3).unwrap();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&e.vectors[i], &e.vectors[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sym3_rotated_diagonal() {
        let r = rotation(&[0.3, -1.2, 0.7], 0.83);
        let m = mat_mul(&mat_mul(&r, &diag(&[1.0, 2.0, 3.0])), &transpose(&r));
        let e = eig_sym3(&m).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        let back = e.reconstruct();
        let mut err = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                err = err.max(fabs(back[i][j] - m[i][j]));
            }
        }
        assert!(err < 1e-10 * frobenius(&m));
    }

    #[test]
    fn sym3_rejects_asymmetric() {
        let mut m = diag(&[1.0, 2.0, 3.0]);
        m[0][1] = 0.1;
        assert!(matches!(eig_sym3(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn complex_diagonal() {
        let mut m: CMat3 = [[CZERO; 3]; 3];
        m[0][0] = C64::new(1.0, 2.0);
        m[1][1] = C64::new(-3.0, 0.5);
        m[2][2] = C64::new(0.0, -1.0);
        let e = eig_complex(&m).unwrap();
        let mut got: std::vec::Vec<C64> = e.values.to_vec();
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((got[0] - C64::new(-3.0, 0.5)).norm() < 1e-14);
        assert!((got[1] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((got[2] - C64::new(1.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn cross_product_matrix_spectrum() {
        let n = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        let m = to_complex(&cross_matrix(&n));
        let e = eig_complex(&m).unwrap();
        let mut got: std::vec::Vec<C64> = e.values.to_vec();
        got.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((got[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(got[1].norm() < 1e-12);
        assert!((got[2] - C64::new(0.0, 1.0)).norm() < 1e-12);
        check_biorthogonal(&m, &e);
    }

    fn check_biorthogonal<const N: usize>(m: &CMat<N>, e: &ComplexEigen<N>) {
        let s = cfrobenius(m);
        for k in 0..N {
            let x = &e.right[k];
            let r = cnorm(&csub(&cmat_vec(m, x), &cscale(x, e.values[k])));
            assert!(r < 1e-9 * s * cnorm(x), "right residual {r}");
            for j in 0..N {
                let d = cdot(&e.left[k], &e.right[j]);
                let want = if j == k { CONE } else { CZERO };
                assert!((d - want).norm() < 1e-9, "biorthogonality ({k},{j}) = {d}");
            }
        }
    }

    #[test]
    fn identity_is_not_defective() {
        let m: CMat<6> = cidentity();
        let e = eig_complex(&m).unwrap();
        for v in e.values {
            assert!((v - CONE).norm() < 1e-14);
        }
        check_biorthogonal(&m, &e);
    }

    #[test]
    fn jordan_block_is_degenerate() {
        let mut m: CMat3 = [[CZERO; 3]; 3];
        m[0][1] = CONE;
        m[2][2] = C64::from(2.0);
        assert_eq!(eig_complex(&m), Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn general_real_matrix_conjugate_pairs() {
        let raw = [
            [0.1, 1.0, 0.0, 0.3, 0.0, 0.0],
            [-2.0, 0.0, 0.5, 0.0, 0.0, 1.0],
            [0.0, 0.2, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -3.0, 0.0, 0.7, 0.0],
            [0.4, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, -0.1, 0.0, 0.0, -5.0, 0.2],
        ];
        let m = to_complex(&raw);
        let e = eig_complex(&m).unwrap();
        check_biorthogonal(&m, &e);
        for v in e.values {
            let partner = e
                .values
                .iter()
                .map(|w| (w - v.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-10);
        }
    }

    #[test]
    fn unsupported_size() {
        let m: CMat<4> = cidentity();
        assert_eq!(eig_complex(&m), Err(Error::UnsupportedSize(4)));
    }

    #[test]
    fn hermitian_jacobi() {
        let m: CMat3 = [
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, -0.5)],
            [C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.3)],
            [C64::new(0.5, 0.5), C64::new(0.0, -0.3), C64::new(0.7, 0.0)],
        ];
        let e = eig_hermitian(&m).unwrap();
        assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
        for k in 0..3 {
            let x = &e.vectors[k];
            let r = cnorm(&csub(&cmat_vec(&m, x), &cscale(x, C64::from(e.values[k]))));
            assert!(r < 1e-12);
        }
    }
}
