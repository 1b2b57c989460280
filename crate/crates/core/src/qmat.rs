//! Dense complex 2x2 / 4x4 matrix core with hermitian eigensolving and
//! quantum-state utilities.
//!
//! Everything here is fixed-size and allocation-free; the 4x4 hermitian
//! eigensolver is a cyclic complex Jacobi iteration, and a separate
//! characteristic-polynomial root finder handles general matrices with a
//! (numerically) real spectrum. The two solvers are algorithmically
//! independent and cross-checked in the test suite.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance for hermiticity / trace checks at construction time.
pub const TOL_CONSTRUCT: f64 = 1e-10;
/// Tolerance for hermiticity checks at operation entry.
pub const TOL_OP_HERMITIAN: f64 = 1e-9;
/// Tolerance for unitarity checks.
pub const TOL_UNITARY: f64 = 1e-10;
/// Eigenvalues in [-TOL_PSD, 0) are treated as floating-point PSD noise.
pub const TOL_PSD: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

macro_rules! impl_matrix {
    ($name:ident, $n:expr) => {
        impl $name {
            pub fn new(entries: [[C64; $n]; $n]) -> Self {
                debug_assert!(
                    entries
                        .iter()
                        .flatten()
                        .all(|z| z.re.is_finite() && z.im.is_finite()),
                    "matrix entries must be finite"
                );
                Self { e: entries }
            }

            pub fn zeros() -> Self {
                Self {
                    e: [[ZERO; $n]; $n],
                }
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.e[i][i] = ONE;
                }
                m
            }

            pub fn from_diagonal(d: [f64; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.e[i][i] = C64::new(d[i], 0.0);
                }
                m
            }

            #[inline]
            pub fn get(&self, row: usize, col: usize) -> C64 {
                self.e[row][col]
            }

            #[inline]
            pub fn set(&mut self, row: usize, col: usize, value: C64) {
                self.e[row][col] = value;
            }

            pub fn adjoint(&self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        out.e[i][j] = self.e[j][i].conj();
                    }
                }
                out
            }

            pub fn transpose(&self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        out.e[i][j] = self.e[j][i];
                    }
                }
                out
            }

            pub fn conj(&self) -> Self {
                let mut out = *self;
                for row in out.e.iter_mut() {
                    for z in row.iter_mut() {
                        *z = z.conj();
                    }
                }
                out
            }

            pub fn mul(&self, rhs: &Self) -> Self {
                let mut out = Self::zeros();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self.e[i][k];
                        if a == ZERO {
                            continue;
                        }
                        for j in 0..$n {
                            out.e[i][j] += a * rhs.e[k][j];
                        }
                    }
                }
                out
            }

            pub fn add(&self, rhs: &Self) -> Self {
                let mut out = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        out.e[i][j] += rhs.e[i][j];
                    }
                }
                out
            }

            pub fn sub(&self, rhs: &Self) -> Self {
                let mut out = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        out.e[i][j] -= rhs.e[i][j];
                    }
                }
                out
            }

            pub fn scale(&self, factor: C64) -> Self {
                let mut out = *self;
                for row in out.e.iter_mut() {
                    for z in row.iter_mut() {
                        *z *= factor;
                    }
                }
                out
            }

            pub fn trace(&self) -> C64 {
                (0..$n).map(|i| self.e[i][i]).sum()
            }

            /// Largest entrywise absolute difference against `rhs`.
            pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
                let mut max = 0.0_f64;
                for i in 0..$n {
                    for j in 0..$n {
                        max = max.max((self.e[i][j] - rhs.e[i][j]).norm());
                    }
                }
                max
            }

            /// Largest |m[i][j] - conj(m[j][i])| over all entries.
            pub fn hermiticity_defect(&self) -> f64 {
                let mut max = 0.0_f64;
                for i in 0..$n {
                    for j in 0..$n {
                        max = max.max((self.e[i][j] - self.e[j][i].conj()).norm());
                    }
                }
                max
            }

            /// Largest entrywise deviation of U U† from the identity.
            pub fn unitarity_defect(&self) -> f64 {
                self.mul(&self.adjoint()).max_abs_diff(&Self::identity())
            }
        }

        impl std::ops::Mul for $name {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name::mul(&self, &rhs)
            }
        }

        impl std::ops::Index<(usize, usize)> for $name {
            type Output = C64;
            fn index(&self, idx: (usize, usize)) -> &C64 {
                &self.e[idx.0][idx.1]
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                writeln!(f, "{} [", stringify!($name))?;
                for i in 0..$n {
                    write!(f, "  ")?;
                    for j in 0..$n {
                        write!(f, "{:+.6}{:+.6}i  ", self.e[i][j].re, self.e[i][j].im)?;
                    }
                    writeln!(f)?;
                }
                write!(f, "]")
            }
        }
    };
}

/// A 2x2 complex matrix (single-qubit operators).
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    e: [[C64; 2]; 2],
}

/// A 4x4 complex matrix (two-qubit operators).
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix4 {
    e: [[C64; 4]; 4],
}

impl_matrix!(ComplexMatrix2, 2);
impl_matrix!(ComplexMatrix4, 4);

/// Pauli sigma_x.
pub const PAULI_X: ComplexMatrix2 = ComplexMatrix2 {
    e: [[ZERO, ONE], [ONE, ZERO]],
};
/// Pauli sigma_y.
pub const PAULI_Y: ComplexMatrix2 = ComplexMatrix2 {
    e: [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]],
};
/// Pauli sigma_z.
pub const PAULI_Z: ComplexMatrix2 = ComplexMatrix2 {
    e: [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
};

impl ComplexMatrix4 {
    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> C64 {
        let m = &self.e;
        let minor = |r: [usize; 3], c: [usize; 3]| -> C64 {
            m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
                - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
                + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
        };
        let rows = [1, 2, 3];
        m[0][0] * minor(rows, [1, 2, 3]) - m[0][1] * minor(rows, [0, 2, 3])
            + m[0][2] * minor(rows, [0, 1, 3])
            - m[0][3] * minor(rows, [0, 1, 2])
    }
}

/// Kronecker product with qubit A as the left factor:
/// `(a ⊗ b)[2i+k, 2j+l] = a[i,j] * b[k,l]`.
pub fn tensor_product(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    let mut out = ComplexMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let aij = a.e[i][j];
            for k in 0..2 {
                for l in 0..2 {
                    out.e[2 * i + k][2 * j + l] = aij * b.e[k][l];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: cyclic complex Jacobi.
// ---------------------------------------------------------------------------

#[allow(clippy::needless_range_loop)] // index juggling across rows and columns
fn jacobi4(mut a: [[C64; 4]; 4], vectors: bool) -> ([f64; 4], [[C64; 4]; 4]) {
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }
    // Quadratic convergence: a handful of sweeps suffices at dimension 4.
    for _sweep in 0..30 {
        let mut off = 0.0_f64;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q].norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag < 1e-18 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.scale(s);

                // A <- R† A R with R[p][p]=c, R[p][q]=s*phase,
                // R[q][p]=-s*conj(phase), R[q][q]=c.
                for k in 0..4 {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp.scale(c) - sp.conj() * akq;
                    a[k][q] = sp * akp + akq.scale(c);
                    a[p][k] = a[k][p].conj();
                    a[q][k] = a[k][q].conj();
                }
                let new_pp = c * c * app - 2.0 * s * c * mag + s * s * aqq;
                let new_qq = s * s * app + 2.0 * s * c * mag + c * c * aqq;
                a[p][p] = C64::new(new_pp, 0.0);
                a[q][q] = C64::new(new_qq, 0.0);
                a[p][q] = ZERO;
                a[q][p] = ZERO;

                if vectors {
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = vp.scale(c) - sp.conj() * vq;
                        row[q] = sp * vp + vq.scale(c);
                    }
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[j][j].re.partial_cmp(&a[i][i].re).unwrap());
    let mut vals = [0.0; 4];
    let mut vecs = [[ZERO; 4]; 4];
    for (slot, &idx) in order.iter().enumerate() {
        vals[slot] = a[idx][idx].re;
        for r in 0..4 {
            vecs[r][slot] = v[r][idx];
        }
    }
    (vals, vecs)
}

/// Eigenvalues of a hermitian 4x4 matrix, descending.
///
/// Fails with [`Error::NonHermitianInput`] when the hermiticity defect
/// exceeds 1e-9.
pub fn hermitian_eigenvalues(m: &ComplexMatrix4) -> Result<[f64; 4]> {
    let defect = m.hermiticity_defect();
    if defect > TOL_OP_HERMITIAN {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(jacobi4(m.e, false).0)
}

/// Eigenvalues (descending) and a unitary of column eigenvectors of a
/// hermitian 4x4 matrix.
pub fn hermitian_eigensystem(m: &ComplexMatrix4) -> Result<([f64; 4], ComplexMatrix4)> {
    let defect = m.hermiticity_defect();
    if defect > TOL_OP_HERMITIAN {
        return Err(Error::NonHermitianInput { defect });
    }
    let (vals, vecs) = jacobi4(m.e, true);
    Ok((vals, ComplexMatrix4 { e: vecs }))
}

/// Eigenvalues of a hermitian 2x2 matrix, descending (closed form).
pub fn hermitian_eigenvalues2(m: &ComplexMatrix2) -> Result<[f64; 2]> {
    let defect = m.hermiticity_defect();
    if defect > TOL_OP_HERMITIAN {
        return Err(Error::NonHermitianInput { defect });
    }
    let mean = 0.5 * (m.e[0][0].re + m.e[1][1].re);
    let half = 0.5 * (m.e[0][0].re - m.e[1][1].re);
    let d = (half * half + m.e[0][1].norm_sqr()).sqrt();
    Ok([mean + d, mean - d])
}

// ---------------------------------------------------------------------------
// Real-spectrum eigenvalues via the characteristic polynomial.
// ---------------------------------------------------------------------------

/// One multiplicity-robust polish step (Newton applied to f/f', which has
/// simple roots where f has multiple ones).
fn polish_quartic_root(x: &mut f64, b: f64, c: f64, d: f64, e: f64) {
    for _ in 0..4 {
        let f = (((*x + b) * *x + c) * *x + d) * *x + e;
        let fp = ((4.0 * *x + 3.0 * b) * *x + 2.0 * c) * *x + d;
        let fpp = (12.0 * *x + 6.0 * b) * *x + 2.0 * c;
        let denom = fp * fp - f * fpp;
        if denom.abs() < 1e-300 {
            break;
        }
        let step = f * fp / denom;
        if !step.is_finite() || step.abs() > 0.5 * (1.0 + x.abs()) {
            break;
        }
        *x -= step;
    }
}

/// Roots of `x² + b x + c` under the all-real-roots promise (negative
/// discriminants are floating-point noise and get flattened).
fn quadratic_real_roots(b: f64, c: f64) -> [f64; 2] {
    let disc = (b * b - 4.0 * c).max(0.0).sqrt();
    // evaluate the larger-magnitude root first to avoid cancellation
    let q = -0.5 * (b + disc.copysign(b));
    if q == 0.0 {
        [0.0, 0.0]
    } else {
        [q, c / q]
    }
}

/// Largest real root of `t³ + a2 t² + a1 t + a0`.
fn cubic_largest_root(a2: f64, a1: f64, a0: f64) -> f64 {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let s = if p.abs() < 1e-300 {
        (-q).cbrt()
    } else {
        let disc = 0.25 * q * q + p * p * p / 27.0;
        if disc > 0.0 {
            let sq = disc.sqrt();
            (-0.5 * q + sq).cbrt() + (-0.5 * q - sq).cbrt()
        } else {
            // three real roots; the k = 0 branch is the largest
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            m * (arg.acos() / 3.0).cos()
        }
    };
    let mut t = s - shift;
    // polish
    for _ in 0..3 {
        let f = ((t + a2) * t + a1) * t + a0;
        let df = (3.0 * t + 2.0 * a2) * t + a1;
        if df.abs() < 1e-300 {
            break;
        }
        t -= f / df;
    }
    t
}

/// All roots of `x³ + a2 x² + a1 x + a0` under the all-real-roots promise.
fn cubic_real_roots(a2: f64, a1: f64, a0: f64) -> [f64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    // with three real roots p = -((r1-r2)² + (r1-r3)² + (r2-r3)²)/6 <= 0;
    // a positive p is degeneracy noise around a triple root
    let mut roots = if p >= -1e-300 {
        let t = (-q).cbrt() - shift;
        [t, t, t]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        std::array::from_fn(|k| {
            m * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() - shift
        })
    };
    for r in roots.iter_mut() {
        let mut x = *r;
        for _ in 0..3 {
            let f = ((x + a2) * x + a1) * x + a0;
            let fp = (3.0 * x + 2.0 * a2) * x + a1;
            let fpp = 6.0 * x + 2.0 * a2;
            let denom = fp * fp - f * fpp;
            if denom.abs() < 1e-300 {
                break;
            }
            let step = f * fp / denom;
            if !step.is_finite() || step.abs() > 0.5 * (1.0 + x.abs()) {
                break;
            }
            x -= step;
        }
        *r = x;
    }
    roots
}

/// Roots of the monic quartic `x⁴ + b x³ + c x² + d x + e` under the promise
/// that all four roots are real (small complex parts from floating-point
/// noise are flattened). Returned in descending order.
///
/// Exactly-zero trailing coefficients are deflated first: they arise
/// structurally (a zero row or column of the underlying matrix makes every
/// permutation product in the minors vanish exactly), and peeling the zero
/// roots off keeps the remaining ones at full precision instead of the
/// half-precision a multiple root at the origin would get.
pub fn quartic_real_roots(b: f64, c: f64, d: f64, e: f64) -> [f64; 4] {
    if e == 0.0 {
        let mut roots = if d == 0.0 {
            if c == 0.0 {
                [-b, 0.0, 0.0, 0.0]
            } else {
                let [r1, r2] = quadratic_real_roots(b, c);
                [r1, r2, 0.0, 0.0]
            }
        } else {
            let [r1, r2, r3] = cubic_real_roots(b, c, d);
            [r1, r2, r3, 0.0]
        };
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return roots;
    }
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let scale = 1.0 + p.abs() + q.abs() + r.abs();
    let ys: [f64; 4] = if q.abs() < 1e-13 * scale {
        // biquadratic: y² solves z² + p z + r = 0
        let disc = (0.25 * p * p - r).max(0.0).sqrt();
        let z1 = -0.5 * p + disc;
        let z2 = -0.5 * p - disc;
        let s1 = z1.max(0.0).sqrt();
        let s2 = z2.max(0.0).sqrt();
        [s1, -s1, s2, -s2]
    } else {
        // split into (y² + u y + v)(y² - u y + w); u² is the largest root of
        // U³ + 2p U² + (p² - 4r) U - q² = 0, which is nonnegative because the
        // polynomial is -q² ≤ 0 at U = 0.
        let uu = cubic_largest_root(2.0 * p, p * p - 4.0 * r, -q * q).max(0.0);
        let u = uu.sqrt();
        if u < 1e-13 * scale.sqrt() {
            let disc = (0.25 * p * p - r).max(0.0).sqrt();
            let z1 = -0.5 * p + disc;
            let z2 = -0.5 * p - disc;
            let s1 = z1.max(0.0).sqrt();
            let s2 = z2.max(0.0).sqrt();
            [s1, -s1, s2, -s2]
        } else {
            let v = 0.5 * (p + uu - q / u);
            let w = 0.5 * (p + uu + q / u);
            let d1 = (uu - 4.0 * v).max(0.0).sqrt();
            let d2 = (uu - 4.0 * w).max(0.0).sqrt();
            [
                0.5 * (-u + d1),
                0.5 * (-u - d1),
                0.5 * (u + d2),
                0.5 * (u - d2),
            ]
        }
    };

    let mut roots = [0.0_f64; 4];
    for (slot, y) in ys.iter().enumerate() {
        let mut x = y - shift;
        polish_quartic_root(&mut x, b, c, d, e);
        roots[slot] = x;
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Eigenvalues, descending, of a 4x4 matrix whose spectrum is real (for
/// example a product of two positive semidefinite matrices). The
/// characteristic-polynomial coefficients are sums of principal minors,
/// evaluated directly so that a zero row or column of `m` zeroes the
/// trailing coefficients exactly; deliberately independent of the Jacobi
/// solver above.
pub fn real_spectrum_eigenvalues(m: &ComplexMatrix4) -> [f64; 4] {
    let a = &m.e;
    let det2 = |i: usize, j: usize| a[i][i] * a[j][j] - a[i][j] * a[j][i];
    let det3 = |r: [usize; 3]| {
        let [x, y, z] = r;
        a[x][x] * (a[y][y] * a[z][z] - a[y][z] * a[z][y])
            - a[x][y] * (a[y][x] * a[z][z] - a[y][z] * a[z][x])
            + a[x][z] * (a[y][x] * a[z][y] - a[y][y] * a[z][x])
    };
    let e1 = m.trace().re;
    let mut e2 = (det2(0, 1) + det2(0, 2) + det2(0, 3) + det2(1, 2) + det2(1, 3) + det2(2, 3)).re;
    let mut e3 = (det3([0, 1, 2]) + det3([0, 1, 3]) + det3([0, 2, 3]) + det3([1, 2, 3])).re;
    let mut e4 = m.det().re;
    // Coefficients below the rounding floor of the minor arithmetic are
    // indistinguishable from zero; flushing them lets the solver deflate the
    // corresponding zero eigenvalues exactly instead of surfacing them as
    // sqrt-of-noise artifacts.
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, z| acc.max(z.norm_sqr()))
        .sqrt();
    const FLOOR: f64 = 1e-13;
    if e2.abs() < FLOOR * scale * scale {
        e2 = 0.0;
    }
    if e3.abs() < FLOOR * scale * scale * scale {
        e3 = 0.0;
    }
    if e4.abs() < FLOOR * scale * scale * scale * scale {
        e4 = 0.0;
    }
    quartic_real_roots(-e1, e2, -e3, e4)
}

// ---------------------------------------------------------------------------
// Density matrices.
// ---------------------------------------------------------------------------

/// Which qubit an operation acts on; qubit A is the left Kronecker factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A validated two-qubit state: hermitian, unit trace, positive semidefinite
/// within `1e-10`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4 {
    m: ComplexMatrix4,
}

impl DensityMatrix4 {
    pub fn new(m: ComplexMatrix4) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > TOL_CONSTRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {defect:.3e} exceeds {TOL_CONSTRUCT:.0e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL_CONSTRUCT || tr.im.abs() > TOL_CONSTRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1 by more than {TOL_CONSTRUCT:.0e}"
            )));
        }
        let evs = jacobi4(m.e, false).0;
        if evs[3] < -TOL_PSD {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                evs[3]
            )));
        }
        Ok(Self { m })
    }

    /// Construct from classical weights on the computational basis.
    pub fn from_diagonal(d: [f64; 4]) -> Result<Self> {
        Self::new(ComplexMatrix4::from_diagonal(d))
    }

    /// Internal constructor for states valid by construction (for example
    /// the output of a unitary conjugation of a validated state).
    pub(crate) fn from_trusted(m: ComplexMatrix4) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.m
    }

    /// Tr(rho²) = sum of squared entry magnitudes; in [1/4, 1].
    pub fn purity(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                sum += self.m.e[i][j].norm_sqr();
            }
        }
        sum
    }

    /// Transpose the indices of one qubit. The result is hermitian with unit
    /// trace but not necessarily positive.
    pub fn partial_transpose(&self, subsystem: Subsystem) -> ComplexMatrix4 {
        let mut out = ComplexMatrix4::zeros();
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        let (row, col) = match subsystem {
                            // transpose qubit A indices: (i,k),(j,l) <- (j,k),(i,l)
                            Subsystem::A => (2 * j + k, 2 * i + l),
                            // transpose qubit B indices: (i,k),(j,l) <- (i,l),(j,k)
                            Subsystem::B => (2 * i + l, 2 * j + k),
                        };
                        out.e[row][col] = self.m.e[2 * i + k][2 * j + l];
                    }
                }
            }
        }
        out
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues(&self.m).expect("density matrix is hermitian")
    }

    /// Von Neumann entropy in bits, with 0·log 0 = 0.
    pub fn von_neumann_entropy(&self) -> f64 {
        entropy_from_eigenvalues(&self.eigenvalues())
    }
}

/// A validated single-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2 {
    m: ComplexMatrix2,
}

impl DensityMatrix2 {
    pub fn new(m: ComplexMatrix2) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > TOL_CONSTRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {defect:.3e} exceeds {TOL_CONSTRUCT:.0e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL_CONSTRUCT || tr.im.abs() > TOL_CONSTRUCT {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1 by more than {TOL_CONSTRUCT:.0e}"
            )));
        }
        let evs = hermitian_eigenvalues2(&m)?;
        if evs[1] < -TOL_PSD {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                evs[1]
            )));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.m
    }

    pub fn purity(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                sum += self.m.e[i][j].norm_sqr();
            }
        }
        sum
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues2(&self.m).expect("density matrix is hermitian")
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        let evs = self.eigenvalues();
        entropy_from_eigenvalues(&evs)
    }
}

fn entropy_from_eigenvalues(evs: &[f64]) -> f64 {
    let mut s = 0.0;
    for &ev in evs {
        let lambda = if ev < 0.0 {
            debug_assert!(ev >= -TOL_PSD, "eigenvalue {ev} below PSD tolerance");
            0.0
        } else {
            ev
        };
        if lambda > 0.0 {
            s -= lambda * lambda.log2();
        }
    }
    s.max(0.0)
}

/// U rho U†. Fails with [`Error::NonUnitary`] when `u` is not unitary within
/// 1e-10; the result is a valid state because unitary conjugation preserves
/// the spectrum, trace and hermiticity.
pub fn conjugate(u: &ComplexMatrix4, rho: &DensityMatrix4) -> Result<DensityMatrix4> {
    let defect = u.unitarity_defect();
    if defect > TOL_UNITARY {
        return Err(Error::NonUnitary { defect });
    }
    Ok(conjugate_unchecked(u, rho))
}

/// U rho U† without the unitarity check, for hot loops where `u` was
/// validated once up front.
pub(crate) fn conjugate_unchecked(u: &ComplexMatrix4, rho: &DensityMatrix4) -> DensityMatrix4 {
    DensityMatrix4::from_trusted(u.mul(rho.matrix()).mul(&u.adjoint()))
}
