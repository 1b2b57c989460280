//! Constructors for maximally entangled mixed states (MEMS) and the analytic
//! source states they are reachable from, plus samplers for random
//! classical-classical, product and generic two-qubit density matrices with
//! exact purity control.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qmat::{
    tensor_product, ComplexMatrix2, ComplexMatrix4, DensityMatrix2, DensityMatrix4, PAULI_X,
    PAULI_Y, PAULI_Z,
};

const RANGE_TOL: f64 = 1e-12;
/// Upper end of the gamma range of the correlated source state.
pub const GAMMA_MAX_CORRELATED: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
/// Purity at the MEMS rank boundary gamma = 2/3.
pub const MU_RANK_BOUNDARY: f64 = 5.0 / 9.0;

/// Parameters of a maximally entangled mixed state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemsParams {
    pub gamma: f64,
    pub phi: f64,
}

/// Which branch of the MEMS family a purity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemsRank {
    Two,
    Three,
}

impl MemsParams {
    pub fn new(gamma: f64, phi: f64) -> Result<Self> {
        check_gamma(gamma, 0.0, 1.0)?;
        Ok(Self { gamma, phi })
    }

    /// The mixing weight on the diagonal corners: gamma/2 for the rank-2
    /// branch (gamma >= 2/3), 1/3 for the rank-3 branch.
    pub fn g(&self) -> f64 {
        if self.gamma >= 2.0 / 3.0 {
            self.gamma / 2.0
        } else {
            1.0 / 3.0
        }
    }

    pub fn rank(&self) -> MemsRank {
        if self.gamma >= 2.0 / 3.0 {
            MemsRank::Two
        } else {
            MemsRank::Three
        }
    }

    pub fn density(&self) -> DensityMatrix4 {
        let g = self.g();
        let corner = C64::from_polar(self.gamma / 2.0, -self.phi);
        let mut m = ComplexMatrix4::zeros();
        m.set(0, 0, C64::new(g, 0.0));
        m.set(1, 1, C64::new(1.0 - 2.0 * g, 0.0));
        m.set(3, 3, C64::new(g, 0.0));
        m.set(0, 3, corner);
        m.set(3, 0, corner.conj());
        DensityMatrix4::new(m).expect("MEMS matrix is a valid density matrix")
    }
}

fn check_gamma(gamma: f64, min: f64, max: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < min - RANGE_TOL || gamma > max + RANGE_TOL {
        return Err(Error::GammaOutOfRange { gamma, min, max });
    }
    Ok(())
}

/// The maximally entangled mixed state with entanglement parameter `gamma`
/// and corner phase `phi`.
pub fn mems(gamma: f64, phi: f64) -> Result<DensityMatrix4> {
    Ok(MemsParams::new(gamma, phi)?.density())
}

/// Purity of the MEMS with parameter `gamma`:
/// `gamma² + (1-gamma)²` for the rank-2 branch, `1/3 + gamma²/2` below it.
pub fn mems_purity(gamma: f64) -> Result<f64> {
    check_gamma(gamma, 0.0, 1.0)?;
    if gamma >= 2.0 / 3.0 {
        Ok(gamma * gamma + (1.0 - gamma) * (1.0 - gamma))
    } else {
        Ok(1.0 / 3.0 + gamma * gamma / 2.0)
    }
}

/// Invert [`mems_purity`] on the requested branch.
pub fn gamma_from_purity(mu: f64, rank: MemsRank) -> Result<f64> {
    match rank {
        MemsRank::Two => {
            if !(MU_RANK_BOUNDARY - RANGE_TOL..=1.0 + RANGE_TOL).contains(&mu) {
                return Err(Error::PurityOutOfRange {
                    mu,
                    min: MU_RANK_BOUNDARY,
                    max: 1.0,
                });
            }
            Ok((0.5 * (1.0 + (2.0 * mu - 1.0).max(0.0).sqrt())).min(1.0))
        }
        MemsRank::Three => {
            if !(1.0 / 3.0 - RANGE_TOL..=MU_RANK_BOUNDARY + RANGE_TOL).contains(&mu) {
                return Err(Error::PurityOutOfRange {
                    mu,
                    min: 1.0 / 3.0,
                    max: MU_RANK_BOUNDARY,
                });
            }
            Ok((2.0 * mu - 2.0 / 3.0).max(0.0).sqrt())
        }
    }
}

/// The product source state `diag(1-gamma, gamma) ⊗ diag(0, 1)` feeding the
/// rank-2 MEMS branch; gamma in [2/3, 1].
pub fn source_r2(gamma: f64) -> Result<DensityMatrix4> {
    check_gamma(gamma, 2.0 / 3.0, 1.0)?;
    DensityMatrix4::from_diagonal([0.0, 1.0 - gamma, 0.0, gamma])
}

/// The classical-classical diagonal source feeding the rank-3 MEMS branch:
/// `diag(1/3 - gamma/2, 1/3, 0, 1/3 + gamma/2)`; gamma in [0, 2/3].
pub fn source_r3(gamma: f64) -> Result<DensityMatrix4> {
    check_gamma(gamma, 0.0, 2.0 / 3.0)?;
    DensityMatrix4::from_diagonal([
        1.0 / 3.0 - gamma / 2.0,
        1.0 / 3.0,
        0.0,
        1.0 / 3.0 + gamma / 2.0,
    ])
}

/// The correlated (non-diagonal) separable source with central block
/// `[[1/6, i/6], [-i/6, 1/6]]`; gamma in [0, 1/sqrt(3)].
pub fn source_c(gamma: f64) -> Result<DensityMatrix4> {
    check_gamma(gamma, 0.0, GAMMA_MAX_CORRELATED)?;
    let sixth = 1.0 / 6.0;
    let mut m = ComplexMatrix4::zeros();
    m.set(0, 0, C64::new(1.0 / 3.0 + gamma / 2.0, 0.0));
    m.set(1, 1, C64::new(sixth, 0.0));
    m.set(2, 2, C64::new(sixth, 0.0));
    m.set(3, 3, C64::new(1.0 / 3.0 - gamma / 2.0, 0.0));
    m.set(1, 2, C64::new(0.0, sixth));
    m.set(2, 1, C64::new(0.0, -sixth));
    DensityMatrix4::new(m)
}

// ---------------------------------------------------------------------------
// Random state samplers.
// ---------------------------------------------------------------------------

/// How the local basis angles of a classical-classical state are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisSampling {
    /// Angles on the lattice {0, step, 2 step, ...} covering a full period.
    Grid { step: f64 },
    /// Directions uniform on the Bloch sphere.
    Uniform,
}

/// A classical-classical state: orthonormal local bases on both qubits with
/// a classical joint distribution over the four basis pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcState {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    /// (p11, p12, p21, p22), nonnegative, summing to 1.
    pub probs: [f64; 4],
}

impl CcState {
    /// Purity equals the classical collision probability because the local
    /// bases are orthonormal.
    pub fn purity(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    pub fn density(&self) -> DensityMatrix4 {
        let (a1, a2) = basis_pair(self.theta_a, self.phi_a);
        let (b1, b2) = basis_pair(self.theta_b, self.phi_b);
        let mut m = ComplexMatrix4::zeros();
        let terms = [
            (self.probs[0], &a1, &b1),
            (self.probs[1], &a1, &b2),
            (self.probs[2], &a2, &b1),
            (self.probs[3], &a2, &b2),
        ];
        for (p, a, b) in terms {
            if p == 0.0 {
                continue;
            }
            let contrib = tensor_product(&projector(a), &projector(b)).scale(C64::new(p, 0.0));
            m = m.add(&contrib);
        }
        DensityMatrix4::new(m).expect("classical-classical state is valid")
    }
}

/// Bloch-angle ket and its orthogonal complement.
fn basis_pair(theta: f64, phi: f64) -> ([C64; 2], [C64; 2]) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let phase = C64::from_polar(1.0, phi);
    (
        [C64::new(c, 0.0), phase.scale(s)],
        [C64::new(s, 0.0), -phase.scale(c)],
    )
}

fn projector(ket: &[C64; 2]) -> ComplexMatrix2 {
    let mut m = ComplexMatrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m.set(i, j, ket[i] * ket[j].conj());
        }
    }
    m
}

fn sample_angle<R: Rng + ?Sized>(basis: BasisSampling, rng: &mut R) -> f64 {
    match basis {
        BasisSampling::Grid { step } => {
            let n = (2.0 * PI / step).floor().max(1.0) as u64;
            rng.gen_range(0..n) as f64 * step
        }
        BasisSampling::Uniform => rng.gen_range(0.0..2.0 * PI),
    }
}

fn sample_polar<R: Rng + ?Sized>(basis: BasisSampling, rng: &mut R) -> f64 {
    match basis {
        BasisSampling::Grid { .. } => sample_angle(basis, rng),
        // cos(theta) uniform gives directions uniform on the sphere
        BasisSampling::Uniform => (1.0 - 2.0 * rng.gen_range(0.0..1.0_f64)).acos(),
    }
}

/// Flat (Dirichlet(1,1,1,1)) sample on the probability simplex.
fn flat_simplex<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let mut p = [0.0; 4];
    let mut sum = 0.0;
    for x in p.iter_mut() {
        // -ln(U) is Exp(1); normalized exponentials are flat on the simplex
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        *x = -u.ln();
        sum += *x;
    }
    for x in p.iter_mut() {
        *x /= sum;
    }
    p
}

fn sum_sq(p: &[f64; 4]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

/// Draw a point of the simplex with collision probability exactly `target`.
///
/// A flat sample `p0` is moved along the ray through the uniform point
/// `u = (1/4,..)`: `p(t) = u + t (p0 - u)` has purity `1/4 + t² (mu0 - 1/4)`
/// exactly, so `t = sqrt((target - 1/4)/(mu0 - 1/4))` lands on the target.
/// Rays that would leave the simplex before reaching high targets are
/// redrawn; after a bounded number of attempts the sampler walks from a
/// random vertex toward `p0` instead, which reaches any purity up to 1.
fn simplex_with_purity<R: Rng + ?Sized>(target: f64, rng: &mut R) -> [f64; 4] {
    const UNIF: f64 = 0.25;
    if target >= 1.0 - 1e-12 {
        // only the vertices have purity 1
        let mut p = [0.0; 4];
        p[rng.gen_range(0..4)] = 1.0;
        return p;
    }
    for _ in 0..64 {
        let p0 = flat_simplex(rng);
        let mu0 = sum_sq(&p0);
        if mu0 <= UNIF + 1e-15 {
            continue;
        }
        let t = ((target - UNIF) / (mu0 - UNIF)).sqrt();
        let p = p0.map(|x| UNIF + t * (x - UNIF));
        if p.iter().all(|&x| x >= 0.0) {
            return p;
        }
    }
    // vertex walk: p(s) = v + s (p0 - v) has purity 1 + 2 s q_k + s² |q|²
    // with q = p0 - v, monotone down to mu0 at s = 1, so a root exists
    let p0 = flat_simplex(rng);
    let k = rng.gen_range(0..4);
    let mut v = [0.0; 4];
    v[k] = 1.0;
    let q: [f64; 4] = std::array::from_fn(|i| p0[i] - v[i]);
    let a = sum_sq(&q);
    let qk = q[k];
    let c = 1.0 - target;
    let s = c / (-qk + (qk * qk - a * c).max(0.0).sqrt());
    std::array::from_fn(|i| (v[i] + s * q[i]).max(0.0))
}

/// Random classical-classical state with purity exactly `target_mu`.
pub fn random_cc<R: Rng + ?Sized>(
    target_mu: f64,
    basis: BasisSampling,
    rng: &mut R,
) -> Result<CcState> {
    if !(0.25 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&target_mu) {
        return Err(Error::UnreachablePurity {
            mu: target_mu,
            min: 0.25,
            max: 1.0,
        });
    }
    let target = target_mu.clamp(0.25, 1.0);
    Ok(CcState {
        theta_a: sample_polar(basis, rng),
        phi_a: sample_angle(basis, rng),
        theta_b: sample_polar(basis, rng),
        phi_b: sample_angle(basis, rng),
        probs: simplex_with_purity(target, rng),
    })
}

/// Random classical-classical state with an unconstrained flat distribution
/// on the simplex; purity lands wherever it lands (binning mode).
pub fn random_cc_raw<R: Rng + ?Sized>(basis: BasisSampling, rng: &mut R) -> CcState {
    CcState {
        theta_a: sample_polar(basis, rng),
        phi_a: sample_angle(basis, rng),
        theta_b: sample_polar(basis, rng),
        phi_b: sample_angle(basis, rng),
        probs: flat_simplex(rng),
    }
}

/// A product state of two single-qubit mixed states given by Bloch vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductState {
    pub bloch_a: [f64; 3],
    pub bloch_b: [f64; 3],
}

impl ProductState {
    pub fn qubit(bloch: &[f64; 3]) -> ComplexMatrix2 {
        let mut m = ComplexMatrix2::identity();
        m = m.add(&PAULI_X.scale(C64::new(bloch[0], 0.0)));
        m = m.add(&PAULI_Y.scale(C64::new(bloch[1], 0.0)));
        m = m.add(&PAULI_Z.scale(C64::new(bloch[2], 0.0)));
        m.scale(C64::new(0.5, 0.0))
    }

    /// The reduced state of qubit A as a validated single-qubit density
    /// matrix.
    pub fn qubit_a(&self) -> DensityMatrix2 {
        DensityMatrix2::new(Self::qubit(&self.bloch_a)).expect("Bloch ball state is valid")
    }

    /// The reduced state of qubit B.
    pub fn qubit_b(&self) -> DensityMatrix2 {
        DensityMatrix2::new(Self::qubit(&self.bloch_b)).expect("Bloch ball state is valid")
    }

    pub fn purity_a(&self) -> f64 {
        0.5 * (1.0 + self.bloch_a.iter().map(|x| x * x).sum::<f64>())
    }

    pub fn purity_b(&self) -> f64 {
        0.5 * (1.0 + self.bloch_b.iter().map(|x| x * x).sum::<f64>())
    }

    /// Total purity; multiplicative under the tensor product.
    pub fn purity(&self) -> f64 {
        self.purity_a() * self.purity_b()
    }

    pub fn density(&self) -> DensityMatrix4 {
        let m = tensor_product(&Self::qubit(&self.bloch_a), &Self::qubit(&self.bloch_b));
        DensityMatrix4::new(m).expect("product state is valid")
    }
}

/// Random product state with local purities exactly `mu_a` and `mu_b`
/// (Bloch radius sqrt(2 mu - 1), direction uniform on the sphere).
pub fn random_product<R: Rng + ?Sized>(mu_a: f64, mu_b: f64, rng: &mut R) -> Result<ProductState> {
    let mut draw = |mu: f64| -> Result<[f64; 3]> {
        if !(0.5 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&mu) {
            return Err(Error::PurityOutOfRange {
                mu,
                min: 0.5,
                max: 1.0,
            });
        }
        let r = (2.0 * mu.clamp(0.5, 1.0) - 1.0).max(0.0).sqrt();
        let z = rng.gen_range(-1.0..=1.0_f64);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let xy = (1.0 - z * z).max(0.0).sqrt();
        Ok([r * xy * phi.cos(), r * xy * phi.sin(), r * z])
    };
    Ok(ProductState {
        bloch_a: draw(mu_a)?,
        bloch_b: draw(mu_b)?,
    })
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix4 {
    let mut g = ComplexMatrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            g.set(i, j, C64::new(standard_normal(rng), standard_normal(rng)));
        }
    }
    g
}

/// Random density matrix from the Hilbert-Schmidt ensemble:
/// `G G† / tr(G G†)` with complex-gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix4 {
    let g = ginibre(rng);
    let gg = g.mul(&g.adjoint());
    let norm = gg.trace().re;
    DensityMatrix4::from_trusted(gg.scale(C64::new(1.0 / norm, 0.0)))
}

/// Haar-ish random unitary: Gram-Schmidt of a Ginibre matrix. Test fodder
/// for invariance checks; exact Haar weighting is not needed there.
#[allow(clippy::needless_range_loop)]
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix4 {
    let g = ginibre(rng);
    let mut cols: [[C64; 4]; 4] = std::array::from_fn(|c| std::array::from_fn(|r| g.get(r, c)));
    for c in 0..4 {
        for prev in 0..c {
            let overlap: C64 = (0..4).map(|r| cols[prev][r].conj() * cols[c][r]).sum();
            for r in 0..4 {
                let correction = overlap * cols[prev][r];
                cols[c][r] -= correction;
            }
        }
        let norm: f64 = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[c].iter_mut() {
            *z = z.scale(1.0 / norm);
        }
    }
    let mut u = ComplexMatrix4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            u.set(r, c, cols[c][r]);
        }
    }
    u
}
