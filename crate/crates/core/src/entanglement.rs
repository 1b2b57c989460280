//! Entanglement measures for two-qubit mixed states: concurrence,
//! entanglement of formation, and the partial-transpose separability test
//! (exact for two qubits).

use num_complex::Complex64 as C64;

use crate::qmat::{
    hermitian_eigenvalues, real_spectrum_eigenvalues, tensor_product, ComplexMatrix4,
    DensityMatrix4, Subsystem, PAULI_Y, TOL_PSD,
};

/// Default threshold on the smallest partial-transpose eigenvalue below
/// which a state is reported entangled.
pub const DEFAULT_TOL_SEP: f64 = 1e-9;

/// The spin-flipped state `(sigma_y ⊗ sigma_y) rho* (sigma_y ⊗ sigma_y)`;
/// hermitian, unit trace and positive like `rho` itself.
pub fn spin_flip(rho: &DensityMatrix4) -> ComplexMatrix4 {
    let yy = tensor_product(&PAULI_Y, &PAULI_Y);
    yy.mul(&rho.matrix().conj()).mul(&yy)
}

/// Wootters concurrence: with `lambda_i` the descending square roots of the
/// eigenvalues of `rho rho~`, `C = max(0, l1 - l2 - l3 - l4)`, clamped to
/// [0, 1].
///
/// The product `rho rho~` is not hermitian but has a real nonnegative
/// spectrum, so its eigenvalues come from the characteristic-polynomial
/// solver; the hermitian form `sqrt(rho) rho~ sqrt(rho)` is kept as an
/// independent cross-check in the tests.
pub fn concurrence(rho: &DensityMatrix4) -> f64 {
    let product = rho.matrix().mul(&spin_flip(rho));
    let evs = real_spectrum_eigenvalues(&product);
    let mut lambda = [0.0_f64; 4];
    for (l, ev) in lambda.iter_mut().zip(evs.iter()) {
        debug_assert!(*ev > -TOL_PSD, "rho rho~ eigenvalue {ev} below tolerance");
        *l = ev.max(0.0).sqrt();
    }
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0)
}

/// Binary entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`.
fn binary_entropy(x: f64) -> f64 {
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).log2();
    }
    h
}

/// Entanglement of formation in bits from a concurrence value:
/// `h((1 + sqrt(1 - C²)) / 2)`.
pub fn eof_for_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt()))
}

/// Entanglement of formation of a two-qubit state, in bits.
pub fn eof(rho: &DensityMatrix4) -> f64 {
    eof_for_concurrence(concurrence(rho))
}

/// Partial-transpose separability test, exact for two qubits: the state is
/// separable iff the smallest eigenvalue of the partial transpose is at
/// least `-tol_sep`. Returns the verdict and that smallest eigenvalue.
pub fn is_separable(rho: &DensityMatrix4, tol_sep: f64) -> (bool, f64) {
    let pt = rho.partial_transpose(Subsystem::B);
    let evs = hermitian_eigenvalues(&pt).expect("partial transpose is hermitian");
    (evs[3] >= -tol_sep, evs[3])
}

/// Summary of the entanglement measures of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglementReport {
    pub concurrence: f64,
    pub eof: f64,
    pub min_pt_eigenvalue: f64,
    pub separable: bool,
}

impl EntanglementReport {
    pub fn of(rho: &DensityMatrix4, tol_sep: f64) -> Self {
        let c = concurrence(rho);
        let (separable, min_pt_eigenvalue) = is_separable(rho, tol_sep);
        Self {
            concurrence: c,
            eof: eof_for_concurrence(c),
            min_pt_eigenvalue,
            separable,
        }
    }
}

/// Bell state |Phi+><Phi+| (test fodder and a handy reference state).
pub fn bell_phi_plus() -> DensityMatrix4 {
    let h = C64::new(0.5, 0.0);
    let mut m = ComplexMatrix4::zeros();
    m.set(0, 0, h);
    m.set(0, 3, h);
    m.set(3, 0, h);
    m.set(3, 3, h);
    DensityMatrix4::new(m).expect("Bell state is a valid density matrix")
}
