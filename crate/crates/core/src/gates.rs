//! Cartan kernels of two-qubit unitaries, canonical chamber reduction and
//! local-equivalence invariants.
//!
//! Any two-qubit unitary splits into local rotations around a nonlocal
//! kernel `exp(-i sum_k alpha_k sigma_k ⊗ sigma_k)`; the kernel coordinates
//! label the local-equivalence class once reduced to the chamber
//! `pi/4 >= ax >= ay >= az >= 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qmat::{tensor_product, ComplexMatrix2, ComplexMatrix4, PAULI_X, PAULI_Y, PAULI_Z};

/// Kernel coordinates (radians). Any finite values are accepted; use
/// [`canonicalize`] to reduce into the chamber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanVector {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
}

impl CartanVector {
    pub fn new(alpha_x: f64, alpha_y: f64, alpha_z: f64) -> Self {
        Self {
            alpha_x,
            alpha_y,
            alpha_z,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha_x, self.alpha_y, self.alpha_z]
    }
}

/// Single-qubit rotation axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> ComplexMatrix2 {
        match self {
            Axis::X => PAULI_X,
            Axis::Y => PAULI_Y,
            Axis::Z => PAULI_Z,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::ConfigInvalid(format!("unknown axis '{other}'"))),
        }
    }
}

/// An axis-fixed single-qubit rotation by `angle` radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRotation {
    pub axis: Axis,
    pub angle: f64,
}

impl LocalRotation {
    pub fn new(axis: Axis, angle: f64) -> Self {
        Self { axis, angle }
    }
}

/// One commuting factor `exp(-i a sigma_k ⊗ sigma_k) = cos(a) I - i sin(a) sigma_k ⊗ sigma_k`.
fn kernel_factor(a: f64, pauli: &ComplexMatrix2) -> ComplexMatrix4 {
    let kk = tensor_product(pauli, pauli);
    ComplexMatrix4::identity()
        .scale(C64::new(a.cos(), 0.0))
        .add(&kk.scale(C64::new(0.0, -a.sin())))
}

/// The nonlocal kernel `exp(-i (ax XX + ay YY + az ZZ))` as the product of
/// its three commuting factors.
pub fn cartan_kernel(v: &CartanVector) -> ComplexMatrix4 {
    let fx = kernel_factor(v.alpha_x, &PAULI_X);
    let fy = kernel_factor(v.alpha_y, &PAULI_Y);
    let fz = kernel_factor(v.alpha_z, &PAULI_Z);
    fx.mul(&fy).mul(&fz)
}

/// Reduce kernel coordinates into the chamber `pi/4 >= ax >= ay >= az >= 0`.
///
/// Each component is folded mod pi/2 into [0, pi/2), reflected about pi/4
/// when above it, and the three are sorted descending. The map is exactly
/// idempotent. Because the component-wise fold is applied to each angle
/// independently, the output lands either on the input's local-equivalence
/// class or on its complex-conjugate class: G2 and Re(G1) are preserved
/// exactly, Im(G1) up to sign. Conjugation is an antiunitary symmetry, so
/// every entanglement quantity of the gate is unchanged.
pub fn canonicalize(v: &CartanVector) -> CartanVector {
    let fold = |a: f64| -> f64 {
        let mut a = a.rem_euclid(FRAC_PI_2);
        if a > FRAC_PI_4 {
            a = FRAC_PI_2 - a;
        }
        a
    };
    let mut c = [fold(v.alpha_x), fold(v.alpha_y), fold(v.alpha_z)];
    c.sort_by(|a, b| b.partial_cmp(a).unwrap());
    CartanVector::new(c[0], c[1], c[2])
}

/// `exp(-i angle/2 sigma_axis)`; unitary with determinant 1.
pub fn local_rotation_matrix(r: &LocalRotation) -> ComplexMatrix2 {
    let half = 0.5 * r.angle;
    ComplexMatrix2::identity()
        .scale(C64::new(half.cos(), 0.0))
        .add(&r.axis.pauli().scale(C64::new(0.0, -half.sin())))
}

/// The product rotation `L_A ⊗ L_B`.
pub fn local_pair(ra: &LocalRotation, rb: &LocalRotation) -> ComplexMatrix4 {
    tensor_product(&local_rotation_matrix(ra), &local_rotation_matrix(rb))
}

/// The local invariants of a two-qubit unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalInvariants {
    pub g1: C64,
    pub g2: f64,
}

/// Magic-basis columns (|00>+|11>, -i|00>+i|11>, |01>-|10>, -i|01>-i|10>)/sqrt(2).
fn magic_basis() -> ComplexMatrix4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = ComplexMatrix4::zeros();
    q.set(0, 0, C64::new(s, 0.0));
    q.set(3, 0, C64::new(s, 0.0));
    q.set(0, 1, C64::new(0.0, -s));
    q.set(3, 1, C64::new(0.0, s));
    q.set(1, 2, C64::new(s, 0.0));
    q.set(2, 2, C64::new(-s, 0.0));
    q.set(1, 3, C64::new(0.0, -s));
    q.set(2, 3, C64::new(0.0, -s));
    q
}

/// Quantities constant on local-equivalence classes, computed in the magic
/// basis: with `m = (Q†UQ)ᵀ(Q†UQ)`,
/// `G1 = tr²(m) / (16 det U)` and `G2 = (tr²(m) - tr(m²)) / (4 det U)`.
pub fn local_invariants(u: &ComplexMatrix4) -> Result<LocalInvariants> {
    let defect = u.unitarity_defect();
    if defect > crate::qmat::TOL_UNITARY {
        return Err(Error::NonUnitary { defect });
    }
    let q = magic_basis();
    let um = q.adjoint().mul(u).mul(&q);
    let m = um.transpose().mul(&um);
    let tr = m.trace();
    let m2 = m.mul(&m);
    let det = u.det();
    let g1 = tr * tr / (det * C64::new(16.0, 0.0));
    let g2 = (tr * tr - m2.trace()) / (det * C64::new(4.0, 0.0));
    Ok(LocalInvariants { g1, g2: g2.re })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn swap_matrix() -> ComplexMatrix4 {
        let mut m = ComplexMatrix4::zeros();
        m.set(0, 0, C64::new(1.0, 0.0));
        m.set(1, 2, C64::new(1.0, 0.0));
        m.set(2, 1, C64::new(1.0, 0.0));
        m.set(3, 3, C64::new(1.0, 0.0));
        m
    }

    #[test]
    fn kernel_at_origin_is_identity() {
        let u = cartan_kernel(&CartanVector::new(0.0, 0.0, 0.0));
        assert!(u.max_abs_diff(&ComplexMatrix4::identity()) < 1e-15);
    }

    #[test]
    fn kernel_at_swap_point() {
        // sum_k sigma_k⊗sigma_k has the triplet subspace at +1 and the
        // singlet at -3, so exp(-i pi/4 sum) = e^{-i pi/4} SWAP
        let u = cartan_kernel(&CartanVector::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4));
        let phase = C64::from_polar(1.0, -FRAC_PI_4);
        let expected = swap_matrix().scale(phase);
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn kernel_creates_bell_state_from_00() {
        // cos(pi/4)|00> - i sin(pi/4) (sigma_x⊗sigma_x)|00> = (|00> - i|11>)/sqrt(2)
        let u = cartan_kernel(&CartanVector::new(FRAC_PI_4, 0.0, 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.get(0, 0) - C64::new(s, 0.0)).norm() < 1e-14);
        assert!((u.get(3, 0) - C64::new(0.0, -s)).norm() < 1e-14);
        assert!(u.get(1, 0).norm() < 1e-15 && u.get(2, 0).norm() < 1e-15);

        let psi = DensityFromColumn::column0(&u);
        let c = crate::entanglement::concurrence(&psi);
        assert!((c - 1.0).abs() < 1e-12);
    }

    /// Helper building |psi><psi| from the first column of a unitary.
    struct DensityFromColumn;
    impl DensityFromColumn {
        fn column0(u: &ComplexMatrix4) -> crate::qmat::DensityMatrix4 {
            let mut m = ComplexMatrix4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    m.set(i, j, u.get(i, 0) * u.get(j, 0).conj());
                }
            }
            crate::qmat::DensityMatrix4::new(m).unwrap()
        }
    }

    #[test]
    fn kernel_factors_commute() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let v = CartanVector::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let fx = kernel_factor(v.alpha_x, &PAULI_X);
            let fy = kernel_factor(v.alpha_y, &PAULI_Y);
            let fz = kernel_factor(v.alpha_z, &PAULI_Z);
            let a = fx.mul(&fy).mul(&fz);
            let b = fz.mul(&fy).mul(&fx);
            let c = fy.mul(&fz).mul(&fx);
            assert!(a.max_abs_diff(&b) < 1e-12);
            assert!(a.max_abs_diff(&c) < 1e-12);
        }
    }

    #[test]
    fn kernel_is_unitary_for_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let v = CartanVector::new(
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
            );
            assert!(cartan_kernel(&v).unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn canonicalize_fixed_point() {
        let v = CartanVector::new(PI / 8.0, PI / 8.0, 0.0);
        assert_eq!(canonicalize(&v), v);
    }

    #[test]
    fn canonicalize_folds_and_sorts() {
        let v = CartanVector::new(0.6 * PI, 0.3 * PI, 0.1 * PI);
        let c = canonicalize(&v);
        assert!((c.alpha_x - 0.2 * PI).abs() < 1e-14);
        assert!((c.alpha_y - 0.1 * PI).abs() < 1e-14);
        assert!((c.alpha_z - 0.1 * PI).abs() < 1e-14);
    }

    #[test]
    fn canonicalize_negative_angle() {
        let c = canonicalize(&CartanVector::new(-FRAC_PI_4, 0.0, 0.0));
        assert!((c.alpha_x - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(c.alpha_y, 0.0);
        assert_eq!(c.alpha_z, 0.0);
    }

    #[test]
    fn canonicalize_preserves_local_invariants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let v = CartanVector::new(
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
            );
            let a = local_invariants(&cartan_kernel(&v)).unwrap();
            let b = local_invariants(&cartan_kernel(&canonicalize(&v))).unwrap();
            // the fold may land on the conjugate class: Im(G1) up to sign
            let g1_match = (a.g1 - b.g1).norm() < 1e-9 || (a.g1 - b.g1.conj()).norm() < 1e-9;
            assert!(
                g1_match && (a.g2 - b.g2).abs() < 1e-9,
                "invariants differ for {v:?}: {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn local_rotation_examples() {
        let id = local_rotation_matrix(&LocalRotation::new(Axis::Z, 0.0));
        assert!(id.max_abs_diff(&ComplexMatrix2::identity()) < 1e-15);

        // spinor period: a 2 pi rotation is -I
        let full = local_rotation_matrix(&LocalRotation::new(Axis::Z, 2.0 * PI));
        assert!(full.max_abs_diff(&ComplexMatrix2::identity().scale(C64::new(-1.0, 0.0))) < 1e-15);

        let y = local_rotation_matrix(&LocalRotation::new(Axis::Y, PI));
        let expected = PAULI_Y.scale(C64::new(0.0, -1.0));
        assert!(y.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn local_rotation_special_unitary() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for _ in 0..20 {
                let r = LocalRotation::new(axis, rng.gen_range(-4.0 * PI..4.0 * PI));
                let m = local_rotation_matrix(&r);
                assert!(m.unitarity_defect() < 1e-14);
                let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
                assert!((det - C64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn local_pair_identity() {
        let u = local_pair(
            &LocalRotation::new(Axis::Z, 0.0),
            &LocalRotation::new(Axis::Z, 0.0),
        );
        assert!(u.max_abs_diff(&ComplexMatrix4::identity()) < 1e-15);
    }

    #[test]
    fn local_pair_preserves_concurrence() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let rho = crate::states::random_density(&mut rng);
            let pair = local_pair(
                &LocalRotation::new(Axis::X, rng.gen_range(0.0..2.0 * PI)),
                &LocalRotation::new(Axis::Z, rng.gen_range(0.0..2.0 * PI)),
            );
            let out = crate::qmat::conjugate(&pair, &rho).unwrap();
            let before = crate::entanglement::concurrence(&rho);
            let after = crate::entanglement::concurrence(&out);
            assert!((before - after).abs() < 1e-10);
        }
    }

    #[test]
    fn invariants_of_identity_class() {
        let inv = local_invariants(&ComplexMatrix4::identity()).unwrap();
        assert!((inv.g1 - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((inv.g2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_of_cnot_class() {
        let inv =
            local_invariants(&cartan_kernel(&CartanVector::new(FRAC_PI_4, 0.0, 0.0))).unwrap();
        assert!(inv.g1.norm() < 1e-12);
        assert!((inv.g2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_of_swap_class() {
        let inv = local_invariants(&cartan_kernel(&CartanVector::new(
            FRAC_PI_4, FRAC_PI_4, FRAC_PI_4,
        )))
        .unwrap();
        assert!((inv.g1 - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((inv.g2 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_reject_non_unitary() {
        let m = ComplexMatrix4::from_diagonal([2.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            local_invariants(&m),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn invariants_stable_under_local_dressing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        let axes = [Axis::X, Axis::Y, Axis::Z];
        for _ in 0..200 {
            let v = CartanVector::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let u = cartan_kernel(&v);
            let mut rot =
                || LocalRotation::new(axes[rng.gen_range(0..3)], rng.gen_range(0.0..2.0 * PI));
            let left = local_pair(&rot(), &rot());
            let right = local_pair(&rot(), &rot());
            let dressed = left.mul(&u).mul(&right);
            let a = local_invariants(&u).unwrap();
            let b = local_invariants(&dressed).unwrap();
            assert!((a.g1 - b.g1).norm() < 1e-9);
            assert!((a.g2 - b.g2).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            ax in -10.0_f64..10.0,
            ay in -10.0_f64..10.0,
            az in -10.0_f64..10.0,
        ) {
            let once = canonicalize(&CartanVector::new(ax, ay, az));
            let twice = canonicalize(&once);
            prop_assert_eq!(once, twice);
            prop_assert!(once.alpha_x <= FRAC_PI_4 + 1e-15);
            prop_assert!(once.alpha_x >= once.alpha_y && once.alpha_y >= once.alpha_z);
            prop_assert!(once.alpha_z >= 0.0);
        }
    }
}
