//! Entangling power of two-qubit gates on mixed states.
//!
//! The crate provides:
//!
//! * [`qmat`]: fixed-size complex matrices, hermitian eigensolving and
//!   validated density matrices;
//! * [`gates`]: Cartan kernels, chamber canonicalization, local rotations
//!   and local-equivalence invariants;
//! * [`entanglement`]: concurrence, entanglement of formation and the
//!   partial-transpose separability test;
//! * [`states`]: maximally entangled mixed states (MEMS), the analytic
//!   separable sources reaching them, and random-state samplers with exact
//!   purity control;
//! * [`search`]: entangling-power scans, inverse MEMS-reachability sweeps
//!   and the analytic identity verifier.
//!
//! All scan outputs are deterministic for a fixed seed regardless of worker
//! count: every work item derives its own RNG stream from (seed, index).

pub mod entanglement;
pub mod error;
pub mod gates;
pub mod qmat;
pub mod search;
pub mod states;

pub use entanglement::{concurrence, eof, eof_for_concurrence, is_separable, EntanglementReport};
pub use error::{Error, Result};
pub use gates::{
    canonicalize, cartan_kernel, local_invariants, local_pair, local_rotation_matrix, Axis,
    CartanVector, LocalInvariants, LocalRotation,
};
pub use qmat::{
    conjugate, hermitian_eigenvalues, tensor_product, ComplexMatrix2, ComplexMatrix4,
    DensityMatrix2, DensityMatrix4, Subsystem,
};
pub use search::{
    ep_scan, inverse_reach_fraction, mems_eof_curve, theorem_check, uniform_grid, weyl_sweep,
    EpCurve, EpRow, InverseScanConfig, ReachFractions, ReachMap, ReachRow, ScanConfig,
    SourceFamily, TheoremReport,
};
pub use states::{
    gamma_from_purity, mems, mems_purity, random_cc, random_cc_raw, random_density, random_product,
    random_unitary, source_c, source_r2, source_r3, BasisSampling, CcState, MemsParams, MemsRank,
    ProductState,
};
