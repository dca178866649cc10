//! Open dynamics of qubit chains bombarded by a collisional thermal reservoir.
//!
//! The crate builds the chain spectrum, the scattering matrices of a delta
//! barrier coupled to the first qubit, the resulting collision superoperator in
//! its exact, narrow-packet, band-resolved and local forms, and the Lindblad
//! generators those maps induce. Everything is generic over `f32`/`f64`; the
//! `*64` aliases below fix the scalar to `f64`, which is what the accuracy
//! targets assume.

// `!(x > 0)` is used on purpose: it also rejects NaN. Index loops mirror the
// matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod chain;
pub mod collision;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod scattering;

pub use analysis::{
    classify, classify_generalized_local, classify_incoherent, classify_tio, fixed_point_defect,
    gibbs_invariance, transition_rates, ClassificationReport, LocalityReport, RateMatrix, Verdict,
};
pub use chain::{
    build_chain_hamiltonian, diagonalize, gibbs_state, local_gibbs_state, local_thermal_state,
    product_state, spectrum, Basis, ChainSpec, DensityMatrix, HamiltonianTriple, Spectrum,
};
pub use collision::{
    assemble_tensor, assemble_tensor_with_kernel, check_detailed_balance, check_sum_rule,
    effusion_pdf, kraus_decomposition, read_tensor, unit_kernel, write_tensor, CollisionTensor,
    KernelShape, KrausSet, QuadratureConfig, UnitKernel, Variant,
};
pub use dynamics::{
    evolve, generic_generator, observables, perturbative_coherences, poisson_generator,
    repeated_interaction_generator, steady_state, Liouvillian, Method, ObservableSpec, Observables,
    Trajectory,
};
pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Complex, Real};
pub use scattering::{
    local_smatrix, smatrix_general, smatrix_local_limit, smatrix_single_qubit, LocalAmplitudes,
    SMatrixPair, Scatterer,
};

pub type ChainSpec64 = ChainSpec<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type CollisionTensor64 = CollisionTensor<f64>;
pub type KrausSet64 = KrausSet<f64>;
pub type Liouvillian64 = Liouvillian<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type UnitKernel64 = UnitKernel<f64>;
pub type CMatrix64 = CMatrix<f64>;
