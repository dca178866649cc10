//! The collision superoperator `𝕊` induced by one scattering event.

pub mod checks;
pub mod io;
pub mod kernel;
pub mod kraus;
pub mod tensor;

pub use checks::{
    check_detailed_balance, check_sum_rule, detailed_balance_witness, tensor_energies,
};
pub use io::{fmt17, read_tensor, write_tensor, FORMAT_VERSION};
pub use kernel::{effusion_pdf, unit_kernel, KernelShape, UnitKernel};
pub use kraus::{kraus_decomposition, KrausSet};
pub use tensor::{
    assemble_tensor, assemble_tensor_with_kernel, band_class, CollisionTensor, QuadratureConfig,
    QuadratureReport, Variant, MERGE_TOL, SECULAR_TOL,
};
