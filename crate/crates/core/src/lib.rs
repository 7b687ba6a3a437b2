//! Quantum relative entropy and von Neumann entropy derivatives through
//! integrals of the negative spectral mass `tr⁻` of a matrix pencil, with
//! spectral reference formulas and data-processing checks built on top.
//!
//! Module map:
//!
//! * [`hermitian`]: validated Hermitian / psdh / density matrices, spectra, `tr±`, supports;
//! * [`random`]: seeded Ginibre states, Hermitian matrices and POVMs;
//! * [`entropy`]: spectral `S`, `D`, binary entropy and Holevo `χ`;
//! * [`pencil`]: `A(t) = (1−t)ρ + tσ` and `ρ + tσ`, `tr⁻` along them, positivity windows;
//! * [`quadrature`]: adaptive Gauss–Kronrod on finite and infinite ranges;
//! * [`qre`]: the integral formulas and the finite-difference derivative oracle;
//! * [`channels`]: positive trace-nonincreasing maps and data-processing reports;
//! * [`binary`]: reduction to binary classical states and lower bounds on `χ`.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binary;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod hermitian;
pub mod json;
pub mod pencil;
pub mod qre;
pub mod quadrature;
pub mod random;

pub use binary::{
    chi_lower_bound_min, distinguishing_measurement, explicit_weaker_bound, kim_bound, mutual_info_binary,
    reduce_to_binary, BinaryClassicalState, BinaryReduction,
};
pub use channels::{
    apply_map, dpi_check, holevo_dpi_check, tr_monotonicity_check, validate_map, DpiReport, PositiveMapSpec, Slack,
};
pub use entropy::{binary_entropy, holevo_chi, relative_entropy_spectral, von_neumann_entropy, EntropyValue};
pub use error::{Error, Result};
pub use hermitian::{
    eig_hermitian, support_contained, tr_signed, trace_norm, CMatrix, ComplexMatrixData, DensityMatrix,
    HermitianMatrix, PsdhMatrix, SignedTrace, SpectralDecomposition, C64,
};
pub use pencil::{Pencil, PencilForm, PositivityWindow};
pub use qre::{entropy_derivative_fd, entropy_derivative_integral, relative_entropy_integral, IntegralForm};
pub use quadrature::{integrate, QuadConfig, QuadResult};
pub use random::random_density;
