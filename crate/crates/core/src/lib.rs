//! Energy Hilbert spaces of weighted graphs.
//!
//! Dipoles, monopoles and reproducing kernels on finite sections of
//! (possibly infinite) weighted graphs, the graph ↔ Dirac Gram duality,
//! deficiency and boundary diagnostics along filtrations, Fourier-side
//! checks on ℤ, and Monte Carlo checks of the Gaussian field identities.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod deficiency;
pub mod dipole;
pub mod duality;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod numerics;

pub use boundary::{
    boundary_point_limit, boundary_sum_identity, indicator_energy, normal_derivative,
    section_boundary, weak_null_scan, BoundaryIdentity, BoundaryLimit, Filtration, WeakNullScan,
};
pub use deficiency::{
    defect_shoot_chain, finite_section_scan, semibounded_check, DefectIndicator, DefectLevel,
    DefectVerdict,
};
pub use dipole::{
    bipole, coefficient_readout, dipole, dipoles, gram, l2c_embedding_check, monopole_trace,
    quadratic_identity_check, reconstruct_delta, BoundaryMode, EmbeddingCheck, EnergyTrace,
    FiniteSection, KernelMatrix, QuadraticCheck, Reconstruction, SectionSolver, TraceLevel,
    Verdict,
};
pub use duality::{
    dirac_gram, duality_pair_check, graph_to_kernel, harmonic_defect, kernel_to_graph,
    roundtrip_check, DiracGram, HarmonicCandidate, RoundTrip,
};
pub use error::{Error, Result};
pub use gaussian::{
    characteristic_target, dipole_transform_target, gaussian_field, hermite, mc_characteristic,
    mc_dipole_transform, mc_moment, moment_target, sampled_covariance, CovarianceEstimate,
    GaussianModel, HermiteFamily, MonteCarloEstimate,
};
pub use graph::{Extension, GraphFunction, Scalar, VertexId, WeightedGraph};
pub use lattice::{
    chain_closed_forms, direct_energy, fourier_energy, monopole_symbol_divergence, PeriodicSymbol,
};
pub use numerics::{DenseMatrix, RandomSource};
