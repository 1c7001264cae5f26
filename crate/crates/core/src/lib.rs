//! Spectral behaviour of discrete surfaces under finite coverings.
//!
//! The crate builds weighted 2-dimensional cell complexes, finite covers of
//! them from permutation voltages, and Laplace spectra of base and cover.
//! On top of that sit nodal-domain extraction, intersection cocycles, coset
//! actions of fundamental groups, and a harness that turns eigenvalue
//! counting functions into stability verdicts and bound ledgers.

pub mod complex;
pub mod config;
pub mod cover;
pub mod error;
pub mod group;
pub mod homology;
pub mod nodal;
pub mod respec;
pub mod snf;
pub mod spectra;
pub mod stability;

pub use complex::{
    build_preset, AbelianInvariants, DomainTopology, Orientation, PresetKind, SpanningTree,
    SurfaceComplex,
};
pub use config::RunConfig;
pub use cover::{build_cover, build_tower, preimage_components, subdomain_group, Cover, CoverSpec, Tower};
pub use error::{Error, Result};
pub use group::{CosetAction, Presentation, SubgroupWordSet, Word};
pub use nodal::{
    canonical_cluster_vector, intersection_cocycles, nodal_decomposition, unstable_cover_plan,
    IntersectionCocycle, NodalDecomposition, UnstableCoverPlan,
};
pub use spectra::{
    assemble, count_below, dense_spectrum, dirichlet_lambda0, invariant_splitting,
    lowest_eigenpairs, spectrum_past, transfer_pair, CountMode, LaplaceKind, LaplaceOperator,
    Spectrum, TransferPair,
};
pub use stability::{
    numberg_check, sigma_upper_bounds, stability_verdict, tower_experiment, StabilityReport,
    StabilityTarget, Verdict,
};
