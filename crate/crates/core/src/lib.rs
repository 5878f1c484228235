//! Lyapunov spectra of the Kontsevich–Zorich cocycle on the invariant and
//! anti-invariant parts of the orienting double cover of a stratum of
//! non-orientable quadratic differentials.
//!
//! The pipeline: [`strata`] numerology, [`genperm`] combinatorial data,
//! [`cover`] double covers, [`rauzy`] induction, [`homology`] intersection
//! forms and splittings, [`lyapunov`] exponent estimation. [`periodic`]
//! checks cylinder lemmas on square-tiled surfaces and [`deviation`] grows
//! long orbits.

pub mod cover;
pub mod deviation;
pub mod error;
pub mod genperm;
pub mod homology;
pub mod linalg;
pub mod lyapunov;
pub mod periodic;
pub mod rauzy;
pub mod strata;

pub use cover::{orient_double_cover, project, push_forward, CoverIet, Parity, Sign, SignedVector};
pub use error::{Error, Result};
pub use genperm::{catalog, catalog_entries, stratum_of, CatalogEntry, GeneralizedPermutation, Letter, Row};
pub use strata::{hat_pattern, stratum_info, validate_pattern, SingularityPattern, StratumInfo};
pub use rauzy::{rauzy_move, zorich_step, InductionState, LengthVector, MoveRecord, TransitionMatrix};
pub use homology::{check_splitting, check_symplectic, intersection_form, split_homology, IntersectionForm, SplitHomology};
pub use lyapunov::{estimate_spectrum, estimate_unsplit, fixed_matrix_selftest, EstimatorConfig, Exponent, SpectrumEstimate};
pub use periodic::{
    check_monodromy, cylinder_decomposition, isotropic_spans, leaf_integral, run_fixture_suite, CylinderDecomposition, IsotropicSpans,
    SquareTiledCover, SuiteReport,
};
pub use deviation::{fit_slopes, run_orbit, DeviationSeries, SlopeFit};
