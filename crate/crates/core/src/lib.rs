//! Observability analysis for polynomial dynamics on nonuniform hypergraphs.
//!
//! A hypergraph induces the polynomial system `dx/dt = sum_k A_k x^(k-1)`,
//! `y = C x`, with one supersymmetric adjacency tensor per edge cardinality.
//! This crate builds that system exactly, stacks iterated Lie derivatives of
//! the outputs into the nonlinear observability matrix, and decides local
//! weak observability by testing whether the matrix has generic rank `n` —
//! evaluated at random points of large prime fields, with an auditable
//! failure bound on each certificate. On top of the rank test sit sensor
//! placement searches (greedy and exhaustive) and generators for the
//! canonical chain, ring, star, and complete topologies.
//!
//! Core arithmetic is generic over the coefficient scalar; the concrete
//! aliases below fix the production types (exact rationals everywhere, a
//! prime field inside the rank test, floats only in simulation).
//!
//! ```
//! use hyperobs::{complete_hypergraph, is_locally_weakly_observable, sensor_matrix, SensorSet};
//!
//! // one 3-way hyperedge on three nodes: dx1/dt = x2 x3, ...
//! let g = complete_hypergraph(3, 3)?;
//! let c = sensor_matrix(&SensorSet::new([1]), 3)?;
//! let verdict = is_locally_weakly_observable(&g, &c)?;
//! assert!(verdict.observable);
//! assert_eq!(verdict.certificate.rank, 3);
//!
//! // the triangle graph is linear and one sensor misses a direction
//! let triangle = complete_hypergraph(3, 2)?;
//! let verdict = is_locally_weakly_observable(&triangle, &c)?;
//! assert!(!verdict.observable);
//! # Ok::<(), hyperobs::Error>(())
//! ```

pub mod config;
pub mod dynamics;
pub mod error;
pub mod hypergraph;
pub mod mon;
pub mod observability;
pub mod poly;
pub mod scalar;
pub mod tensor;

pub use config::Caps;
pub use dynamics::{sensor_matrix, simulate, vector_field, OutputMatrix, SensorSet, Trajectory};
pub use error::{Error, Result};
pub use hypergraph::{
    complete_hypergraph, hyperchain, hyperring, hyperstar, Hyperedge, Hypergraph, NodeId,
};
pub use mon::{
    exhaustive_mon, greedy_mon, monotonicity_experiment, ExperimentReport, MonMethod, MonReport,
    TopologyFamily,
};
pub use observability::{
    b_matrix, check_proposition15, generic_rank, is_locally_weakly_observable, lie_derivative,
    nom_kronecker, nom_symbolic, observability_verdict, observation_stack, verdict_for_sensors,
    NomSymbolic, ObsOptions, ObservabilityVerdict, ObservationStack, Prop15Report, RankCertificate,
    RankOptions,
};
pub use scalar::{Fp, Rat, Scalar};

/// Production polynomial: exact rational coefficients.
pub type Poly = poly::Polynomial<Rat>;
/// Production vector field: exact rational coefficients.
pub type VectorField = dynamics::PolyVectorField<Rat>;
