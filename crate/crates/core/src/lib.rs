//! Simulation and analysis toolkit for entanglement-based quantum digital
//! signatures (QDS) over a photon-pair distribution network.
//!
//! The crate is organized around the life cycle of a three-party QDS
//! deployment:
//!
//! * [`math`] — binary entropy, adversary error-rate inversion, photon-pair
//!   statistics, and link budgets.
//! * [`noise`] — the analytic per-photon-number yield/error model that
//!   predicts gain and QBER for a user pair.
//! * [`security`] — finite-size thresholds, failure-probability bounds,
//!   required raw-key length, and signature rate.
//! * [`sim`] — a seeded Monte Carlo photon-pair source, splitter tree, and
//!   detector simulation emitting timetag streams; doubles as the brute-force
//!   oracle for [`noise`].
//! * [`coincidence`] — timetag file format, cross-correlation, delay
//!   discovery, coincidence extraction with time-multiplex demultiplexing,
//!   sifting, and crosstalk/QBER analysis.
//! * [`calibration`] — multi-state cyclic coordinate descent QBER
//!   minimization against a simulated retarder plant.
//! * [`extract`] — source-parameter extraction from singles/coincidence
//!   counts via simplex fitting.
//! * [`protocol`] — the three-party sign/verify state machine and an
//!   end-to-end run harness.
//!
//! Analytic modules are generic over the floating-point scalar (see
//! [`scalar::Scalar`]); the aliases below fix `f64` for ordinary use.

pub mod calibration;
pub mod coincidence;
pub mod error;
pub mod extract;
pub mod math;
pub mod noise;
pub mod params;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod security;
pub mod sim;
pub mod simplex;
pub mod tags;

pub use error::Error;
pub use params::{Basis, PerPair, PerUser, User, UserPair};

/// Default scalar for the analytic model.
pub type Real = f64;

/// Concrete aliases of the scalar-generic types.
pub type SystemParams = params::SystemParams<Real>;
pub type LinkBudget = math::LinkBudget<Real>;
pub type PairDistribution = math::PairDistribution<Real>;
pub type GainQber = noise::GainQber<Real>;
pub type SecurityBudget = security::SecurityBudget<Real>;
pub type CountTriple = extract::CountTriple<Real>;
pub type ExtractionResult = extract::ExtractionResult<Real>;

/// Crate-wide result type.
pub type Result<T, E = Error> = std::result::Result<T, E>;
