//! Nonclassical light from thermal light.
//!
//! Resonant absorption by a two-level system turns a thermal field mode into
//! a nonclassical one. This crate implements the pipeline around that fact:
//! truncated Fock-space states, the four-operator absorption map, the
//! entanglement potential behind a balanced splitter, the Klyshko
//! higher-order criteria that certify the nonclassicality from number
//! statistics alone, the large-occupation asymptotics, a noise-robust
//! variant for trapped-ion population measurements, and a deterministic
//! parameter-sweep engine feeding the command-line tool.
//!
//! All numerics are generic over the [`Scalar`] precision; the concrete
//! aliases at the crate root fix f64, which every documented tolerance
//! refers to.

pub mod asymptotics;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod ion;
pub mod jc;
pub mod klyshko;
pub mod linalg;
pub mod scalar;
pub mod selftest;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// f64 density matrix.
pub type DensityMatrix64 = fock::DensityMatrix<f64>;
/// f32 density matrix.
pub type DensityMatrix32 = fock::DensityMatrix<f32>;
/// f64 number distribution.
pub type NumberDistribution64 = fock::NumberDistribution<f64>;
/// f32 number distribution.
pub type NumberDistribution32 = fock::NumberDistribution<f32>;
/// f64 absorption Kraus family.
pub type KrausSet64 = jc::KrausSet<f64>;
/// f64 two-mode state behind the balanced splitter.
pub type TwoModeDensityMatrix64 = entanglement::TwoModeDensityMatrix<f64>;
/// f64 detection-region grid.
pub type ViolationGrid64 = klyshko::ViolationGrid<f64>;
/// f64 population measurement model.
pub type MeasurementModel64 = ion::MeasurementModel<f64>;
/// f64 single-order search result.
pub type AsymptoticResult64 = asymptotics::AsymptoticResult<f64>;
