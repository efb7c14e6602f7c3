//! Quantum superchannels on the operator system spanned by quantum channels.
//!
//! The crate works entirely in the Choi picture:
//!
//! * [`matcore`]: dense complex matrices, Hermitian eigensolver, partial traces.
//! * [`choi`]: Choi matrices of maps `M_d → M_r`, Kraus forms, duals.
//! * [`opsys`]: the operator system `S(d, r)` of Choi matrices of the span of channels.
//! * [`supermap`]: superchannels as Choi matrices on `M_{d1}(M_{r1}) → M_{d2}(M_{r2})`,
//!   the induced unital map, the pre/post-processing characterisation, tensoring.
//! * [`extend`]: completely positive extensions of a QSC (a map known only on
//!   `S(d1, r1)`) found by Dykstra alternating projections.
//! * [`extremal`]: extreme-point tests for constrained completely positive maps.
//!
//! All numerics are generic over the real scalar `T: Real` (`f64` and `f32`);
//! the aliases below fix the common double-precision instantiation.

pub mod choi;
pub mod config;
pub mod demo;
pub mod error;
pub mod extend;
pub mod extremal;
pub mod instances;
pub mod matcore;
pub mod opsys;
pub mod random;
pub mod scalar;
pub mod supermap;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;

pub type ComplexMatrix = matcore::Matrix<f64>;
pub type ComplexMatrix32 = matcore::Matrix<f32>;
pub type ChannelChoi = choi::ChannelChoi<f64>;
pub type ChannelChoi32 = choi::ChannelChoi<f32>;
pub type KrausSet = choi::KrausSet<f64>;
pub type Superchannel = supermap::Superchannel<f64>;
pub type Superchannel32 = supermap::Superchannel<f32>;
pub type Characterisation = supermap::Characterisation<f64>;
pub type QscAction = extend::QscAction<f64>;
pub type FeasibilityReport = extend::FeasibilityReport<f64>;
pub type ConstraintSpaces = extremal::ConstraintSpaces<f64>;
