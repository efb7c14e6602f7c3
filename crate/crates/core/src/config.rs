//! Centralised numerical thresholds.

use serde::{Deserialize, Serialize};

/// Tolerances shared by every module. Values are relative unless noted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// General decision threshold (CP/TP checks, rank, membership).
    pub default: f64,
    /// Hermiticity check: `‖M − M*‖_F ≤ hermitian · max(1, ‖M‖_F)`.
    pub hermitian: f64,
    /// Drop tolerance for Gram–Schmidt.
    pub gram_schmidt: f64,
    /// Linear independence threshold on Gram-matrix eigenvalues.
    pub independence: f64,
}

impl Tolerances {
    pub const fn new() -> Self {
        Self { default: 1e-9, hermitian: 1e-10, gram_schmidt: 1e-10, independence: 1e-9 }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new()
    }
}

pub const DEFAULT: Tolerances = Tolerances::new();
