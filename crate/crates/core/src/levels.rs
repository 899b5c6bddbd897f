//! Parameters of the level data structure: 4 ceil(log_{1+psi} n)^2 levels
//! arranged in 2 ceil(log) groups of 2 ceil(log) consecutive levels, with
//! group thresholds (1+psi)^g.

use crate::{rational_from_f64, Rational};
use num::{BigInt, One};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LevelParamsError {
    #[error("psi must lie in (0, 1) (got {0})")]
    BadPsi(f64),
    #[error("eta must be positive (got {0})")]
    BadEta(f64),
}

/// Shape of the level structure for a graph on `n` nodes.
#[derive(Debug, Clone, Serialize)]
pub struct LevelParams {
    pub n: usize,
    pub psi: f64,
    pub lambda: f64,
    pub eta: f64,
    /// ceil(log_{1+psi} n); 0 for n < 2.
    pub log_ceil: usize,
    pub levels_per_group: usize,
    pub groups: usize,
    pub total_levels: usize,
}

impl LevelParams {
    /// Builds parameters with the defaults eta = 1.0 (unused unless the
    /// paper's lambda formula is invoked).
    pub fn new(n: usize, psi: f64, lambda: f64) -> Result<Self, LevelParamsError> {
        Self::with_eta(n, psi, lambda, 1.0)
    }

    pub fn with_eta(n: usize, psi: f64, lambda: f64, eta: f64) -> Result<Self, LevelParamsError> {
        if !(psi > 0.0 && psi < 1.0) {
            return Err(LevelParamsError::BadPsi(psi));
        }
        if eta.is_nan() || eta <= 0.0 {
            return Err(LevelParamsError::BadEta(eta));
        }
        let log_ceil = ceil_log_base(n, psi);
        let levels_per_group = 2 * log_ceil;
        let groups = 2 * log_ceil;
        Ok(LevelParams {
            n,
            psi,
            lambda,
            eta,
            log_ceil,
            levels_per_group,
            groups,
            total_levels: groups * levels_per_group,
        })
    }

    /// The paper's assignment lambda = 2/9 (2 eta - 5); negative for
    /// eta < 2.5, so it is exposed but never used as a default.
    pub fn lambda_from_eta(eta: f64) -> f64 {
        2.0 / 9.0 * (2.0 * eta - 5.0)
    }

    /// True for n < 2, where the log-based level counts are undefined and
    /// protocols run zero rounds.
    pub fn degenerate(&self) -> bool {
        self.n < 2
    }

    /// Group index of level/round r: F(r) = floor(r / levels_per_group).
    pub fn group_of(&self, r: usize) -> usize {
        r / self.levels_per_group
    }

    /// Exact threshold (1+psi)^g for group `g`.
    pub fn threshold(&self, g: usize) -> Rational {
        let base = Rational::one() + rational_from_f64(self.psi);
        num::pow::pow(base, g)
    }

    /// Smallest integer strictly greater than threshold(g): a noisy count
    /// u satisfies u > (1+psi)^g iff u >= move_min(g). Precomputing this
    /// keeps the exact-rational comparison out of per-round hot loops.
    pub fn move_min(&self, g: usize) -> i64 {
        use num::ToPrimitive;
        let theta = self.threshold(g);
        theta.floor().to_integer().to_i64().unwrap_or(i64::MAX - 1) + 1
    }

    /// Exact (2 + lambda) (1 + psi)^exponent, the Alg. 2 estimate value.
    pub fn estimate_value(&self, exponent: usize) -> Rational {
        let base = Rational::from_integer(BigInt::from(2)) + rational_from_f64(self.lambda);
        base * self.threshold(exponent)
    }
}

/// Smallest k >= 0 with (1+psi)^k >= n, computed in exact rational
/// arithmetic (f64 log rounding must not change level counts).
fn ceil_log_base(n: usize, psi: f64) -> usize {
    if n < 2 {
        return 0;
    }
    let base = Rational::one() + rational_from_f64(psi);
    let target = Rational::from_integer(BigInt::from(n));
    let mut power = Rational::one();
    let mut k = 0usize;
    while power < target {
        power *= base.clone();
        k += 1;
    }
    k
}
