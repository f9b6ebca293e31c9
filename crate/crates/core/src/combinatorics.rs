//! Factorials, multinomials and the enumeration budget.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Default cap on visited enumeration states.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n! / (k_1! ... k_r!)` with `n = Σ k_i`.
pub fn multinomial(parts: &[u64]) -> BigUint {
    let n: u64 = parts.iter().sum();
    parts.iter().fold(factorial(n), |acc, &k| acc / factorial(k))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    multinomial(&[k, n - k])
}

/// Shared counter of visited states; exceeding the limit aborts the enumeration.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    /// Record `k` more states.
    pub fn charge(&self, k: u64) -> Result<()> {
        let prev = self.used.fetch_add(k, Ordering::Relaxed);
        if prev.saturating_add(k) > self.limit {
            Err(Error::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Fail early when a known count would not fit.
    pub fn reserve(&self, k: &BigUint) -> Result<()> {
        let remaining = self.limit.saturating_sub(self.used());
        if *k > BigUint::from(remaining) {
            Err(Error::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}
