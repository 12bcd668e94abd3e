use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on visited words for exhaustive enumerations.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// A shared cap on enumeration work.
///
/// Sphere sizes grow like `(2r-1)^m`, so every exhaustive scan charges its
/// visits here and fails hard once the cap is crossed instead of truncating.
/// The counter is atomic so parallel walkers can share one budget.
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

    pub fn charge(&self, amount: u64) -> Result<()> {
        let before = self.used.fetch_add(amount, Ordering::Relaxed);
        if before.saturating_add(amount) > self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        Ok(())
    }

    /// Fails up front if a scan of known size would not fit.
    pub fn require(&self, amount: u128) -> Result<()> {
        if amount > u128::from(self.limit) {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}
