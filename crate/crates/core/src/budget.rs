//! Lattice-point budget for sweep-style computations.

use crate::error::{Error, Result};

/// Default cap on the total number of lattice points an experiment may touch.
pub const DEFAULT_POINT_CAP: u64 = 50_000_000;

/// Counts lattice points touched by window enumerations and rejects work
/// beyond the cap before it is materialized.
#[derive(Debug, Clone)]
pub struct Budget {
    cap: Option<u64>,
    used: u64,
}

impl Budget {
    pub fn with_cap(cap: u64) -> Self {
        Self { cap: Some(cap), used: 0 }
    }

    pub fn unlimited() -> Self {
        Self { cap: None, used: 0 }
    }

    pub fn default_cap() -> Self {
        Self::with_cap(DEFAULT_POINT_CAP)
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn charge(&mut self, points: u64) -> Result<()> {
        self.used = self.used.saturating_add(points);
        if let Some(cap) = self.cap {
            if self.used > cap {
                return Err(Error::BudgetExceeded { touched: self.used, cap });
            }
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::default_cap()
    }
}
