//! Instrumented floating-point operation accounting.
//!
//! Counters are incremented at the sites that do the work, with the sizes
//! the loops actually execute, so per-step costs are exact and reproducible
//! rather than estimated after the fact.
//!
//! Accounting convention (only ratios and slopes are ever asserted):
//! - one multiply-add counts as 2 FLOPs,
//! - one `exp` counts as 4 FLOP-equivalents,
//! - one divide counts as 1.

pub const FLOPS_PER_MAC: u64 = 2;
pub const FLOPS_PER_EXP: u64 = 4;
pub const FLOPS_PER_DIV: u64 = 1;

/// Monotone FLOP counter.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopCounter {
    flops: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, flops: u64) {
        self.flops += flops;
    }

    /// `n` multiply-adds.
    pub fn macs(&mut self, n: u64) {
        self.flops += n * FLOPS_PER_MAC;
    }

    pub fn exps(&mut self, n: u64) {
        self.flops += n * FLOPS_PER_EXP;
    }

    pub fn divs(&mut self, n: u64) {
        self.flops += n * FLOPS_PER_DIV;
    }

    pub fn total(&self) -> u64 {
        self.flops
    }

    /// Counts an `[m, k] x [k, n]` matrix product, `batch` times.
    pub fn matmul(&mut self, batch: u64, m: u64, k: u64, n: u64) {
        self.macs(batch * m * k * n);
    }
}
