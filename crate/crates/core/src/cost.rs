//! Closed-form arithmetic-operation counts (additions and multiplications,
//! shifts ignored) for the protected and unprotected operations.
//!
//! `m` streams of `n` samples; GEMM uses `m` sub-blocks of `n x n`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CostOp {
    Gemm,
    ConvTime,
    ConvFreq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub m: f64,
    pub n: f64,
}

impl CostModel {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m: m as f64,
            n: n as f64,
        }
    }

    pub fn gemm(&self) -> f64 {
        self.m * self.n.powi(3)
    }

    pub fn conv_time(&self) -> f64 {
        4.0 * self.m * self.n * self.n
    }

    pub fn conv_freq(&self) -> f64 {
        let n = self.n;
        self.m * ((45.0 * n + 15.0) * (3.0 * n + 1.0).log2() + 3.0 * n + 1.0)
    }

    pub fn entangle_conv(&self) -> f64 {
        2.0 * self.m * self.n
    }

    pub fn entangle_gemm(&self) -> f64 {
        2.0 * self.m * self.n * self.n
    }

    pub fn checksum_gemm(&self) -> f64 {
        2.0 * self.m * self.n * self.n + self.gemm() / self.m
    }

    pub fn checksum_conv_time(&self) -> f64 {
        2.0 * self.m * self.n + self.conv_time() / self.m
    }

    pub fn checksum_conv_freq(&self) -> f64 {
        2.0 * self.m * self.n + self.conv_freq() / self.m
    }

    /// Cost of the unprotected operation.
    pub fn op_cost(&self, op: CostOp) -> f64 {
        match op {
            CostOp::Gemm => self.gemm(),
            CostOp::ConvTime => self.conv_time(),
            CostOp::ConvFreq => self.conv_freq(),
        }
    }

    /// Upper bound on entanglement, extraction and recovery.
    pub fn entangle_cost(&self, op: CostOp) -> f64 {
        match op {
            CostOp::Gemm => self.entangle_gemm(),
            CostOp::ConvTime | CostOp::ConvFreq => self.entangle_conv(),
        }
    }

    /// Extra work of the checksum method.
    pub fn checksum_cost(&self, op: CostOp) -> f64 {
        match op {
            CostOp::Gemm => self.checksum_gemm(),
            CostOp::ConvTime => self.checksum_conv_time(),
            CostOp::ConvFreq => self.checksum_conv_freq(),
        }
    }

    /// Entanglement overhead relative to the operation.
    pub fn entangle_ratio(&self, op: CostOp) -> f64 {
        self.entangle_cost(op) / self.op_cost(op)
    }

    /// Checksum overhead relative to the operation; tends to `1 / m`.
    pub fn checksum_ratio(&self, op: CostOp) -> f64 {
        self.checksum_cost(op) / self.op_cost(op)
    }
}
