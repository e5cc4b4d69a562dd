//! Entanglement geometry: stream count, word width, superposition shift and
//! headroom, plus the dynamic ranges they admit.

use serde::Serialize;

use crate::error::{Error, Result};

/// The tuple `(m, w, l, k)`.
///
/// `m` streams are entangled pairwise with a shift of `l` bits inside
/// `w`-bit words; `k` is the headroom left for the most significant field.
/// Construction enforces `m >= 3`, `1 <= k <= l` and `(m - 1) l + k <= w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CodecParams {
    m: usize,
    w: u32,
    l: u32,
    k: u32,
}

impl CodecParams {
    pub fn new(m: usize, w: u32, l: u32, k: u32) -> Result<Self> {
        let invalid = |reason| Error::InvalidParams { m, w, l, k, reason };
        if m < 3 {
            return Err(invalid("m must be at least 3"));
        }
        if !(2..=128).contains(&w) {
            return Err(invalid("w must lie in 2..=128"));
        }
        if k < 1 || k > l {
            return Err(invalid("need 1 <= k <= l"));
        }
        if (m as u64 - 1) * l as u64 + k as u64 > w as u64 {
            return Err(invalid("need (m - 1) l + k <= w"));
        }
        Ok(Self { m, w, l, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Output bitwidth supported by the entangled representation, `(m - 2) l + k`.
    pub fn bitwidth(&self) -> u32 {
        (self.m as u32 - 2) * self.l + self.k
    }

    /// Width of the low field of the disentanglement accumulator, `(m - 1) l`.
    pub(crate) fn low_field_bits(&self) -> u32 {
        (self.m as u32 - 1) * self.l
    }
}

/// Picks `(l, k)` for `m` streams in `w`-bit words.
///
/// Among all `1 <= k <= l` with `(m - 1) l + k <= w`, the pair maximising the
/// supported output bitwidth `(m - 2) l + k` wins; ties go to the smaller `l`.
pub fn derive_params(m: usize, w: u32) -> Result<CodecParams> {
    let infeasible = Error::InfeasibleParams { m, w };
    if m < 3 || (w as u64) < m as u64 || w > 128 {
        return Err(infeasible);
    }
    let mut best: Option<(u32, u32, u32)> = None;
    for l in 1..=w {
        let used = (m as u64 - 1) * l as u64;
        if used + 1 > w as u64 {
            break;
        }
        let k = (w as u64 - used).min(l as u64) as u32;
        let width = (m as u32 - 2) * l + k;
        if best.is_none_or(|(_, _, b)| width > b) {
            best = Some((l, k, width));
        }
    }
    let (l, k, _) = best.ok_or(infeasible)?;
    CodecParams::new(m, w, l, k)
}

/// Symmetric integer interval `[lo, hi]` with `lo == -hi`.
///
/// `hi` may be zero for degenerate parameter sets that admit no nonzero data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RangeBound {
    pub lo: i128,
    pub hi: i128,
}

impl RangeBound {
    pub fn symmetric(hi: i128) -> Self {
        debug_assert!(hi >= 0);
        Self { lo: -hi, hi }
    }

    pub fn contains(&self, v: i128) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn magnitude(&self) -> u128 {
        self.hi as u128
    }
}

/// Range every output of an operation must stay within for exact recovery.
///
/// For three streams this is `2^(l+k-1) - 2^l`; for more streams it is
/// `2^((m-3) l + k) (2^(l-1) - 1)`. The two expressions differ at `m = 3`
/// unless `k == l`; the three-stream form is the tighter one there.
pub fn output_range(p: &CodecParams) -> RangeBound {
    RangeBound::symmetric(if p.m == 3 {
        three_stream_bound(p.l, p.k)
    } else {
        general_bound(p.m, p.l, p.k)
    })
}

/// Range admitted for raw inputs to the entangler. Equal to the output range,
/// so the identity is always an admissible operation.
pub fn input_range(p: &CodecParams) -> RangeBound {
    output_range(p)
}

pub(crate) fn three_stream_bound(l: u32, k: u32) -> i128 {
    (1i128 << (l + k - 1)) - (1i128 << l)
}

pub(crate) fn general_bound(m: usize, l: u32, k: u32) -> i128 {
    (1i128 << ((m as u32 - 3) * l + k)) * ((1i128 << (l - 1)) - 1)
}

/// `ceil(log2(m))` for `m >= 1`.
pub fn ceil_log2(m: usize) -> u32 {
    usize::BITS - (m.max(1) - 1).leading_zeros()
}

/// Signed input bitwidth the checksum method supports without overflowing
/// the sum stream, `w - ceil(log2(m))`.
pub fn checksum_bitwidth(m: usize, w: u32) -> u32 {
    w.saturating_sub(ceil_log2(m))
}

/// Symmetric range of a `checksum_bitwidth(m, w)`-bit signed value.
pub fn checksum_range(m: usize, w: u32) -> RangeBound {
    let b = checksum_bitwidth(m, w);
    RangeBound::symmetric(if b == 0 { 0 } else { (1i128 << (b - 1)) - 1 })
}
