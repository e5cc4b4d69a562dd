//! Entanglement and disentanglement of `m` integer streams.
//!
//! Entangled stream `j` holds `(c[j-1 mod m] << l) + c[j]`. Any `m - 1`
//! entangled outputs of a linear operation determine all `m` true outputs:
//! with stream `r` missing, the alternating shifted sum of the survivors
//! telescopes to
//!
//! ```text
//! acc = 2^((m-1) l) d[r] + (-1)^m d[r-1]
//! ```
//!
//! whose low `(m-1) l` bits hold `d[r-1]` and whose high part holds `d[r]`.
//! The remaining streams follow by peeling `d[j] = delta[j] - (d[j-1] << l)`.
//!
//! The accumulator is a double-width word. Stream `r` is never read.

use crate::block::{first_out_of_range, EntangledBlock, StreamBlock, Streams};
use crate::counters::OpTally;
use crate::error::{Error, Result};
use crate::params::input_range;
use crate::word::{Wide, Word};

const CHUNK: usize = 2048;

/// The stream lost to a fail-stop failure, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub enum FailedIndex {
    #[default]
    None,
    Stream(usize),
}

impl FailedIndex {
    /// Stream treated as missing during recovery; stream 0 when nothing failed.
    pub fn resolve(self, m: usize) -> Result<usize> {
        match self {
            FailedIndex::None => Ok(0),
            FailedIndex::Stream(r) if r < m => Ok(r),
            FailedIndex::Stream(r) => Err(Error::FailIndex {
                index: r,
                workers: m,
            }),
        }
    }
}

impl From<Option<usize>> for FailedIndex {
    fn from(v: Option<usize>) -> Self {
        v.map_or(FailedIndex::None, FailedIndex::Stream)
    }
}

/// Mutable view of stream `a` alongside a shared view of stream `b`.
fn pair_mut<W>(data: &mut [W], n: usize, a: usize, b: usize) -> (&mut [W], &[W]) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = data.split_at_mut(b * n);
        (&mut lo[a * n..(a + 1) * n], &hi[..n])
    } else {
        let (lo, hi) = data.split_at_mut(a * n);
        (&mut hi[..n], &lo[b * n..(b + 1) * n])
    }
}

/// Entangles a copy of `block`.
pub fn entangle<W: Word>(block: &StreamBlock<W>) -> Result<EntangledBlock<W>> {
    entangle_in_place(block.clone())
}

/// Entangles `block`, reusing its buffer.
pub fn entangle_in_place<W: Word>(block: StreamBlock<W>) -> Result<EntangledBlock<W>> {
    entangle_counted(block, &mut OpTally::default())
}

pub fn entangle_counted<W: Word>(
    mut block: StreamBlock<W>,
    tally: &mut OpTally,
) -> Result<EntangledBlock<W>> {
    let p = *block.params();
    let bound = input_range(&p);
    let (m, n, l) = (p.m(), block.n(), p.l());
    let data = block.streams_mut().as_mut_slice();
    let mut last = vec![W::ZERO; CHUNK.min(n)];

    for start in (0..n).step_by(CHUNK) {
        let len = CHUNK.min(n - start);
        let span = start..start + len;
        // Checked chunk by chunk while it is hot in cache.
        for j in 0..m {
            if let Some((pos, value)) = first_out_of_range(&data[j * n..][span.clone()], &bound) {
                return Err(Error::OutOfRange {
                    stream: j,
                    position: start + pos,
                    value,
                    bound: bound.hi,
                });
            }
        }
        last[..len].copy_from_slice(&data[(m - 1) * n..][span.clone()]);
        for j in (1..m).rev() {
            let (dst, src) = pair_mut(data, n, j, j - 1);
            for (d, &s) in dst[span.clone()].iter_mut().zip(&src[span.clone()]) {
                *d = s.wrapping_shl(l).wrapping_add(*d);
            }
        }
        for (d, &s) in data[span].iter_mut().zip(&last[..len]) {
            *d = s.wrapping_shl(l).wrapping_add(*d);
        }
    }
    let cells = (m * n) as u64;
    tally.bump(cells, 0, cells);
    Ok(block.into_entangled_unchecked())
}

/// Recovers all `m` output streams from the `m - 1` streams other than
/// `failed`. The failed stream's contents are never read.
pub fn disentangle<W: Word>(
    block: &EntangledBlock<W>,
    failed: FailedIndex,
) -> Result<StreamBlock<W>> {
    let r = failed.resolve(block.m())?;
    let mut out = Streams::zeros(block.m(), block.n());
    for j in (0..block.m()).filter(|&j| j != r) {
        out.stream_mut(j).copy_from_slice(block.stream(j));
    }
    let copy = EntangledBlock::new(*block.params(), out)?;
    disentangle_in_place(copy, failed)
}

pub fn disentangle_in_place<W: Word>(
    block: EntangledBlock<W>,
    failed: FailedIndex,
) -> Result<StreamBlock<W>> {
    disentangle_counted(block, failed, &mut OpTally::default())
}

pub fn disentangle_counted<W: Word>(
    mut block: EntangledBlock<W>,
    failed: FailedIndex,
    tally: &mut OpTally,
) -> Result<StreamBlock<W>> {
    let p = *block.params();
    let (m, n, l) = (p.m(), block.n(), p.l());
    let r = failed.resolve(m)?;
    let bits = p.low_field_bits();
    let lift = <W::Wide as Wide>::BITS - bits;
    // Odd m: accumulate (-1)^m times the alternating sum so the low field
    // holds d[r-1] itself and no negation is needed.
    let odd = m % 2 == 1;
    let idx = |off: usize| (r + off) % m;
    let data = block.streams_mut().as_mut_slice();
    let mut acc = vec![<W::Wide as Default>::default(); CHUNK.min(n)];

    for start in (0..n).step_by(CHUNK) {
        let len = CHUNK.min(n - start);
        let span = start..start + len;
        let acc = &mut acc[..len];

        // Terms m' = 0 and 1 of the alternating sum.
        {
            let s0 = &data[idx(1) * n..][span.clone()];
            let s1 = &data[idx(2) * n..][span.clone()];
            let (sh0, sh1) = ((m as u32 - 2) * l, (m as u32 - 3) * l);
            for ((a, &x0), &x1) in acc.iter_mut().zip(s0).zip(s1) {
                let t0 = x0.widen().wrapping_shl(sh0);
                let t1 = x1.widen().wrapping_shl(sh1);
                *a = if odd {
                    t1.wrapping_sub(t0)
                } else {
                    t0.wrapping_sub(t1)
                };
            }
        }
        for t in 2..m - 1 {
            let src = &data[idx(t + 1) * n..][span.clone()];
            let sh = (m as u32 - 2 - t as u32) * l;
            let positive = (t % 2 == 0) != odd;
            for (a, &x) in acc.iter_mut().zip(src) {
                let v = x.widen().wrapping_shl(sh);
                *a = if positive {
                    a.wrapping_add(v)
                } else {
                    a.wrapping_sub(v)
                };
            }
        }

        // Low field is d[r-1]; the rest, scaled by (-1)^m, is d[r].
        {
            let dr = &mut data[r * n..][span.clone()];
            for (a, d) in acc.iter().zip(dr) {
                let low = a.wrapping_shl(lift).sar(lift);
                let high = if odd {
                    low.wrapping_sub(*a)
                } else {
                    a.wrapping_sub(low)
                };
                *d = W::narrow(high.sar(bits));
            }
        }
        let prev = &mut data[idx(m - 1) * n..][span.clone()];
        for (a, d) in acc.iter().zip(prev) {
            *d = W::narrow(a.wrapping_shl(lift).sar(lift));
        }

        // Peel the chain forward from d[r].
        for t in 1..m - 1 {
            let (dst, src) = pair_mut(data, n, idx(t), idx(t - 1));
            for (d, &s) in dst[span.clone()].iter_mut().zip(&src[span.clone()]) {
                *d = d.wrapping_sub(s.wrapping_shl(l));
            }
        }
    }
    let pos = n as u64;
    let m64 = m as u64;
    tally.bump((2 * m64 - 3) * pos, 0, (2 * m64 - 1) * pos);
    Ok(block.into_plain_unchecked())
}

/// Three-stream disentangler following the explicit two-step extraction:
/// `t = delta[r+2] - (delta[r+1] << l)`, `d[r+2]` from the low `2l` bits,
/// `d[r] = -(t - d[r+2]) >> 2l`, `d[r+1] = delta[r+1] - (d[r] << l)`.
///
/// Kept separate from [`disentangle`] so the two can be checked against each
/// other.
pub fn disentangle_m3<W: Word>(
    block: &EntangledBlock<W>,
    failed: FailedIndex,
) -> Result<StreamBlock<W>> {
    let p = *block.params();
    if p.m() != 3 {
        return Err(Error::StreamCount {
            expected: 3,
            got: p.m(),
        });
    }
    let r = failed.resolve(3)?;
    let (i0, i1, i2) = (r, (r + 1) % 3, (r + 2) % 3);
    let l = p.l();
    let w = W::BITS;
    // Emulates a register of exactly 2w bits.
    let dw = 2 * w;
    let reg = |v: i128| -> i128 { (v << (128 - dw)) >> (128 - dw) };
    let lift = 2 * (w - l);

    let n = block.n();
    let mut out = Streams::zeros(3, n);
    for pos in 0..n {
        let e1 = block.get(i1, pos).to_i128();
        let e2 = block.get(i2, pos).to_i128();
        let tmp = reg(e2 - reg(e1 << l));
        let d2 = reg(tmp << lift) >> lift;
        let d0 = reg(-(tmp - d2)) >> (2 * l);
        let d0w = W::wrap_i128(d0);
        let d1 = block.get(i1, pos).wrapping_sub(d0w.wrapping_shl(l));
        out.stream_mut(i0)[pos] = d0w;
        out.stream_mut(i1)[pos] = d1;
        out.stream_mut(i2)[pos] = W::wrap_i128(d2);
    }
    StreamBlock::new(p, out)
}
