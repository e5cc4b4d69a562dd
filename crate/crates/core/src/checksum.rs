//! Checksum-stream baseline: an extra stream holding per-position sums of
//! the inputs is processed alongside them, and a lost stream is recovered by
//! subtraction.

use crate::block::{StreamBlock, Streams};
use crate::codec::FailedIndex;
use crate::counters::OpTally;
use crate::error::{Error, Result};
use crate::ops::LsbOp;
use crate::params::{checksum_range, CodecParams};
use crate::word::Word;

/// `m` data streams followed by their checksum stream (index `m`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChecksumBlock<W> {
    params: CodecParams,
    streams: Streams<W>,
}

impl<W: Word> ChecksumBlock<W> {
    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    /// Number of data streams.
    pub fn m(&self) -> usize {
        self.params.m()
    }

    pub fn n(&self) -> usize {
        self.streams.n()
    }

    pub fn streams(&self) -> &Streams<W> {
        &self.streams
    }

    pub fn stream(&self, i: usize) -> &[W] {
        self.streams.stream(i)
    }

    pub fn stream_mut(&mut self, i: usize) -> &mut [W] {
        self.streams.stream_mut(i)
    }

    pub fn checksum(&self) -> &[W] {
        self.streams.stream(self.m())
    }

    /// Drops the checksum stream without verifying it.
    pub fn into_data(self) -> Result<StreamBlock<W>> {
        let (m, n) = (self.m(), self.n());
        let mut data = self.streams.into_vec();
        data.truncate(m * n);
        StreamBlock::new(self.params, Streams::new(m, n, data)?)
    }

    /// Builds a block from `m + 1` already-processed streams.
    pub fn from_parts(params: CodecParams, streams: Streams<W>) -> Result<Self> {
        if streams.m() != params.m() + 1 {
            return Err(Error::StreamCount {
                expected: params.m() + 1,
                got: streams.m(),
            });
        }
        Ok(Self { params, streams })
    }
}

pub fn checksum_encode<W: Word>(block: &StreamBlock<W>) -> Result<ChecksumBlock<W>> {
    checksum_encode_in_place(block.clone())
}

/// Appends the sum stream to the block's own buffer.
pub fn checksum_encode_in_place<W: Word>(block: StreamBlock<W>) -> Result<ChecksumBlock<W>> {
    checksum_encode_counted(block, &mut OpTally::default())
}

pub fn checksum_encode_counted<W: Word>(
    block: StreamBlock<W>,
    tally: &mut OpTally,
) -> Result<ChecksumBlock<W>> {
    let (m, n) = (block.m(), block.n());
    block.streams().check_range(&checksum_range(m, W::BITS))?;
    let params = *block.params();
    let mut data = block.into_streams().into_vec();
    data.reserve_exact(n);
    data.extend_from_within(..n);
    let (inputs, sum) = data.split_at_mut(m * n);
    for j in 1..m {
        for (s, &x) in sum.iter_mut().zip(&inputs[j * n..(j + 1) * n]) {
            *s = s.wrapping_add(x);
        }
    }
    tally.bump((m as u64 - 1) * n as u64, 0, 0);
    Ok(ChecksumBlock {
        params,
        streams: Streams::new(m + 1, n, data)?,
    })
}

/// The op that keeps the checksum relation on the sum stream: additive
/// kernels are added once per data stream, so the sum stream gets `m * g`.
pub fn checksum_stream_op<W: Word>(op: &LsbOp<W>, m: usize) -> LsbOp<W> {
    use crate::ops::Kernel;
    match op.kernel() {
        Kernel::Vector(g) if op.kind().is_additive() => {
            let scale = W::wrap_i128(m as i128);
            LsbOp::new(
                op.kind(),
                Kernel::Vector(g.iter().map(|&v| v.wrapping_mul(scale)).collect()),
            )
            .expect("same kind and kernel shape")
        }
        _ => op.clone(),
    }
}

pub fn checksum_apply<W: Word>(
    op: &LsbOp<W>,
    block: &ChecksumBlock<W>,
) -> Result<ChecksumBlock<W>> {
    checksum_apply_counted(op, block, &mut OpTally::default())
}

pub fn checksum_apply_counted<W: Word>(
    op: &LsbOp<W>,
    block: &ChecksumBlock<W>,
    tally: &mut OpTally,
) -> Result<ChecksumBlock<W>> {
    let m = block.m();
    let out_len = op.out_len(block.n())?;
    let mut out = Streams::zeros(m + 1, out_len);
    for j in 0..m {
        op.run(block.stream(j), out.stream_mut(j), tally)?;
    }
    checksum_stream_op(op, m).run(block.checksum(), out.stream_mut(m), tally)?;
    ChecksumBlock::from_parts(block.params, out)
}

/// Returns the `m` data streams, rebuilding a lost one from the checksum.
/// With no failure the checksum relation is verified.
pub fn checksum_recover<W: Word>(
    block: &ChecksumBlock<W>,
    failed: FailedIndex,
) -> Result<StreamBlock<W>> {
    checksum_recover_counted(block, failed, &mut OpTally::default())
}

pub fn checksum_recover_counted<W: Word>(
    block: &ChecksumBlock<W>,
    failed: FailedIndex,
    tally: &mut OpTally,
) -> Result<StreamBlock<W>> {
    let (m, n) = (block.m(), block.n());
    let mut out = Streams::zeros(m, n);
    match failed {
        FailedIndex::Stream(r) if r > m => {
            return Err(Error::FailIndex {
                index: r,
                workers: m + 1,
            })
        }
        FailedIndex::Stream(r) if r < m => {
            let lost = out.stream_mut(r);
            lost.copy_from_slice(block.checksum());
            for j in (0..m).filter(|&j| j != r) {
                for (d, &x) in lost.iter_mut().zip(block.stream(j)) {
                    *d = d.wrapping_sub(x);
                }
            }
            tally.bump((m as u64 - 1) * n as u64, 0, 0);
            for j in (0..m).filter(|&j| j != r) {
                out.stream_mut(j).copy_from_slice(block.stream(j));
            }
        }
        FailedIndex::Stream(_) => {
            out.as_mut_slice()
                .copy_from_slice(&block.streams().as_slice()[..m * n]);
        }
        FailedIndex::None => {
            out.as_mut_slice()
                .copy_from_slice(&block.streams().as_slice()[..m * n]);
            let mut sum = block.stream(0).to_vec();
            for j in 1..m {
                for (s, &x) in sum.iter_mut().zip(block.stream(j)) {
                    *s = s.wrapping_add(x);
                }
            }
            tally.bump((m as u64 - 1) * n as u64, 0, 0);
            if let Some(position) = sum.iter().zip(block.checksum()).position(|(a, b)| a != b) {
                return Err(Error::ChecksumMismatch { position });
            }
        }
    }
    StreamBlock::new(block.params, out)
}
