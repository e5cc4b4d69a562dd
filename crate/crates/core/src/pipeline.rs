//! Fail-stop execution harness.
//!
//! Each stream of a block is processed by its own logical worker. At most
//! one worker fails: its output buffer never becomes available and is
//! replaced by a poisoned buffer before recovery runs, so any read of it
//! corrupts the recovered result.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::block::{poison, EntangledBlock, StreamBlock, Streams};
use crate::checksum::{
    checksum_encode_counted, checksum_recover_counted, checksum_stream_op, ChecksumBlock,
};
use crate::codec::{disentangle_counted, entangle_counted, FailedIndex};
use crate::counters::OpTally;
use crate::error::{Error, Result};
use crate::ops::{admit_against, LsbOp};
use crate::params::{checksum_range, output_range};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    /// No redundancy.
    Plain,
    Entangled,
    Checksum,
}

impl Scheme {
    /// Worker count for `m` data streams.
    pub fn workers(self, m: usize) -> usize {
        match self {
            Scheme::Checksum => m + 1,
            Scheme::Plain | Scheme::Entangled => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FailureMode {
    None,
    Fixed(usize),
    /// Worker drawn uniformly from a generator seeded with this value.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FailureSpec {
    pub mode: FailureMode,
    pub scheme: Scheme,
}

impl FailureSpec {
    pub fn new(scheme: Scheme, mode: FailureMode) -> Self {
        Self { mode, scheme }
    }

    /// The failed worker for `m` data streams, if any.
    pub fn failed_worker(&self, m: usize) -> Result<Option<usize>> {
        let workers = self.scheme.workers(m);
        match self.mode {
            FailureMode::None => Ok(None),
            FailureMode::Fixed(i) if i < workers => Ok(Some(i)),
            FailureMode::Fixed(index) => Err(Error::FailIndex { index, workers }),
            FailureMode::Random(seed) => {
                Ok(Some(StdRng::seed_from_u64(seed).random_range(0..workers)))
            }
        }
    }
}

/// Additions and multiplications per phase; shifts are kept apart.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounters {
    pub encode_ops: u64,
    pub op_ops: u64,
    pub decode_ops: u64,
    pub shifts: u64,
}

impl OpCounters {
    fn from_tallies(encode: OpTally, op: OpTally, decode: OpTally) -> Self {
        Self {
            encode_ops: encode.arithmetic(),
            op_ops: op.arithmetic(),
            decode_ops: decode.arithmetic(),
            shifts: encode.shifts + op.shifts + decode.shifts,
        }
    }

    /// Redundancy overhead: encode plus decode.
    pub fn codec_ops(&self) -> u64 {
        self.encode_ops + self.decode_ops
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport<W> {
    pub scheme: Scheme,
    pub outputs: StreamBlock<W>,
    pub failed_worker: Option<usize>,
    pub recovered: bool,
    /// Output stream with no valid data (plain scheme only).
    pub missing_stream: Option<usize>,
    pub counters: OpCounters,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    /// One scoped thread per worker.
    Threaded,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Pipeline {
    pub execution: Execution,
}

impl Pipeline {
    pub fn new(execution: Execution) -> Self {
        Self { execution }
    }

    pub fn run<W: Word>(
        &self,
        op: &LsbOp<W>,
        block: &StreamBlock<W>,
        spec: FailureSpec,
    ) -> Result<RunReport<W>> {
        let p = *block.params();
        let m = p.m();
        let failed = spec.failed_worker(m)?;
        let bound = block.streams().max_abs();
        let limit = match spec.scheme {
            Scheme::Plain => W::MAX.unsigned_abs(),
            Scheme::Entangled => output_range(&p).magnitude(),
            Scheme::Checksum => checksum_range(m, W::BITS).magnitude(),
        };
        let verdict = admit_against(op, bound, limit);
        if !verdict.admitted {
            return Err(Error::NotAdmitted {
                worst_case: verdict.worst_case_output,
                limit,
            });
        }
        let out_len = op.out_len(block.n())?;

        let mut encode = OpTally::default();
        let mut decode = OpTally::default();
        match spec.scheme {
            Scheme::Plain => {
                let (outputs, op_tally) =
                    self.run_workers(block.streams(), out_len, failed, |_| op.clone())?;
                Ok(RunReport {
                    scheme: spec.scheme,
                    outputs: StreamBlock::new(p, outputs)?,
                    failed_worker: failed,
                    recovered: failed.is_none(),
                    missing_stream: failed,
                    counters: OpCounters::from_tallies(encode, op_tally, decode),
                })
            }
            Scheme::Entangled => {
                let entangled = entangle_counted(block.clone(), &mut encode)?;
                let worker_op = op.entangled_kernel(p.l());
                let (outputs, op_tally) =
                    self.run_workers(entangled.streams(), out_len, failed, |_| worker_op.clone())?;
                let outputs = disentangle_counted(
                    EntangledBlock::new(p, outputs)?,
                    FailedIndex::from(failed),
                    &mut decode,
                )?;
                Ok(RunReport {
                    scheme: spec.scheme,
                    outputs,
                    failed_worker: failed,
                    recovered: true,
                    missing_stream: None,
                    counters: OpCounters::from_tallies(encode, op_tally, decode),
                })
            }
            Scheme::Checksum => {
                let encoded = checksum_encode_counted(block.clone(), &mut encode)?;
                let sum_op = checksum_stream_op(op, m);
                let (outputs, op_tally) =
                    self.run_workers(encoded.streams(), out_len, failed, |j| {
                        if j == m {
                            sum_op.clone()
                        } else {
                            op.clone()
                        }
                    })?;
                let outputs = checksum_recover_counted(
                    &ChecksumBlock::from_parts(p, outputs)?,
                    FailedIndex::from(failed),
                    &mut decode,
                )?;
                Ok(RunReport {
                    scheme: spec.scheme,
                    outputs,
                    failed_worker: failed,
                    recovered: true,
                    missing_stream: None,
                    counters: OpCounters::from_tallies(encode, op_tally, decode),
                })
            }
        }
    }

    /// Runs every single-worker failure plus the failure-free case and checks
    /// that all recovered outputs agree. Reports come back failure-free first.
    pub fn sweep<W: Word>(
        &self,
        op: &LsbOp<W>,
        block: &StreamBlock<W>,
        scheme: Scheme,
    ) -> Result<Vec<RunReport<W>>> {
        let workers = scheme.workers(block.m());
        let modes = std::iter::once(FailureMode::None).chain((0..workers).map(FailureMode::Fixed));
        let mut reports = Vec::with_capacity(workers + 1);
        for mode in modes {
            reports.push(self.run(op, block, FailureSpec::new(scheme, mode))?);
        }
        let recovered: Vec<&RunReport<W>> = reports.iter().filter(|r| r.recovered).collect();
        if let Some(first) = recovered.first() {
            for other in &recovered[1..] {
                if other.outputs != first.outputs {
                    let name = |r: &RunReport<W>| {
                        r.failed_worker
                            .map_or("none".to_string(), |i| i.to_string())
                    };
                    return Err(Error::SweepMismatch {
                        a: name(first),
                        b: name(other),
                    });
                }
            }
        }
        Ok(reports)
    }

    /// One worker per input stream. The failed worker produces nothing; its
    /// slot is poisoned.
    fn run_workers<W, F>(
        &self,
        inputs: &Streams<W>,
        out_len: usize,
        failed: Option<usize>,
        op_for: F,
    ) -> Result<(Streams<W>, OpTally)>
    where
        W: Word,
        F: Fn(usize) -> LsbOp<W> + Sync,
    {
        let workers = inputs.m();
        let mut out = Streams::zeros(workers, out_len);
        let mut tallies = vec![OpTally::default(); workers];
        {
            let slots: Vec<(usize, &mut [W], &mut OpTally)> = out
                .as_mut_slice()
                .chunks_mut(out_len.max(1))
                .take(workers)
                .zip(tallies.iter_mut())
                .enumerate()
                .map(|(j, (buf, t))| (j, buf, t))
                .collect();
            let work = |(j, buf, tally): (usize, &mut [W], &mut OpTally)| -> Result<()> {
                if Some(j) == failed {
                    poison(buf);
                    return Ok(());
                }
                op_for(j).run(inputs.stream(j), buf, tally)
            };
            match self.execution {
                Execution::Sequential => slots.into_iter().try_for_each(work)?,
                Execution::Threaded => std::thread::scope(|s| {
                    let work = &work;
                    let handles: Vec<_> = slots
                        .into_iter()
                        .map(|slot| s.spawn(move || work(slot)))
                        .collect();
                    handles
                        .into_iter()
                        .try_for_each(|h| h.join().expect("worker panicked"))
                })?,
            }
        }
        let mut total = OpTally::default();
        tallies.into_iter().for_each(|t| total.merge(t));
        Ok((out, total))
    }
}

pub fn run_pipeline<W: Word>(
    op: &LsbOp<W>,
    block: &StreamBlock<W>,
    spec: FailureSpec,
) -> Result<RunReport<W>> {
    Pipeline::default().run(op, block, spec)
}

pub fn sweep_failures<W: Word>(
    op: &LsbOp<W>,
    block: &StreamBlock<W>,
    scheme: Scheme,
) -> Result<Vec<RunReport<W>>> {
    Pipeline::default().sweep(op, block, scheme)
}
