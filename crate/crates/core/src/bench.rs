//! Throughput comparison of unprotected, entangled and checksum execution.
//!
//! Each configuration is warmed up once, then timed `reps` times with the
//! three schemes interleaved; the median wall-clock time is reported as
//! samples per second over the `m * n` payload samples.

use std::io::Write;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::block::{poison, EntangledBlock, StreamBlock, Streams};
use crate::checksum::{checksum_encode_in_place, checksum_stream_op, ChecksumBlock};
use crate::codec::{disentangle_in_place, entangle_in_place, FailedIndex};
use crate::counters::OpTally;
use crate::error::{Error, Result};
use crate::ops::{LsbOp, Matrix, OpKind};
use crate::params::{checksum_range, derive_params, input_range, output_range};
use crate::word::Word;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kind: OpKind,
    pub n: usize,
    pub kernel_sizes: Vec<usize>,
    pub ms: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kind: OpKind::CircularConvolution,
            n: 1_000_000,
            kernel_sizes: vec![100, 1024, 4500],
            ms: vec![3, 8],
            reps: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchScheme {
    Conventional,
    Entangled,
    Checksum,
}

impl BenchScheme {
    pub fn name(self) -> &'static str {
        match self {
            BenchScheme::Conventional => "conventional",
            BenchScheme::Entangled => "entangled",
            BenchScheme::Checksum => "checksum",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub scheme: BenchScheme,
    pub m: usize,
    pub n: usize,
    pub kernel: usize,
    /// Median samples per second.
    pub median_throughput: f64,
    /// Throughput loss against the conventional run of the same configuration.
    pub relative_overhead_pct: f64,
}

pub const CSV_HEADER: &str = "scheme,m,n,kernel,median_throughput,relative_overhead_pct";

pub fn write_csv<Wr: Write>(rows: &[BenchRow], mut out: Wr) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.1},{:.3}",
            r.scheme.name(),
            r.m,
            r.n,
            r.kernel,
            r.median_throughput,
            r.relative_overhead_pct
        )?;
    }
    Ok(())
}

/// Random op of `kind` with kernel size `k` for streams of `n` samples.
/// Vector kernels are drawn from {-1, 1}.
pub fn make_op<W: Word>(kind: OpKind, k: usize, n: usize, rng: &mut StdRng) -> Result<LsbOp<W>> {
    let unit = |rng: &mut StdRng| {
        if rng.random_bool(0.5) {
            W::ONE
        } else {
            W::ONE.wrapping_neg()
        }
    };
    Ok(match kind {
        OpKind::CircularConvolution => {
            LsbOp::convolution((0..k.min(n)).map(|_| unit(rng)).collect())?
        }
        OpKind::CrossCorrelation => {
            LsbOp::cross_correlation((0..k.min(n)).map(|_| unit(rng)).collect())?
        }
        OpKind::ElementwiseAdd => LsbOp::add((0..n).map(|_| unit(rng)).collect()),
        OpKind::ElementwiseSub => LsbOp::sub((0..n).map(|_| unit(rng)).collect()),
        OpKind::ElementwiseMul => LsbOp::mul((0..n).map(|_| unit(rng)).collect()),
        OpKind::InnerProduct => LsbOp::inner_product((0..n).map(|_| unit(rng)).collect()),
        OpKind::Scale => LsbOp::scale(unit(rng)),
        OpKind::Permutation => {
            let mut idx: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                idx.swap(i, rng.random_range(0..=i));
            }
            LsbOp::permutation(idx)?
        }
        OpKind::RowGemm => {
            let k = k.clamp(1, n.max(1));
            LsbOp::row_gemm(Matrix::new(k, k, (0..k * k).map(|_| unit(rng)).collect())?)
        }
    })
}

/// Largest input magnitude `b <= cap` with `op.worst_case_output(b) <= limit`.
pub fn max_input_bound<W: Word>(op: &LsbOp<W>, cap: u128, limit: u128) -> u128 {
    let (mut lo, mut hi) = (0u128, cap);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if op.worst_case_output(mid) <= limit {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Random block whose inputs are admissible for every scheme under `op`.
pub fn admissible_block<W: Word>(
    m: usize,
    n: usize,
    op: &LsbOp<W>,
    rng: &mut StdRng,
) -> Result<StreamBlock<W>> {
    let p = derive_params(m, W::BITS)?;
    let cap = input_range(&p)
        .magnitude()
        .min(checksum_range(m, W::BITS).magnitude());
    let limit = output_range(&p)
        .magnitude()
        .min(checksum_range(m, W::BITS).magnitude());
    let b = max_input_bound(op, cap, limit) as i128;
    let data = (0..m * n)
        .map(|_| W::wrap_i128(rng.random_range(-b..=b)))
        .collect();
    StreamBlock::new(p, Streams::new(m, n, data)?)
}

fn shrink_to_memory(m: usize, n: usize, bytes: usize) -> usize {
    let Some(avail) = available_memory() else {
        return n;
    };
    // input, entangled copy, checksum block, outputs and convolution scratch
    let need = |n: usize| 6 * (m + 1) * n * bytes;
    let mut n2 = n;
    while n2 > 1024 && need(n2) > avail {
        n2 /= 2;
    }
    if n2 != n {
        eprintln!("warning: shrinking n from {n} to {n2} to fit in available memory");
    }
    n2
}

fn available_memory() -> Option<usize> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: usize = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn time<T>(f: impl FnOnce() -> Result<T>) -> Result<(f64, T)> {
    let start = Instant::now();
    let out = f()?;
    Ok((start.elapsed().as_secs_f64(), out))
}

/// Output buffer for `streams` streams, written once so its pages are mapped
/// before the clock starts.
fn touched<W: Word>(streams: usize, len: usize) -> Streams<W> {
    let mut s = Streams::zeros(streams, len);
    poison(s.as_mut_slice());
    s
}

/// Times one scheme. Each scheme gets its own fresh copy of the input and a
/// pretouched output buffer, both prepared before the clock starts, so no
/// scheme pays for page faults or cold memory the others avoid. All of them
/// run the op through the same per-stream kernel.
fn run_scheme<W: Word>(
    scheme: BenchScheme,
    op: &LsbOp<W>,
    block: &StreamBlock<W>,
) -> Result<(f64, Streams<W>)> {
    let (m, n) = (block.m(), block.n());
    let p = *block.params();
    let out_len = op.out_len(n)?;
    let mut tally = OpTally::default();
    match scheme {
        BenchScheme::Conventional => {
            let input = block.clone();
            let mut out = touched(m, out_len);
            let t = time(|| {
                for j in 0..m {
                    op.run(input.stream(j), out.stream_mut(j), &mut tally)?;
                }
                Ok(())
            })?
            .0;
            Ok((t, out))
        }
        BenchScheme::Entangled => {
            let input = block.clone();
            let out = touched(m, out_len);
            let worker_op = op.entangled_kernel(p.l());
            let (t, (_input, d)) = time(|| {
                let e = entangle_in_place(input)?;
                let mut out = out;
                for j in 0..m {
                    worker_op.run(e.stream(j), out.stream_mut(j), &mut tally)?;
                }
                let d = disentangle_in_place(EntangledBlock::new(p, out)?, FailedIndex::None)?;
                Ok((e, d))
            })?;
            Ok((t, d.into_streams()))
        }
        BenchScheme::Checksum => {
            // room for the sum stream, as a deployment would preallocate it
            let mut data = Vec::with_capacity((m + 1) * n);
            data.extend_from_slice(block.streams().as_slice());
            data.extend_from_slice(block.stream(0));
            data.truncate(m * n);
            let input = StreamBlock::new(p, Streams::new(m, n, data)?)?;
            let out = touched(m + 1, out_len);
            let sum_op = checksum_stream_op(op, m);
            let (t, (_input, d)) = time(|| {
                let cs = checksum_encode_in_place(input)?;
                let mut out = out;
                for j in 0..m {
                    op.run(cs.stream(j), out.stream_mut(j), &mut tally)?;
                }
                sum_op.run(cs.checksum(), out.stream_mut(m), &mut tally)?;
                let d = ChecksumBlock::from_parts(p, out)?.into_data()?;
                Ok((cs, d))
            })?;
            Ok((t, d.into_streams()))
        }
    }
}

/// Runs every (m, kernel) configuration. Outputs of the protected schemes are
/// checked against the conventional result on the warm-up pass.
pub fn run_bench<W: Word>(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let reps = cfg.reps.max(1);
    let schemes = [
        BenchScheme::Conventional,
        BenchScheme::Entangled,
        BenchScheme::Checksum,
    ];
    let mut rows = Vec::new();
    for &m in &cfg.ms {
        let n = shrink_to_memory(m, cfg.n, W::BYTES);
        for &k in &cfg.kernel_sizes {
            let mut rng = StdRng::seed_from_u64(cfg.seed ^ ((m as u64) << 32) ^ k as u64);
            let op = make_op::<W>(cfg.kind, k, n, &mut rng)?;
            let block = admissible_block(m, n, &op, &mut rng)?;

            let (_, reference) = run_scheme(BenchScheme::Conventional, &op, &block)?;
            for s in [BenchScheme::Entangled, BenchScheme::Checksum] {
                let (_, out) = run_scheme(s, &op, &block)?;
                if out != reference {
                    return Err(Error::Shape(format!(
                        "{} output differs from conventional",
                        s.name()
                    )));
                }
            }

            let mut times = [Vec::new(), Vec::new(), Vec::new()];
            // Rotate the order every repetition so no scheme always runs
            // right after the same neighbour.
            for rep in 0..reps {
                for step in 0..schemes.len() {
                    let i = (rep + step) % schemes.len();
                    times[i].push(run_scheme(schemes[i], &op, &block)?.0);
                }
            }
            let samples = (m * n) as f64;
            let thr: Vec<f64> = times
                .into_iter()
                .map(|t| samples / median(t).max(1e-12))
                .collect();
            for (i, &s) in schemes.iter().enumerate() {
                rows.push(BenchRow {
                    scheme: s,
                    m,
                    n,
                    kernel: k,
                    median_throughput: thr[i],
                    relative_overhead_pct: if i == 0 {
                        0.0
                    } else {
                        (1.0 - thr[i] / thr[0]) * 100.0
                    },
                });
            }
        }
    }
    Ok(rows)
}
