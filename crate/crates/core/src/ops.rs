//! Linear, sesquilinear and bijective stream operators.
//!
//! Every operator acts on each stream independently with a fixed kernel, so
//! the same code runs on plain, entangled and checksum-augmented blocks.
//! Arithmetic wraps in the word type: a result that fits the word is exact
//! regardless of intermediate overflow.

use serde::Serialize;

use crate::block::{EntangledBlock, StreamBlock, Streams};
use crate::counters::OpTally;
use crate::error::{Error, Result};
use crate::params::{output_range, CodecParams};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OpKind {
    ElementwiseAdd,
    ElementwiseSub,
    ElementwiseMul,
    Scale,
    InnerProduct,
    CircularConvolution,
    CrossCorrelation,
    Permutation,
    RowGemm,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::ElementwiseAdd => "add",
            OpKind::ElementwiseSub => "sub",
            OpKind::ElementwiseMul => "mul",
            OpKind::Scale => "scale",
            OpKind::InnerProduct => "dot",
            OpKind::CircularConvolution => "conv",
            OpKind::CrossCorrelation => "xcorr",
            OpKind::Permutation => "perm",
            OpKind::RowGemm => "gemm",
        }
    }

    /// Kinds whose kernel is added to the stream rather than multiplied.
    pub fn is_additive(self) -> bool {
        matches!(self, OpKind::ElementwiseAdd | OpKind::ElementwiseSub)
    }
}

/// Row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<W> {
    rows: usize,
    cols: usize,
    data: Vec<W>,
}

impl<W: Word> Matrix<W> {
    pub fn new(rows: usize, cols: usize, data: Vec<W>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::KernelShape(format!(
                "{} values cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[W] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Largest absolute column sum.
    pub fn max_col_abs_sum(&self) -> u128 {
        (0..self.cols)
            .map(|c| {
                (0..self.rows)
                    .map(|r| self.data[r * self.cols + c].unsigned_abs())
                    .fold(0u128, u128::saturating_add)
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kernel<W> {
    Vector(Vec<W>),
    Scalar(W),
    Indices(Vec<usize>),
    Matrix(Matrix<W>),
}

/// One LSB operation: a kind and its fixed kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsbOp<W> {
    kind: OpKind,
    kernel: Kernel<W>,
}

impl<W: Word> LsbOp<W> {
    pub fn new(kind: OpKind, kernel: Kernel<W>) -> Result<Self> {
        let ok = match (&kind, &kernel) {
            (OpKind::Scale, Kernel::Scalar(_)) => true,
            (OpKind::Permutation, Kernel::Indices(idx)) => {
                check_bijection(idx)?;
                true
            }
            (OpKind::RowGemm, Kernel::Matrix(_)) => true,
            (
                OpKind::ElementwiseAdd
                | OpKind::ElementwiseSub
                | OpKind::ElementwiseMul
                | OpKind::InnerProduct,
                Kernel::Vector(_),
            ) => true,
            (OpKind::CircularConvolution | OpKind::CrossCorrelation, Kernel::Vector(g)) => {
                !g.is_empty()
            }
            _ => false,
        };
        if !ok {
            return Err(Error::KernelShape(format!(
                "kernel {} does not fit op {}",
                kernel_name(&kernel),
                kind.name()
            )));
        }
        Ok(Self { kind, kernel })
    }

    pub fn add(g: Vec<W>) -> Self {
        Self::new(OpKind::ElementwiseAdd, Kernel::Vector(g)).unwrap()
    }

    pub fn sub(g: Vec<W>) -> Self {
        Self::new(OpKind::ElementwiseSub, Kernel::Vector(g)).unwrap()
    }

    pub fn mul(g: Vec<W>) -> Self {
        Self::new(OpKind::ElementwiseMul, Kernel::Vector(g)).unwrap()
    }

    pub fn scale(s: W) -> Self {
        Self::new(OpKind::Scale, Kernel::Scalar(s)).unwrap()
    }

    pub fn inner_product(g: Vec<W>) -> Self {
        Self::new(OpKind::InnerProduct, Kernel::Vector(g)).unwrap()
    }

    pub fn convolution(g: Vec<W>) -> Result<Self> {
        Self::new(OpKind::CircularConvolution, Kernel::Vector(g))
    }

    pub fn cross_correlation(g: Vec<W>) -> Result<Self> {
        Self::new(OpKind::CrossCorrelation, Kernel::Vector(g))
    }

    pub fn permutation(indices: Vec<usize>) -> Result<Self> {
        Self::new(OpKind::Permutation, Kernel::Indices(indices))
    }

    pub fn row_gemm(g: Matrix<W>) -> Self {
        Self::new(OpKind::RowGemm, Kernel::Matrix(g)).unwrap()
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn kernel(&self) -> &Kernel<W> {
        &self.kernel
    }

    /// Output samples per stream for `n` input samples.
    pub fn out_len(&self, n: usize) -> Result<usize> {
        let mismatch = |what: String| Err(Error::KernelShape(what));
        match (&self.kind, &self.kernel) {
            (OpKind::Scale, _) => Ok(n),
            (OpKind::InnerProduct, Kernel::Vector(g)) => {
                if g.len() == n {
                    Ok(1)
                } else {
                    mismatch(format!(
                        "inner product kernel has {} taps, streams have {n}",
                        g.len()
                    ))
                }
            }
            (OpKind::CircularConvolution | OpKind::CrossCorrelation, Kernel::Vector(g)) => {
                if g.len() <= n {
                    Ok(n)
                } else {
                    mismatch(format!(
                        "kernel of {} taps exceeds stream length {n}",
                        g.len()
                    ))
                }
            }
            (_, Kernel::Vector(g)) => {
                if g.len() == n {
                    Ok(n)
                } else {
                    mismatch(format!(
                        "elementwise kernel has {} values, streams have {n}",
                        g.len()
                    ))
                }
            }
            (_, Kernel::Indices(idx)) => {
                if idx.len() == n {
                    Ok(n)
                } else {
                    mismatch(format!(
                        "permutation over {} indices, streams have {n}",
                        idx.len()
                    ))
                }
            }
            (_, Kernel::Matrix(g)) => {
                if n > 0 && n.is_multiple_of(g.rows()) {
                    Ok(n / g.rows() * g.cols())
                } else {
                    mismatch(format!(
                        "stream length {n} is not a multiple of the {} matrix rows",
                        g.rows()
                    ))
                }
            }
            (_, Kernel::Scalar(_)) => unreachable!("validated in LsbOp::new"),
        }
    }

    /// Runs the operation on a single stream.
    pub fn run(&self, input: &[W], out: &mut [W], tally: &mut OpTally) -> Result<()> {
        let n = input.len();
        let expected = self.out_len(n)?;
        if out.len() != expected {
            return Err(Error::Shape(format!(
                "output buffer holds {}, op produces {expected}",
                out.len()
            )));
        }
        let n64 = n as u64;
        match (&self.kind, &self.kernel) {
            (OpKind::ElementwiseAdd, Kernel::Vector(g)) => {
                for ((o, &x), &y) in out.iter_mut().zip(input).zip(g) {
                    *o = x.wrapping_add(y);
                }
                tally.bump(n64, 0, 0);
            }
            (OpKind::ElementwiseSub, Kernel::Vector(g)) => {
                for ((o, &x), &y) in out.iter_mut().zip(input).zip(g) {
                    *o = x.wrapping_sub(y);
                }
                tally.bump(n64, 0, 0);
            }
            (OpKind::ElementwiseMul, Kernel::Vector(g)) => {
                for ((o, &x), &y) in out.iter_mut().zip(input).zip(g) {
                    *o = x.wrapping_mul(y);
                }
                tally.bump(0, n64, 0);
            }
            (OpKind::Scale, Kernel::Scalar(s)) => {
                for (o, &x) in out.iter_mut().zip(input) {
                    *o = x.wrapping_mul(*s);
                }
                tally.bump(0, n64, 0);
            }
            (OpKind::InnerProduct, Kernel::Vector(g)) => {
                out[0] = input
                    .iter()
                    .zip(g)
                    .fold(W::ZERO, |acc, (&x, &y)| acc.wrapping_add(x.wrapping_mul(y)));
                tally.bump(n64, n64, 0);
            }
            (OpKind::CircularConvolution, Kernel::Vector(g)) => {
                // d[j] = sum_t g[t] c[(j - t) mod n]
                let k = g.len();
                let mut ext = Vec::with_capacity(n + k - 1);
                ext.extend((n + 1 - k..n).map(|i| input[i]));
                ext.extend_from_slice(input);
                let taps: Vec<(usize, W)> =
                    g.iter().enumerate().map(|(t, &v)| (k - 1 - t, v)).collect();
                sliding_sum(&ext, &taps, out);
                let macs = (k as u64) * n64;
                tally.bump(macs, macs, 0);
            }
            (OpKind::CrossCorrelation, Kernel::Vector(g)) => {
                // d[j] = sum_i c[i] g[(i + j) mod n] = y[-j mod n],
                // where y[q] = sum_t g[t] c[(t + q) mod n].
                let k = g.len();
                let mut ext = Vec::with_capacity(n + k - 1);
                ext.extend_from_slice(input);
                ext.extend_from_slice(&input[..k - 1]);
                let taps: Vec<(usize, W)> = g.iter().enumerate().map(|(t, &v)| (t, v)).collect();
                sliding_sum(&ext, &taps, out);
                out[1..].reverse();
                let macs = (k as u64) * n64;
                tally.bump(macs, macs, 0);
            }
            (OpKind::Permutation, Kernel::Indices(idx)) => {
                for (o, &i) in out.iter_mut().zip(idx) {
                    *o = input[i];
                }
            }
            (OpKind::RowGemm, Kernel::Matrix(g)) => {
                let (rows, cols) = (g.rows(), g.cols());
                for (x, o) in input.chunks_exact(rows).zip(out.chunks_exact_mut(cols)) {
                    o.fill(W::ZERO);
                    for (kk, &xv) in x.iter().enumerate() {
                        for (ov, &gv) in o.iter_mut().zip(g.row(kk)) {
                            *ov = ov.wrapping_add(xv.wrapping_mul(gv));
                        }
                    }
                }
                let macs = (n * cols) as u64;
                tally.bump(macs, macs, 0);
            }
            _ => unreachable!("validated in LsbOp::new"),
        }
        Ok(())
    }

    /// Largest output magnitude the op can produce from inputs bounded by
    /// `input_bound` in magnitude.
    pub fn worst_case_output(&self, input_bound: u128) -> u128 {
        let b = input_bound;
        match (&self.kind, &self.kernel) {
            (OpKind::ElementwiseAdd | OpKind::ElementwiseSub, Kernel::Vector(g)) => {
                b.saturating_add(max_abs(g))
            }
            (OpKind::ElementwiseMul, Kernel::Vector(g)) => b.saturating_mul(max_abs(g)),
            (OpKind::Scale, Kernel::Scalar(s)) => b.saturating_mul(s.unsigned_abs()),
            (_, Kernel::Vector(g)) => b.saturating_mul(abs_sum(g)),
            (OpKind::Permutation, _) => b,
            (_, Kernel::Matrix(g)) => b.saturating_mul(g.max_col_abs_sum()),
            _ => unreachable!("validated in LsbOp::new"),
        }
    }

    /// The same op with its kernel entangled with itself, `g <- (g << l) + g`,
    /// for additive kinds; other kinds are returned unchanged.
    pub fn entangled_kernel(&self, l: u32) -> Self {
        match (&self.kind, &self.kernel) {
            (kind, Kernel::Vector(g)) if kind.is_additive() => Self {
                kind: *kind,
                kernel: Kernel::Vector(
                    g.iter()
                        .map(|&v| v.wrapping_shl(l).wrapping_add(v))
                        .collect(),
                ),
            },
            _ => self.clone(),
        }
    }

    /// Applies the op to every stream.
    pub fn apply_streams(&self, streams: &Streams<W>, tally: &mut OpTally) -> Result<Streams<W>> {
        let out_len = self.out_len(streams.n())?;
        let mut out = Streams::zeros(streams.m(), out_len);
        for j in 0..streams.m() {
            self.run(streams.stream(j), out.stream_mut(j), tally)?;
        }
        Ok(out)
    }
}

fn kernel_name<W>(k: &Kernel<W>) -> &'static str {
    match k {
        Kernel::Vector(_) => "vector",
        Kernel::Scalar(_) => "scalar",
        Kernel::Indices(_) => "index map",
        Kernel::Matrix(_) => "matrix",
    }
}

fn check_bijection(idx: &[usize]) -> Result<()> {
    let mut seen = vec![false; idx.len()];
    for &i in idx {
        if i >= idx.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::NotBijective(idx.len()));
        }
    }
    Ok(())
}

fn max_abs<W: Word>(g: &[W]) -> u128 {
    g.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

fn abs_sum<W: Word>(g: &[W]) -> u128 {
    g.iter()
        .map(|v| v.unsigned_abs())
        .fold(0, u128::saturating_add)
}

const BLOCK: usize = 1024;

/// `out[j] = sum over (off, g) of g * ext[j + off]`, blocked so each output
/// tile stays in L1 while the taps stream past it.
///
/// Kept out of line so every caller runs the same machine code.
#[inline(never)]
fn sliding_sum<W: Word>(ext: &[W], taps: &[(usize, W)], out: &mut [W]) {
    for (b, tile) in out.chunks_mut(BLOCK).enumerate() {
        let base = b * BLOCK;
        tile.fill(W::ZERO);
        for &(off, g) in taps {
            let src = &ext[base + off..base + off + tile.len()];
            for (o, &x) in tile.iter_mut().zip(src) {
                *o = o.wrapping_add(g.wrapping_mul(x));
            }
        }
    }
}

/// Admission verdict for one op against an output limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpBoundReport {
    pub worst_case_output: u128,
    pub admitted: bool,
    pub limit: u128,
}

/// Checks the op's worst-case output for inputs bounded by `input_bound`
/// against the entangled output range of `p`.
pub fn admit<W: Word>(op: &LsbOp<W>, input_bound: u128, p: &CodecParams) -> OpBoundReport {
    admit_against(op, input_bound, output_range(p).magnitude())
}

pub fn admit_against<W: Word>(op: &LsbOp<W>, input_bound: u128, limit: u128) -> OpBoundReport {
    let worst_case_output = op.worst_case_output(input_bound);
    OpBoundReport {
        worst_case_output,
        admitted: worst_case_output <= limit,
        limit,
    }
}

/// Stream-by-stream application to plain inputs.
pub fn apply_conventional<W: Word>(
    op: &LsbOp<W>,
    block: &StreamBlock<W>,
) -> Result<StreamBlock<W>> {
    let out = op.apply_streams(block.streams(), &mut OpTally::default())?;
    StreamBlock::new(*block.params(), out)
}

/// The same arithmetic on entangled streams. Additive kernels are entangled
/// with themselves first so the result stays a valid superposition.
pub fn apply_entangled<W: Word>(
    op: &LsbOp<W>,
    block: &EntangledBlock<W>,
) -> Result<EntangledBlock<W>> {
    apply_entangled_counted(op, block, &mut OpTally::default())
}

pub fn apply_entangled_counted<W: Word>(
    op: &LsbOp<W>,
    block: &EntangledBlock<W>,
    tally: &mut OpTally,
) -> Result<EntangledBlock<W>> {
    let op = op.entangled_kernel(block.params().l());
    let out = op.apply_streams(block.streams(), tally)?;
    EntangledBlock::new(*block.params(), out)
}
