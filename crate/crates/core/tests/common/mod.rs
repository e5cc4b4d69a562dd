#![allow(dead_code)]

use nument::bench::max_input_bound;
use nument::params::checksum_range;
use nument::{
    derive_params, input_range, output_range, CodecParams, LsbOp, Matrix, OpKind, StreamBlock,
    Streams,
};
use rand::rngs::StdRng;
use rand::Rng;

pub const ALL_KINDS: [OpKind; 9] = [
    OpKind::ElementwiseAdd,
    OpKind::ElementwiseSub,
    OpKind::ElementwiseMul,
    OpKind::Scale,
    OpKind::InnerProduct,
    OpKind::CircularConvolution,
    OpKind::CrossCorrelation,
    OpKind::Permutation,
    OpKind::RowGemm,
];

fn small(rng: &mut StdRng, mag: i32) -> i32 {
    rng.random_range(-mag..=mag)
}

fn nonzero(rng: &mut StdRng, mag: i32) -> i32 {
    loop {
        let v = small(rng, mag);
        if v != 0 {
            return v;
        }
    }
}

/// Random op of `kind` for streams of `n` samples (`n` must be a multiple of 4).
pub fn random_op(kind: OpKind, n: usize, rng: &mut StdRng) -> LsbOp<i32> {
    let vec = |rng: &mut StdRng, len: usize, mag: i32| -> Vec<i32> {
        (0..len).map(|_| small(rng, mag)).collect()
    };
    match kind {
        OpKind::ElementwiseAdd => LsbOp::add(vec(rng, n, 500)),
        OpKind::ElementwiseSub => LsbOp::sub(vec(rng, n, 500)),
        OpKind::ElementwiseMul => LsbOp::mul(vec(rng, n, 7)),
        OpKind::Scale => LsbOp::scale(nonzero(rng, 9)),
        OpKind::InnerProduct => LsbOp::inner_product(vec(rng, n, 3)),
        OpKind::CircularConvolution => {
            let k = rng.random_range(1..=16);
            LsbOp::convolution(vec(rng, k, 4)).unwrap()
        }
        OpKind::CrossCorrelation => {
            let k = rng.random_range(1..=16);
            LsbOp::cross_correlation(vec(rng, k, 4)).unwrap()
        }
        OpKind::Permutation => {
            let mut idx: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                idx.swap(i, rng.random_range(0..=i));
            }
            LsbOp::permutation(idx).unwrap()
        }
        OpKind::RowGemm => {
            let cols = rng.random_range(1..=6);
            LsbOp::row_gemm(Matrix::new(4, cols, vec(rng, 4 * cols, 5)).unwrap())
        }
    }
}

/// Random block of `n` samples per stream whose magnitudes stay at or below
/// the largest bound `b` admitted for `op` under `limit`. A tenth of the
/// samples sit exactly at `-b` or `b`.
pub fn block_for(
    p: CodecParams,
    n: usize,
    op: &LsbOp<i32>,
    cap: u128,
    limit: u128,
    rng: &mut StdRng,
) -> StreamBlock<i32> {
    let b = max_input_bound(op, cap, limit) as i32;
    let m = p.m();
    let data = (0..m * n)
        .map(|_| match rng.random_range(0..10) {
            0 if rng.random_bool(0.5) => b,
            0 => -b,
            _ => rng.random_range(-b..=b),
        })
        .collect();
    StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap()
}

/// Block admissible for the entangled path under `op`.
pub fn entangled_block(m: usize, n: usize, op: &LsbOp<i32>, rng: &mut StdRng) -> StreamBlock<i32> {
    let p = derive_params(m, 32).unwrap();
    let cap = input_range(&p).magnitude();
    let limit = output_range(&p).magnitude();
    block_for(p, n, op, cap, limit, rng)
}

/// Block admissible for the checksum path under `op`.
pub fn checksum_block(m: usize, n: usize, op: &LsbOp<i32>, rng: &mut StdRng) -> StreamBlock<i32> {
    let p = derive_params(m, 32).unwrap();
    let r = checksum_range(m, 32).magnitude();
    block_for(p, n, op, r, r, rng)
}

/// Random block with every sample uniform in the codec input range.
pub fn full_range_block(p: CodecParams, n: usize, rng: &mut StdRng) -> StreamBlock<i32> {
    let hi = input_range(&p).hi as i32;
    let data = (0..p.m() * n).map(|_| rng.random_range(-hi..=hi)).collect();
    StreamBlock::new(p, Streams::new(p.m(), n, data).unwrap()).unwrap()
}
