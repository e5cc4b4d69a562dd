mod common;

use common::{entangled_block, random_op, ALL_KINDS};
use nument::counters::OpTally;
use nument::{
    admit, apply_conventional, apply_entangled, derive_params, disentangle, entangle, output_range,
    EntangledBlock, FailedIndex, LsbOp, OpKind, StreamBlock,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn failures(m: usize) -> impl Iterator<Item = FailedIndex> {
    std::iter::once(FailedIndex::None).chain((0..m).map(FailedIndex::Stream))
}

fn check_homomorphism(op: &LsbOp<i32>, b: &StreamBlock<i32>) -> Result<(), TestCaseError> {
    let expect = apply_conventional(op, b).unwrap();
    let processed = apply_entangled(op, &entangle(b).unwrap()).unwrap();
    for f in failures(b.m()) {
        let got = disentangle(&processed, f).unwrap();
        prop_assert_eq!(&got, &expect, "{} m={} {:?}", op.kind().name(), b.m(), f);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn entangled_path_matches_conventional(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for m in [3, 4, 5, 8] {
            for kind in ALL_KINDS {
                let op = random_op(kind, 256, &mut rng);
                let b = entangled_block(m, 256, &op, &mut rng);
                check_homomorphism(&op, &b)?;
            }
        }
    }

    /// Two stages, each admitted against the bound its input actually has.
    #[test]
    fn chained_ops_stay_exact(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = [3, 4, 5, 8][rng.random_range(0..4)];
        let p = derive_params(m, 32).unwrap();
        let limit = output_range(&p).magnitude();
        let first = random_op(OpKind::CircularConvolution, 64, &mut rng);
        let second = random_op(ALL_KINDS[rng.random_range(0..ALL_KINDS.len())], 64, &mut rng);
        // leave room for the second stage's growth
        let mid_bound = nument::bench::max_input_bound(&second, limit, limit);
        let b = common::block_for(p, 64, &first, limit, mid_bound, &mut rng);
        let mid = apply_conventional(&first, &b).unwrap();
        prop_assert!(admit(&second, mid.streams().max_abs(), &p).admitted);
        let expect = apply_conventional(&second, &mid).unwrap();
        let e = apply_entangled(&second, &apply_entangled(&first, &entangle(&b).unwrap()).unwrap()).unwrap();
        for f in failures(m) {
            prop_assert_eq!(&disentangle(&e, f).unwrap(), &expect);
        }
    }
}

/// Adding a kernel to entangled streams without entangling the kernel first
/// leaves the result undecodable.
#[test]
fn additive_kernels_need_self_entanglement() {
    let mut rng = StdRng::seed_from_u64(2);
    for m in [3, 8] {
        for kind in [OpKind::ElementwiseAdd, OpKind::ElementwiseSub] {
            let g: Vec<i32> = (0..32).map(|_| rng.random_range(1..=100)).collect();
            let op = match kind {
                OpKind::ElementwiseAdd => LsbOp::add(g),
                _ => LsbOp::sub(g),
            };
            let b = entangled_block(m, 32, &op, &mut rng);
            let e = entangle(&b).unwrap();
            let raw = op
                .apply_streams(e.streams(), &mut OpTally::default())
                .unwrap();
            let raw = EntangledBlock::new(*e.params(), raw).unwrap();
            let expect = apply_conventional(&op, &b).unwrap();
            for f in failures(m) {
                assert_ne!(
                    disentangle(&raw, f).unwrap(),
                    expect,
                    "{} m={m} {f:?}",
                    kind.name()
                );
            }
            for f in failures(m) {
                assert_eq!(
                    disentangle(&apply_entangled(&op, &e).unwrap(), f).unwrap(),
                    expect
                );
            }
        }
    }
}

/// Random search for an admitted op whose worst-case inputs push a recovered
/// output outside the range. Inputs sit at the admitted bound with random
/// signs.
#[test]
fn admission_is_sound() {
    let mut rng = StdRng::seed_from_u64(3);
    for trial in 0..400 {
        let m = [3, 4, 5, 8][trial % 4];
        let p = derive_params(m, 32).unwrap();
        let limit = output_range(&p);
        let kind = ALL_KINDS[rng.random_range(0..ALL_KINDS.len())];
        let op = random_op(kind, 64, &mut rng);
        let b = nument::bench::max_input_bound(&op, limit.magnitude(), limit.magnitude()) as i32;
        assert!(admit(&op, b as u128, &p).admitted);
        let rows: Vec<Vec<i32>> = (0..m)
            .map(|_| {
                (0..64)
                    .map(|_| if rng.random_bool(0.5) { b } else { -b })
                    .collect()
            })
            .collect();
        let block = StreamBlock::from_rows(p, &rows).unwrap();
        let expect = apply_conventional(&op, &block).unwrap();
        assert!(expect.streams().max_abs() <= op.worst_case_output(b as u128));
        let e = apply_entangled(&op, &entangle(&block).unwrap()).unwrap();
        for f in failures(m) {
            let got = disentangle(&e, f).unwrap();
            assert!(got.streams().find_out_of_range(&limit).is_none());
            assert_eq!(got, expect, "{} m={m} {f:?}", kind.name());
        }
        // one step past the bound is no longer admitted
        assert!(!admit(&op, b as u128 + 1, &p).admitted || b as u128 == limit.magnitude());
    }
}

/// Sign-matched inputs at the bound reach the worst case exactly for the
/// sum-type kernels, so the admission bound is not loose there.
#[test]
fn convolution_bound_is_reached() {
    let p = derive_params(3, 32).unwrap();
    let g: Vec<i32> = vec![3, -2, 5, -1];
    let op = LsbOp::convolution(g.clone()).unwrap();
    let b = nument::bench::max_input_bound(&op, 1 << 20, output_range(&p).magnitude()) as i32;
    // d[0] = g0 c0 + g1 c[n-1] + g2 c[n-2] + g3 c[n-3]
    let n = 8;
    let mut c = vec![0; n];
    c[0] = b * g[0].signum();
    for t in 1..4 {
        c[n - t] = b * g[t].signum();
    }
    let block = StreamBlock::from_rows(p, &[c.clone(), c.clone(), c]).unwrap();
    let out = apply_conventional(&op, &block).unwrap();
    assert_eq!(out.stream(0)[0] as u128, op.worst_case_output(b as u128));
    let e = apply_entangled(&op, &entangle(&block).unwrap()).unwrap();
    assert_eq!(disentangle(&e, FailedIndex::Stream(2)).unwrap(), out);
}

#[test]
fn kernel_transform_only_touches_additive_kinds() {
    let mut rng = StdRng::seed_from_u64(4);
    for kind in ALL_KINDS {
        let op = random_op(kind, 16, &mut rng);
        let t = op.entangled_kernel(11);
        if kind.is_additive() {
            assert_ne!(t, op);
        } else {
            assert_eq!(t, op);
        }
    }
}
