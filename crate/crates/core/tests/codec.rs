mod common;

use nument::{
    derive_params, disentangle, disentangle_m3, entangle, input_range, CodecParams, EntangledBlock,
    FailedIndex, StreamBlock, Streams, Word,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TABLE_M: [usize; 7] = [3, 4, 5, 8, 11, 16, 32];

fn failures(m: usize) -> impl Iterator<Item = FailedIndex> {
    std::iter::once(FailedIndex::None).chain((0..m).map(FailedIndex::Stream))
}

/// Reference superposition evaluated without any wrapping.
fn entangle_wide(b: &StreamBlock<i32>) -> Vec<i128> {
    let (m, n, l) = (b.m(), b.n(), b.params().l());
    let mut out = Vec::with_capacity(m * n);
    for j in 0..m {
        let prev = b.stream((j + m - 1) % m);
        out.extend(
            b.stream(j)
                .iter()
                .zip(prev)
                .map(|(&c, &p)| ((p as i128) << l) + c as i128),
        );
    }
    out
}

fn block_strategy(m: usize) -> impl Strategy<Value = StreamBlock<i32>> {
    let p = derive_params(m, 32).unwrap();
    let hi = input_range(&p).hi as i32;
    (1usize..24).prop_flat_map(move |n| {
        prop::collection::vec(-hi..=hi, m * n)
            .prop_map(move |data| StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap())
    })
}

fn any_table_block() -> impl Strategy<Value = StreamBlock<i32>> {
    prop::sample::select(TABLE_M.to_vec()).prop_flat_map(block_strategy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roundtrip_every_failure(b in any_table_block()) {
        let e = entangle(&b).unwrap();
        for f in failures(b.m()) {
            prop_assert_eq!(&disentangle(&e, f).unwrap(), &b);
        }
    }

    #[test]
    fn entangled_values_fit_and_match_wide_reference(b in any_table_block()) {
        let e = entangle(&b).unwrap();
        let wide = entangle_wide(&b);
        let got: Vec<i128> = e.streams().as_slice().iter().map(|&v| v as i128).collect();
        prop_assert_eq!(got, wide);
    }

    #[test]
    fn failed_stream_contents_are_irrelevant(b in any_table_block(), junk in any::<i32>(), pick in any::<prop::sample::Index>()) {
        let e = entangle(&b).unwrap();
        let r = pick.index(b.m());
        let mut damaged = e.clone();
        damaged.stream_mut(r).fill(junk);
        prop_assert_eq!(disentangle(&damaged, FailedIndex::Stream(r)).unwrap(), b);
    }

    #[test]
    fn entangle_is_additive(m in prop::sample::select(TABLE_M.to_vec()), seed in any::<u64>()) {
        let p = derive_params(m, 32).unwrap();
        let half = (input_range(&p).hi / 2) as i32;
        let mut rng = StdRng::seed_from_u64(seed);
        let n = 17;
        let mut draw = || {
            let data = (0..m * n).map(|_| rng.random_range(-half..=half)).collect();
            StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap()
        };
        let (a, b) = (draw(), draw());
        let sum: Vec<i32> = a.streams().as_slice().iter().zip(b.streams().as_slice()).map(|(x, y)| x + y).collect();
        let sum = StreamBlock::new(p, Streams::new(m, n, sum).unwrap()).unwrap();
        let (ea, eb, es) = (entangle(&a).unwrap(), entangle(&b).unwrap(), entangle(&sum).unwrap());
        let added: Vec<i32> = ea.streams().as_slice().iter().zip(eb.streams().as_slice()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(es.streams().as_slice(), &added[..]);
    }

    #[test]
    fn entangle_is_homogeneous(m in prop::sample::select(TABLE_M.to_vec()), s in -9i32..=9, seed in any::<u64>()) {
        let p = derive_params(m, 32).unwrap();
        let hi = input_range(&p).hi as i32 / s.abs().max(1);
        let mut rng = StdRng::seed_from_u64(seed);
        let n = 13;
        let data: Vec<i32> = (0..m * n).map(|_| rng.random_range(-hi..=hi)).collect();
        let scaled: Vec<i32> = data.iter().map(|v| v * s).collect();
        let a = StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap();
        let sa = StreamBlock::new(p, Streams::new(m, n, scaled).unwrap()).unwrap();
        let ea = entangle(&a).unwrap();
        let expect: Vec<i32> = ea.streams().as_slice().iter().map(|v| v * s).collect();
        let esa = entangle(&sa).unwrap();
        prop_assert_eq!(esa.streams().as_slice(), &expect[..]);
    }
}

#[test]
fn three_stream_oracle_agrees_on_random_triples() {
    let p = derive_params(3, 32).unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let b = common::full_range_block(p, 100_000, &mut rng);
    let e = entangle(&b).unwrap();
    for f in failures(3) {
        let general = disentangle(&e, f).unwrap();
        assert_eq!(general, disentangle_m3(&e, f).unwrap(), "failed = {f:?}");
        assert_eq!(general, b);
    }
}

/// Every in-range triple, every failure index, for every valid three-stream
/// parameter set in an 8-bit word.
#[test]
fn exhaustive_small_words() {
    for l in 1..=7u32 {
        for k in 1..=l {
            let Ok(p) = CodecParams::new(3, 8, l, k) else {
                continue;
            };
            exhaustive_cube(p);
        }
    }
}

fn exhaustive_cube(p: CodecParams) {
    let hi = input_range(&p).hi as i8;
    let vals: Vec<i8> = (-hi..=hi).collect();
    let mut rows = [Vec::new(), Vec::new(), Vec::new()];
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                rows[0].push(a);
                rows[1].push(b);
                rows[2].push(c);
            }
        }
    }
    let block = StreamBlock::from_rows(p, &rows).unwrap();
    let e = entangle(&block).unwrap();
    for f in failures(3) {
        assert_eq!(disentangle(&e, f).unwrap(), block, "{p:?} {f:?}");
        assert_eq!(disentangle_m3(&e, f).unwrap(), block, "{p:?} {f:?}");
    }
}

/// 16-bit words with both range ends and alternating signs planted at the
/// start of every stream.
#[test]
fn sixteen_bit_words() {
    let mut rng = StdRng::seed_from_u64(16);
    for m in [3, 4, 5, 8] {
        let p = derive_params(m, 16).unwrap();
        let hi = input_range(&p).hi as i16;
        let n = 4096;
        let mut data: Vec<i16> = (0..m * n).map(|_| rng.random_range(-hi..=hi)).collect();
        for j in 0..m {
            data[j * n] = hi;
            data[j * n + 1] = -hi;
            data[j * n + 2] = if j % 2 == 0 { hi } else { -hi };
        }
        let b = StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap();
        let e = entangle(&b).unwrap();
        for f in failures(m) {
            assert_eq!(disentangle(&e, f).unwrap(), b, "m = {m}, {f:?}");
        }
    }
}

#[test]
fn sixty_four_bit_words() {
    let mut rng = StdRng::seed_from_u64(64);
    for m in TABLE_M {
        let p = derive_params(m, 64).unwrap();
        let hi = input_range(&p).hi as i64;
        let n = 257;
        let data: Vec<i64> = (0..m * n)
            .map(|i| match i % 7 {
                0 => hi,
                1 => -hi,
                _ => rng.random_range(-hi..=hi),
            })
            .collect();
        let b = StreamBlock::new(p, Streams::new(m, n, data).unwrap()).unwrap();
        let e = entangle(&b).unwrap();
        for f in failures(m) {
            assert_eq!(disentangle(&e, f).unwrap(), b, "m = {m}, {f:?}");
        }
    }
}

#[test]
fn zero_streams_stay_zero() {
    for m in TABLE_M {
        let p = derive_params(m, 32).unwrap();
        let e = EntangledBlock::new(p, Streams::<i32>::zeros(m, 5)).unwrap();
        for f in failures(m) {
            let d = disentangle(&e, f).unwrap();
            assert!(d.streams().as_slice().iter().all(|&v| v == i32::ZERO));
        }
    }
}
