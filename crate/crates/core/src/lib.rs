//! Fail-stop tolerant processing of integer data streams.
//!
//! `m >= 3` integer streams are entangled pairwise,
//! `e[j] = (c[j-1] << l) + c[j]`, and stored in place of the inputs. Linear,
//! sesquilinear and bijective operations then run on the entangled streams
//! unchanged, one independent worker per stream, and every output can be
//! extracted from any `m - 1` of the processed streams with additions and
//! shifts. A checksum-stream baseline and a throughput harness are included
//! for comparison.

pub mod bench;
pub mod block;
pub mod checksum;
pub mod cli;
pub mod codec;
pub mod cost;
pub mod counters;
pub mod error;
pub mod ops;
pub mod params;
pub mod pipeline;
pub mod streamfile;
pub mod word;

pub use block::{EntangledBlock, StreamBlock, Streams};
pub use checksum::{checksum_apply, checksum_encode, checksum_recover, ChecksumBlock};
pub use codec::{
    disentangle, disentangle_in_place, disentangle_m3, entangle, entangle_in_place, FailedIndex,
};
pub use error::{Error, Result};
pub use ops::{
    admit, apply_conventional, apply_entangled, Kernel, LsbOp, Matrix, OpBoundReport, OpKind,
};
pub use params::{derive_params, input_range, output_range, CodecParams, RangeBound};
pub use pipeline::{
    run_pipeline, sweep_failures, FailureMode, FailureSpec, OpCounters, RunReport, Scheme,
};
pub use word::Word;
