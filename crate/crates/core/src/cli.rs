//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::bench::{admissible_block, make_op, run_bench, write_csv, BenchConfig};
use crate::block::{StreamBlock, Streams};
use crate::codec::{disentangle, entangle, FailedIndex};
use crate::cost::{CostModel, CostOp};
use crate::error::{Error, Result};
use crate::ops::{apply_conventional, apply_entangled, Kernel, LsbOp, Matrix, OpKind};
use crate::params::{checksum_bitwidth, derive_params, output_range};
use crate::pipeline::{
    run_pipeline, sweep_failures, Execution, FailureMode, FailureSpec, Pipeline, Scheme,
};
use crate::streamfile::{self, AnyStreams};
use crate::word::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RANGE: i32 = 3;
pub const EXIT_UNRECOVERABLE: i32 = 4;
pub const EXIT_MALFORMED: i32 = 5;
pub const EXIT_INFEASIBLE: i32 = 6;
pub const EXIT_FAILED: i32 = 1;

/// The `M` values tabulated by `params --table1`.
pub const TABLE1_M: [usize; 7] = [3, 4, 5, 8, 11, 16, 32];

#[derive(Debug, Parser)]
#[command(
    name = "nument",
    version,
    about = "Fail-stop tolerant integer stream processing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print (l, k) and supported bitwidths per stream count.
    Params(ParamsArgs),
    /// Process a stream file under a redundancy scheme with optional failure.
    Run(RunArgs),
    /// Throughput of conventional, entangled and checksum execution.
    Bench(BenchArgs),
    /// Closed-form operation counts next to instrumented codec counts.
    Cost(CostArgs),
    /// Quick roundtrip and recovery checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long, value_delimiter = ',', required_unless_present = "table1")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pub w: u32,
    /// The seven reference rows at w = 32.
    #[arg(long)]
    pub table1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Add,
    Sub,
    Mul,
    Scale,
    Dot,
    Conv,
    Xcorr,
    Perm,
    Gemm,
}

impl From<OpArg> for OpKind {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::Add => OpKind::ElementwiseAdd,
            OpArg::Sub => OpKind::ElementwiseSub,
            OpArg::Mul => OpKind::ElementwiseMul,
            OpArg::Scale => OpKind::Scale,
            OpArg::Dot => OpKind::InnerProduct,
            OpArg::Conv => OpKind::CircularConvolution,
            OpArg::Xcorr => OpKind::CrossCorrelation,
            OpArg::Perm => OpKind::Permutation,
            OpArg::Gemm => OpKind::RowGemm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Plain,
    Entangled,
    Checksum,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Plain => Scheme::Plain,
            SchemeArg::Entangled => Scheme::Entangled,
            SchemeArg::Checksum => Scheme::Checksum,
        }
    }
}

fn parse_fail(s: &str) -> std::result::Result<FailureMode, String> {
    if s == "none" {
        return Ok(FailureMode::None);
    }
    if let Some(seed) = s.strip_prefix("random:") {
        return seed
            .parse()
            .map(FailureMode::Random)
            .map_err(|e| format!("bad seed {seed:?}: {e}"));
    }
    s.parse()
        .map(FailureMode::Fixed)
        .map_err(|_| format!("expected an index, random:<seed> or none, got {s:?}"))
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub op: OpArg,
    /// Kernel file (m = 1, or m = rows for gemm) or inline integers
    /// separated by commas; gemm rows are separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    pub kernel: String,
    #[arg(long, value_enum, default_value = "entangled")]
    pub scheme: SchemeArg,
    #[arg(long, value_parser = parse_fail, default_value = "none")]
    pub fail: FailureMode,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "conv")]
    pub op: OpArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    /// Kernel sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,1024,4500")]
    pub kernel: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3,8")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pub w: u32,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long, value_enum, default_value = "conv")]
    pub op: OpArg,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutOfRange { .. } | Error::NotAdmitted { .. } => EXIT_RANGE,
        Error::Unrecoverable { .. } => EXIT_UNRECOVERABLE,
        Error::Format(_) | Error::Io(_) => EXIT_MALFORMED,
        Error::InfeasibleParams { .. } | Error::InvalidParams { .. } => EXIT_INFEASIBLE,
        Error::ChecksumMismatch { .. } | Error::SweepMismatch { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Params(a) => cmd_params(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Cost(a) => cmd_cost(&a, out),
        Command::Selftest => cmd_selftest(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

pub fn params_table(ms: &[usize], w: u32) -> Result<String> {
    let mut s = String::from("  M   l   k  entangled  checksum\n");
    for &m in ms {
        let p = derive_params(m, w)?;
        s += &format!(
            "{:>3} {:>3} {:>3} {:>10} {:>9}\n",
            m,
            p.l(),
            p.k(),
            p.bitwidth(),
            checksum_bitwidth(m, w)
        );
    }
    Ok(s)
}

fn cmd_params(a: &ParamsArgs, out: &mut dyn Write) -> Result<i32> {
    let table = if a.table1 {
        params_table(&TABLE1_M, 32)?
    } else {
        params_table(&a.m, a.w)?
    };
    out.write_all(table.as_bytes()).map_err(io)?;
    Ok(EXIT_OK)
}

fn parse_ints<W: Word>(s: &str) -> Result<Vec<W>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i128>()
                .ok()
                .and_then(W::from_i128)
                .ok_or_else(|| {
                    Error::KernelShape(format!("{t:?} is not a {}-bit integer", W::BITS))
                })
        })
        .collect()
}

/// Kernel rows from a file or inline text.
fn kernel_rows<W: Word>(spec: &str) -> Result<Vec<Vec<W>>> {
    let path = Path::new(spec);
    if path.is_file() {
        let s: Streams<W> = streamfile::decode_as(&std::fs::read(path)?)?;
        return Ok(s.iter_streams().map(<[W]>::to_vec).collect());
    }
    spec.split(';').map(parse_ints).collect()
}

pub fn build_op<W: Word>(kind: OpKind, spec: &str) -> Result<LsbOp<W>> {
    let rows = kernel_rows::<W>(spec)?;
    let single = |rows: Vec<Vec<W>>| -> Result<Vec<W>> {
        match <[Vec<W>; 1]>::try_from(rows) {
            Ok([v]) => Ok(v),
            Err(rows) => Err(Error::KernelShape(format!(
                "expected one kernel row, got {}",
                rows.len()
            ))),
        }
    };
    match kind {
        OpKind::Scale => match single(rows)?.as_slice() {
            [s] => Ok(LsbOp::scale(*s)),
            other => Err(Error::KernelShape(format!(
                "scale takes one value, got {}",
                other.len()
            ))),
        },
        OpKind::Permutation => {
            let idx = single(rows)?
                .into_iter()
                .map(|v| usize::try_from(v.to_i128()).map_err(|_| Error::NotBijective(0)))
                .collect::<Result<Vec<_>>>()?;
            LsbOp::permutation(idx)
        }
        OpKind::RowGemm => {
            let r = rows.len();
            let c = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|row| row.len() != c) {
                return Err(Error::KernelShape("gemm rows differ in length".into()));
            }
            Ok(LsbOp::row_gemm(Matrix::new(r, c, rows.concat())?))
        }
        _ => LsbOp::new(kind, Kernel::Vector(single(rows)?)),
    }
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    match streamfile::read_file(&a.input)? {
        AnyStreams::W16(s) => run_typed(a, s, out),
        AnyStreams::W32(s) => run_typed(a, s, out),
        AnyStreams::W64(s) => run_typed(a, s, out),
    }
}

fn run_typed<W: Word>(a: &RunArgs, streams: Streams<W>, out: &mut dyn Write) -> Result<i32> {
    let p = derive_params(streams.m(), W::BITS)?;
    let block = StreamBlock::new(p, streams)?;
    let op = build_op::<W>(a.op.into(), &a.kernel)?;
    let spec = FailureSpec::new(a.scheme.into(), a.fail);
    let report = Pipeline::new(Execution::Threaded).run(&op, &block, spec)?;
    let summary = serde_json::json!({
        "scheme": report.scheme,
        "m": p.m(),
        "w": p.w(),
        "l": p.l(),
        "k": p.k(),
        "n_out": report.outputs.n(),
        "failed_worker": report.failed_worker,
        "recovered": report.recovered,
        "counters": report.counters,
    });
    writeln!(out, "{summary}").map_err(io)?;
    if let Some(stream) = report.missing_stream {
        return Err(Error::Unrecoverable { stream });
    }
    streamfile::write_file(&a.out, report.outputs.streams())?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = BenchConfig {
        kind: a.op.into(),
        n: a.n,
        kernel_sizes: a.kernel.clone(),
        ms: a.m.clone(),
        reps: a.reps,
        seed: a.seed,
    };
    let rows = match a.w {
        16 => run_bench::<i16>(&cfg)?,
        32 => run_bench::<i32>(&cfg)?,
        64 => run_bench::<i64>(&cfg)?,
        w => {
            return Err(Error::InfeasibleParams {
                m: cfg.ms.first().copied().unwrap_or(0),
                w,
            })
        }
    };
    match &a.csv {
        Some(path) => {
            write_csv(&rows, std::fs::File::create(path)?)?;
            for r in &rows {
                writeln!(
                    err,
                    "{:>12} m={:<2} kernel={:<5} {:>14.0} samples/s  overhead {:>6.2}%",
                    r.scheme.name(),
                    r.m,
                    r.kernel,
                    r.median_throughput,
                    r.relative_overhead_pct
                )
                .map_err(io)?;
            }
        }
        None => write_csv(&rows, &mut *out)?,
    }
    Ok(EXIT_OK)
}

/// Closed-form counts alongside a measured entangle + disentangle pass.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CostReport {
    pub op: CostOp,
    pub m: usize,
    pub n: usize,
    pub op_cost: f64,
    pub entangle_cost: f64,
    pub checksum_cost: f64,
    pub entangle_ratio: f64,
    pub checksum_ratio: f64,
    /// Instrumented encode + decode additions over the same sample count.
    pub measured_codec_ops: u64,
    /// `measured_codec_ops <= entangle_cost`.
    pub within_bound: bool,
}

/// Measured codec counts are compared with the bound at a factor of 1.
pub fn cost_report(op: CostOp, m: usize, n: usize, seed: u64) -> Result<CostReport> {
    let model = CostModel::new(m, n);
    let samples = match op {
        CostOp::Gemm => n * n,
        CostOp::ConvTime | CostOp::ConvFreq => n,
    };
    let mut rng = StdRng::seed_from_u64(seed);
    let identity = LsbOp::<i32>::scale(1);
    let block = admissible_block::<i32>(m, samples, &identity, &mut rng)?;
    let report = run_pipeline(
        &identity,
        &block,
        FailureSpec::new(Scheme::Entangled, FailureMode::None),
    )?;
    let measured = report.counters.codec_ops();
    Ok(CostReport {
        op,
        m,
        n,
        op_cost: model.op_cost(op),
        entangle_cost: model.entangle_cost(op),
        checksum_cost: model.checksum_cost(op),
        entangle_ratio: model.entangle_ratio(op),
        checksum_ratio: model.checksum_ratio(op),
        measured_codec_ops: measured,
        within_bound: measured as f64 <= model.entangle_cost(op),
    })
}

fn cmd_cost(a: &CostArgs, out: &mut dyn Write) -> Result<i32> {
    let ops: &[CostOp] = match a.op {
        OpArg::Gemm => &[CostOp::Gemm],
        OpArg::Conv | OpArg::Xcorr => &[CostOp::ConvTime, CostOp::ConvFreq],
        other => {
            return Err(Error::UnsupportedOp(OpKind::from(other).name()));
        }
    };
    for &op in ops {
        let r = cost_report(op, a.m, a.n, a.seed)?;
        writeln!(
            out,
            "{:?} m={} n={}: op {:.0}, entangle {:.0} ({:.4}%), checksum {:.0} ({:.4}%), measured codec {}{}",
            r.op,
            r.m,
            r.n,
            r.op_cost,
            r.entangle_cost,
            r.entangle_ratio * 100.0,
            r.checksum_cost,
            r.checksum_ratio * 100.0,
            r.measured_codec_ops,
            if r.within_bound { "" } else { "  [exceeds closed-form bound]" }
        )
        .map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(out: &mut dyn Write) -> Result<i32> {
    let mut rng = StdRng::seed_from_u64(7);
    let mut failures = 0;
    for m in TABLE1_M {
        let identity = LsbOp::<i32>::scale(1);
        let block = admissible_block::<i32>(m, 512, &identity, &mut rng)?;
        let e = entangle(&block)?;
        let ok = (0..m)
            .map(FailedIndex::Stream)
            .chain([FailedIndex::None])
            .all(|f| disentangle(&e, f).is_ok_and(|d| d == block));
        failures += usize::from(!ok);
        writeln!(
            out,
            "roundtrip m={m:<2} {}",
            if ok { "ok" } else { "FAILED" }
        )
        .map_err(io)?;
    }
    for m in [3usize, 8] {
        let op = make_op::<i32>(OpKind::CircularConvolution, 16, 256, &mut rng)?;
        let block = admissible_block::<i32>(m, 256, &op, &mut rng)?;
        let want = apply_conventional(&op, &block)?;
        let e = apply_entangled(&op, &entangle(&block)?)?;
        let homo = (0..m).all(|r| disentangle(&e, FailedIndex::Stream(r)).is_ok_and(|d| d == want));
        let sweep = [Scheme::Entangled, Scheme::Checksum]
            .into_iter()
            .all(|s| sweep_failures(&op, &block, s).is_ok());
        let ok = homo && sweep;
        failures += usize::from(!ok);
        writeln!(
            out,
            "conv recovery m={m} {}",
            if ok { "ok" } else { "FAILED" }
        )
        .map_err(io)?;
    }
    let p = derive_params(3, 32)?;
    writeln!(out, "output range m=3 w=32: +-{}", output_range(&p).hi).map_err(io)?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fail_flag_forms() {
        assert_eq!(parse_fail("none"), Ok(FailureMode::None));
        assert_eq!(parse_fail("2"), Ok(FailureMode::Fixed(2)));
        assert_eq!(parse_fail("random:9"), Ok(FailureMode::Random(9)));
        assert!(parse_fail("random:x").is_err());
        assert!(parse_fail("-1").is_err());
    }

    #[test]
    fn inline_kernels() {
        let op = build_op::<i32>(OpKind::CircularConvolution, "1,-2,3").unwrap();
        assert_eq!(op.kernel(), &Kernel::Vector(vec![1, -2, 3]));
        let op = build_op::<i32>(OpKind::RowGemm, "1,2;3,4;5,6").unwrap();
        assert_eq!(op.out_len(6).unwrap(), 4);
        assert!(build_op::<i32>(OpKind::Scale, "1,2").is_err());
        assert!(build_op::<i16>(OpKind::Scale, "70000").is_err());
        assert!(build_op::<i32>(OpKind::Permutation, "0,2,1").is_ok());
        assert!(build_op::<i32>(OpKind::RowGemm, "1,2;3").is_err());
    }

    #[test]
    fn table_rows_for_other_widths() {
        let t = params_table(&[3], 16).unwrap();
        let p = derive_params(3, 16).unwrap();
        assert_eq!((p.l(), p.k()), (5, 5));
        assert!(t.ends_with("  3   5   5         10        14\n"), "{t}");
        assert!(params_table(&[2], 32).is_err());
    }

    #[test]
    fn cost_report_conv() {
        let r = cost_report(CostOp::ConvTime, 3, 1000, 0).unwrap();
        assert!((r.entangle_ratio - 0.0005).abs() < 1e-12);
        assert_eq!(r.measured_codec_ops, 6000);
        assert!(r.within_bound);
    }
}
