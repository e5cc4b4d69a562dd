//! Parallel integer streams, plain and entangled.

use crate::error::{Error, Result};
use crate::params::{CodecParams, RangeBound};
use crate::word::Word;

/// `m` equal-length streams stored stream-major in one buffer.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Streams<W> {
    m: usize,
    n: usize,
    data: Vec<W>,
}

impl<W: Word> Streams<W> {
    pub fn new(m: usize, n: usize, data: Vec<W>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::Shape(format!(
                "{} values cannot form {m} streams of {n}",
                data.len()
            )));
        }
        Ok(Self { m, n, data })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![W::ZERO; m * n],
        }
    }

    pub fn from_rows<R: AsRef<[W]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::Shape(format!(
                    "stream {i} has {} samples, stream 0 has {n}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            m: rows.len(),
            n,
            data,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stream(&self, i: usize) -> &[W] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn stream_mut(&mut self, i: usize) -> &mut [W] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter_streams(&self) -> impl Iterator<Item = &[W]> {
        // chunks_exact panics on a zero chunk size
        (0..self.m).map(move |i| self.stream(i))
    }

    pub fn as_slice(&self) -> &[W] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [W] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<W> {
        self.data
    }

    /// Largest magnitude across all streams.
    pub fn max_abs(&self) -> u128 {
        self.data
            .iter()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// First element outside `bound`, as (stream, position, value).
    pub fn find_out_of_range(&self, bound: &RangeBound) -> Option<(usize, usize, i128)> {
        if self.n == 0 {
            return None;
        }
        first_out_of_range(&self.data, bound).map(|(i, v)| (i / self.n, i % self.n, v))
    }

    pub(crate) fn check_range(&self, bound: &RangeBound) -> Result<()> {
        match self.find_out_of_range(bound) {
            None => Ok(()),
            Some((stream, position, value)) => Err(Error::OutOfRange {
                stream,
                position,
                value,
                bound: bound.hi,
            }),
        }
    }
}

/// Plain input or output streams tagged with the codec parameters.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StreamBlock<W> {
    params: CodecParams,
    streams: Streams<W>,
}

/// Entangled streams: `data[j] = (source[j - 1 mod m] << l) + source[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntangledBlock<W> {
    params: CodecParams,
    streams: Streams<W>,
}

fn check_shape<W: Word>(params: &CodecParams, streams: &Streams<W>) -> Result<()> {
    if params.w() != W::BITS {
        return Err(Error::Shape(format!(
            "params say w = {}, words are {} bits",
            params.w(),
            W::BITS
        )));
    }
    if streams.m() != params.m() {
        return Err(Error::StreamCount {
            expected: params.m(),
            got: streams.m(),
        });
    }
    Ok(())
}

macro_rules! block_common {
    ($name:ident) => {
        impl<W: Word> $name<W> {
            pub fn new(params: CodecParams, streams: Streams<W>) -> Result<Self> {
                check_shape(&params, &streams)?;
                Ok(Self { params, streams })
            }

            pub fn from_rows<R: AsRef<[W]>>(params: CodecParams, rows: &[R]) -> Result<Self> {
                Self::new(params, Streams::from_rows(rows)?)
            }

            pub fn params(&self) -> &CodecParams {
                &self.params
            }

            pub fn m(&self) -> usize {
                self.streams.m()
            }

            pub fn n(&self) -> usize {
                self.streams.n()
            }

            pub fn stream(&self, i: usize) -> &[W] {
                self.streams.stream(i)
            }

            pub fn stream_mut(&mut self, i: usize) -> &mut [W] {
                self.streams.stream_mut(i)
            }

            pub fn streams(&self) -> &Streams<W> {
                &self.streams
            }

            pub fn streams_mut(&mut self) -> &mut Streams<W> {
                &mut self.streams
            }

            pub fn into_streams(self) -> Streams<W> {
                self.streams
            }

            /// Value at (stream, position).
            pub fn get(&self, stream: usize, position: usize) -> W {
                self.streams.stream(stream)[position]
            }
        }
    };
}

block_common!(StreamBlock);
block_common!(EntangledBlock);

impl<W: Word> StreamBlock<W> {
    pub(crate) fn into_entangled_unchecked(self) -> EntangledBlock<W> {
        EntangledBlock {
            params: self.params,
            streams: self.streams,
        }
    }
}

impl<W: Word> EntangledBlock<W> {
    pub(crate) fn into_plain_unchecked(self) -> StreamBlock<W> {
        StreamBlock {
            params: self.params,
            streams: self.streams,
        }
    }
}

/// Index and value of the first element of `values` outside `bound`.
pub fn first_out_of_range<W: Word>(values: &[W], bound: &RangeBound) -> Option<(usize, i128)> {
    let lo = W::from_i128(bound.lo.max(W::MIN.to_i128()));
    let hi = W::from_i128(bound.hi.min(W::MAX.to_i128()));
    // Word-typed, branch-free scan so it vectorizes.
    let all_in = match (lo, hi) {
        (Some(lo), Some(hi)) if bound.lo <= bound.hi => values
            .iter()
            .fold(true, |ok, &v| ok & (v >= lo) & (v <= hi)),
        _ => values.is_empty(),
    };
    if all_in {
        return None;
    }
    values
        .iter()
        .position(|v| !bound.contains(v.to_i128()))
        .map(|i| (i, values[i].to_i128()))
}

/// Fills a buffer with alternating `MIN`/`MAX` words so any accidental read
/// of a lost stream shows up in the recovered values.
pub fn poison<W: Word>(buf: &mut [W]) {
    for (i, v) in buf.iter_mut().enumerate() {
        *v = if i % 2 == 0 { W::MIN } else { W::MAX };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_must_share_length() {
        let err = Streams::<i32>::from_rows(&[vec![1, 2], vec![3]]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn block_rejects_wrong_word_or_count() {
        let p = CodecParams::new(3, 32, 11, 10).unwrap();
        assert!(StreamBlock::<i16>::from_rows(p, &[[0i16], [0], [0]]).is_err());
        assert!(StreamBlock::<i32>::from_rows(p, &[[0i32], [0]]).is_err());
        assert!(StreamBlock::<i32>::from_rows(p, &[[0i32], [0], [0]]).is_ok());
    }

    #[test]
    fn out_of_range_location() {
        let s = Streams::<i32>::from_rows(&[[0, 1, 2], [3, 40, 5]]).unwrap();
        let b = RangeBound::symmetric(10);
        assert_eq!(s.find_out_of_range(&b), Some((1, 1, 40)));
        assert_eq!(s.find_out_of_range(&RangeBound::symmetric(40)), None);
    }

    #[test]
    fn poison_alternates() {
        let mut buf = [0i16; 4];
        poison(&mut buf);
        assert_eq!(buf, [i16::MIN, i16::MAX, i16::MIN, i16::MAX]);
    }
}
