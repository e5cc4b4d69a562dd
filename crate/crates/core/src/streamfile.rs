//! Binary stream container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NENT"
//! 4       1     version (1)
//! 5       1     word width w in bits: 16, 32 or 64
//! 6       4     stream count m, u32 little-endian
//! 10      8     samples per stream n, u64 little-endian
//! 18      ...   m streams back to back, each n little-endian
//!               two's-complement w-bit words
//! ```

use std::path::Path;

use crate::block::Streams;
use crate::error::{Error, Result};
use crate::word::Word;

pub const MAGIC: &[u8; 4] = b"NENT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u8,
    pub w: u32,
    pub m: usize,
    pub n: usize,
}

impl Header {
    pub fn payload_len(&self) -> Option<usize> {
        self.m.checked_mul(self.n)?.checked_mul(self.w as usize / 8)
    }
}

/// Decoded streams of whichever width the file declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyStreams {
    W16(Streams<i16>),
    W32(Streams<i32>),
    W64(Streams<i64>),
}

impl AnyStreams {
    pub fn w(&self) -> u32 {
        match self {
            AnyStreams::W16(_) => 16,
            AnyStreams::W32(_) => 32,
            AnyStreams::W64(_) => 64,
        }
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(malformed(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = bytes[4];
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let w = bytes[5] as u32;
    if !matches!(w, 16 | 32 | 64) {
        return Err(malformed(format!("unsupported word width {w}")));
    }
    let m = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(bytes[10..18].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| malformed("sample count too large"))?;
    let header = Header { version, w, m, n };
    let want = header
        .payload_len()
        .ok_or_else(|| malformed("payload size overflows"))?;
    let got = bytes.len() - HEADER_LEN;
    if got != want {
        return Err(malformed(format!(
            "payload is {got} bytes, header implies {want}"
        )));
    }
    Ok(header)
}

fn payload<W: Word>(bytes: &[u8], h: &Header) -> Result<Streams<W>> {
    let data = bytes[HEADER_LEN..]
        .chunks_exact(W::BYTES)
        .map(W::read_le)
        .collect();
    Streams::new(h.m, h.n, data)
}

pub fn decode(bytes: &[u8]) -> Result<AnyStreams> {
    let h = parse_header(bytes)?;
    Ok(match h.w {
        16 => AnyStreams::W16(payload(bytes, &h)?),
        32 => AnyStreams::W32(payload(bytes, &h)?),
        _ => AnyStreams::W64(payload(bytes, &h)?),
    })
}

/// Decodes a file whose width must match `W`.
pub fn decode_as<W: Word>(bytes: &[u8]) -> Result<Streams<W>> {
    let h = parse_header(bytes)?;
    if h.w != W::BITS {
        return Err(malformed(format!(
            "file holds {}-bit words, expected {}",
            h.w,
            W::BITS
        )));
    }
    payload(bytes, &h)
}

pub fn encode<W: Word>(streams: &Streams<W>) -> Result<Vec<u8>> {
    if !matches!(W::BITS, 16 | 32 | 64) {
        return Err(malformed(format!("{}-bit words cannot be stored", W::BITS)));
    }
    let m = u32::try_from(streams.m()).map_err(|_| malformed("too many streams"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + streams.as_slice().len() * W::BYTES);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(W::BITS as u8);
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&(streams.n() as u64).to_le_bytes());
    for &v in streams.as_slice() {
        v.write_le(&mut out);
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<AnyStreams> {
    decode(&std::fs::read(path)?)
}

pub fn write_file<W: Word>(path: &Path, streams: &Streams<W>) -> Result<()> {
    std::fs::write(path, encode(streams)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_fixed() {
        let s = Streams::<i16>::from_rows(&[[1i16, -1], [256, 0]]).unwrap();
        let bytes = encode(&s).unwrap();
        assert_eq!(
            bytes,
            [
                b'N', b'E', b'N', b'T', 1, 16, 2, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, //
                1, 0, 0xff, 0xff, 0, 1, 0, 0
            ]
        );
    }

    #[test]
    fn rejects_malformed() {
        let good = encode(&Streams::<i32>::from_rows(&[[7i32]]).unwrap()).unwrap();
        assert!(decode(&good).is_ok());
        assert!(decode(&good[..10]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = good.clone();
        bad[5] = 24;
        assert!(decode(&bad).is_err());
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode(&bad), Err(Error::Format(_))));
        assert!(decode_as::<i16>(&good).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_byte_identical(m in 1usize..5, n in 0usize..20, seed in any::<u64>()) {
            let mut x = seed;
            let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); x };
            let s16 = Streams::new(m, n, (0..m * n).map(|_| next() as i16).collect()).unwrap();
            let s32 = Streams::new(m, n, (0..m * n).map(|_| next() as i32).collect()).unwrap();
            let s64 = Streams::new(m, n, (0..m * n).map(|_| next() as i64).collect()).unwrap();
            for bytes in [encode(&s16).unwrap(), encode(&s32).unwrap(), encode(&s64).unwrap()] {
                let back = match decode(&bytes).unwrap() {
                    AnyStreams::W16(s) => encode(&s).unwrap(),
                    AnyStreams::W32(s) => encode(&s).unwrap(),
                    AnyStreams::W64(s) => encode(&s).unwrap(),
                };
                prop_assert_eq!(back, bytes);
            }
        }
    }
}
