//! Machine words the codec operates on.
//!
//! Every codec, operator and checksum routine is generic over a signed
//! two's-complement word. Arithmetic on words wraps (left shifts drop the
//! most significant bits), which is what makes entangled arithmetic exact:
//! intermediate overflow is harmless as long as the final value is in range.
//! Each word carries a double-width partner used as the disentanglement
//! accumulator.

use std::fmt::{Debug, Display};

/// Double-width accumulator for a [`Word`].
pub trait Wide: Copy + Default + Debug + PartialEq + Send + Sync + 'static {
    const BITS: u32;
    fn wrapping_add(self, rhs: Self) -> Self;
    fn wrapping_sub(self, rhs: Self) -> Self;
    fn wrapping_neg(self) -> Self;
    fn wrapping_shl(self, bits: u32) -> Self;
    /// Arithmetic (sign-replicating) right shift.
    fn sar(self, bits: u32) -> Self;
}

/// A signed machine word of `BITS` bits.
pub trait Word:
    Copy
    + Default
    + Debug
    + Display
    + PartialEq
    + Eq
    + PartialOrd
    + Ord
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    const BITS: u32;
    const ZERO: Self;
    const ONE: Self;
    const MIN: Self;
    const MAX: Self;
    const BYTES: usize;

    type Wide: Wide;

    fn wrapping_add(self, rhs: Self) -> Self;
    fn wrapping_sub(self, rhs: Self) -> Self;
    fn wrapping_mul(self, rhs: Self) -> Self;
    fn wrapping_neg(self) -> Self;
    /// Left shift with truncation at the most significant end.
    fn wrapping_shl(self, bits: u32) -> Self;

    fn widen(self) -> Self::Wide;
    /// Keeps the low `BITS` bits of a wide value.
    fn narrow(wide: Self::Wide) -> Self;

    fn to_i128(self) -> i128;
    /// Exact conversion; `None` when `v` is not representable.
    fn from_i128(v: i128) -> Option<Self>;
    /// Truncating conversion (low `BITS` bits).
    fn wrap_i128(v: i128) -> Self;

    /// Magnitude as an unsigned integer, exact for `MIN` too.
    fn unsigned_abs(self) -> u128 {
        self.to_i128().unsigned_abs()
    }

    fn write_le(self, out: &mut Vec<u8>);
    /// Reads one word from exactly `Self::BYTES` little-endian bytes.
    fn read_le(bytes: &[u8]) -> Self;
}

macro_rules! impl_wide {
    ($t:ty) => {
        impl Wide for $t {
            const BITS: u32 = <$t>::BITS;
            #[inline(always)]
            fn wrapping_add(self, rhs: Self) -> Self {
                <$t>::wrapping_add(self, rhs)
            }
            #[inline(always)]
            fn wrapping_sub(self, rhs: Self) -> Self {
                <$t>::wrapping_sub(self, rhs)
            }
            #[inline(always)]
            fn wrapping_neg(self) -> Self {
                <$t>::wrapping_neg(self)
            }
            #[inline(always)]
            fn wrapping_shl(self, bits: u32) -> Self {
                <$t>::wrapping_shl(self, bits)
            }
            #[inline(always)]
            fn sar(self, bits: u32) -> Self {
                self >> bits
            }
        }
    };
}

impl_wide!(i16);
impl_wide!(i32);
impl_wide!(i64);
impl_wide!(i128);

macro_rules! impl_word {
    ($t:ty, $wide:ty) => {
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;
            const ZERO: Self = 0;
            const ONE: Self = 1;
            const MIN: Self = <$t>::MIN;
            const MAX: Self = <$t>::MAX;
            const BYTES: usize = std::mem::size_of::<$t>();

            type Wide = $wide;

            #[inline(always)]
            fn wrapping_add(self, rhs: Self) -> Self {
                <$t>::wrapping_add(self, rhs)
            }
            #[inline(always)]
            fn wrapping_sub(self, rhs: Self) -> Self {
                <$t>::wrapping_sub(self, rhs)
            }
            #[inline(always)]
            fn wrapping_mul(self, rhs: Self) -> Self {
                <$t>::wrapping_mul(self, rhs)
            }
            #[inline(always)]
            fn wrapping_neg(self) -> Self {
                <$t>::wrapping_neg(self)
            }
            #[inline(always)]
            fn wrapping_shl(self, bits: u32) -> Self {
                <$t>::wrapping_shl(self, bits)
            }
            #[inline(always)]
            fn widen(self) -> $wide {
                self as $wide
            }
            #[inline(always)]
            fn narrow(wide: $wide) -> Self {
                wide as $t
            }
            #[inline(always)]
            fn to_i128(self) -> i128 {
                self as i128
            }
            fn from_i128(v: i128) -> Option<Self> {
                <$t>::try_from(v).ok()
            }
            #[inline(always)]
            fn wrap_i128(v: i128) -> Self {
                v as $t
            }
            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_le(bytes: &[u8]) -> Self {
                let mut buf = [0u8; std::mem::size_of::<$t>()];
                buf.copy_from_slice(bytes);
                <$t>::from_le_bytes(buf)
            }
        }
    };
}

impl_word!(i8, i16);
impl_word!(i16, i32);
impl_word!(i32, i64);
impl_word!(i64, i128);
