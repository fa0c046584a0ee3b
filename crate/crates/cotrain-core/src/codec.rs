//! Strict big-endian byte codec used for every wire artifact.
//!
//! Integers are length-prefixed with a `u32` and use the minimal big-endian
//! encoding, so each value has exactly one accepted byte string.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("trailing bytes after message")]
    Trailing,
    #[error("non-canonical integer encoding")]
    NonCanonical,
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("length {0} exceeds limit")]
    TooLong(usize),
    #[error("invalid value: {0}")]
    Invalid(&'static str),
}

/// Upper bound on a single length-prefixed field, to fail fast on garbage.
pub const MAX_FIELD: usize = 1 << 26;

#[derive(Default, Debug, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_version(version: u32) -> Self {
        let mut w = Self::new();
        w.u32(version);
        w
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u32(v.len() as u32);
        self.buf.extend_from_slice(v);
        self
    }

    pub fn raw(&mut self, v: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(v);
        self
    }

    pub fn uint(&mut self, v: &BigUint) -> &mut Self {
        if v.is_zero() {
            self.u32(0);
        } else {
            self.bytes(&v.to_bytes_be());
        }
        self
    }

    pub fn int(&mut self, v: &BigInt) -> &mut Self {
        self.u8(u8::from(v.sign() == Sign::Minus));
        self.uint(v.magnitude())
    }

    /// Fixed-width big-endian integer, left-padded with zeros.
    pub fn uint_fixed(&mut self, v: &BigUint, width: usize) -> &mut Self {
        let b = if v.is_zero() { Vec::new() } else { v.to_bytes_be() };
        assert!(b.len() <= width, "value wider than field");
        self.buf.extend(core::iter::repeat(0u8).take(width - b.len()));
        self.buf.extend_from_slice(&b);
        self
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    /// Reads and checks a 4-byte version header.
    pub fn versioned(data: &'a [u8], version: u32) -> Result<Self, CodecError> {
        let mut r = Self::new(data);
        let v = r.u32()?;
        if v != version {
            return Err(CodecError::Version(v));
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.data.len() - self.pos < n {
            return Err(CodecError::Truncated);
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, CodecError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_be_bytes(a))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.u32()? as usize;
        if n > MAX_FIELD {
            return Err(CodecError::TooLong(n));
        }
        self.take(n)
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        self.take(n)
    }

    pub fn uint(&mut self) -> Result<BigUint, CodecError> {
        let b = self.bytes()?;
        if b.first() == Some(&0) {
            return Err(CodecError::NonCanonical);
        }
        Ok(BigUint::from_bytes_be(b))
    }

    pub fn int(&mut self) -> Result<BigInt, CodecError> {
        let neg = match self.u8()? {
            0 => false,
            1 => true,
            _ => return Err(CodecError::NonCanonical),
        };
        let mag = self.uint()?;
        if neg && mag.is_zero() {
            return Err(CodecError::NonCanonical);
        }
        Ok(BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, mag))
    }

    pub fn uint_fixed(&mut self, width: usize) -> Result<BigUint, CodecError> {
        Ok(BigUint::from_bytes_be(self.take(width)?))
    }

    /// Length of a vector field, bounded by `max`.
    pub fn count(&mut self, max: usize) -> Result<usize, CodecError> {
        let n = self.u32()? as usize;
        if n > max {
            return Err(CodecError::TooLong(n));
        }
        Ok(n)
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(CodecError::Trailing)
        }
    }
}
