//! MSB-first bit I/O used by the arithmetic coder and token serializer.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    // number of bits already used in the last byte, 0..8
    fill: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        if self.fill == 0 {
            self.bytes.push(0);
        }
        if bit != 0 {
            let last = self.bytes.last_mut().unwrap();
            *last |= 0x80 >> self.fill;
        }
        self.fill = (self.fill + 1) & 7;
    }

    pub fn bit_len(&self) -> u64 {
        if self.fill == 0 {
            self.bytes.len() as u64 * 8
        } else {
            (self.bytes.len() as u64 - 1) * 8 + self.fill as u64
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Bit reader over a payload slice. Reads past the end return zero bits, up
/// to a fixed slack that covers the arithmetic coder's flush; anything beyond
/// that indicates a truncated payload.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    limit: u64,
}

// Renormalization may legitimately read a few dozen padding bits past the
// encoder's flush (32-bit register fill plus the final carry bits).
const OVERREAD_SLACK: u64 = 64;

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        let limit = bytes.len() as u64 * 8 + OVERREAD_SLACK;
        Self { bytes, pos: 0, limit }
    }

    #[inline]
    pub fn next(&mut self) -> Result<u8> {
        if self.pos >= self.limit {
            return Err(Error::corrupt("payload exhausted (truncated stream?)"));
        }
        let idx = (self.pos / 8) as usize;
        let bit = if idx < self.bytes.len() {
            (self.bytes[idx] >> (7 - (self.pos & 7))) & 1
        } else {
            0
        };
        self.pos += 1;
        Ok(bit)
    }
}

/// Iterate the bits of a byte slice, most significant bit of each byte first.
pub fn bytes_to_bits(bytes: &[u8]) -> impl Iterator<Item = u8> + '_ {
    bytes
        .iter()
        .flat_map(|&b| (0..8).map(move |i| (b >> (7 - i)) & 1))
}

/// Pack a bit iterator back into bytes, MSB-first. The bit count must be a
/// multiple of 8.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    debug_assert!(bits.len() % 8 == 0);
    bits.chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

pub fn write_leb128(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            break;
        }
        out.push(byte | 0x80);
    }
}

pub fn read_leb128(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *bytes
            .get(*pos)
            .ok_or_else(|| Error::format("unexpected end of header (varint)"))?;
        *pos += 1;
        if shift >= 64 || (shift == 63 && byte > 1) {
            return Err(Error::format("varint overflows u64"));
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}
