//! Binary integer arithmetic coder with 32-bit registers.
//!
//! Probabilities are quantized to 16 bits; carry propagation is handled by
//! counting pending bits during renormalization.

use crate::bits::{BitReader, BitWriter};
use crate::error::Result;

const HALF: u32 = 0x8000_0000;
const QUARTER: u32 = 0x4000_0000;
const THREE_QUARTERS: u32 = 0xC000_0000;

/// Minimum probability granted to either symbol: 1 / 2^16.
pub const P_FLOOR: f64 = 1.0 / 65536.0;

/// Quantize P(bit = 0) to a 16-bit integer in [1, 65535].
#[inline]
pub fn quantize_p0(p0: f64) -> u16 {
    let q = (p0 * 65536.0) as i64;
    q.clamp(1, 65535) as u16
}

pub struct ArithmeticEncoder {
    low: u32,
    high: u32,
    pending: u64,
    out: BitWriter,
}

impl Default for ArithmeticEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl ArithmeticEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            high: u32::MAX,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    #[inline]
    fn emit(&mut self, bit: u8) {
        self.out.push(bit);
        let inverse = bit ^ 1;
        while self.pending > 0 {
            self.out.push(inverse);
            self.pending -= 1;
        }
    }

    #[inline]
    pub fn encode(&mut self, p0: u16, bit: u8) {
        debug_assert!(p0 >= 1);
        let range = u64::from(self.high - self.low) + 1;
        // zero symbol owns [low, split], one symbol owns [split+1, high]
        let split = self.low + ((range * u64::from(p0)) >> 16) as u32 - 1;
        debug_assert!(self.low <= split && split < self.high);
        if bit == 0 {
            self.high = split;
        } else {
            self.low = split + 1;
        }
        loop {
            if self.high < HALF {
                self.emit(0);
            } else if self.low >= HALF {
                self.emit(1);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.pending += 1;
        if self.low < QUARTER {
            self.emit(0);
        } else {
            self.emit(1);
        }
        self.out.into_bytes()
    }
}

pub struct ArithmeticDecoder<'a> {
    low: u32,
    high: u32,
    value: u32,
    reader: BitReader<'a>,
}

impl<'a> ArithmeticDecoder<'a> {
    pub fn new(payload: &'a [u8]) -> Result<Self> {
        let mut reader = BitReader::new(payload);
        let mut value = 0u32;
        for _ in 0..32 {
            value = (value << 1) | u32::from(reader.next()?);
        }
        Ok(Self {
            low: 0,
            high: u32::MAX,
            value,
            reader,
        })
    }

    #[inline]
    pub fn decode(&mut self, p0: u16) -> Result<u8> {
        let range = u64::from(self.high - self.low) + 1;
        let split = self.low + ((range * u64::from(p0)) >> 16) as u32 - 1;
        let bit = if self.value <= split { 0 } else { 1 };
        if bit == 0 {
            self.high = split;
        } else {
            self.low = split + 1;
        }
        loop {
            if self.high < HALF {
                // nothing to subtract
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | u32::from(self.reader.next()?);
        }
        Ok(bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn round_trip(bits: &[u8], probs: &[u16]) {
        let mut enc = ArithmeticEncoder::new();
        for (&b, &p) in bits.iter().zip(probs) {
            enc.encode(p, b);
        }
        let payload = enc.finish();
        let mut dec = ArithmeticDecoder::new(&payload).unwrap();
        for (&b, &p) in bits.iter().zip(probs) {
            assert_eq!(dec.decode(p).unwrap(), b);
        }
    }

    #[test]
    fn fixed_probability_round_trip() {
        let bits: Vec<u8> = (0..500).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let probs = vec![quantize_p0(0.7); bits.len()];
        round_trip(&bits, &probs);
    }

    #[test]
    fn extreme_probabilities_round_trip() {
        let mut rng = StdRng::seed_from_u64(7);
        let bits: Vec<u8> = (0..2000).map(|_| rng.gen_range(0..2) as u8).collect();
        let probs: Vec<u16> = (0..2000)
            .map(|i| match i % 4 {
                0 => 1,
                1 => 65535,
                2 => quantize_p0(0.5),
                _ => quantize_p0(rng.gen_range(0.001..0.999)),
            })
            .collect();
        round_trip(&bits, &probs);
    }

    #[test]
    fn skewed_stream_compresses() {
        // 10_000 zeros at p0 = 0.99 must take far fewer than 10_000 bits.
        let mut enc = ArithmeticEncoder::new();
        let p = quantize_p0(0.99);
        for _ in 0..10_000 {
            enc.encode(p, 0);
        }
        let payload = enc.finish();
        assert!(payload.len() < 10_000 / 8 / 2);
    }

    #[test]
    fn quantizer_clamps() {
        assert_eq!(quantize_p0(0.0), 1);
        assert_eq!(quantize_p0(1.0), 65535);
        assert_eq!(quantize_p0(0.5), 32768);
    }
}
