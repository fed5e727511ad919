//! Framed container for compressed output.
//!
//! On-disk layout (big-endian where multi-byte):
//!   magic "NMC1" | version u8 = 1 | algorithm u8 | param u16 | original
//!   length as LEB128 | memory fingerprint u64 | payload to end.
//!
//! `param` carries the CTW context depth, or `window_size / 256` for LZ.

use crate::bits::{read_leb128, write_leb128};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"NMC1";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ctw = 1,
    Lz = 2,
}

impl Algorithm {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Algorithm::Ctw),
            2 => Ok(Algorithm::Lz),
            other => Err(Error::format(format!("unknown algorithm id {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ctw => "ctw",
            Algorithm::Lz => "lz",
        }
    }
}

/// FNV-1a over the memory bytes; zero for an empty memory so that
/// "no memory" is visible in the header.
pub fn memory_fingerprint(memory: &[u8]) -> u64 {
    if memory.is_empty() {
        return 0;
    }
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in memory {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedStream {
    pub algorithm: Algorithm,
    pub param: u16,
    pub original_len: u64,
    pub memory_fingerprint: u64,
    pub payload: Vec<u8>,
}

impl CodedStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + 24);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.algorithm as u8);
        out.extend_from_slice(&self.param.to_be_bytes());
        write_leb128(&mut out, self.original_len);
        out.extend_from_slice(&self.memory_fingerprint.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::format("stream shorter than fixed header"));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::format("bad magic (not an NMC1 stream)"));
        }
        if bytes[4] != VERSION {
            return Err(Error::format(format!("unsupported version {}", bytes[4])));
        }
        let algorithm = Algorithm::from_u8(bytes[5])?;
        let param = u16::from_be_bytes([bytes[6], bytes[7]]);
        let mut pos = 8;
        let original_len = read_leb128(bytes, &mut pos)?;
        if bytes.len() < pos + 8 {
            return Err(Error::format("unexpected end of header (fingerprint)"));
        }
        let memory_fingerprint =
            u64::from_be_bytes(bytes[pos..pos + 8].try_into().unwrap());
        pos += 8;
        Ok(CodedStream {
            algorithm,
            param,
            original_len,
            memory_fingerprint,
            payload: bytes[pos..].to_vec(),
        })
    }

    /// Refuse to decode when the decoder's memory does not hash to the
    /// fingerprint recorded by the encoder.
    pub fn check_memory(&self, memory: &[u8]) -> Result<()> {
        let found = memory_fingerprint(memory);
        if found != self.memory_fingerprint {
            return Err(Error::Synchronization {
                expected: self.memory_fingerprint,
                found,
            });
        }
        Ok(())
    }
}
