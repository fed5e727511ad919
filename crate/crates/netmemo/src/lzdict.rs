//! LZ77 with a preset dictionary: the memory sequence is loaded into the
//! sliding window before parsing starts, so early input can match against
//! previously seen traffic.
//!
//! Tokens follow DEFLATE conventions (min match 3, max match 258, offsets up
//! to the window size) but are serialized into a custom bit layout and
//! entropy-coded with the order-0 adaptive coder from the `ctw` module.

use crate::coder::{quantize_p0, ArithmeticDecoder, ArithmeticEncoder};
use crate::ctw::ContextTree;
use crate::error::{Error, Result};
use crate::stream::{memory_fingerprint, Algorithm, CodedStream};

pub const MIN_WINDOW: usize = 256;
pub const MAX_WINDOW: usize = 65536;
pub const DEFAULT_WINDOW: usize = 32768;

pub const MIN_MATCH: usize = 3;
pub const MAX_MATCH: usize = 258;

/// Longest-match search effort: positions examined per hash chain.
const MAX_CHAIN_PROBES: usize = 4096;

const HASH_BITS: u32 = 15;
const HASH_SIZE: usize = 1 << HASH_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzToken {
    Literal(u8),
    /// Backward offset in 1..=window and length in 3..=258.
    Match { offset: u32, len: u32 },
}

fn check_window(window_size: usize) -> Result<()> {
    if !(MIN_WINDOW..=MAX_WINDOW).contains(&window_size) || window_size % 256 != 0 {
        return Err(Error::usage(format!(
            "window size must be a multiple of 256 in [{MIN_WINDOW}, {MAX_WINDOW}], got {window_size}"
        )));
    }
    Ok(())
}

#[inline]
fn hash3(buf: &[u8], pos: usize) -> usize {
    let key = u32::from(buf[pos])
        | (u32::from(buf[pos + 1]) << 8)
        | (u32::from(buf[pos + 2]) << 16);
    (key.wrapping_mul(2_654_435_761) >> (32 - HASH_BITS)) as usize
}

/// Greedy longest-match parse of `input`, with `dict` already in the window.
pub fn parse_tokens(input: &[u8], dict: &[u8], window_size: usize) -> Vec<LzToken> {
    let mut buf = Vec::with_capacity(dict.len() + input.len());
    buf.extend_from_slice(dict);
    buf.extend_from_slice(input);

    let mut head = vec![u32::MAX; HASH_SIZE];
    let mut prev = vec![u32::MAX; buf.len()];
    let add_pos = |head: &mut Vec<u32>, prev: &mut Vec<u32>, buf: &[u8], pos: usize| {
        if pos + MIN_MATCH <= buf.len() {
            let h = hash3(buf, pos);
            prev[pos] = head[h];
            head[h] = pos as u32;
        }
    };

    for pos in 0..dict.len() {
        add_pos(&mut head, &mut prev, &buf, pos);
    }

    let mut tokens = Vec::new();
    let mut pos = dict.len();
    while pos < buf.len() {
        let remaining = buf.len() - pos;
        let max_len = remaining.min(MAX_MATCH);
        let mut best_len = 0usize;
        let mut best_off = 0usize;
        if max_len >= MIN_MATCH {
            let mut cand = head[hash3(&buf, pos)];
            let mut probes = 0;
            while cand != u32::MAX && probes < MAX_CHAIN_PROBES {
                let c = cand as usize;
                let offset = pos - c;
                if offset > window_size {
                    break; // chain is ordered by position; all older are farther
                }
                // quick reject on the byte after the current best
                if best_len == 0 || buf[c + best_len] == buf[pos + best_len] {
                    let mut len = 0;
                    while len < max_len && buf[c + len] == buf[pos + len] {
                        len += 1;
                    }
                    if len > best_len {
                        best_len = len;
                        best_off = offset;
                        if len == max_len {
                            break;
                        }
                    }
                }
                cand = prev[c];
                probes += 1;
            }
        }
        if best_len >= MIN_MATCH {
            tokens.push(LzToken::Match {
                offset: best_off as u32,
                len: best_len as u32,
            });
            for p in pos..pos + best_len {
                add_pos(&mut head, &mut prev, &buf, p);
            }
            pos += best_len;
        } else {
            tokens.push(LzToken::Literal(buf[pos]));
            add_pos(&mut head, &mut prev, &buf, pos);
            pos += 1;
        }
    }
    tokens
}

struct TokenBitSink {
    model: ContextTree,
    enc: ArithmeticEncoder,
}

impl TokenBitSink {
    fn new() -> Self {
        TokenBitSink {
            model: ContextTree::new(0).expect("depth 0"),
            enc: ArithmeticEncoder::new(),
        }
    }

    #[inline]
    fn put(&mut self, bit: u8) {
        let p0 = self.model.predict0(0);
        self.enc.encode(quantize_p0(p0), bit);
        self.model.update(0, bit);
    }

    fn put_uint(&mut self, value: u32, bits: u32) {
        for i in (0..bits).rev() {
            self.put(((value >> i) & 1) as u8);
        }
    }
}

struct TokenBitSource<'a> {
    model: ContextTree,
    dec: ArithmeticDecoder<'a>,
}

impl<'a> TokenBitSource<'a> {
    fn new(payload: &'a [u8]) -> Result<Self> {
        Ok(TokenBitSource {
            model: ContextTree::new(0).expect("depth 0"),
            dec: ArithmeticDecoder::new(payload)?,
        })
    }

    #[inline]
    fn get(&mut self) -> Result<u8> {
        let p0 = self.model.predict0(0);
        let bit = self.dec.decode(quantize_p0(p0))?;
        self.model.update(0, bit);
        Ok(bit)
    }

    fn get_uint(&mut self, bits: u32) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..bits {
            v = (v << 1) | u32::from(self.get()?);
        }
        Ok(v)
    }
}

pub fn lz_encode(input: &[u8], memory: &[u8], window_size: usize) -> Result<CodedStream> {
    check_window(window_size)?;
    // A memory longer than the window contributes only its most recent bytes.
    let dict = &memory[memory.len().saturating_sub(window_size)..];
    let tokens = parse_tokens(input, dict, window_size);

    let mut sink = TokenBitSink::new();
    for token in &tokens {
        match *token {
            LzToken::Literal(byte) => {
                sink.put(0);
                sink.put_uint(u32::from(byte), 8);
            }
            LzToken::Match { offset, len } => {
                debug_assert!((1..=window_size as u32).contains(&offset));
                debug_assert!((MIN_MATCH as u32..=MAX_MATCH as u32).contains(&len));
                sink.put(1);
                sink.put_uint(offset - 1, 16);
                sink.put_uint(len - MIN_MATCH as u32, 8);
            }
        }
    }
    let payload = if input.is_empty() {
        Vec::new()
    } else {
        sink.enc.finish()
    };
    Ok(CodedStream {
        algorithm: Algorithm::Lz,
        param: (window_size / 256) as u16,
        original_len: input.len() as u64,
        memory_fingerprint: memory_fingerprint(memory),
        payload,
    })
}

pub fn lz_decode(stream: &CodedStream, memory: &[u8]) -> Result<Vec<u8>> {
    if stream.algorithm != Algorithm::Lz {
        return Err(Error::format("stream is not LZ-coded"));
    }
    stream.check_memory(memory)?;
    let window_size = stream.param as usize * 256;
    check_window(window_size).map_err(|_| {
        Error::format(format!("header carries invalid window parameter {}", stream.param))
    })?;
    let dict = &memory[memory.len().saturating_sub(window_size)..];
    let target = stream.original_len as usize;
    if target == 0 {
        return Ok(Vec::new());
    }

    let mut src = TokenBitSource::new(&stream.payload)?;
    // Reconstruction buffer holds dictionary ++ decoded output so matches can
    // reach back into the preset dictionary.
    let mut buf = Vec::with_capacity(dict.len() + target);
    buf.extend_from_slice(dict);
    while buf.len() - dict.len() < target {
        if src.get()? == 0 {
            buf.push(src.get_uint(8)? as u8);
        } else {
            let offset = src.get_uint(16)? as usize + 1;
            let len = src.get_uint(8)? as usize + MIN_MATCH;
            if offset > buf.len() {
                return Err(Error::corrupt(format!(
                    "match offset {offset} exceeds buffer length {}",
                    buf.len()
                )));
            }
            if buf.len() - dict.len() + len > target {
                return Err(Error::corrupt("match overruns declared length"));
            }
            let start = buf.len() - offset;
            for i in 0..len {
                let byte = buf[start + i];
                buf.push(byte);
            }
        }
    }
    Ok(buf.split_off(dict.len()))
}
