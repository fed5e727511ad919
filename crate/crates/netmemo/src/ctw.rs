//! Binary Context Tree Weighting with memory priming.
//!
//! The tree holds Krichevsky-Trofimov counts per context suffix. Priming
//! feeds a previously seen byte sequence through the tree (counts only, with
//! the estimated and weighted log-probabilities rebuilt in one pass at the
//! end), after which encoding and decoding keep the tree synchronized by
//! construction.
//!
//! Bytes are processed MSB-first and the context is the previous `depth` raw
//! bits, crossing byte boundaries; the stream starts from an all-zero
//! context.

use crate::bits::bytes_to_bits;
use crate::coder::{quantize_p0, ArithmeticDecoder, ArithmeticEncoder, P_FLOOR};
use crate::error::{Error, Result};
use crate::stream::{memory_fingerprint, Algorithm, CodedStream};

const NIL: u32 = u32::MAX;
const LN_HALF: f64 = -std::f64::consts::LN_2;

/// Maximum supported context depth in bits (context is kept in a u64).
pub const MAX_DEPTH: usize = 63;

/// Default context depth: two bytes of context.
pub const DEFAULT_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy)]
struct Node {
    child: [u32; 2],
    count: [u32; 2],
    log_pe: f64,
    log_pw: f64,
}

impl Node {
    fn new() -> Self {
        Node {
            child: [NIL, NIL],
            count: [0, 0],
            log_pe: 0.0,
            log_pw: 0.0,
        }
    }

    #[inline]
    fn is_leaf(&self) -> bool {
        self.child[0] == NIL && self.child[1] == NIL
    }
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// log KT sequence probability of `a` zeros and `b` ones:
/// Pe(a,b) = Gamma(a+1/2) Gamma(b+1/2) / (Gamma(1/2)^2 (a+b)!).
fn kt_log_prob(a: u32, b: u32) -> f64 {
    const LGAMMA_HALF: f64 = 0.5723649429247001; // ln Gamma(1/2)
    if a == 0 && b == 0 {
        return 0.0;
    }
    libm::lgamma(f64::from(a) + 0.5) + libm::lgamma(f64::from(b) + 0.5)
        - 2.0 * LGAMMA_HALF
        - libm::lgamma(f64::from(a) + f64::from(b) + 1.0)
}

/// KT predictive probability of a zero given counts (a zeros, b ones).
#[inline]
fn kt_p0(a: u32, b: u32) -> f64 {
    (f64::from(a) + 0.5) / (f64::from(a) + f64::from(b) + 1.0)
}

/// Binary CTW tree. Nodes are materialized lazily on first visit; an absent
/// node behaves as a zero-count node.
#[derive(Debug, Clone)]
pub struct ContextTree {
    depth: usize,
    nodes: Vec<Node>,
}

impl ContextTree {
    pub fn new(depth: usize) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::usage(format!(
                "context depth {depth} exceeds maximum {MAX_DEPTH}"
            )));
        }
        Ok(ContextTree {
            depth,
            nodes: vec![Node::new()],
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Counts at the root, i.e. totals over everything the tree has seen.
    pub fn root_counts(&self) -> (u32, u32) {
        (self.nodes[0].count[0], self.nodes[0].count[1])
    }

    /// Weighted log-probability of the entire observed sequence (root pw).
    pub fn log_prob(&self) -> f64 {
        self.nodes[0].log_pw
    }

    /// Walk to the node for `context`, materializing missing nodes, and fill
    /// `path` with the node indices root-first. The context selector for
    /// level k is bit k of `hist` (most recent bit is bit 0).
    #[inline]
    fn descend_alloc(&mut self, hist: u64, path: &mut [u32]) {
        let mut idx = 0u32;
        path[0] = 0;
        for k in 0..self.depth {
            let branch = ((hist >> k) & 1) as usize;
            let next = self.nodes[idx as usize].child[branch];
            let next = if next == NIL {
                let new_idx = self.nodes.len() as u32;
                self.nodes.push(Node::new());
                self.nodes[idx as usize].child[branch] = new_idx;
                new_idx
            } else {
                next
            };
            path[k + 1] = next;
            idx = next;
        }
    }

    /// Feed one symbol occurrence, updating counts and log-probabilities
    /// along the context path (leaf to root).
    pub fn update(&mut self, hist: u64, bit: u8) {
        let mut path = [0u32; MAX_DEPTH + 1];
        self.descend_alloc(hist, &mut path[..=self.depth]);
        let bit = bit as usize;
        for k in (0..=self.depth).rev() {
            let idx = path[k] as usize;
            let node = &mut self.nodes[idx];
            let total = node.count[0] + node.count[1];
            node.log_pe +=
                ((f64::from(node.count[bit]) + 0.5) / (f64::from(total) + 1.0)).ln();
            node.count[bit] += 1;
            if k == self.depth {
                self.nodes[idx].log_pw = self.nodes[idx].log_pe;
            } else {
                let c0 = self.child_log_pw(idx, 0);
                let c1 = self.child_log_pw(idx, 1);
                let node = &mut self.nodes[idx];
                node.log_pw = log_add_exp(LN_HALF + node.log_pe, LN_HALF + c0 + c1);
            }
        }
    }

    #[inline]
    fn child_log_pw(&self, idx: usize, branch: usize) -> f64 {
        match self.nodes[idx].child[branch] {
            NIL => 0.0,
            c => self.nodes[c as usize].log_pw,
        }
    }

    /// CTW mixture probability that the next bit is zero, given the last
    /// `depth` bits in `hist`. Clamped away from 0 and 1 by the coder floor.
    pub fn predict0(&self, hist: u64) -> f64 {
        // Collect the existing portion of the context path.
        let mut path = [0u32; MAX_DEPTH + 1];
        let mut len = 1usize;
        let mut idx = 0u32;
        for k in 0..self.depth {
            let branch = ((hist >> k) & 1) as usize;
            let next = self.nodes[idx as usize].child[branch];
            if next == NIL {
                break;
            }
            path[len] = next;
            len += 1;
            idx = next;
        }
        // Everything below the deepest existing node is empty and predicts
        // 1/2 at every level.
        let mut p = 0.5;
        for k in (0..len).rev() {
            let node = &self.nodes[path[k] as usize];
            let kt = kt_p0(node.count[0], node.count[1]);
            if k == self.depth {
                p = kt;
            } else {
                // pw = 1/2 pe + 1/2 pw0 pw1, so the estimator branch carries
                // weight alpha = pe / (2 pw) and the children carry 1-alpha.
                let alpha = 0.5 * (node.log_pe - node.log_pw).exp();
                p = alpha * kt + (1.0 - alpha) * p;
            }
        }
        p.clamp(P_FLOOR, 1.0 - P_FLOOR)
    }

    /// Train the tree on a previously seen sequence. Counts are updated for
    /// every bit in stream order; no code bits are produced. The pass is
    /// count-only, with log-probabilities rebuilt once at the end.
    pub fn prime(&mut self, memory: &[u8]) {
        if memory.is_empty() {
            return;
        }
        let mut path = [0u32; MAX_DEPTH + 1];
        let mut hist = 0u64;
        for bit in bytes_to_bits(memory) {
            self.descend_alloc(hist, &mut path[..=self.depth]);
            for &idx in &path[..=self.depth] {
                self.nodes[idx as usize].count[bit as usize] += 1;
            }
            hist = (hist << 1) | u64::from(bit);
        }
        self.rebuild_log_probs();
    }

    /// Recompute log_pe from counts and log_pw bottom-up. Children always
    /// have larger indices than their parent, so a reverse scan suffices.
    fn rebuild_log_probs(&mut self) {
        for i in (0..self.nodes.len()).rev() {
            let node = self.nodes[i];
            let log_pe = kt_log_prob(node.count[0], node.count[1]);
            let log_pw = if node.is_leaf() {
                log_pe
            } else {
                let c0 = self.child_log_pw(i, 0);
                let c1 = self.child_log_pw(i, 1);
                log_add_exp(LN_HALF + log_pe, LN_HALF + c0 + c1)
            };
            self.nodes[i].log_pe = log_pe;
            self.nodes[i].log_pw = log_pw;
        }
    }

    /// Check the structural invariants: non-positive log-probabilities and
    /// the weighting recursion pw = 1/2 pe + 1/2 pw0 pw1 at internal nodes
    /// (pw = pe at leaves), in log domain within `tol`.
    pub fn validate(&self, tol: f64) -> std::result::Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.log_pe > 1e-12 || node.log_pw > 1e-12 {
                return Err(format!("node {i}: positive log-probability"));
            }
            let expect = if node.is_leaf() {
                node.log_pe
            } else {
                let c0 = self.child_log_pw(i, 0);
                let c1 = self.child_log_pw(i, 1);
                log_add_exp(LN_HALF + node.log_pe, LN_HALF + c0 + c1)
            };
            if (node.log_pw - expect).abs() > tol {
                return Err(format!(
                    "node {i}: pw recursion violated ({} vs {})",
                    node.log_pw, expect
                ));
            }
        }
        Ok(())
    }
}

/// Options for the CTW codec. `adapt` controls whether the tree keeps
/// learning from the coded sequence itself (the default) or stays frozen at
/// the primed model. Encoder and decoder must agree on both fields.
#[derive(Debug, Clone, Copy)]
pub struct CtwOptions {
    pub depth: usize,
    pub adapt: bool,
}

impl Default for CtwOptions {
    fn default() -> Self {
        CtwOptions {
            depth: DEFAULT_DEPTH,
            adapt: true,
        }
    }
}

pub fn ctw_encode(input: &[u8], memory: &[u8], depth: usize) -> Result<CodedStream> {
    ctw_encode_opts(input, memory, CtwOptions { depth, adapt: true })
}

pub fn ctw_encode_opts(input: &[u8], memory: &[u8], opts: CtwOptions) -> Result<CodedStream> {
    let mut tree = ContextTree::new(opts.depth)?;
    tree.prime(memory);
    ctw_encode_with_tree(input, &mut tree, memory_fingerprint(memory), opts.adapt)
}

/// Encode against an already primed tree (the tree is consumed by adaptive
/// updates; clone it if it is to be reused). The caller supplies the
/// fingerprint of the memory the tree was primed with.
pub fn ctw_encode_with_tree(
    input: &[u8],
    tree: &mut ContextTree,
    fingerprint: u64,
    adapt: bool,
) -> Result<CodedStream> {
    let mut enc = ArithmeticEncoder::new();
    let mut hist = 0u64;
    for bit in bytes_to_bits(input) {
        let p0 = tree.predict0(hist);
        enc.encode(quantize_p0(p0), bit);
        if adapt {
            tree.update(hist, bit);
        }
        hist = (hist << 1) | u64::from(bit);
    }
    let payload = if input.is_empty() { Vec::new() } else { enc.finish() };
    Ok(CodedStream {
        algorithm: Algorithm::Ctw,
        param: tree.depth() as u16,
        original_len: input.len() as u64,
        memory_fingerprint: fingerprint,
        payload,
    })
}

pub fn ctw_decode(stream: &CodedStream, memory: &[u8]) -> Result<Vec<u8>> {
    ctw_decode_opts(stream, memory, true)
}

pub fn ctw_decode_opts(stream: &CodedStream, memory: &[u8], adapt: bool) -> Result<Vec<u8>> {
    stream.check_memory(memory)?;
    let mut tree = ContextTree::new(stream.param as usize)?;
    tree.prime(memory);
    ctw_decode_with_tree(stream, &mut tree, adapt)
}

/// Decode against an already primed tree. The caller is responsible for the
/// tree being primed with the memory named by the stream's fingerprint; the
/// tree is consumed by adaptive updates, so clone it if it is to be reused.
pub fn ctw_decode_with_tree(
    stream: &CodedStream,
    tree: &mut ContextTree,
    adapt: bool,
) -> Result<Vec<u8>> {
    if stream.algorithm != Algorithm::Ctw {
        return Err(Error::format("stream is not CTW-coded"));
    }
    if tree.depth() != stream.param as usize {
        return Err(Error::format(format!(
            "stream coded at depth {} but tree has depth {}",
            stream.param,
            tree.depth()
        )));
    }
    if stream.original_len == 0 {
        return Ok(Vec::new());
    }
    let n_bits = stream
        .original_len
        .checked_mul(8)
        .ok_or_else(|| Error::format("original length overflows"))?;
    let mut dec = ArithmeticDecoder::new(&stream.payload)?;
    let mut hist = 0u64;
    let mut bits = Vec::with_capacity(n_bits as usize);
    for _ in 0..n_bits {
        let p0 = tree.predict0(hist);
        let bit = dec.decode(quantize_p0(p0))?;
        if adapt {
            tree.update(hist, bit);
        }
        hist = (hist << 1) | u64::from(bit);
        bits.push(bit);
    }
    Ok(crate::bits::bits_to_bytes(&bits))
}
