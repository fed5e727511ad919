//! Measurement of the memorization gain g(n, m): the ratio of the expected
//! memoryless code length to the expected memory-assisted code length, for
//! both codecs, over synthetic Markov sources or user corpora.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ctw::{ctw_encode_opts, CtwOptions};
use crate::error::{Error, Result};
use crate::lzdict::lz_encode;
use crate::stream::Algorithm;

/// Binary Markov source of a given order (in bits). `p_one[s]` is the
/// probability that the next bit is 1 given the k-bit state `s` (most recent
/// bit in the lowest position). Generation is deterministic given a seed.
#[derive(Debug, Clone)]
pub struct MarkovSource {
    order: usize,
    p_one: Vec<f64>,
}

impl MarkovSource {
    pub fn new(order: usize, p_one: Vec<f64>) -> Result<Self> {
        if order > 24 {
            return Err(Error::usage("source order must be at most 24 bits"));
        }
        if p_one.len() != 1 << order {
            return Err(Error::usage(format!(
                "transition table must have 2^{order} entries, got {}",
                p_one.len()
            )));
        }
        if p_one.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::usage("transition probabilities must lie in [0,1]"));
        }
        Ok(MarkovSource { order, p_one })
    }

    /// Memoryless source with P(bit = 1) = p.
    pub fn iid(p: f64) -> Result<Self> {
        Self::new(0, vec![p])
    }

    /// Order-1 source parameterized by P(1|0) and P(1|1).
    pub fn order1(p_one_given_0: f64, p_one_given_1: f64) -> Result<Self> {
        Self::new(1, vec![p_one_given_0, p_one_given_1])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Draw `n` bytes (8n bits), starting from the all-zero state.
    pub fn generate(&self, rng: &mut ChaCha12Rng, n: usize) -> Vec<u8> {
        let mask = (1u32 << self.order).wrapping_sub(1);
        let mut state = 0u32;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut byte = 0u8;
            for _ in 0..8 {
                let bit = u8::from(rng.gen::<f64>() < self.p_one[state as usize]);
                byte = (byte << 1) | bit;
                state = ((state << 1) | u32::from(bit)) & mask;
            }
            out.push(byte);
        }
        out
    }

    pub fn generate_seeded(&self, seed: u64, n: usize) -> Vec<u8> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.generate(&mut rng, n)
    }

    /// Entropy rate in bits per bit, from the stationary distribution of the
    /// 2^order state chain (computed by power iteration).
    pub fn entropy_rate(&self) -> f64 {
        let states = 1usize << self.order;
        let mask = states - 1;
        let mut pi = vec![1.0 / states as f64; states];
        for _ in 0..20_000 {
            let mut next = vec![0.0; states];
            for (s, &mass) in pi.iter().enumerate() {
                let p1 = self.p_one[s];
                next[(s << 1) & mask] += mass * (1.0 - p1);
                next[((s << 1) | 1) & mask] += mass * p1;
            }
            pi = next;
        }
        let h = |p: f64| {
            if p <= 0.0 || p >= 1.0 {
                0.0
            } else {
                -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
            }
        };
        pi.iter()
            .zip(&self.p_one)
            .map(|(&mass, &p1)| mass * h(p1))
            .sum()
    }
}

/// What to compress: a synthetic source or a fixed corpus. In corpus mode the
/// memory is the chronological prefix and targets are consecutive slices of
/// the remainder.
pub enum GainInput<'a> {
    Source(&'a MarkovSource),
    Corpus(&'a [u8]),
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub codec: Algorithm,
    /// CTW context depth in bits.
    pub depth: usize,
    /// LZ window in bytes.
    pub window_size: usize,
    /// Target length in bytes.
    pub n: usize,
    /// Memory length in bytes.
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            codec: Algorithm::Ctw,
            depth: crate::ctw::DEFAULT_DEPTH,
            window_size: crate::lzdict::DEFAULT_WINDOW,
            n: 1024,
            m: 0,
            trials: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    /// Mean coded payload length in bytes without memory (Ucomp).
    pub mean_len_no_memory: f64,
    /// Mean coded payload length in bytes with memory (UcompM).
    pub mean_len_with_memory: f64,
    /// g(n, m) = mean_len_no_memory / mean_len_with_memory.
    pub g: f64,
    pub stderr: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "algorithm,n,m,trials,mean_len_ucomp,mean_len_ucompm,g,stderr,seed";

impl GainReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.6},{:.6},{}",
            self.algorithm,
            self.n,
            self.m,
            self.trials,
            self.mean_len_no_memory,
            self.mean_len_with_memory,
            self.g,
            self.stderr,
            self.seed
        )
    }
}

// Stable per-trial stream seeds: one stream for memory, one for the target,
// so a shorter memory (or target) is a prefix of a longer one drawn from the
// same trial.
fn trial_seed(seed: u64, trial: usize, stream: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(trial as u64)
        .wrapping_mul(0x2545_f491_4f6c_dd1d)
        .wrapping_add(stream)
}

fn coded_payload_len(cfg: &BenchConfig, target: &[u8], memory: &[u8]) -> Result<usize> {
    let stream = match cfg.codec {
        Algorithm::Ctw => ctw_encode_opts(
            target,
            memory,
            CtwOptions { depth: cfg.depth, adapt: true },
        )?,
        Algorithm::Lz => lz_encode(target, memory, cfg.window_size)?,
    };
    Ok(stream.payload.len())
}

fn trial_data<'a>(
    input: &'a GainInput<'a>,
    cfg: &BenchConfig,
    trial: usize,
) -> Result<(Vec<u8>, Vec<u8>)> {
    match input {
        GainInput::Source(source) => {
            let memory = source.generate_seeded(trial_seed(cfg.seed, trial, 0), cfg.m);
            let target = source.generate_seeded(trial_seed(cfg.seed, trial, 1), cfg.n);
            Ok((memory, target))
        }
        GainInput::Corpus(corpus) => {
            let need = cfg.m + cfg.n * cfg.trials;
            if corpus.len() < need {
                return Err(Error::InsufficientData(format!(
                    "corpus has {} bytes but m + n * trials = {need}",
                    corpus.len()
                )));
            }
            let memory = corpus[..cfg.m].to_vec();
            let start = cfg.m + trial * cfg.n;
            let target = corpus[start..start + cfg.n].to_vec();
            Ok((memory, target))
        }
    }
}

/// Run `trials` paired encodings (same target with and without memory) and
/// aggregate the gain as a ratio of mean payload lengths.
pub fn measure_gain(input: &GainInput, cfg: &BenchConfig) -> Result<GainReport> {
    if cfg.trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let pairs: Vec<(usize, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(usize, usize)> {
            let (memory, target) = trial_data(input, cfg, trial)?;
            let len_no = coded_payload_len(cfg, &target, &[])?;
            // With m = 0, UcompM degenerates to Ucomp exactly.
            let len_with = if cfg.m == 0 {
                len_no
            } else {
                coded_payload_len(cfg, &target, &memory)?
            };
            Ok((len_no, len_with))
        })
        .collect::<Result<Vec<_>>>()?;

    let t = cfg.trials as f64;
    let mean_no = pairs.iter().map(|p| p.0 as f64).sum::<f64>() / t;
    let mean_with = pairs.iter().map(|p| p.1 as f64).sum::<f64>() / t;
    let g = mean_no / mean_with;
    // Delta-method standard error for the ratio of paired means.
    let stderr = if cfg.trials > 1 && mean_with > 0.0 {
        let var_no = pairs
            .iter()
            .map(|p| (p.0 as f64 - mean_no).powi(2))
            .sum::<f64>()
            / (t - 1.0);
        let var_with = pairs
            .iter()
            .map(|p| (p.1 as f64 - mean_with).powi(2))
            .sum::<f64>()
            / (t - 1.0);
        let cov = pairs
            .iter()
            .map(|p| (p.0 as f64 - mean_no) * (p.1 as f64 - mean_with))
            .sum::<f64>()
            / (t - 1.0);
        let rel_var = var_no / (mean_no * mean_no) + var_with / (mean_with * mean_with)
            - 2.0 * cov / (mean_no * mean_with);
        g * (rel_var.max(0.0) / t).sqrt()
    } else {
        0.0
    };
    Ok(GainReport {
        algorithm: match cfg.codec {
            Algorithm::Ctw => "ctw".into(),
            Algorithm::Lz => "lz".into(),
        },
        n: cfg.n,
        m: cfg.m,
        trials: cfg.trials,
        mean_len_no_memory: mean_no,
        mean_len_with_memory: mean_with,
        g,
        stderr,
        seed: cfg.seed,
    })
}

/// Sweep measure_gain over a grid of target and memory lengths.
pub fn gain_curve(
    input: &GainInput,
    base: &BenchConfig,
    n_grid: &[usize],
    m_grid: &[usize],
) -> Result<Vec<GainReport>> {
    let mut reports = Vec::new();
    for &n in n_grid {
        for &m in m_grid {
            let cfg = BenchConfig { n, m, ..*base };
            reports.push(measure_gain(input, &cfg)?);
        }
    }
    Ok(reports)
}

pub fn reports_to_csv(reports: &[GainReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
