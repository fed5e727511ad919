//! Memory-assisted compression and network-wide gain experiments.
//!
//! The crate has two halves. The compression half implements two
//! dictionary-style universal codecs — context tree weighting over an
//! arithmetic coder, and LZ77 with a preset dictionary — that can be primed
//! with a side memory sequence shared by encoder and decoder, plus the
//! benchmarking harness that measures the single-link memorization gain
//! g(n, m). The network half generates random power-law graphs, extracts
//! their high-degree cores, and simulates memory-aware routing to measure
//! the network-wide gain G(g).

pub mod bits;
pub mod coder;
pub mod ctw;
pub mod error;
pub mod flowsim;
pub mod gainbench;
pub mod graph;
pub mod lzdict;
pub mod rplg;
pub mod stream;

pub use ctw::{ctw_decode, ctw_encode, ctw_encode_opts, ContextTree, CtwOptions};
pub use error::{Error, Result};
pub use flowsim::{
    effective_distance_oracle, fppc, modified_dijkstra, network_gain, plain_routing_gain,
    single_path_gain, total_flow, Gain, MemoryDeployment, NetworkGain,
};
pub use gainbench::{measure_gain, BenchConfig, GainInput, GainReport, MarkovSource};
pub use graph::Graph;
pub use lzdict::{lz_decode, lz_encode};
pub use rplg::{sample_graph, solve_core_threshold, theorem_core, topk_core, RplgGraph};
pub use stream::{Algorithm, CodedStream};
