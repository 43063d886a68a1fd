//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a 64-bit
//! value obtained by mixing a parent seed with a domain tag and up to two
//! indices. The mixing function is the splitmix64 finalizer; its constants
//! are fixed so that runs stay reproducible across releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags for the independent sub-streams.
pub mod stream {
    pub const ASSIGNMENT: u64 = 0x6173_7369_676e_0001;
    pub const GRAPH: u64 = 0x6772_6170_6800_0002;
    pub const ATTRIBUTES: u64 = 0x6174_7472_7300_0003;
    pub const WEIGHTS: u64 = 0x7765_6967_6874_0004;
    pub const KMEANS: u64 = 0x6b6d_6561_6e73_0005;
    pub const DATASET: u64 = 0x6461_7461_0000_0006;
    pub const DETECT: u64 = 0x6465_7465_6374_0007;
    pub const REPLICATION: u64 = 0x7265_706c_0000_0008;
    pub const LANCZOS: u64 = 0x6c61_6e63_7a6f_0009;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed`, a domain tag and an index.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    let a = mix64(seed.wrapping_add(GOLDEN));
    let b = mix64(a ^ tag.wrapping_mul(GOLDEN));
    mix64(b ^ index.wrapping_add(1).wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Seed of replication `rep` at sweep point `point`.
pub fn replication_seed(master: u64, point: u64, rep: u64) -> u64 {
    derive(derive(master, stream::REPLICATION, point), stream::REPLICATION, rep)
}

pub fn stream_rng(seed: u64, tag: u64) -> Rng {
    Rng::seed_from_u64(derive(seed, tag, 0))
}

pub fn indexed_rng(seed: u64, tag: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive(seed, tag, index))
}
