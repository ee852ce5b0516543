//! Reproducible random streams.
//!
//! Every Monte Carlo path gets its own keyed streams, derived from the master seed
//! and the path index alone, so results never depend on how paths are scheduled.
//! Sequential draws (claim sizes, shot times, Poisson gaps) come from ChaCha8
//! streams; the Poisson random measure used for thinning is addressed by lattice
//! cell through a counter-based SplitMix generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LANE_CLAIMS: u64 = 1;
const LANE_AUX: u64 = 2;

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives per-path random streams from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreamPlan {
    master_seed: u64,
}

impl RngStreamPlan {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// The streams of path `path_index`. Injective in the index.
    pub fn stream_for(&self, path_index: u64) -> PathStream {
        let m = self.master_seed;
        let words = [
            mix64(m ^ 0x243f_6a88_85a3_08d3),
            mix64(m ^ 0x1319_8a2e_0370_7344),
            mix64(path_index ^ 0xa409_3822_299f_31d0),
            mix64(path_index ^ 0x082e_fa98_ec4e_6c89),
        ];
        let mut key = [0u8; 32];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut claims = ChaCha8Rng::from_seed(key);
        claims.set_stream(LANE_CLAIMS);
        let mut aux = ChaCha8Rng::from_seed(key);
        aux.set_stream(LANE_AUX);
        PathStream { lattice_key: [words[0] ^ mix64(words[1]), words[2] ^ mix64(words[3])], claims, aux }
    }
}

/// The random streams owned by one simulated path.
#[derive(Debug, Clone)]
pub struct PathStream {
    lattice_key: [u64; 2],
    claims: ChaCha8Rng,
    aux: ChaCha8Rng,
}

impl PathStream {
    /// Shorthand for path 0 of the plan seeded with `seed`.
    pub fn from_seed(seed: u64) -> Self {
        RngStreamPlan::new(seed).stream_for(0)
    }

    /// Stream for claim sizes.
    pub fn claims(&mut self) -> &mut ChaCha8Rng {
        &mut self.claims
    }

    /// Stream for sequential arrival randomness (Poisson gaps, outer shot times).
    pub fn aux(&mut self) -> &mut ChaCha8Rng {
        &mut self.aux
    }

    pub(crate) fn cell_rng(&self, cell: u64, band: u64) -> CellRng {
        let s = mix64(self.lattice_key[0] ^ mix64(self.lattice_key[1] ^ mix64(cell ^ mix64(band))));
        CellRng { state: s }
    }
}

/// Counter-based SplitMix64 generator addressed by a lattice cell.
pub(crate) struct CellRng {
    state: u64,
}

impl CellRng {
    #[inline]
    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    /// Uniform on [0, 1).
    #[inline]
    pub(crate) fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
