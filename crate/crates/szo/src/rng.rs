//! Deterministic seeded random streams.
//!
//! `RngStream` is a SplitMix64 counter generator: the state advances by a
//! fixed odd increment and each output is the SplitMix64 avalanche of the
//! counter. Identical seeds reproduce identical sequences bit-exactly on any
//! platform. Substreams are derived by mixing the substream index into the
//! seed through the same avalanche (the SplittableRandom construction), so
//! `derive(stream, index)` is a pure function of `(seed, index)`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer: a 64-bit avalanche hash.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, state: seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Deterministic substream for `index`; independent of this stream's
    /// current position.
    pub fn derive(&self, index: u64) -> RngStream {
        RngStream::new(mix64(self.seed ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Substream keyed by a string tag (FNV-1a over the tag bytes, then the
    /// usual index derivation). Used to key streams by method identifiers so
    /// stream assignment does not depend on list order.
    pub fn derive_tagged(&self, tag: &str) -> RngStream {
        let mut h = FNV_OFFSET;
        for b in tag.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        self.derive(h)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on [0, 1), 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on (0, 1]; never returns zero.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on [lo, hi).
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via the Box-Muller transform (cosine branch). Consumes
    /// exactly two uniforms per draw.
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
