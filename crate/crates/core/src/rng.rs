use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::BitString;

/// Seeded ChaCha20 stream addressed by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Rng { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream for sub-task `index`, independent of this stream's position.
    pub fn derive(&self, index: u64) -> Rng {
        Rng::new(self.seed, splitmix(self.stream_id ^ splitmix(index.wrapping_add(1))))
    }

    pub fn bit(&mut self) -> bool {
        self.inner.next_u32() & 1 == 1
    }

    pub fn bits(&mut self, len: usize) -> BitString {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        self.inner.fill_bytes(&mut bytes);
        BitString::from_bytes(&bytes, len).expect("sized buffer")
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.inner.gen_range(0..n)
    }

    /// Uniform in `0..n` for 128-bit bounds.
    pub fn below_u128(&mut self, n: u128) -> u128 {
        self.inner.gen_range(0..n)
    }

    /// Uniform index in `1..=n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(1..=n)
    }

    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
