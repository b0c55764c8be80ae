//! Counter-based deterministic randomness.
//!
//! Shared randomness between the two simulated players is realized as a keyed
//! generator: both players derive identical values from `(seed, draw, counter)`
//! without materializing tables. The mixer is splitmix64, which is a bijection
//! on 64-bit words with good avalanche behavior, so distinct keys give
//! independent-looking streams and the whole simulation is reproducible from
//! the seed alone.

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine key parts into a single word. Order matters.
#[inline]
pub fn key2(a: u64, b: u64) -> u64 {
    mix64(a ^ mix64(b))
}

#[inline]
pub fn key3(a: u64, b: u64, c: u64) -> u64 {
    mix64(a ^ mix64(b ^ mix64(c)))
}

/// Stateful stream over the splitmix64 sequence starting at `key`.
#[derive(Clone, Debug)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { state: key }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..n` via 128-bit multiply reduction (bias < 2^-64).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform f64 in [0,1).
    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

/// Stateless uniform hash of `item` into `0..n` under `key`; this is the
/// lazily evaluated shared hash function h used by the hashing strategies.
#[inline]
pub fn hash_below(key: u64, item: u64, n: u64) -> u64 {
    ((key2(key, item) as u128 * n as u128) >> 64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = Stream::new(42);
        let mut b = Stream::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut s = Stream::new(7);
        let mut counts = [0u32; 5];
        for _ in 0..50_000 {
            counts[s.below(5) as usize] += 1;
        }
        for &c in &counts {
            assert!((8_000..12_000).contains(&c), "count {c} out of range");
        }
    }

    #[test]
    fn hash_below_is_deterministic_per_key() {
        assert_eq!(hash_below(1, 10, 7), hash_below(1, 10, 7));
        let mut hits = std::collections::HashSet::new();
        for item in 0..64 {
            hits.insert(hash_below(9, item, 4));
        }
        assert_eq!(hits.len(), 4);
    }
}
