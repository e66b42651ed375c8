//! Counter-based pseudo-random draws.
//!
//! Every draw is a pure function of `(seed, entity, draw)`:
//!
//! ```text
//! mix(seed, entity, draw) = sm(sm(sm(seed) ^ entity) ^ draw)
//! unit(seed, entity, draw) = (mix >> 11) / 2^53          in [0, 1)
//! ```
//!
//! where `sm` is the SplitMix64 finalizer
//!
//! ```text
//! z = x + 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! sm(x) = z ^ (z >> 31)
//! ```
//!
//! with wrapping 64-bit arithmetic. Entities carry a domain tag in their top
//! byte so different kinds of draw never share a stream.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, entity: u64, draw: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ entity) ^ draw)
}

pub fn unit(seed: u64, entity: u64, draw: u64) -> f64 {
    (mix(seed, entity, draw) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Domain tags for the entity index.
pub mod domain {
    pub const INTERESTS: u64 = 1;
    pub const TAGS: u64 = 2;
    pub const LIKES: u64 = 3;
    pub const CASE: u64 = 4;
}

pub fn entity(domain: u64, index: u64) -> u64 {
    (domain << 56) | (index & ((1 << 56) - 1))
}

/// Sequential draws for one entity.
#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    entity: u64,
    next: u64,
}

impl Stream {
    pub fn new(seed: u64, domain: u64, index: u64) -> Self {
        Stream {
            seed,
            entity: entity(domain, index),
            next: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.seed, self.entity, self.next);
        self.next += 1;
        v
    }

    pub fn next_unit(&mut self) -> f64 {
        let v = unit(self.seed, self.entity, self.next);
        self.next += 1;
        v
    }

    /// Uniform-ish integer in `0..n` (modulo reduction).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// `k` distinct elements of `pool` via a partial Fisher-Yates shuffle:
    /// for `i` in `0..k`, swap position `i` with `i + below(len - i)`.
    pub fn choose<T: Clone>(&mut self, pool: &[T], k: usize) -> Vec<T> {
        let mut v = pool.to_vec();
        let k = k.min(v.len());
        for i in 0..k {
            let j = i + self.below(v.len() - i);
            v.swap(i, j);
        }
        v.truncate(k);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference SplitMix64 generator seeded with 0
        // are sm(0), sm(γ), sm(2γ), ... with γ the golden-ratio increment
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn draws_are_pure_and_in_range() {
        assert_eq!(mix(42, 7, 3), mix(42, 7, 3));
        assert_ne!(mix(42, 7, 3), mix(42, 7, 4));
        assert_ne!(mix(42, entity(1, 0), 0), mix(42, entity(2, 0), 0));
        let mut s = Stream::new(9, domain::LIKES, 1);
        for _ in 0..1000 {
            let u = s.next_unit();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn choose_is_distinct() {
        let pool: Vec<u32> = (0..6).collect();
        let mut s = Stream::new(1, domain::TAGS, 0);
        for k in 0..=6 {
            let mut got = s.choose(&pool, k);
            assert_eq!(got.len(), k);
            got.sort();
            got.dedup();
            assert_eq!(got.len(), k);
        }
    }
}
