//! Deterministic random numbers.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, with Box-Muller
//! for Gaussians and Fisher-Yates for shuffles. The algorithm is fixed so a
//! seed produces the same stream on every run. Substreams are derived from
//! the root seed and a purpose tag, so e.g. data shuffling and noise
//! injection draw from independent streams and ablations differ only where
//! intended.

use crate::{Array, NumericsError, Result};

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    state: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for s in state.iter_mut() {
            *s = splitmix64(&mut sm);
        }
        if state.iter().all(|&s| s == 0) {
            state[0] = 0x9E37_79B9_7F4A_7C15;
        }
        Rng { seed, state }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream derived from the root seed and a purpose tag.
    /// Depends only on (seed, tag), never on how much of this stream has
    /// been consumed.
    pub fn substream(&self, tag: &str) -> Rng {
        let mut mix = self.seed ^ fnv1a64(tag.as_bytes());
        Rng::new(splitmix64(&mut mix))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        // xoshiro256++
        let result = self.state[0]
            .wrapping_add(self.state[3])
            .rotate_left(23)
            .wrapping_add(self.state[0]);
        let t = self.state[1] << 17;
        self.state[2] ^= self.state[0];
        self.state[3] ^= self.state[1];
        self.state[1] ^= self.state[2];
        self.state[0] ^= self.state[3];
        self.state[2] ^= t;
        self.state[3] = self.state[3].rotate_left(45);
        result
    }

    /// Uniform f64 in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal pair via Box-Muller.
    #[inline]
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform(); // (0, 1]; avoids ln(0)
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    pub fn gaussian(&mut self) -> f64 {
        self.gaussian_pair().0
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.below(i + 1);
            slice.swap(i, j);
        }
    }
}

/// I.i.d. N(0, variance) array of the given shape. `variance == 0` returns
/// zeros without consuming any randomness, so disabling noise leaves every
/// other stream untouched.
pub fn gaussian_sample(rng: &mut Rng, shape: &[usize], variance: f64) -> Result<Array> {
    if variance < 0.0 {
        return Err(NumericsError::NegativeVariance(variance));
    }
    let n: usize = shape.iter().product();
    if variance == 0.0 {
        return Ok(Array::zeros(shape));
    }
    let sd = variance.sqrt();
    let mut data = Vec::with_capacity(n);
    while data.len() < n {
        let (a, b) = rng.gaussian_pair();
        data.push(a * sd);
        if data.len() < n {
            data.push(b * sd);
        }
    }
    Array::new(shape.to_vec(), data)
}
