use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Standard-normal stream over ChaCha12 with a plain Box-Muller transform.
///
/// Consumption is fixed: two 64-bit words per pair of normals, the second
/// of each pair cached. No rejection step, so the draw sequence is a pure
/// function of the seed and the number of values taken.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform draw in (0, 1]: 53 mantissa bits, shifted off zero so the
    /// logarithm below is always finite.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_unit();
        let u2 = self.next_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn fill_normals(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}
