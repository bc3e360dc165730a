use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Result, SaeError};

/// A reproducible random stream keyed by a master seed and a two-part label.
///
/// Streams are ChaCha8 instances: the seed and the first label component
/// select the key, the second label component selects the ChaCha stream id.
/// Distinct labels therefore never share keystream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_stream(seed: u64, label: (u64, u64)) -> RandomStream {
    let mut state = mix64(seed ^ mix64(label.0 ^ 0x6a09_e667_f3bc_c908));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(label.1);
    RandomStream { rng }
}

impl RandomStream {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn normal(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(SaeError::Distribution(format!(
                "normal needs finite mu and sigma >= 0, got ({mu}, {sigma})"
            )));
        }
        Ok(mu + sigma * self.standard_normal())
    }

    /// Gamma draw in the shape-scale parameterisation (mean `shape * scale`).
    pub fn gamma(&mut self, shape: f64, scale: f64) -> Result<f64> {
        if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
            return Err(SaeError::Distribution(format!(
                "gamma needs positive shape and scale, got ({shape}, {scale})"
            )));
        }
        let dist = Gamma::new(shape, scale).map_err(|e| SaeError::Distribution(e.to_string()))?;
        Ok(dist.sample(&mut self.rng))
    }

    /// `exp(N(log_mu, log_sigma^2))`.
    pub fn lognormal(&mut self, log_mu: f64, log_sigma: f64) -> Result<f64> {
        if !(log_sigma > 0.0) {
            return Err(SaeError::Distribution(format!(
                "lognormal needs log_sigma > 0, got {log_sigma}"
            )));
        }
        Ok(self.normal(log_mu, log_sigma)?.exp())
    }

    /// Simple random sample without replacement: `n` distinct indices from
    /// `0..population`, returned in increasing order.
    pub fn srswor(&mut self, population: usize, n: usize) -> Result<Vec<usize>> {
        if n == 0 || n > population {
            return Err(SaeError::InvalidInput(format!(
                "srswor needs 1 <= n <= N, got n={n} N={population}"
            )));
        }
        let mut idx = rand::seq::index::sample(&mut self.rng, population, n).into_vec();
        idx.sort_unstable();
        Ok(idx)
    }
}
