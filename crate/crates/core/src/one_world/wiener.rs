use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distinct key derivations so that initial sampling and noise never share
/// random numbers on the same stream id.
#[derive(Clone, Copy, Debug)]
pub enum Purpose {
    Initial,
    Noise,
    FeynmanKac,
}

impl Purpose {
    fn salt(self) -> u64 {
        match self {
            Purpose::Initial => 0x9e37_79b9_7f4a_7c15,
            Purpose::Noise => 0xbf58_476d_1ce4_e5b9,
            Purpose::FeynmanKac => 0x94d0_49bb_1331_11eb,
        }
    }
}

/// RNG for one path: the key comes from (seed, purpose), the stream from the id.
pub fn stream_rng(seed: u64, purpose: Purpose, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.salt());
    rng.set_stream(stream_id);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerConfig {
    /// D in <dW^2> = 2 D dt.
    pub diffusion_d: f64,
    pub seed: u64,
}

impl WienerConfig {
    /// D = hbar / 2m.
    pub fn quantum(hbar: f64, mass: f64, seed: u64) -> Self {
        Self { diffusion_d: hbar / (2.0 * mass), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion_d >= 0.0) || !self.diffusion_d.is_finite() {
            return Err(Error::InvalidInput(format!("diffusion D = {} must be >= 0", self.diffusion_d)));
        }
        Ok(())
    }

    /// Standard deviation of one increment over `dt`.
    pub fn increment_std(&self, dt: f64) -> f64 {
        (2.0 * self.diffusion_d * dt).sqrt()
    }
}
