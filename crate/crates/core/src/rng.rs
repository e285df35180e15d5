//! Reproducible random streams.
//!
//! Every random object in an experiment is drawn from its own ChaCha stream,
//! addressed by `(master seed, stream index)`. ChaCha is counter based, so a
//! stream can be opened anywhere without replaying the ones before it and the
//! results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Address of one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

/// Roles of the matrices drawn inside one Monte Carlo trial.
pub const ROLE_WIGNER: u64 = 0;
pub const ROLE_GUE: u64 = 1;
pub const ROLE_AUX: u64 = 2;
const ROLES_PER_TRIAL: u64 = 4;

impl RngSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Stream for matrix `role` of trial `trial`.
    pub fn for_trial(master: u64, trial: u64, role: u64) -> Self {
        debug_assert!(role < ROLES_PER_TRIAL);
        Self::new(master, trial * ROLES_PER_TRIAL + role)
    }

    /// A different stream under the same master seed.
    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}
