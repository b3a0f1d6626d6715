//! Seed derivation. Every run owns one master seed that is split into
//! independent, named ChaCha streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Pure, stable function of its arguments.
pub fn derive_seed(parent: u64, label: &str, index: u64) -> u64 {
    mix(mix(parent ^ label_hash(label)) ^ mix(index))
}

pub fn stream(parent: u64, label: &str) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(parent, label, 0))
}

/// The named streams of one run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub warmup: StreamRng,
    pub dn_sampling: StreamRng,
    pub gan_latent: StreamRng,
    pub net_init: StreamRng,
    pub shuffling: StreamRng,
}

impl RunStreams {
    pub fn new(run_seed: u64) -> Self {
        Self {
            warmup: stream(run_seed, "warmup-sampling"),
            dn_sampling: stream(run_seed, "dn-sampling"),
            gan_latent: stream(run_seed, "gan-latent"),
            net_init: stream(run_seed, "net-init"),
            shuffling: stream(run_seed, "shuffling"),
        }
    }
}
