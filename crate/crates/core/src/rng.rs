//! Seeded random-number substreams.
//!
//! A single master seed fans out into independent generators addressed by a
//! fixed label plus optional integer coordinates. Two components asking for
//! the same `(label, coords)` always receive bit-identical streams, which is
//! what lets different policies see identical channel and content draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

pub const LABEL_ENV: &str = "env";
pub const LABEL_CHANNEL: &str = "channel";
pub const LABEL_ACTOR_NOISE: &str = "actor-noise";
pub const LABEL_ACTOR_SAMPLE: &str = "actor-sample";
pub const LABEL_ACTOR_INIT: &str = "actor-init";
pub const LABEL_ORACLE: &str = "oracle";
pub const LABEL_POLICY: &str = "policy";

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Master seed from which every stochastic component derives its stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// 64-bit key for `(label, coords)`.
    pub fn key(&self, label: &str, coords: &[u64]) -> u64 {
        let mut h = splitmix64(self.master ^ fnv1a(label));
        for &c in coords {
            h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        h
    }

    /// Generator for a labelled substream.
    pub fn stream(&self, label: &str) -> LabRng {
        LabRng::seed_from_u64(self.key(label, &[]))
    }

    /// Generator for a labelled substream at integer coordinates (slot, device, ...).
    pub fn stream_at(&self, label: &str, coords: &[u64]) -> LabRng {
        LabRng::seed_from_u64(self.key(label, coords))
    }
}
