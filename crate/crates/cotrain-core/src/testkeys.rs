//! Fixed safe primes for tests, examples and demos.
//!
//! The factorizations are public, so keys built from them protect nothing.
//! They exist because generating fresh safe primes dominates test time.

use num_bigint::BigUint;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::paillier::{keygen_from_primes, KeyMaterial};

const P512: &str = concat!(
    "eb937161aa8e3634608a45ee5f7e0dd0534d073a5f92d4772a8a46922638fd2c",
    "59b25e2699703eb9e33b96155123245c494289fe797191b41a0f6e5e7861dd1f",
);
const Q512: &str = concat!(
    "c1b818b65c52f9dc67eef702a063d63df65ff9dda4acf0f0176e8df0e79a6c34",
    "aa8ec6453eeb4f5b4844b750b42e27d627e41c9a338fb85f3ebd4b3bf90ca187",
);
const P1024: &str = concat!(
    "e7f76680e8403e0e5c1a9d656fa78ece78e30b48455fdbc375fedc16293298c2",
    "e8fb756a13d7a33b1e8d3bc39486239bedd9fbefbb73b73c7c0582cca9a7838e",
    "d18a180e52377437a74e44198dfa4ab7a4ad071083b7519e91596afaee942f30",
    "a50bc68cadf9d20477fd40c3a728bb554e7a7541df0d964ec25052c6d1a238df",
);
const Q1024: &str = concat!(
    "ce72ae1c14a24e061e75c77725772232181fb0c7a65d8cc3ecded45dd9783136",
    "7afd06aec72e3a79d6a15dd28dd8b655346125e5b4f4612966a02938f52c5401",
    "ad037083601f0f592af408dd06290a2f6efae4d04cc7bb9461d367ca55c2830c",
    "05a2e0bfa24c3795213c838fca5a03b9c6956ea5aaadebe452e30c280114f467",
);

fn hex(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant")
}

/// Insecure 1024-bit key material for `m` parties.
pub fn key_1024(m: usize) -> KeyMaterial {
    let mut rng = ChaCha20Rng::seed_from_u64(0x1024 + m as u64);
    keygen_from_primes(hex(P512), hex(Q512), m, &mut rng).expect("fixture primes are valid")
}

/// Insecure 2048-bit key material for `m` parties.
pub fn key_2048(m: usize) -> KeyMaterial {
    let mut rng = ChaCha20Rng::seed_from_u64(0x2048 + m as u64);
    keygen_from_primes(hex(P1024), hex(Q1024), m, &mut rng).expect("fixture primes are valid")
}

/// Key material of the requested size from the fixtures.
pub fn key_for_bits(bits: u64, m: usize) -> Option<KeyMaterial> {
    match bits {
        1024 => Some(key_1024(m)),
        2048 => Some(key_2048(m)),
        _ => None,
    }
}
