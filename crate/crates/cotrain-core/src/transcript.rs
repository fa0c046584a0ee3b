//! Fiat–Shamir transcripts over SHA-256.
//!
//! Every absorbed item is framed as `label_len ‖ label ‖ data_len ‖ data`, so
//! distinct absorption sequences never collide by concatenation. Challenges
//! are squeezed by hashing the running state with a counter and are then fed
//! back into the state.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use sha2::{Digest, Sha256};

use crate::paillier::{Ciphertext, PublicKey};

const PROTOCOL_LABEL: &[u8] = b"cotrain/transcript/v1";

#[derive(Clone)]
pub struct Transcript {
    hasher: Sha256,
}

impl core::fmt::Debug for Transcript {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Transcript")
    }
}

/// Public context absorbed before any statement: it ties a proof to one run,
/// one phase, one iteration and one sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Context {
    pub config_hash: [u8; 32],
    pub phase: u8,
    pub iteration: u32,
    pub sender: u16,
}

impl Context {
    pub fn transcript(&self, domain: &'static str, pk: &PublicKey) -> Transcript {
        let mut t = Transcript::new(domain);
        t.absorb(b"config", &self.config_hash);
        t.absorb(b"phase", &[self.phase]);
        t.absorb(b"iteration", &self.iteration.to_be_bytes());
        t.absorb(b"sender", &self.sender.to_be_bytes());
        t.absorb_pk(pk);
        t
    }
}

impl Transcript {
    pub fn new(domain: &'static str) -> Self {
        let mut t = Self { hasher: Sha256::new() };
        t.absorb(b"protocol", PROTOCOL_LABEL);
        t.absorb(b"domain", domain.as_bytes());
        t
    }

    pub fn absorb(&mut self, label: &[u8], data: &[u8]) {
        self.hasher.update((label.len() as u32).to_be_bytes());
        self.hasher.update(label);
        self.hasher.update((data.len() as u64).to_be_bytes());
        self.hasher.update(data);
    }

    pub fn absorb_u64(&mut self, label: &[u8], v: u64) {
        self.absorb(label, &v.to_be_bytes());
    }

    pub fn absorb_uint(&mut self, label: &[u8], v: &BigUint) {
        self.absorb(label, &v.to_bytes_be());
    }

    pub fn absorb_int(&mut self, label: &[u8], v: &BigInt) {
        let (sign, mag) = v.to_bytes_be();
        let mut buf = Vec::with_capacity(mag.len() + 1);
        buf.push(u8::from(sign == Sign::Minus));
        buf.extend_from_slice(&mag);
        self.absorb(label, &buf);
    }

    pub fn absorb_ct(&mut self, label: &[u8], c: &Ciphertext) {
        self.absorb(b"scale", &c.scale.to_be_bytes());
        self.absorb_uint(label, &c.c);
    }

    pub fn absorb_cts<'a>(&mut self, label: &[u8], cs: impl IntoIterator<Item = &'a Ciphertext>) {
        for c in cs {
            self.absorb_ct(label, c);
        }
    }

    pub fn absorb_pk(&mut self, pk: &PublicKey) {
        self.absorb_uint(b"pk.n", pk.n());
        self.absorb_uint(b"pk.h", pk.h());
        self.absorb_uint(b"pk.s", pk.ped_s());
        self.absorb_uint(b"pk.t", pk.ped_t());
    }

    /// Fills `out` with challenge bytes and absorbs them back.
    pub fn challenge_bytes(&mut self, label: &[u8], out: &mut [u8]) {
        self.absorb(b"challenge", label);
        let seed = self.hasher.clone().finalize();
        for (counter, chunk) in out.chunks_mut(32).enumerate() {
            let mut h = Sha256::new();
            h.update(seed);
            h.update((counter as u32).to_be_bytes());
            let block = h.finalize();
            chunk.copy_from_slice(&block[..chunk.len()]);
        }
        self.absorb(b"squeezed", out);
    }

    /// A uniform challenge in `[0, 2^bits)`.
    pub fn challenge_bits(&mut self, label: &[u8], bits: u64) -> BigUint {
        let nbytes = bits.div_ceil(8) as usize;
        let mut buf = alloc::vec![0u8; nbytes];
        self.challenge_bytes(label, &mut buf);
        let excess = nbytes as u64 * 8 - bits;
        if excess > 0 {
            buf[0] &= 0xFF >> excess;
        }
        BigUint::from_bytes_be(&buf)
    }

    /// A challenge in `[0, q)` with bias below `2^-128`.
    pub fn challenge_below(&mut self, label: &[u8], q: &BigUint) -> BigUint {
        self.challenge_bits(label, q.bits() + 128) % q
    }

    pub fn digest(&self) -> [u8; 32] {
        self.hasher.clone().finalize().into()
    }
}
