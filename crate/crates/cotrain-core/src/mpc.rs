//! SPDZ-style authenticated secret sharing over a prime field.
//!
//! A value `a` is held as additive shares `aᵢ` with MAC shares `γᵢ` such that
//! `Σγᵢ = α·(a + δ)` for a public offset `δ` and a global key `α` that nobody
//! knows until [`MpcSession::reveal_alpha`]. Offline material comes from a
//! trusted dealer ([`dealer_generate`]).

use alloc::string::String;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand_core::RngCore;

use crate::arith::{centered, random_below, reduce};

pub mod dealer;
pub mod session;

pub use dealer::{dealer_generate, reconstruct_alpha, Counts, InputMask, PartyMaterial, TruncPair, TruncPool, TruncSpec, Triple};
pub use session::{truncate_triples, InputRecord, MpcSession, OpTag, RoundChannel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MpcError {
    #[error("offline material exhausted: {0}")]
    MaterialExhausted(&'static str),
    #[error("party {party} is out of lockstep")]
    Desync { party: u16 },
    #[error("malformed round message from party {party}")]
    Malformed { party: u16 },
    #[error("MAC check failed at opening {index:?}")]
    MacCheck { index: Option<usize> },
    #[error("commitment opening from party {party} does not match")]
    BadCommitment { party: u16 },
    #[error("channel: {0}")]
    Channel(String),
    #[error("invalid argument: {0}")]
    Invalid(&'static str),
}

/// Arithmetic modulo the MPC prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: BigUint,
    bytes: usize,
}

impl Field {
    pub fn new(p: BigUint) -> Self {
        let bytes = p.bits().div_ceil(8) as usize;
        Self { p, bytes }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn bits(&self) -> u64 {
        self.p.bits()
    }

    /// Width of a serialized element.
    pub fn byte_len(&self) -> usize {
        self.bytes
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - (b - a)
        }
    }

    pub fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    pub fn inv(&self, a: &BigUint) -> Option<BigUint> {
        a.modinv(&self.p)
    }

    pub fn from_int(&self, x: &BigInt) -> BigUint {
        reduce(x, &self.p)
    }

    pub fn from_u64(&self, x: u64) -> BigUint {
        BigUint::from(x) % &self.p
    }

    pub fn signed(&self, a: &BigUint) -> BigInt {
        centered(a, &self.p)
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        random_below(rng, &self.p)
    }

    pub fn pow2(&self, k: u64) -> BigUint {
        BigUint::one() << k
    }
}

/// One party's view of an authenticated sharing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthShare {
    pub value: BigUint,
    pub mac: BigUint,
    pub delta: BigUint,
}

impl AuthShare {
    pub fn zero() -> Self {
        Self { value: BigUint::zero(), mac: BigUint::zero(), delta: BigUint::zero() }
    }

    pub fn add(&self, o: &Self, f: &Field) -> Self {
        Self {
            value: f.add(&self.value, &o.value),
            mac: f.add(&self.mac, &o.mac),
            delta: f.add(&self.delta, &o.delta),
        }
    }

    pub fn sub(&self, o: &Self, f: &Field) -> Self {
        Self {
            value: f.sub(&self.value, &o.value),
            mac: f.sub(&self.mac, &o.mac),
            delta: f.sub(&self.delta, &o.delta),
        }
    }

    pub fn neg(&self, f: &Field) -> Self {
        Self { value: f.neg(&self.value), mac: f.neg(&self.mac), delta: f.neg(&self.delta) }
    }

    /// Adds a public constant. Only party 0 touches its value share; the
    /// offset absorbs the constant so MAC shares stay unchanged.
    pub fn add_public(&self, c: &BigUint, party: u16, f: &Field) -> Self {
        Self {
            value: if party == 0 { f.add(&self.value, c) } else { self.value.clone() },
            mac: self.mac.clone(),
            delta: f.sub(&self.delta, c),
        }
    }

    pub fn mul_public(&self, k: &BigUint, f: &Field) -> Self {
        Self { value: f.mul(&self.value, k), mac: f.mul(&self.mac, k), delta: f.mul(&self.delta, k) }
    }
}

/// Reconstructs a sharing from every party's view, checking the MAC relation
/// against a known key. Test and dealer use only.
pub fn reconstruct(shares: &[AuthShare], alpha: &BigUint, f: &Field) -> Option<BigUint> {
    let first = shares.first()?;
    if shares.iter().any(|s| s.delta != first.delta) {
        return None;
    }
    let value = shares.iter().fold(BigUint::zero(), |a, s| f.add(&a, &s.value));
    let mac = shares.iter().fold(BigUint::zero(), |a, s| f.add(&a, &s.mac));
    (mac == f.mul(alpha, &f.add(&value, &first.delta))).then_some(value)
}
