//! Non-interactive Σ-protocols over Paillier ciphertexts and ring-Pedersen
//! commitments.
//!
//! Ciphertexts are in the short form `g^v · h^s`. Responses for exponents of
//! hidden-order bases are computed over the integers and masked with
//! [`SLACK_BITS`] extra bits. Each prover and verifier pair absorbs statement
//! and commitments into a caller-supplied [`Transcript`] in the same order, so
//! a bundle of proofs sharing one transcript is bound together.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand_core::RngCore;

use crate::arith::{self, random_signed_bits};
use crate::paillier::PublicKey;

pub mod interval;
pub mod matmul;
pub mod mult;
pub mod pok;
pub mod range;

pub use interval::{prove_interval, verify_interval, IntervalProof, INTERVAL_SLACK_BITS};
pub use matmul::{
    gadget1_prove, gadget1_verify, gadget2_prove, gadget2_verify, CtMatrix, Gadget1Witness, Gadget2Witness,
    GadgetError, MatMulProof, MatMulStatement,
};
pub use mult::{prove_mult, verify_mult, MultProof, MultStatement, MultWitness};
pub use pok::{prove_pok, verify_pok, PokProof};
pub use range::{prove_range, verify_range, RangeProof};

pub const CHALLENGE_BITS: u64 = 128;
/// Statistical distance budget of every masked response, in bits.
pub const HIDING_BITS: u64 = 40;
pub const SLACK_BITS: u64 = CHALLENGE_BITS + HIDING_BITS;
pub const PROOF_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZkError {
    #[error("witness exceeds its public bound: {0}")]
    WitnessOutOfRange(&'static str),
    #[error("statement shape: {0}")]
    Shape(&'static str),
}

/// Uniform in `(−2^bits, 2^bits)`.
pub(crate) fn mask<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigInt {
    random_signed_bits(rng, bits)
}

pub(crate) fn fits(x: &BigInt, bits: u64) -> bool {
    x.magnitude().bits() <= bits
}

/// Mask width for an `h`-exponent witness; independent of the witness.
pub(crate) fn nonce_mask_bits(pk: &PublicKey) -> u64 {
    pk.witness_nonce_bits() + SLACK_BITS
}

pub(crate) fn check_nonce(pk: &PublicKey, s: &BigInt) -> Result<(), ZkError> {
    if fits(s, pk.witness_nonce_bits()) {
        Ok(())
    } else {
        Err(ZkError::WitnessOutOfRange("nonce"))
    }
}

/// Largest accepted response to an `h`-exponent.
pub(crate) fn nonce_response_bits(pk: &PublicKey) -> u64 {
    nonce_mask_bits(pk) + 1
}

/// Ring-Pedersen randomness width, enough to hide in the order-`N/4` group.
pub(crate) fn ped_rand_bits(pk: &PublicKey) -> u64 {
    pk.bits() + HIDING_BITS
}

/// `g^v · h^s mod N²`.
pub(crate) fn enc_raw(pk: &PublicKey, v: &BigInt, s: &BigInt) -> BigUint {
    (pk.g_pow(v) * pk.h_pow(s)) % pk.nn()
}

/// `base^e mod m` for a signed exponent; `None` if `base` is not a unit.
pub(crate) fn pow_mod(base: &BigUint, e: &BigInt, m: &BigUint) -> Option<BigUint> {
    arith::pow_signed(base, e, m)
}

/// Rejects zero, out-of-range and non-unit group elements.
pub(crate) fn is_unit_below(x: &BigUint, m: &BigUint, n: &BigUint) -> bool {
    use num_integer::Integer;
    use num_traits::One;
    !x.is_zero() && x < m && x.gcd(n).is_one()
}
