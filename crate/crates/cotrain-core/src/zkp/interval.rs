//! Interval proof with slack.
//!
//! The prover commits `C = S^v T^μ` and shows, with one challenge, that the
//! same integer `v` opens `C` and the ciphertext, while the masked response
//! `f = α + e·v` stays below `2^(|B| + SLACK_BITS + 1)`. An honest prover
//! needs `v ∈ [0, B]`; the verifier learns `|v| < B · 2^INTERVAL_SLACK_BITS`.

use num_bigint::{BigInt, BigUint};
use rand_core::RngCore;

use super::{
    check_nonce, enc_raw, fits, is_unit_below, mask, nonce_mask_bits, nonce_response_bits, ped_rand_bits, pow_mod,
    ZkError, CHALLENGE_BITS, SLACK_BITS,
};
use crate::arith::random_bits;
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{Ciphertext, PublicKey};
use crate::transcript::Transcript;

/// Multiplicative slack, in bits, between the honest and the enforced bound.
pub const INTERVAL_SLACK_BITS: u64 = SLACK_BITS + 2;

/// Proof that one integer opens both a ciphertext and a ring-Pedersen
/// commitment, with a bounded response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkProof {
    pub a1: BigUint,
    pub a2: BigUint,
    pub f: BigInt,
    pub zs: BigInt,
    pub zm: BigInt,
}

impl LinkProof {
    pub fn write(&self, w: &mut Writer) {
        w.uint(&self.a1).uint(&self.a2).int(&self.f).int(&self.zs).int(&self.zm);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self { a1: r.uint()?, a2: r.uint()?, f: r.int()?, zs: r.int()?, zm: r.int()? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalProof {
    pub commit: BigUint,
    pub link: LinkProof,
}

impl IntervalProof {
    pub fn write(&self, w: &mut Writer) {
        w.uint(&self.commit);
        self.link.write(w);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self { commit: r.uint()?, link: LinkProof::read(r)? })
    }
}

/// Fresh ring-Pedersen commitment to `v`, returning the randomness.
pub(crate) fn commit<R: RngCore + ?Sized>(pk: &PublicKey, v: &BigInt, rng: &mut R) -> (BigUint, BigInt) {
    let mu = BigInt::from(random_bits(rng, ped_rand_bits(pk)));
    (pk.ped_commit(v, &mu), mu)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn prove_link<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    commitment: &BigUint,
    value_bits: u64,
    v: &BigInt,
    s: &BigInt,
    mu: &BigInt,
    rng: &mut R,
) -> LinkProof {
    tr.absorb_ct(b"c", c);
    tr.absorb_uint(b"commit", commitment);
    tr.absorb_u64(b"value_bits", value_bits);
    let alpha = mask(rng, value_bits + SLACK_BITS);
    let beta = mask(rng, nonce_mask_bits(pk));
    let gamma = mask(rng, ped_rand_bits(pk) + SLACK_BITS);
    let a1 = enc_raw(pk, &alpha, &beta);
    let a2 = pk.ped_commit(&alpha, &gamma);
    tr.absorb_uint(b"a1", &a1);
    tr.absorb_uint(b"a2", &a2);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    LinkProof { a1, a2, f: alpha + &e * v, zs: beta + &e * s, zm: gamma + e * mu }
}

pub(crate) fn verify_link(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    commitment: &BigUint,
    value_bits: u64,
    proof: &LinkProof,
) -> bool {
    tr.absorb_ct(b"c", c);
    tr.absorb_uint(b"commit", commitment);
    tr.absorb_u64(b"value_bits", value_bits);
    if !is_unit_below(commitment, pk.n(), pk.n())
        || !is_unit_below(&proof.a1, pk.nn(), pk.n())
        || !is_unit_below(&proof.a2, pk.n(), pk.n())
        || !fits(&proof.f, value_bits + SLACK_BITS + 1)
        || !fits(&proof.zs, nonce_response_bits(pk))
        || !fits(&proof.zm, ped_rand_bits(pk) + SLACK_BITS + 1)
    {
        return false;
    }
    tr.absorb_uint(b"a1", &proof.a1);
    tr.absorb_uint(b"a2", &proof.a2);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    let (Some(ce), Some(me)) = (pow_mod(&c.c, &e, pk.nn()), pow_mod(commitment, &e, pk.n())) else {
        return false;
    };
    if enc_raw(pk, &proof.f, &proof.zs) != (&proof.a1 * ce) % pk.nn() {
        return false;
    }
    pk.ped_commit(&proof.f, &proof.zm) == (&proof.a2 * me) % pk.n()
}

/// Proves `v ∈ [0, bound]` for `c = g^v h^s`.
pub fn prove_interval<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    bound: &BigUint,
    rng: &mut R,
) -> Result<IntervalProof, ZkError> {
    if v.sign() == num_bigint::Sign::Minus || v.magnitude() > bound {
        return Err(ZkError::WitnessOutOfRange("interval value"));
    }
    check_nonce(pk, s)?;
    Ok(prove_interval_unchecked(pk, tr, c, v, s, bound, rng))
}

/// [`prove_interval`] without the range precondition. An out-of-range
/// witness yields a proof that fails verification except with negligible
/// probability; this entry point exists to exercise verifiers.
pub fn prove_interval_unchecked<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    bound: &BigUint,
    rng: &mut R,
) -> IntervalProof {
    tr.absorb(b"proof", b"interval");
    let (commitment, mu) = commit(pk, v, rng);
    let link = prove_link(pk, tr, c, &commitment, bound.bits(), v, s, &mu, rng);
    IntervalProof { commit: commitment, link }
}

pub fn verify_interval(pk: &PublicKey, tr: &mut Transcript, c: &Ciphertext, proof: &IntervalProof, bound: &BigUint) -> bool {
    tr.absorb(b"proof", b"interval");
    verify_link(pk, tr, c, &proof.commit, bound.bits(), &proof.link)
}
