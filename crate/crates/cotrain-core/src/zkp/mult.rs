//! Ciphertext multiplication proof: `Dec(cb) = α · Dec(ca)` where the prover
//! knows `α` as the plaintext of `cα`.
//!
//! Relation: `cα = g^α h^sα` and `cb = ca^α h^γ`. With `cα = g` and `α = 1` it
//! proves that `cb` and `ca` encrypt the same value.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand_core::RngCore;

use super::{
    check_nonce, enc_raw, fits, is_unit_below, mask, nonce_mask_bits, nonce_response_bits, pow_mod, ZkError,
    CHALLENGE_BITS, SLACK_BITS,
};
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{Ciphertext, PublicKey};
use crate::transcript::Transcript;

#[derive(Debug, Clone, Copy)]
pub struct MultStatement<'a> {
    pub c_alpha: &'a Ciphertext,
    pub ca: &'a Ciphertext,
    pub cb: &'a Ciphertext,
    /// Public bound: `|α| < 2^alpha_bits`.
    pub alpha_bits: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct MultWitness<'a> {
    pub alpha: &'a BigInt,
    pub s_alpha: &'a BigInt,
    pub gamma: &'a BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultProof {
    pub t1: BigUint,
    pub t2: BigUint,
    pub f: BigInt,
    pub z1: BigInt,
    pub z2: BigInt,
}

impl MultProof {
    pub fn write(&self, w: &mut Writer) {
        w.uint(&self.t1).uint(&self.t2).int(&self.f).int(&self.z1).int(&self.z2);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self { t1: r.uint()?, t2: r.uint()?, f: r.int()?, z1: r.int()?, z2: r.int()? })
    }
}

/// The ciphertext `g = Enc(1; 0)` used as `cα` in equality proofs.
pub fn one_ct(pk: &PublicKey) -> Ciphertext {
    Ciphertext { c: pk.n() + BigUint::one(), scale: 0 }
}

fn absorb_statement(tr: &mut Transcript, st: &MultStatement<'_>) {
    tr.absorb(b"proof", b"mult");
    tr.absorb_u64(b"alpha_bits", st.alpha_bits);
    tr.absorb_ct(b"c_alpha", st.c_alpha);
    tr.absorb_ct(b"ca", st.ca);
    tr.absorb_ct(b"cb", st.cb);
}

pub fn prove_mult<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MultStatement<'_>,
    wit: &MultWitness<'_>,
    rng: &mut R,
) -> Result<MultProof, ZkError> {
    if !fits(wit.alpha, st.alpha_bits) {
        return Err(ZkError::WitnessOutOfRange("alpha"));
    }
    check_nonce(pk, wit.s_alpha)?;
    check_nonce(pk, wit.gamma)?;
    absorb_statement(tr, st);
    let x = mask(rng, st.alpha_bits + SLACK_BITS);
    let u1 = mask(rng, nonce_mask_bits(pk));
    let u2 = mask(rng, nonce_mask_bits(pk));
    let t1 = enc_raw(pk, &x, &u1);
    let cax = pow_mod(&st.ca.c, &x, pk.nn()).ok_or(ZkError::Shape("ca is not a unit"))?;
    let t2 = (cax * pk.h_pow(&u2)) % pk.nn();
    tr.absorb_uint(b"t1", &t1);
    tr.absorb_uint(b"t2", &t2);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    Ok(MultProof {
        t1,
        t2,
        f: x + &e * wit.alpha,
        z1: u1 + &e * wit.s_alpha,
        z2: u2 + e * wit.gamma,
    })
}

pub fn verify_mult(pk: &PublicKey, tr: &mut Transcript, st: &MultStatement<'_>, proof: &MultProof) -> bool {
    absorb_statement(tr, st);
    let nn = pk.nn();
    let zbits = nonce_response_bits(pk);
    if !is_unit_below(&proof.t1, nn, pk.n())
        || !is_unit_below(&proof.t2, nn, pk.n())
        || !fits(&proof.f, st.alpha_bits + SLACK_BITS + 1)
        || !fits(&proof.z1, zbits)
        || !fits(&proof.z2, zbits)
    {
        return false;
    }
    tr.absorb_uint(b"t1", &proof.t1);
    tr.absorb_uint(b"t2", &proof.t2);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    let (Some(cae), Some(cbe), Some(caf)) = (
        pow_mod(&st.c_alpha.c, &e, nn),
        pow_mod(&st.cb.c, &e, nn),
        pow_mod(&st.ca.c, &proof.f, nn),
    ) else {
        return false;
    };
    if enc_raw(pk, &proof.f, &proof.z1) != (&proof.t1 * cae) % nn {
        return false;
    }
    (caf * pk.h_pow(&proof.z2)) % nn == (&proof.t2 * cbe) % nn
}
