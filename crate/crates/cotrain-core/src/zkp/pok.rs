//! Proof of plaintext knowledge for `c = g^v · h^s`.

use num_bigint::{BigInt, BigUint};
use rand_core::RngCore;

use super::{
    check_nonce, enc_raw, fits, is_unit_below, mask, nonce_mask_bits, nonce_response_bits, pow_mod, ZkError,
    CHALLENGE_BITS,
};
use crate::arith::{random_below, reduce};
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{Ciphertext, PublicKey};
use crate::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PokProof {
    pub a: BigUint,
    /// Plaintext response, reduced mod `N`.
    pub fv: BigUint,
    pub fs: BigInt,
}

impl PokProof {
    pub fn write(&self, w: &mut Writer) {
        w.uint(&self.a).uint(&self.fv).int(&self.fs);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self { a: r.uint()?, fv: r.uint()?, fs: r.int()? })
    }
}

fn absorb_statement(tr: &mut Transcript, c: &Ciphertext) {
    tr.absorb(b"proof", b"pok");
    tr.absorb_ct(b"c", c);
}

pub fn prove_pok<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    rng: &mut R,
) -> Result<PokProof, ZkError> {
    check_nonce(pk, s)?;
    absorb_statement(tr, c);
    let x = BigInt::from(random_below(rng, pk.n()));
    let y = mask(rng, nonce_mask_bits(pk));
    let a = enc_raw(pk, &x, &y);
    tr.absorb_uint(b"a", &a);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    let fv = reduce(&(x + &e * v), pk.n());
    let fs = y + e * s;
    Ok(PokProof { a, fv, fs })
}

pub fn verify_pok(pk: &PublicKey, tr: &mut Transcript, c: &Ciphertext, proof: &PokProof) -> bool {
    absorb_statement(tr, c);
    if !is_unit_below(&proof.a, pk.nn(), pk.n()) || &proof.fv >= pk.n() || !fits(&proof.fs, nonce_response_bits(pk)) {
        return false;
    }
    tr.absorb_uint(b"a", &proof.a);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    let lhs = enc_raw(pk, &BigInt::from(proof.fv.clone()), &proof.fs);
    let Some(ce) = pow_mod(&c.c, &e, pk.nn()) else {
        return false;
    };
    lhs == (&proof.a * ce) % pk.nn()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paillier::encrypt_rng;
    use crate::testkeys;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn honest_proof_verifies_and_binds_statement() {
        let km = testkeys::key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let v = BigInt::from(7);
        let (c, s) = encrypt_rng(pk, &v, &mut rng);
        let proof = prove_pok(pk, &mut Transcript::new("t"), &c, &v, &s, &mut rng).unwrap();
        assert!(verify_pok(pk, &mut Transcript::new("t"), &c, &proof));
        let (other, _) = encrypt_rng(pk, &v, &mut rng);
        assert!(!verify_pok(pk, &mut Transcript::new("t"), &other, &proof));
        assert!(!verify_pok(pk, &mut Transcript::new("u"), &c, &proof));
    }

    #[test]
    fn negative_plaintext() {
        let km = testkeys::key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let v = BigInt::from(-123456);
        let (c, s) = encrypt_rng(pk, &v, &mut rng);
        let proof = prove_pok(pk, &mut Transcript::new("t"), &c, &v, &s, &mut rng).unwrap();
        assert!(verify_pok(pk, &mut Transcript::new("t"), &c, &proof));
    }
}
