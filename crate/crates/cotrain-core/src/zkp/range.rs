//! Exact range proof: `lo ≤ v ≤ hi` with no slack.
//!
//! The value is committed as `C = S^v T^μ` and linked to the ciphertext.
//! Both `v − lo` and `hi − v` are then shown non-negative by writing each as a
//! sum of four squares `Σ xᵢ²`, committing `Dᵢ = S^xᵢ T^μᵢ` and proving
//! `C_j = Π Dᵢ^xᵢ · T^ρ` in zero knowledge.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use rand_core::RngCore;

use super::interval::{commit, prove_link, verify_link, LinkProof};
use super::{check_nonce, fits, is_unit_below, mask, ped_rand_bits, pow_mod, ZkError, CHALLENGE_BITS, SLACK_BITS};
use crate::arith::four_squares;
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{Ciphertext, PublicKey};
use crate::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquaresProof {
    pub d: [BigUint; 4],
    pub e_commits: [BigUint; 4],
    pub f_commit: BigUint,
    pub fx: [BigInt; 4],
    pub fm: [BigInt; 4],
    pub frho: BigInt,
}

impl SquaresProof {
    fn write(&self, w: &mut Writer) {
        for x in self.d.iter().chain(&self.e_commits) {
            w.uint(x);
        }
        w.uint(&self.f_commit);
        for x in self.fx.iter().chain(&self.fm) {
            w.int(x);
        }
        w.int(&self.frho);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let mut uints = Vec::with_capacity(8);
        for _ in 0..8 {
            uints.push(r.uint()?);
        }
        let f_commit = r.uint()?;
        let mut ints = Vec::with_capacity(8);
        for _ in 0..8 {
            ints.push(r.int()?);
        }
        let frho = r.int()?;
        let four = |v: &[BigUint]| [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()];
        let four_i = |v: &[BigInt]| [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()];
        Ok(Self {
            d: four(&uints[..4]),
            e_commits: four(&uints[4..]),
            f_commit,
            fx: four_i(&ints[..4]),
            fm: four_i(&ints[4..]),
            frho,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeProof {
    pub commit: BigUint,
    pub link: LinkProof,
    pub lower: SquaresProof,
    pub upper: SquaresProof,
}

impl RangeProof {
    pub fn write(&self, w: &mut Writer) {
        w.uint(&self.commit);
        self.link.write(w);
        self.lower.write(w);
        self.upper.write(w);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            commit: r.uint()?,
            link: LinkProof::read(r)?,
            lower: SquaresProof::read(r)?,
            upper: SquaresProof::read(r)?,
        })
    }
}

fn value_bits(lo: &BigInt, hi: &BigInt) -> u64 {
    lo.magnitude().bits().max(hi.magnitude().bits())
}

/// Width bound for each square root: `xᵢ ≤ sqrt(hi − lo)`.
fn root_bits(lo: &BigInt, hi: &BigInt) -> u64 {
    (hi - lo).magnitude().bits().div_ceil(2)
}

/// `C·S^(−lo)` and `S^hi·C^(−1)`, commitments to `v − lo` and `hi − v`.
fn shifted(pk: &PublicKey, c: &BigUint, lo: &BigInt, hi: &BigInt) -> Option<(BigUint, BigUint)> {
    let zero = BigInt::from(0);
    let c_inv = c.modinv(pk.n())?;
    let c1 = (c * pk.ped_commit(&-lo, &zero)) % pk.n();
    let c2 = (pk.ped_commit(hi, &zero) * c_inv) % pk.n();
    Some((c1, c2))
}

fn rho_bits(pk: &PublicKey, xbits: u64) -> u64 {
    ped_rand_bits(pk) + xbits + 4
}

fn prove_squares<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    cj: &BigUint,
    w: &BigUint,
    r_j: &BigInt,
    xbits: u64,
    rng: &mut R,
) -> SquaresProof {
    let xs = four_squares(w, rng).map(BigInt::from);
    let mut mus: [BigInt; 4] = Default::default();
    let mut d: [BigUint; 4] = Default::default();
    for i in 0..4 {
        let (di, mi) = commit(pk, &xs[i], rng);
        d[i] = di;
        mus[i] = mi;
    }
    let rho = r_j - xs.iter().zip(&mus).map(|(x, m)| x * m).sum::<BigInt>();

    let a: [BigInt; 4] = core::array::from_fn(|_| mask(rng, xbits + SLACK_BITS));
    let b: [BigInt; 4] = core::array::from_fn(|_| mask(rng, ped_rand_bits(pk) + SLACK_BITS));
    let c = mask(rng, rho_bits(pk, xbits) + SLACK_BITS);
    let e_commits: [BigUint; 4] = core::array::from_fn(|i| pk.ped_commit(&a[i], &b[i]));
    let mut f_commit = pk.ped_commit(&BigInt::from(0), &c);
    for i in 0..4 {
        let p = pow_mod(&d[i], &a[i], pk.n()).expect("commitments are units");
        f_commit = (f_commit * p) % pk.n();
    }

    tr.absorb_uint(b"cj", cj);
    for x in d.iter().chain(&e_commits) {
        tr.absorb_uint(b"sq", x);
    }
    tr.absorb_uint(b"f", &f_commit);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    SquaresProof {
        d,
        e_commits,
        f_commit,
        fx: core::array::from_fn(|i| &a[i] + &e * &xs[i]),
        fm: core::array::from_fn(|i| &b[i] + &e * &mus[i]),
        frho: c + e * rho,
    }
}

fn verify_squares(pk: &PublicKey, tr: &mut Transcript, cj: &BigUint, xbits: u64, p: &SquaresProof) -> bool {
    let n = pk.n();
    let units = p.d.iter().chain(&p.e_commits).chain(core::iter::once(&p.f_commit));
    if !units.into_iter().all(|x| is_unit_below(x, n, n))
        || !p.fx.iter().all(|x| fits(x, xbits + SLACK_BITS + 1))
        || !p.fm.iter().all(|x| fits(x, ped_rand_bits(pk) + SLACK_BITS + 1))
        || !fits(&p.frho, rho_bits(pk, xbits) + SLACK_BITS + 1)
    {
        return false;
    }
    tr.absorb_uint(b"cj", cj);
    for x in p.d.iter().chain(&p.e_commits) {
        tr.absorb_uint(b"sq", x);
    }
    tr.absorb_uint(b"f", &p.f_commit);
    let e = BigInt::from(tr.challenge_bits(b"e", CHALLENGE_BITS));
    for i in 0..4 {
        let Some(de) = pow_mod(&p.d[i], &e, n) else {
            return false;
        };
        if pk.ped_commit(&p.fx[i], &p.fm[i]) != (&p.e_commits[i] * de) % n {
            return false;
        }
    }
    let mut lhs = pk.ped_commit(&BigInt::from(0), &p.frho);
    for i in 0..4 {
        let Some(x) = pow_mod(&p.d[i], &p.fx[i], n) else {
            return false;
        };
        lhs = (lhs * x) % n;
    }
    let Some(ce) = pow_mod(cj, &e, n) else {
        return false;
    };
    lhs == (&p.f_commit * ce) % n
}

/// Proves `lo ≤ v ≤ hi` for `c = g^v h^s`.
#[allow(clippy::too_many_arguments)]
pub fn prove_range<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    lo: &BigInt,
    hi: &BigInt,
    rng: &mut R,
) -> Result<RangeProof, ZkError> {
    if lo > hi {
        return Err(ZkError::Shape("empty range"));
    }
    if v < lo || v > hi {
        return Err(ZkError::WitnessOutOfRange("range value"));
    }
    check_nonce(pk, s)?;
    tr.absorb(b"proof", b"range");
    tr.absorb_int(b"lo", lo);
    tr.absorb_int(b"hi", hi);
    let vbits = value_bits(lo, hi);
    let xbits = root_bits(lo, hi);
    let (commitment, mu) = commit(pk, v, rng);
    let link = prove_link(pk, tr, c, &commitment, vbits, v, s, &mu, rng);
    let (c1, c2) = shifted(pk, &commitment, lo, hi).ok_or(ZkError::Shape("commitment is not a unit"))?;
    let w1 = (v - lo).to_biguint().expect("v ≥ lo");
    let w2 = (hi - v).to_biguint().expect("v ≤ hi");
    let lower = prove_squares(pk, tr, &c1, &w1, &mu, xbits, rng);
    let upper = prove_squares(pk, tr, &c2, &w2, &-&mu, xbits, rng);
    Ok(RangeProof { commit: commitment, link, lower, upper })
}

pub fn verify_range(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    proof: &RangeProof,
    lo: &BigInt,
    hi: &BigInt,
) -> bool {
    if lo > hi {
        return false;
    }
    tr.absorb(b"proof", b"range");
    tr.absorb_int(b"lo", lo);
    tr.absorb_int(b"hi", hi);
    let vbits = value_bits(lo, hi);
    let xbits = root_bits(lo, hi);
    if !verify_link(pk, tr, c, &proof.commit, vbits, &proof.link) {
        return false;
    }
    let Some((c1, c2)) = shifted(pk, &proof.commit, lo, hi) else {
        return false;
    };
    verify_squares(pk, tr, &c1, xbits, &proof.lower) && verify_squares(pk, tr, &c2, xbits, &proof.upper)
}
