//! Moving values between ciphertexts and authenticated shares, and the
//! end-of-run checks that every move was honest.
//!
//! Into the MPC (Gadget 3): each party publishes masks `rᵢ` under interval
//! proofs, everyone forms `E_f = E_W · g^offset · ΠE_rᵢ`, and the joint
//! decryption `f` yields shares `a₀ = f − offset − r₀`, `aᵢ = −rᵢ`. The parties
//! then input their shares. Several `f` share one ciphertext when the slots
//! fit.
//!
//! Out of the MPC: each party encrypts its value and MAC shares with
//! interval proofs in `[0, p)`; the products are the new ciphertexts.
//!
//! Gadget 4 batches every logged move under transcript-derived 128-bit
//! weights into one ciphertext whose plaintext must be a multiple of `p`, and
//! checks that with a jointly masked decryption.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::RngCore;

use super::config::Bounds;
use super::ProtocolError;
use crate::arith::{centered, multi_pow, pow2, random_bits, reduce};
use crate::codec::{CodecError, Reader, Writer};
use crate::mpc::{AuthShare, Field};
use crate::paillier::{add_plain, encrypt_rng, Ciphertext, PartialDecryption, PublicKey};
use crate::transcript::{Context, Transcript};
use crate::zkp::interval::prove_interval_unchecked;
use crate::zkp::{prove_interval, verify_interval, IntervalProof, CHALLENGE_BITS, INTERVAL_SLACK_BITS};

const MASK_DOMAIN: &str = "cotrain/mask";
const SHARE_DOMAIN: &str = "cotrain/share";
const CHECK_DOMAIN: &str = "cotrain/check-mask";
const WEIGHT_DOMAIN: &str = "cotrain/batch-weights";

/// Ciphertexts with one interval proof each, all against the same bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenCts {
    pub cts: Vec<Ciphertext>,
    pub proofs: Vec<IntervalProof>,
}

impl ProvenCts {
    pub fn write(&self, pk: &PublicKey, w: &mut Writer) {
        w.u32(self.cts.len() as u32);
        for (c, p) in self.cts.iter().zip(&self.proofs) {
            c.write(pk, w);
            p.write(w);
        }
    }

    pub fn read(pk: &PublicKey, r: &mut Reader<'_>, expected: usize) -> Result<Self, ProtocolError> {
        let n = r.u32()? as usize;
        if n != expected {
            return Err(CodecError::Invalid("ciphertext count").into());
        }
        let mut cts = Vec::with_capacity(n);
        let mut proofs = Vec::with_capacity(n);
        for _ in 0..n {
            cts.push(Ciphertext::read(pk, r)?);
            proofs.push(IntervalProof::read(r)?);
        }
        Ok(Self { cts, proofs })
    }
}

/// Encrypts non-negative values below `bound` and proves it. Indices in
/// `forge` are proven without the precondition, so an out-of-range value
/// produces a proof that fails.
fn prove_all<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    values: &[BigInt],
    bound: &BigUint,
    forge: &[usize],
    rng: &mut R,
) -> Result<ProvenCts, ProtocolError> {
    let mut cts = Vec::with_capacity(values.len());
    let mut proofs = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        let (c, s) = encrypt_rng(pk, v, rng);
        let p = if forge.contains(&k) {
            prove_interval_unchecked(pk, tr, &c, v, &s, bound, rng)
        } else {
            prove_interval(pk, tr, &c, v, &s, bound, rng)?
        };
        cts.push(c);
        proofs.push(p);
    }
    Ok(ProvenCts { cts, proofs })
}

fn verify_all(pk: &PublicKey, tr: &mut Transcript, pc: &ProvenCts, bound: &BigUint) -> bool {
    pc.cts.len() == pc.proofs.len() && pc.cts.iter().zip(&pc.proofs).all(|(c, p)| c.scale == 0 && verify_interval(pk, tr, c, p, bound))
}

/// Draws `count` Gadget 3 masks. With `oversize`, the first mask lies far
/// beyond what the interval proof can cover.
pub fn draw_masks<R: RngCore + ?Sized>(
    pk: &PublicKey,
    ctx: &Context,
    bounds: &Bounds,
    count: usize,
    oversize: bool,
    rng: &mut R,
) -> Result<(ProvenCts, Vec<BigInt>), ProtocolError> {
    let mut values: Vec<BigInt> = (0..count).map(|_| BigInt::from(random_bits(rng, bounds.mask_bits))).collect();
    let forge: &[usize] = if oversize && count > 0 {
        values[0] = BigInt::from(pow2(bounds.mask_bits + INTERVAL_SLACK_BITS + 2));
        &[0]
    } else {
        &[]
    };
    let mut tr = ctx.transcript(MASK_DOMAIN, pk);
    let pc = prove_all(pk, &mut tr, &values, &mask_bound(bounds), forge, rng)?;
    Ok((pc, values))
}

fn mask_bound(bounds: &Bounds) -> BigUint {
    pow2(bounds.mask_bits) - 1u32
}

pub fn verify_masks(pk: &PublicKey, ctx: &Context, bounds: &Bounds, pc: &ProvenCts) -> bool {
    let mut tr = ctx.transcript(MASK_DOMAIN, pk);
    verify_all(pk, &mut tr, pc, &mask_bound(bounds))
}

/// `E_f` for every conversion, packed `bounds.slots` to a ciphertext.
pub fn packed_targets(pk: &PublicKey, bounds: &Bounds, w: &[&Ciphertext], masks: &[&ProvenCts]) -> Vec<Ciphertext> {
    let nn = pk.nn();
    let offset = bounds.w_offset();
    let targets: Vec<BigUint> = w
        .iter()
        .enumerate()
        .map(|(c, wc)| {
            let base = add_plain(pk, wc, &offset).c;
            masks.iter().fold(base, |acc, m| (acc * &m.cts[c].c) % nn)
        })
        .collect();
    targets
        .chunks(bounds.slots)
        .map(|chunk| {
            let exps: Vec<BigInt> = (0..chunk.len()).map(|s| BigInt::one() << (s as u64 * bounds.slot_bits)).collect();
            let c = multi_pow(chunk.iter().zip(&exps), nn).expect("positive exponents");
            Ciphertext { c, scale: 0 }
        })
        .collect()
}

/// Splits joint decryptions of [`packed_targets`] back into `count` values.
pub fn unpack(plain: &[BigUint], bounds: &Bounds, count: usize) -> Vec<BigUint> {
    let mask = pow2(bounds.slot_bits) - 1u32;
    let mut out = Vec::with_capacity(count);
    for p in plain {
        for s in 0..bounds.slots {
            if out.len() == count {
                break;
            }
            out.push((p >> (s as u64 * bounds.slot_bits)) & &mask);
        }
    }
    out
}

/// This party's additive shares of `W` from the opened `f` values.
pub fn conversion_shares(party: u16, field: &Field, bounds: &Bounds, opened: &[BigUint], masks: &[BigInt]) -> Vec<BigUint> {
    let offset = bounds.w_offset();
    opened
        .iter()
        .zip(masks)
        .map(|(f, r)| {
            if party == 0 {
                field.from_int(&(BigInt::from(f.clone()) - &offset - r))
            } else {
                field.from_int(&-r)
            }
        })
        .collect()
}

/// Encrypts value and MAC shares in `[0, p)`. `shift_value`/`shift_mac` add
/// one to the first entry, for tamper tests.
#[allow(clippy::too_many_arguments)]
pub fn encrypt_shares<R: RngCore + ?Sized>(
    pk: &PublicKey,
    ctx: &Context,
    field: &Field,
    shares: &[AuthShare],
    shift_value: bool,
    shift_mac: bool,
    rng: &mut R,
) -> Result<(ProvenCts, ProvenCts), ProtocolError> {
    let bump = |v: &BigUint, on: bool| BigInt::from(if on { field.add(v, &BigUint::one()) } else { v.clone() });
    let values: Vec<BigInt> = shares.iter().enumerate().map(|(k, s)| bump(&s.value, shift_value && k == 0)).collect();
    let macs: Vec<BigInt> = shares.iter().enumerate().map(|(k, s)| bump(&s.mac, shift_mac && k == 0)).collect();
    let bound = field.modulus() - 1u32;
    let mut tr = ctx.transcript(SHARE_DOMAIN, pk);
    let v = prove_all(pk, &mut tr, &values, &bound, &[], rng)?;
    let m = prove_all(pk, &mut tr, &macs, &bound, &[], rng)?;
    Ok((v, m))
}

pub fn verify_shares(pk: &PublicKey, ctx: &Context, field: &Field, values: &ProvenCts, macs: &ProvenCts) -> bool {
    let bound = field.modulus() - 1u32;
    let mut tr = ctx.transcript(SHARE_DOMAIN, pk);
    verify_all(pk, &mut tr, values, &bound) && verify_all(pk, &mut tr, macs, &bound)
}

/// Entry-wise product over parties, carrying `scale`.
pub fn sum_cts(pk: &PublicKey, per_party: &[&[Ciphertext]], scale: u16) -> Vec<Ciphertext> {
    let n = per_party.first().map_or(0, |v| v.len());
    (0..n)
        .map(|k| {
            let c = per_party.iter().fold(BigUint::one(), |acc, v| (acc * &v[k].c) % pk.nn());
            Ciphertext { c, scale }
        })
        .collect()
}

/// `n` weights in `[0, 2^128)` bound to `seed`, which must commit to every
/// public value the weights combine.
pub fn batch_weights(seed: &[u8; 32], label: &'static [u8], n: usize) -> Vec<BigInt> {
    let mut tr = Transcript::new(WEIGHT_DOMAIN);
    tr.absorb(b"seed", seed);
    tr.absorb(b"check", label);
    (0..n).map(|_| BigInt::from(tr.challenge_bits(b"lambda", CHALLENGE_BITS))).collect()
}

/// `Π (E_W / E_in)^λ` for the Gadget 3 check: `E_in` encrypts what the
/// parties actually fed into the MPC.
pub fn conversion_difference(pk: &PublicKey, w: &[&Ciphertext], inputs: &[Ciphertext], weights: &[BigInt]) -> Ciphertext {
    let nn = pk.nn();
    let neg: Vec<BigInt> = weights.iter().map(|l| -l).collect();
    let terms = w.iter().map(|c| &c.c).zip(weights).chain(inputs.iter().map(|c| &c.c).zip(&neg));
    Ciphertext { c: multi_pow(terms, nn).expect("ciphertexts are units"), scale: 0 }
}

/// `E_in = g^(Σε) · Π E_ρ` for one converted value.
pub fn input_ciphertext(pk: &PublicKey, eps_sum: &BigUint, masks: &[&Ciphertext]) -> Ciphertext {
    let c = masks.iter().fold(pk.g_pow(&BigInt::from(eps_sum.clone())), |acc, m| (acc * &m.c) % pk.nn());
    Ciphertext { c, scale: 0 }
}

/// `(Π (E_B·g^δ)^λ)^α / Π E_C^λ`: encrypts `Σλ(α(B+δ) − C)`.
pub fn mac_difference(
    pk: &PublicKey,
    alpha: &BigUint,
    values: &[Ciphertext],
    deltas: &[BigUint],
    macs: &[Ciphertext],
    weights: &[BigInt],
) -> Ciphertext {
    let nn = pk.nn();
    let shifted: Vec<BigUint> =
        values.iter().zip(deltas).map(|(v, d)| add_plain(pk, v, &BigInt::from(d.clone())).c).collect();
    let t1 = multi_pow(shifted.iter().zip(weights), nn).expect("positive exponents");
    let t1a = t1.modpow(alpha, nn);
    let t2 = multi_pow(macs.iter().map(|c| &c.c).zip(weights), nn).expect("positive exponents");
    let inv = t2.modinv(nn).expect("ciphertexts are units");
    Ciphertext { c: (t1a * inv) % nn, scale: 0 }
}

/// A mask for one divisibility check: `E_r` with `r ∈ [0, 2^bits)`.
pub fn check_mask<R: RngCore + ?Sized>(
    pk: &PublicKey,
    ctx: &Context,
    bits: u64,
    rng: &mut R,
) -> Result<ProvenCts, ProtocolError> {
    let r = BigInt::from(random_bits(rng, bits));
    let mut tr = ctx.transcript(CHECK_DOMAIN, pk);
    prove_all(pk, &mut tr, &[r], &(pow2(bits) - 1u32), &[], rng)
}

pub fn verify_check_mask(pk: &PublicKey, ctx: &Context, bits: u64, pc: &ProvenCts) -> bool {
    let mut tr = ctx.transcript(CHECK_DOMAIN, pk);
    pc.cts.len() == 1 && verify_all(pk, &mut tr, pc, &(pow2(bits) - 1u32))
}

/// `E_D · Π E_rᵢ^p`.
pub fn masked_check(pk: &PublicKey, diff: &Ciphertext, masks: &[&Ciphertext], p: &BigUint) -> Ciphertext {
    let nn = pk.nn();
    let prod = masks.iter().fold(BigUint::one(), |acc, m| (acc * &m.c) % nn);
    Ciphertext { c: (&diff.c * prod.modpow(p, nn)) % nn, scale: 0 }
}

/// Whether a jointly decrypted check value is a multiple of `p`.
pub fn divisible(plain: &BigUint, n: &BigUint, p: &BigUint) -> bool {
    let v = centered(plain, n);
    reduce(&v, p).is_zero()
}

/// Plaintext of a shared-back value as a signed field element.
pub fn decode_share_sum(plain: &BigUint, field: &Field) -> BigInt {
    field.signed(&(plain % field.modulus()))
}

pub fn write_partials(pk: &PublicKey, parts: &[PartialDecryption], w: &mut Writer) {
    w.u32(parts.len() as u32);
    for p in parts {
        w.u16(p.index).uint_fixed(&p.value, pk.ct_width());
    }
}

pub fn read_partials(pk: &PublicKey, r: &mut Reader<'_>, expected: usize, index: u16) -> Result<Vec<PartialDecryption>, ProtocolError> {
    if r.u32()? as usize != expected {
        return Err(CodecError::Invalid("partial decryption count").into());
    }
    (0..expected)
        .map(|_| {
            let i = r.u16()?;
            let value = r.uint_fixed(pk.ct_width())?;
            if i != index || value.is_zero() || &value >= pk.nn() || !value.gcd(pk.n()).is_one() {
                return Err(CodecError::Invalid("partial decryption").into());
            }
            Ok(PartialDecryption { index: i, value })
        })
        .collect()
}
