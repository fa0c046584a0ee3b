//! Trusted-dealer offline material.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;

use super::{AuthShare, Field};
use crate::arith::random_bits;
use crate::codec::{CodecError, Reader, Writer};

const MATERIAL_VERSION: u32 = 1;
const MAX_ITEMS: usize = 1 << 24;

/// Beaver triple `(x, y, xy)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub x: AuthShare,
    pub y: AuthShare,
    pub z: AuthShare,
}

/// Truncation pair for a fixed shift `m`: a random `r = 2^m·r_hi + Σ 2^i·bᵢ`
/// shared as the high part and the individual low bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncPair {
    pub high: AuthShare,
    pub bits: Vec<AuthShare>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncPool {
    pub shift: u32,
    pub high_bits: u32,
    pub pairs: Vec<TruncPair>,
}

/// Mask for one input by a given owner. Only the owner learns `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputMask {
    pub share: AuthShare,
    pub value: Option<BigUint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncSpec {
    pub shift: u32,
    pub high_bits: u32,
    pub count: usize,
}

/// Demand computed by the protocol driver.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counts {
    pub triples: usize,
    pub trunc: Vec<TruncSpec>,
    /// Input masks per owner.
    pub input_masks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyMaterial {
    pub party: u16,
    pub parties: u16,
    pub modulus: BigUint,
    pub alpha_share: BigUint,
    pub triples: Vec<Triple>,
    pub trunc: Vec<TruncPool>,
    /// Indexed by owner.
    pub input_masks: Vec<Vec<InputMask>>,
}

struct Sharer<'a> {
    field: &'a Field,
    alpha: BigUint,
    m: usize,
    rng: ChaCha20Rng,
}

impl Sharer<'_> {
    fn share(&mut self, v: &BigUint) -> Vec<AuthShare> {
        let f = self.field;
        let mac = f.mul(&self.alpha, v);
        let mut out = Vec::with_capacity(self.m);
        let (mut vs, mut ms) = (BigUint::zero(), BigUint::zero());
        for _ in 1..self.m {
            let a = f.random(&mut self.rng);
            let g = f.random(&mut self.rng);
            vs = f.add(&vs, &a);
            ms = f.add(&ms, &g);
            out.push(AuthShare { value: a, mac: g, delta: BigUint::zero() });
        }
        out.insert(0, AuthShare { value: f.sub(v, &vs), mac: f.sub(&mac, &ms), delta: BigUint::zero() });
        out
    }
}

/// Generates material for `m` parties. Deterministic in `seed`.
pub fn dealer_generate(m: u16, p: &BigUint, counts: &Counts, seed: [u8; 32]) -> Vec<PartyMaterial> {
    assert!(m >= 1, "at least one party");
    let field = Field::new(p.clone());
    let mut rng = ChaCha20Rng::from_seed(seed);
    let alpha = field.random(&mut rng);
    let n = m as usize;
    let mut alpha_shares: Vec<BigUint> = (1..n).map(|_| field.random(&mut rng)).collect();
    let rest = alpha_shares.iter().fold(BigUint::zero(), |a, s| field.add(&a, s));
    alpha_shares.insert(0, field.sub(&alpha, &rest));

    let mut out: Vec<PartyMaterial> = (0..m)
        .map(|i| PartyMaterial {
            party: i,
            parties: m,
            modulus: p.clone(),
            alpha_share: alpha_shares[i as usize].clone(),
            triples: Vec::with_capacity(counts.triples),
            trunc: counts
                .trunc
                .iter()
                .map(|s| TruncPool { shift: s.shift, high_bits: s.high_bits, pairs: Vec::with_capacity(s.count) })
                .collect(),
            input_masks: (0..m).map(|_| Vec::with_capacity(counts.input_masks)).collect(),
        })
        .collect();
    let mut sh = Sharer { field: &field, alpha, m: n, rng };

    for _ in 0..counts.triples {
        let x = sh.field.random(&mut sh.rng);
        let y = sh.field.random(&mut sh.rng);
        let z = sh.field.mul(&x, &y);
        let (xs, ys, zs) = (sh.share(&x), sh.share(&y), sh.share(&z));
        for (i, ((x, y), z)) in xs.into_iter().zip(ys).zip(zs).enumerate() {
            out[i].triples.push(Triple { x, y, z });
        }
    }
    for (pool, spec) in counts.trunc.iter().enumerate() {
        for _ in 0..spec.count {
            let high = random_bits(&mut sh.rng, spec.high_bits as u64);
            let mut per_party: Vec<TruncPair> =
                sh.share(&high).into_iter().map(|high| TruncPair { high, bits: Vec::new() }).collect();
            for _ in 0..spec.shift {
                let b = BigUint::from(sh.rng.next_u32() & 1);
                for (i, s) in sh.share(&b).into_iter().enumerate() {
                    per_party[i].bits.push(s);
                }
            }
            for (i, pair) in per_party.into_iter().enumerate() {
                out[i].trunc[pool].pairs.push(pair);
            }
        }
    }
    for owner in 0..n {
        for _ in 0..counts.input_masks {
            let rho = sh.field.random(&mut sh.rng);
            for (i, share) in sh.share(&rho).into_iter().enumerate() {
                let value = (i == owner).then(|| rho.clone());
                out[i].input_masks[owner].push(InputMask { share, value });
            }
        }
    }
    out
}

fn write_share(w: &mut Writer, s: &AuthShare, width: usize) {
    debug_assert!(s.delta.is_zero());
    w.uint_fixed(&s.value, width).uint_fixed(&s.mac, width);
}

fn read_share(r: &mut Reader<'_>, field: &Field) -> Result<AuthShare, CodecError> {
    let width = field.byte_len();
    let mut elem = || -> Result<BigUint, CodecError> {
        let v = r.uint_fixed(width)?;
        if &v >= field.modulus() {
            return Err(CodecError::Invalid("field element out of range"));
        }
        Ok(v)
    };
    Ok(AuthShare { value: elem()?, mac: elem()?, delta: BigUint::zero() })
}

impl PartyMaterial {
    pub fn field(&self) -> Field {
        Field::new(self.modulus.clone())
    }

    /// Versioned binary encoding with a counts header.
    pub fn to_bytes(&self) -> Vec<u8> {
        let field = self.field();
        let width = field.byte_len();
        let mut w = Writer::with_version(MATERIAL_VERSION);
        w.u16(self.party).u16(self.parties).uint(&self.modulus);
        w.u32(self.triples.len() as u32);
        w.u32(self.trunc.len() as u32);
        for pool in &self.trunc {
            w.u32(pool.shift).u32(pool.high_bits).u32(pool.pairs.len() as u32);
        }
        for masks in &self.input_masks {
            w.u32(masks.len() as u32);
        }
        w.uint_fixed(&self.alpha_share, width);
        for t in &self.triples {
            for s in [&t.x, &t.y, &t.z] {
                write_share(&mut w, s, width);
            }
        }
        for pool in &self.trunc {
            for pair in &pool.pairs {
                write_share(&mut w, &pair.high, width);
                for b in &pair.bits {
                    write_share(&mut w, b, width);
                }
            }
        }
        for masks in &self.input_masks {
            for mask in masks {
                write_share(&mut w, &mask.share, width);
                match &mask.value {
                    Some(v) => w.u8(1).uint_fixed(v, width),
                    None => w.u8(0),
                };
            }
        }
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::versioned(data, MATERIAL_VERSION)?;
        let party = r.u16()?;
        let parties = r.u16()?;
        if parties == 0 || party >= parties {
            return Err(CodecError::Invalid("party index"));
        }
        let modulus = r.uint()?;
        if modulus.bits() < 8 {
            return Err(CodecError::Invalid("modulus"));
        }
        let field = Field::new(modulus.clone());
        let n_triples = r.count(MAX_ITEMS)?;
        let n_pools = r.count(64)?;
        let mut specs = Vec::with_capacity(n_pools);
        for _ in 0..n_pools {
            let shift = r.u32()?;
            let high_bits = r.u32()?;
            if shift as u64 + high_bits as u64 >= field.bits() {
                return Err(CodecError::Invalid("truncation pool width"));
            }
            specs.push(TruncSpec { shift, high_bits, count: r.count(MAX_ITEMS)? });
        }
        let mut mask_counts = Vec::with_capacity(parties as usize);
        for _ in 0..parties {
            mask_counts.push(r.count(MAX_ITEMS)?);
        }
        let alpha_share = r.uint_fixed(field.byte_len())?;
        if alpha_share >= modulus {
            return Err(CodecError::Invalid("alpha share"));
        }
        let mut triples = Vec::with_capacity(n_triples);
        for _ in 0..n_triples {
            triples.push(Triple { x: read_share(&mut r, &field)?, y: read_share(&mut r, &field)?, z: read_share(&mut r, &field)? });
        }
        let mut trunc = Vec::with_capacity(n_pools);
        for spec in specs {
            let mut pairs = Vec::with_capacity(spec.count);
            for _ in 0..spec.count {
                let high = read_share(&mut r, &field)?;
                let bits = (0..spec.shift).map(|_| read_share(&mut r, &field)).collect::<Result<_, _>>()?;
                pairs.push(TruncPair { high, bits });
            }
            trunc.push(TruncPool { shift: spec.shift, high_bits: spec.high_bits, pairs });
        }
        let mut input_masks = Vec::with_capacity(parties as usize);
        for (owner, count) in mask_counts.into_iter().enumerate() {
            let mut masks = Vec::with_capacity(count);
            for _ in 0..count {
                let share = read_share(&mut r, &field)?;
                let value = match r.u8()? {
                    0 => None,
                    1 if owner == party as usize => Some(r.uint_fixed(field.byte_len())?),
                    _ => return Err(CodecError::Invalid("input mask flag")),
                };
                masks.push(InputMask { share, value });
            }
            input_masks.push(masks);
        }
        r.finish()?;
        Ok(Self { party, parties, modulus, alpha_share, triples, trunc, input_masks })
    }

    /// Every mask this party owns must carry its value.
    pub fn owns_masks(&self) -> bool {
        self.input_masks[self.party as usize].iter().all(|m| m.value.is_some())
    }
}

/// Reconstructs `α` from every party's material. Test and dealer use only.
pub fn reconstruct_alpha(materials: &[PartyMaterial]) -> BigUint {
    let field = materials[0].field();
    materials.iter().fold(BigUint::zero(), |a, m| field.add(&a, &m.alpha_share))
}

/// Value of a truncation pair's random `r` from every party's view.
pub fn reconstruct_trunc_value(pairs: &[&TruncPair], shift: u32, field: &Field) -> (BigUint, BigUint) {
    let sum = |f: &dyn Fn(&TruncPair) -> &BigUint| pairs.iter().fold(BigUint::zero(), |a, p| field.add(&a, f(p)));
    let high = sum(&|p| &p.high.value);
    let mut low = BigUint::zero();
    for i in 0..shift as usize {
        let b = pairs.iter().fold(BigUint::zero(), |a, p| field.add(&a, &p.bits[i].value));
        if b.is_one() {
            low |= BigUint::one() << i;
        }
    }
    (high, low)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::default_mpc_modulus;
    use crate::mpc::reconstruct;
    use alloc::vec;

    fn counts() -> Counts {
        Counts { triples: 100, trunc: vec![TruncSpec { shift: 8, high_bits: 20, count: 5 }], input_masks: 3 }
    }

    #[test]
    fn triples_bits_and_masks_reconstruct() {
        let p = default_mpc_modulus();
        let field = Field::new(p.clone());
        let mats = dealer_generate(3, &p, &counts(), [7; 32]);
        let alpha = reconstruct_alpha(&mats);
        for k in 0..100 {
            let get = |f: &dyn Fn(&Triple) -> &AuthShare| -> BigUint {
                let v: Vec<AuthShare> = mats.iter().map(|m| f(&m.triples[k]).clone()).collect();
                reconstruct(&v, &alpha, &field).expect("mac")
            };
            let (x, y, z) = (get(&|t| &t.x), get(&|t| &t.y), get(&|t| &t.z));
            assert_eq!(field.mul(&x, &y), z);
        }
        for k in 0..5 {
            let pairs: Vec<&TruncPair> = mats.iter().map(|m| &m.trunc[0].pairs[k]).collect();
            for i in 0..8 {
                let v: Vec<AuthShare> = pairs.iter().map(|p| p.bits[i].clone()).collect();
                let b = reconstruct(&v, &alpha, &field).expect("mac");
                assert!(b <= BigUint::one());
            }
            let (high, _) = reconstruct_trunc_value(&pairs, 8, &field);
            assert!(high.bits() <= 20);
        }
        for owner in 0..3 {
            for k in 0..3 {
                let v: Vec<AuthShare> = mats.iter().map(|m| m.input_masks[owner][k].share.clone()).collect();
                let rho = reconstruct(&v, &alpha, &field).unwrap();
                assert_eq!(mats[owner].input_masks[owner][k].value.as_ref(), Some(&rho));
                assert!(mats.iter().enumerate().all(|(i, m)| (i == owner) == m.input_masks[owner][k].value.is_some()));
            }
        }
    }

    #[test]
    fn deterministic_and_serializable() {
        let p = default_mpc_modulus();
        let a = dealer_generate(2, &p, &counts(), [1; 32]);
        let b = dealer_generate(2, &p, &counts(), [1; 32]);
        assert_eq!(a, b);
        assert_ne!(a, dealer_generate(2, &p, &counts(), [2; 32]));
        for m in &a {
            let bytes = m.to_bytes();
            assert_eq!(&PartyMaterial::from_bytes(&bytes).unwrap(), m);
            assert!(PartyMaterial::from_bytes(&bytes[..bytes.len() - 1]).is_err());
            assert!(m.owns_masks());
        }
    }
}
