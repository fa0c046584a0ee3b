//! Online phase: one session per party, advancing in broadcast rounds.
//!
//! Every round message starts with a 15-byte header (round index, op tag,
//! sender, and a digest of the material cursor) followed by fixed-width
//! big-endian field elements. A peer whose header disagrees is out of
//! lockstep and the session stops.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;
use sha2::{Digest, Sha256};

use super::dealer::{PartyMaterial, TruncPair};
use super::{AuthShare, Field, MpcError};

const HEADER_LEN: usize = 4 + 1 + 2 + 8;

/// Broadcast abstraction. `exchange` sends this party's payload to every
/// peer and returns all payloads indexed by sender, including our own.
pub trait RoundChannel {
    fn exchange(&mut self, payload: Vec<u8>) -> Result<Vec<Vec<u8>>, MpcError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum OpTag {
    Open = 1,
    Input = 2,
    MacCommit = 3,
    MacOpen = 4,
    MacLocate = 5,
    Alpha = 6,
}

/// A value entered through [`MpcSession::input`]: the owner broadcast
/// `epsilon = x − ρ` for the dealer mask `ρ` at `mask_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputRecord {
    pub owner: u16,
    pub mask_index: usize,
    pub epsilon: BigUint,
}

#[derive(Debug, Clone)]
struct RoundCheck {
    first_opening: usize,
    value: BigUint,
    mac: BigUint,
}

#[derive(Debug, Clone, Default)]
struct Cursor {
    triples: usize,
    trunc: Vec<usize>,
    masks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CheckState {
    Open,
    Passed,
    Failed,
}

pub struct MpcSession<C> {
    field: Field,
    material: PartyMaterial,
    cursor: Cursor,
    round: u32,
    openings: usize,
    checks: Vec<RoundCheck>,
    inputs: Vec<InputRecord>,
    state: CheckState,
    alpha: Option<BigUint>,
    rng: ChaCha20Rng,
    channel: C,
}

impl<C: RoundChannel> MpcSession<C> {
    /// `seed` feeds the local randomness used for commitment salts.
    pub fn new(material: PartyMaterial, channel: C, seed: [u8; 32]) -> Self {
        let field = material.field();
        let cursor = Cursor {
            triples: 0,
            trunc: vec![0; material.trunc.len()],
            masks: vec![0; material.parties as usize],
        };
        Self {
            field,
            material,
            cursor,
            round: 0,
            openings: 0,
            checks: Vec::new(),
            inputs: Vec::new(),
            state: CheckState::Open,
            alpha: None,
            rng: ChaCha20Rng::from_seed(seed),
            channel,
        }
    }

    pub fn party(&self) -> u16 {
        self.material.party
    }

    pub fn parties(&self) -> u16 {
        self.material.parties
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn channel_mut(&mut self) -> &mut C {
        &mut self.channel
    }

    pub fn into_channel(self) -> C {
        self.channel
    }

    pub fn inputs(&self) -> &[InputRecord] {
        &self.inputs
    }

    pub fn opening_count(&self) -> usize {
        self.openings
    }

    /// Material items not yet consumed.
    pub fn leftover(&self) -> usize {
        let m = &self.material;
        let trunc: usize = m.trunc.iter().zip(&self.cursor.trunc).map(|(p, c)| p.pairs.len() - c).sum();
        let masks: usize = m.input_masks.iter().zip(&self.cursor.masks).map(|(v, c)| v.len() - c).sum();
        m.triples.len() - self.cursor.triples + trunc + masks
    }

    /// Dealer mask `mask_index` of `owner`, as held by this party.
    pub fn mask_share(&self, owner: u16, mask_index: usize) -> Option<&AuthShare> {
        self.material.input_masks.get(owner as usize)?.get(mask_index).map(|m| &m.share)
    }

    /// Shares the public constant `c` (no communication).
    pub fn constant(&self, c: &BigUint) -> AuthShare {
        AuthShare::zero().add_public(c, self.party(), &self.field)
    }

    pub fn add_public(&self, x: &AuthShare, c: &BigUint) -> AuthShare {
        x.add_public(c, self.party(), &self.field)
    }

    fn cursor_digest(&self) -> [u8; 8] {
        let mut h = Sha256::new();
        h.update((self.cursor.triples as u64).to_be_bytes());
        for c in self.cursor.trunc.iter().chain(&self.cursor.masks) {
            h.update((*c as u64).to_be_bytes());
        }
        let d = h.finalize();
        let mut out = [0u8; 8];
        out.copy_from_slice(&d[..8]);
        out
    }

    fn header(&self, op: OpTag, sender: u16) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..4].copy_from_slice(&self.round.to_be_bytes());
        h[4] = op as u8;
        h[5..7].copy_from_slice(&sender.to_be_bytes());
        h[7..].copy_from_slice(&self.cursor_digest());
        h
    }

    /// One broadcast round carrying raw bytes. Returns each sender's body and
    /// a digest of the whole round.
    fn round_raw(&mut self, op: OpTag, body: &[u8]) -> Result<(Vec<Vec<u8>>, [u8; 32]), MpcError> {
        let mut msg = Vec::with_capacity(HEADER_LEN + body.len());
        msg.extend_from_slice(&self.header(op, self.party()));
        msg.extend_from_slice(body);
        let all = self.channel.exchange(msg)?;
        if all.len() != self.parties() as usize {
            return Err(MpcError::Channel("wrong number of round messages".to_string()));
        }
        let mut digest = Sha256::new();
        digest.update(self.round.to_be_bytes());
        let mut bodies = Vec::with_capacity(all.len());
        for (j, m) in all.into_iter().enumerate() {
            let j16 = j as u16;
            if m.len() < HEADER_LEN {
                return Err(MpcError::Malformed { party: j16 });
            }
            if m[..HEADER_LEN] != self.header(op, j16) {
                return Err(MpcError::Desync { party: j16 });
            }
            digest.update((m.len() as u64).to_be_bytes());
            digest.update(&m);
            bodies.push(m[HEADER_LEN..].to_vec());
        }
        self.round += 1;
        Ok((bodies, digest.finalize().into()))
    }

    /// One round of field elements; every sender must send `counts[j]` of them.
    fn round_elems(
        &mut self,
        op: OpTag,
        mine: &[BigUint],
        counts: &[usize],
    ) -> Result<(Vec<Vec<BigUint>>, [u8; 32]), MpcError> {
        let width = self.field.byte_len();
        let mut body = Vec::with_capacity(mine.len() * width);
        for v in mine {
            let b = v.to_bytes_be();
            body.resize(body.len() + width - b.len(), 0);
            body.extend_from_slice(&b);
        }
        let (bodies, digest) = self.round_raw(op, &body)?;
        let mut out = Vec::with_capacity(bodies.len());
        for (j, b) in bodies.iter().enumerate() {
            if b.len() != counts[j] * width {
                return Err(MpcError::Malformed { party: j as u16 });
            }
            let mut elems = Vec::with_capacity(counts[j]);
            for chunk in b.chunks_exact(width) {
                let v = BigUint::from_bytes_be(chunk);
                if &v >= self.field.modulus() {
                    return Err(MpcError::Malformed { party: j as u16 });
                }
                elems.push(v);
            }
            out.push(elems);
        }
        Ok((out, digest))
    }

    /// Opens shares. MACs are only checked later by [`Self::mac_check`].
    pub fn open(&mut self, xs: &[AuthShare]) -> Result<Vec<BigUint>, MpcError> {
        if self.state != CheckState::Open {
            return Err(MpcError::Invalid("session already checked"));
        }
        let mine: Vec<BigUint> = xs.iter().map(|x| x.value.clone()).collect();
        let counts = vec![xs.len(); self.parties() as usize];
        let (all, digest) = self.round_elems(OpTag::Open, &mine, &counts)?;
        let f = &self.field;
        let mut values = vec![BigUint::zero(); xs.len()];
        for shares in &all {
            for (v, s) in values.iter_mut().zip(shares) {
                *v = f.add(v, s);
            }
        }
        let mut coeffs = ChaCha20Rng::from_seed(digest);
        let mut check = RoundCheck { first_opening: self.openings, value: BigUint::zero(), mac: BigUint::zero() };
        for (x, v) in xs.iter().zip(&values) {
            let r = f.random(&mut coeffs);
            check.value = f.add(&check.value, &f.mul(&r, &f.add(v, &x.delta)));
            check.mac = f.add(&check.mac, &f.mul(&r, &x.mac));
        }
        self.openings += xs.len();
        self.checks.push(check);
        Ok(values)
    }

    /// Every party inputs `counts[owner]` values; `mine` are this party's.
    /// Returns the shared inputs grouped by owner.
    pub fn input(&mut self, counts: &[usize], mine: &[BigUint]) -> Result<Vec<Vec<AuthShare>>, MpcError> {
        let me = self.party() as usize;
        if counts.len() != self.parties() as usize || counts[me] != mine.len() {
            return Err(MpcError::Invalid("input counts"));
        }
        for (owner, &n) in counts.iter().enumerate() {
            if self.cursor.masks[owner] + n > self.material.input_masks[owner].len() {
                return Err(MpcError::MaterialExhausted("input masks"));
            }
        }
        let start = self.cursor.masks[me];
        let mut eps = Vec::with_capacity(mine.len());
        for (k, x) in mine.iter().enumerate() {
            let rho = self.material.input_masks[me][start + k]
                .value
                .as_ref()
                .ok_or(MpcError::Invalid("own input mask value missing"))?;
            eps.push(self.field.sub(x, rho));
        }
        let (all, _) = self.round_elems(OpTag::Input, &eps, counts)?;
        let mut out = Vec::with_capacity(all.len());
        for (owner, eps) in all.into_iter().enumerate() {
            let base = self.cursor.masks[owner];
            let mut shares = Vec::with_capacity(eps.len());
            for (k, e) in eps.into_iter().enumerate() {
                let rho = &self.material.input_masks[owner][base + k].share;
                shares.push(rho.add_public(&e, self.material.party, &self.field));
                self.inputs.push(InputRecord { owner: owner as u16, mask_index: base + k, epsilon: e });
            }
            self.cursor.masks[owner] += shares.len();
            out.push(shares);
        }
        Ok(out)
    }

    /// Single-owner convenience around [`Self::input`].
    pub fn share_input(&mut self, owner: u16, values: Option<&[BigUint]>, count: usize) -> Result<Vec<AuthShare>, MpcError> {
        let mut counts = vec![0; self.parties() as usize];
        *counts.get_mut(owner as usize).ok_or(MpcError::Invalid("owner"))? = count;
        let mine = if owner == self.party() { values.ok_or(MpcError::Invalid("owner must supply values"))? } else { &[] };
        Ok(self.input(&counts, mine)?.swap_remove(owner as usize))
    }

    /// Beaver multiplication of each pair, in one round.
    pub fn mul(&mut self, pairs: &[(AuthShare, AuthShare)]) -> Result<Vec<AuthShare>, MpcError> {
        if self.cursor.triples + pairs.len() > self.material.triples.len() {
            return Err(MpcError::MaterialExhausted("triples"));
        }
        let base = self.cursor.triples;
        let f = self.field.clone();
        let mut masked = Vec::with_capacity(2 * pairs.len());
        for (k, (x, y)) in pairs.iter().enumerate() {
            let t = &self.material.triples[base + k];
            masked.push(x.sub(&t.x, &f));
            masked.push(y.sub(&t.y, &f));
        }
        self.cursor.triples += pairs.len();
        let opened = self.open(&masked)?;
        let mut out = Vec::with_capacity(pairs.len());
        for (k, de) in opened.chunks_exact(2).enumerate() {
            let t = &self.material.triples[base + k];
            let z = t.z.add(&t.y.mul_public(&de[0], &f), &f).add(&t.x.mul_public(&de[1], &f), &f);
            out.push(self.add_public(&z, &f.mul(&de[0], &de[1])));
        }
        Ok(out)
    }

    fn take_pairs(&mut self, shift: u32, n: usize) -> Result<Vec<TruncPair>, MpcError> {
        for (i, pool) in self.material.trunc.iter().enumerate() {
            if pool.shift == shift && self.cursor.trunc[i] + n <= pool.pairs.len() {
                let start = self.cursor.trunc[i];
                self.cursor.trunc[i] += n;
                return Ok(pool.pairs[start..start + n].to_vec());
            }
        }
        Err(MpcError::MaterialExhausted("truncation pairs"))
    }

    /// Signed floor division by `2^shift` for values in `[−2^(k−1), 2^(k−1))`.
    pub fn truncate(&mut self, xs: &[AuthShare], k: u32, shift: u32) -> Result<Vec<AuthShare>, MpcError> {
        if xs.is_empty() || shift == 0 {
            return Ok(xs.to_vec());
        }
        if k == 0 || u64::from(k) + 2 > self.field.bits() {
            return Err(MpcError::Invalid("truncation bound"));
        }
        let pairs = self.take_pairs(shift, xs.len())?;
        let f = self.field.clone();
        let two_m = f.pow2(shift as u64);
        if let Some(pool) = self.material.trunc.iter().find(|p| p.shift == shift) {
            if u64::from(shift) + u64::from(pool.high_bits) + 2 > f.bits() {
                return Err(MpcError::Invalid("truncation pool too wide"));
            }
        }
        let offset = f.pow2(k as u64 - 1);
        let lows: Vec<AuthShare> = pairs.iter().map(|p| compose_bits(&p.bits, &f)).collect();
        let masked: Vec<AuthShare> = xs
            .iter()
            .zip(&pairs)
            .zip(&lows)
            .map(|((x, p), low)| self.add_public(&x.add(&p.high.mul_public(&two_m, &f), &f).add(low, &f), &offset))
            .collect();
        let opened = self.open(&masked)?;
        let low_c: Vec<BigUint> = opened.iter().map(|c| c.mod_floor(&two_m)).collect();
        let bits: Vec<&[AuthShare]> = pairs.iter().map(|p| p.bits.as_slice()).collect();
        let lt = self.bit_less_than(&low_c, &bits)?;
        let inv = f.inv(&two_m).ok_or(MpcError::Invalid("2^shift not invertible"))?;
        let mut out = Vec::with_capacity(xs.len());
        for (((x, c), low), u) in xs.iter().zip(&low_c).zip(&lows).zip(&lt) {
            let rem = self.add_public(&u.mul_public(&two_m, &f).sub(low, &f), c);
            out.push(x.sub(&rem, &f).mul_public(&inv, &f));
        }
        Ok(out)
    }

    /// `[c < r]` for public `c` and bit-shared `r`, via a Sklansky prefix-OR
    /// from the most significant bit.
    fn bit_less_than(&mut self, cs: &[BigUint], bits: &[&[AuthShare]]) -> Result<Vec<AuthShare>, MpcError> {
        let f = self.field.clone();
        let one = BigUint::one();
        let m = bits.first().map_or(0, |b| b.len());
        // pre[t] holds bit m−1−t of c ⊕ r, then its prefix OR.
        let mut pre: Vec<Vec<AuthShare>> = cs
            .iter()
            .zip(bits)
            .map(|(c, b)| {
                (0..m)
                    .map(|t| {
                        let i = m - 1 - t;
                        if c.bit(i as u64) {
                            self.add_public(&b[i].neg(&f), &one)
                        } else {
                            b[i].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut level = 0;
        while (1usize << level) < m {
            let mut slots = Vec::new();
            let mut pairs = Vec::new();
            for (e, row) in pre.iter().enumerate() {
                for t in 0..m {
                    if t & (1 << level) != 0 {
                        let j = ((t >> level) << level) - 1;
                        slots.push((e, t));
                        pairs.push((row[t].clone(), row[j].clone()));
                    }
                }
            }
            let prods = self.mul(&pairs)?;
            for (((e, t), (a, b)), ab) in slots.into_iter().zip(pairs).zip(prods) {
                pre[e][t] = a.add(&b, &f).sub(&ab, &f);
            }
            level += 1;
        }
        let mut out = Vec::with_capacity(cs.len());
        for (c, row) in cs.iter().zip(&pre) {
            let mut acc = AuthShare::zero();
            for i in 0..m {
                if !c.bit(i as u64) {
                    let fi = &row[m - 1 - i];
                    let g = if i + 1 < m { fi.sub(&row[m - 2 - i], &f) } else { fi.clone() };
                    acc = acc.add(&g, &f);
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `[x < 0]` for `x ∈ [−2^(k−1), 2^(k−1))`.
    pub fn less_than_zero(&mut self, xs: &[AuthShare], k: u32) -> Result<Vec<AuthShare>, MpcError> {
        let f = self.field.clone();
        Ok(self.truncate(xs, k, k - 1)?.iter().map(|t| t.neg(&f)).collect())
    }

    /// `[x < c]` for public signed `c`; `x − c` must lie in `[−2^(k−1), 2^(k−1))`.
    pub fn less_than_public(&mut self, xs: &[AuthShare], c: &BigUint, k: u32) -> Result<Vec<AuthShare>, MpcError> {
        let neg_c = self.field.neg(c);
        let diffs: Vec<AuthShare> = xs.iter().map(|x| self.add_public(x, &neg_c)).collect();
        self.less_than_zero(&diffs, k)
    }

    /// `(a−κ)·[a>κ] + (a+κ)·[a<−κ]`, with `a ± κ` in `[−2^(k−1), 2^(k−1))`.
    pub fn soft_threshold(&mut self, xs: &[AuthShare], kappa: &BigUint, k: u32) -> Result<Vec<AuthShare>, MpcError> {
        let f = self.field.clone();
        let neg_kappa = f.neg(kappa);
        let below: Vec<AuthShare> = xs.iter().map(|a| self.add_public(a, &neg_kappa)).collect();
        let above: Vec<AuthShare> = xs.iter().map(|a| self.add_public(a, kappa)).collect();
        let mut cmp: Vec<AuthShare> = below.iter().map(|s| s.neg(&f)).collect();
        cmp.extend(above.iter().cloned());
        let bits = self.less_than_zero(&cmp, k)?;
        let (upper, lower) = bits.split_at(xs.len());
        let pairs: Vec<(AuthShare, AuthShare)> = below
            .iter()
            .cloned()
            .zip(upper.iter().cloned())
            .chain(above.iter().cloned().zip(lower.iter().cloned()))
            .collect();
        let prods = self.mul(&pairs)?;
        let (hi, lo) = prods.split_at(xs.len());
        Ok(hi.iter().zip(lo).map(|(a, b)| a.add(b, &f)).collect())
    }

    /// Batched check of every opening so far: commit to `σᵢ`, open, and
    /// require `Σσᵢ = 0`. On failure one more round locates the first bad
    /// opening round.
    pub fn mac_check(&mut self) -> Result<(), MpcError> {
        match self.state {
            CheckState::Passed => return Ok(()),
            CheckState::Failed => return Err(MpcError::MacCheck { index: None }),
            CheckState::Open => {}
        }
        let f = self.field.clone();
        let alpha_i = self.material.alpha_share.clone();
        let sigmas: Vec<BigUint> =
            self.checks.iter().map(|c| f.sub(&c.mac, &f.mul(&alpha_i, &c.value))).collect();
        let sigma = sigmas.iter().fold(BigUint::zero(), |a, s| f.add(&a, s));
        let mut salt = [0u8; 32];
        self.rng.fill_bytes(&mut salt);
        let width = f.byte_len();
        let mut opening = vec![0u8; width];
        let sb = sigma.to_bytes_be();
        opening[width - sb.len()..].copy_from_slice(&sb);
        opening.extend_from_slice(&salt);
        let commitment: [u8; 32] = Sha256::digest(&opening).into();

        let (commits, _) = self.round_raw(OpTag::MacCommit, &commitment)?;
        let (openings, _) = self.round_raw(OpTag::MacOpen, &opening)?;
        let mut total = BigUint::zero();
        for (j, (c, o)) in commits.iter().zip(&openings).enumerate() {
            if c.len() != 32 || o.len() != width + 32 || Sha256::digest(o).as_slice() != c.as_slice() {
                self.state = CheckState::Failed;
                return Err(MpcError::BadCommitment { party: j as u16 });
            }
            let s = BigUint::from_bytes_be(&o[..width]);
            if &s >= f.modulus() {
                self.state = CheckState::Failed;
                return Err(MpcError::Malformed { party: j as u16 });
            }
            total = f.add(&total, &s);
        }
        if total.is_zero() {
            self.state = CheckState::Passed;
            return Ok(());
        }
        self.state = CheckState::Failed;
        let counts = vec![sigmas.len(); self.parties() as usize];
        let (per_round, _) = self.round_elems(OpTag::MacLocate, &sigmas, &counts)?;
        let index = (0..sigmas.len())
            .find(|&r| !per_round.iter().fold(BigUint::zero(), |a, s| f.add(&a, &s[r])).is_zero())
            .map(|r| self.checks[r].first_opening);
        Err(MpcError::MacCheck { index })
    }

    /// Reconstructs `α`. Only allowed once the MAC check has passed.
    pub fn reveal_alpha(&mut self) -> Result<BigUint, MpcError> {
        if let Some(a) = &self.alpha {
            return Ok(a.clone());
        }
        if self.state != CheckState::Passed {
            return Err(MpcError::Invalid("alpha revealed before MAC check"));
        }
        let counts = vec![1; self.parties() as usize];
        let mine = [self.material.alpha_share.clone()];
        let (all, _) = self.round_elems(OpTag::Alpha, &mine, &counts)?;
        let f = &self.field;
        let alpha = all.iter().fold(BigUint::zero(), |a, s| f.add(&a, &s[0]));
        self.alpha = Some(alpha.clone());
        Ok(alpha)
    }
}

/// Beaver triples consumed by truncating one value by `shift` bits.
pub fn truncate_triples(shift: u32) -> usize {
    let m = shift as usize;
    let mut total = 0;
    let mut level = 0;
    while (1usize << level) < m {
        total += (0..m).filter(|t| t & (1 << level) != 0).count();
        level += 1;
    }
    total
}

fn compose_bits(bits: &[AuthShare], f: &Field) -> AuthShare {
    let mut acc = AuthShare::zero();
    for (i, b) in bits.iter().enumerate() {
        acc = acc.add(&b.mul_public(&f.pow2(i as u64), f), f);
    }
    acc
}
