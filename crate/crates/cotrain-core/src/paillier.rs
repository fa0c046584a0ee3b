//! Paillier encryption with `g = N + 1`, additive m-of-m threshold decryption,
//! and the ring-Pedersen parameters that the interval proofs commit under.
//!
//! Two encryption forms coexist. [`encrypt`] is the textbook `g^v · r^N`.
//! Protocol messages use [`encrypt_short`], `g^v · h^s` with `h = (h₀²)^N` and
//! a short exponent `s`, which keeps nonces as plain integers so proofs can
//! combine them linearly and lets `h^s` use a precomputed table.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::RngCore;

use crate::arith::{self, random_bits, random_below, random_unit, FixedBase};
use crate::codec::{CodecError, Reader, Writer};

const KEY_VERSION: u32 = 1;
const TABLE_WINDOW: u32 = 6;
/// Extra bits allowed on nonces that come out of homomorphic arithmetic.
const NONCE_HEADROOM: u64 = 512;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PaillierError {
    #[error("need at least one party")]
    NoParties,
    #[error("modulus must have at least 1024 bits")]
    ModulusTooSmall,
    #[error("randomness is not a unit mod N")]
    NotUnit,
    #[error("ciphertext scales differ: {0} vs {1}")]
    ScaleMismatch(u16, u16),
    #[error("expected {expected} partial decryptions, got {got}")]
    MissingPartials { expected: usize, got: usize },
    #[error("duplicate or out-of-range partial index {0}")]
    BadPartialIndex(u16),
    #[error("combined value is not of the form 1 + mN")]
    CombineFailed,
    #[error("ciphertext is not a unit below N²")]
    InvalidCiphertext,
    #[error("encoding: {0}")]
    Codec(#[from] CodecError),
}

#[derive(Debug)]
struct PkInner {
    n: BigUint,
    nn: BigUint,
    h: BigUint,
    ped_s: BigUint,
    ped_t: BigUint,
    nonce_bits: u64,
    h_table: FixedBase,
    s_table: FixedBase,
    t_table: FixedBase,
}

/// Public key plus precomputed exponentiation tables; cheap to clone.
#[derive(Debug, Clone)]
pub struct PublicKey {
    inner: Arc<PkInner>,
}

impl PartialEq for PublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self.h() == other.h()
            && self.ped_s() == other.ped_s()
            && self.ped_t() == other.ped_t()
    }
}

impl Eq for PublicKey {}

impl PublicKey {
    pub fn from_parts(n: BigUint, h: BigUint, ped_s: BigUint, ped_t: BigUint) -> Self {
        let nn = &n * &n;
        let nbits = n.bits();
        let nonce_bits = nbits.div_ceil(2);
        let h_table = FixedBase::new(&h, &nn, nonce_bits + NONCE_HEADROOM + 256, TABLE_WINDOW);
        let ped_bits = nbits + 512;
        let s_table = FixedBase::new(&ped_s, &n, ped_bits, TABLE_WINDOW);
        let t_table = FixedBase::new(&ped_t, &n, ped_bits, TABLE_WINDOW);
        Self {
            inner: Arc::new(PkInner { n, nn, h, ped_s, ped_t, nonce_bits, h_table, s_table, t_table }),
        }
    }

    pub fn n(&self) -> &BigUint {
        &self.inner.n
    }

    pub fn nn(&self) -> &BigUint {
        &self.inner.nn
    }

    pub fn h(&self) -> &BigUint {
        &self.inner.h
    }

    pub fn ped_s(&self) -> &BigUint {
        &self.inner.ped_s
    }

    pub fn ped_t(&self) -> &BigUint {
        &self.inner.ped_t
    }

    pub fn bits(&self) -> u64 {
        self.inner.n.bits()
    }

    /// Bit length of fresh short-form nonces.
    pub fn nonce_bits(&self) -> u64 {
        self.inner.nonce_bits
    }

    /// Byte width of a serialized element of `Z_{N²}`.
    pub fn ct_width(&self) -> usize {
        self.inner.nn.bits().div_ceil(8) as usize
    }

    /// `g^v mod N²` for `g = N + 1`, i.e. `1 + vN`.
    pub fn g_pow(&self, v: &BigInt) -> BigUint {
        let vr = arith::reduce(v, &self.inner.n);
        (BigUint::one() + vr * &self.inner.n) % &self.inner.nn
    }

    pub fn h_pow(&self, s: &BigInt) -> BigUint {
        self.inner.h_table.pow_signed(s)
    }

    /// `S^a · T^b mod N`.
    pub fn ped_commit(&self, a: &BigInt, b: &BigInt) -> BigUint {
        (self.inner.s_table.pow_signed(a) * self.inner.t_table.pow_signed(b)) % &self.inner.n
    }

    /// Public bound on the nonces a prover is expected to hold. Proof masks
    /// are at least this wide so their size reveals nothing about a witness.
    pub fn witness_nonce_bits(&self) -> u64 {
        self.inner.nonce_bits + NONCE_HEADROOM
    }

    pub fn fresh_nonce<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigInt {
        BigInt::from(random_bits(rng, self.inner.nonce_bits))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_version(KEY_VERSION);
        w.uint(self.n()).uint(self.h()).uint(self.ped_s()).uint(self.ped_t());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PaillierError> {
        let mut r = Reader::versioned(bytes, KEY_VERSION)?;
        let n = r.uint()?;
        let h = r.uint()?;
        let s = r.uint()?;
        let t = r.uint()?;
        r.finish()?;
        let nn = &n * &n;
        if n.bits() < 16 || h >= nn || s >= n || t >= n {
            return Err(CodecError::Invalid("public key elements out of range").into());
        }
        Ok(Self::from_parts(n, h, s, t))
    }

    /// Parses and validates a ciphertext element.
    pub fn check_ct(&self, c: &BigUint) -> Result<(), PaillierError> {
        if c.is_zero() || c >= self.nn() || !c.gcd(self.n()).is_one() {
            return Err(PaillierError::InvalidCiphertext);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub c: BigUint,
    pub scale: u16,
}

impl Ciphertext {
    /// The deterministic encryption of zero, `1`.
    pub fn one() -> Self {
        Self { c: BigUint::one(), scale: 0 }
    }

    pub fn with_scale(mut self, scale: u16) -> Self {
        self.scale = scale;
        self
    }

    pub fn write(&self, pk: &PublicKey, w: &mut Writer) {
        w.u16(self.scale).uint_fixed(&self.c, pk.ct_width());
    }

    pub fn read(pk: &PublicKey, r: &mut Reader<'_>) -> Result<Self, PaillierError> {
        let scale = r.u16()?;
        let c = r.uint_fixed(pk.ct_width())?;
        pk.check_ct(&c)?;
        Ok(Self { c, scale })
    }
}

/// Full decryption key. Only the dealer and test oracles hold it.
#[derive(Debug, Clone)]
pub struct PrivateKey {
    pub p: BigUint,
    pub q: BigUint,
    lambda: BigUint,
    mu: BigUint,
}

impl PrivateKey {
    fn new(p: BigUint, q: BigUint, n: &BigUint) -> Self {
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        let mu = lambda.modinv(n).expect("gcd(λ, N) = 1 for balanced primes");
        Self { p, q, lambda, mu }
    }

    pub fn decrypt(&self, pk: &PublicKey, ct: &Ciphertext) -> BigUint {
        let u = ct.c.modpow(&self.lambda, pk.nn());
        let l = (u - 1u32) / pk.n();
        (l * &self.mu) % pk.n()
    }

    /// Plaintext as the centered representative in `(−N/2, N/2]`.
    pub fn decrypt_signed(&self, pk: &PublicKey, ct: &Ciphertext) -> BigInt {
        arith::centered(&self.decrypt(pk, ct), pk.n())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKeyShare {
    pub index: u16,
    pub share: BigUint,
}

impl SecretKeyShare {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_version(KEY_VERSION);
        w.u16(self.index).uint(&self.share);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PaillierError> {
        let mut r = Reader::versioned(bytes, KEY_VERSION)?;
        let index = r.u16()?;
        let share = r.uint()?;
        r.finish()?;
        Ok(Self { index, share })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u16,
    pub value: BigUint,
}

/// Everything the dealer produces for the encryption layer.
#[derive(Debug, Clone)]
pub struct KeyMaterial {
    pub pk: PublicKey,
    pub shares: Vec<SecretKeyShare>,
    pub secret: PrivateKey,
}

pub fn keygen_dealer<R: RngCore + ?Sized>(
    m: usize,
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, Vec<SecretKeyShare>), PaillierError> {
    let km = keygen_dealer_full(m, bits, rng)?;
    Ok((km.pk, km.shares))
}

pub fn keygen_dealer_full<R: RngCore + ?Sized>(m: usize, bits: u64, rng: &mut R) -> Result<KeyMaterial, PaillierError> {
    if bits < 1024 {
        return Err(PaillierError::ModulusTooSmall);
    }
    if m == 0 {
        return Err(PaillierError::NoParties);
    }
    let half = bits / 2;
    loop {
        let p = arith::gen_safe_prime(rng, half);
        let q = arith::gen_safe_prime(rng, bits - half);
        if p != q && (&p * &q).bits() == bits {
            return keygen_from_primes(p, q, m, rng);
        }
    }
}

/// Builds key material from two safe primes, e.g. cached test fixtures.
pub fn keygen_from_primes<R: RngCore + ?Sized>(
    p: BigUint,
    q: BigUint,
    m: usize,
    rng: &mut R,
) -> Result<KeyMaterial, PaillierError> {
    if m == 0 {
        return Err(PaillierError::NoParties);
    }
    let n = &p * &q;
    let nn = &n * &n;
    let secret = PrivateKey::new(p.clone(), q.clone(), &n);

    let h0 = random_unit(rng, &n);
    let h = (&h0 * &h0).modpow(&n, &nn);

    let order = ((&p - 1u32) >> 1) * ((&q - 1u32) >> 1);
    let tau = random_unit(rng, &n);
    let ped_t = (&tau * &tau) % &n;
    let exp = random_below(rng, &order);
    let ped_s = ped_t.modpow(&exp, &n);

    // d ≡ 0 (mod λ), d ≡ 1 (mod N); shares are uniform modulo Nλ, which
    // every ciphertext's order divides.
    let d = &secret.lambda * &secret.mu;
    let modulus = &n * &secret.lambda;
    let mut shares = Vec::with_capacity(m);
    let mut acc = BigUint::zero();
    for i in 0..m - 1 {
        let s = random_below(rng, &modulus);
        acc += &s;
        shares.push(SecretKeyShare { index: i as u16, share: s });
    }
    let last = (&d + &modulus * (m as u32) - (&acc % &modulus)) % &modulus;
    shares.push(SecretKeyShare { index: (m - 1) as u16, share: last });

    let pk = PublicKey::from_parts(n, h, ped_s, ped_t);
    Ok(KeyMaterial { pk, shares, secret })
}

/// `g^v · r^N mod N²`.
pub fn encrypt(pk: &PublicKey, v: &BigUint, r: &BigUint) -> Result<Ciphertext, PaillierError> {
    if r.is_zero() || !r.gcd(pk.n()).is_one() {
        return Err(PaillierError::NotUnit);
    }
    let gv = pk.g_pow(&BigInt::from(v.clone()));
    let rn = r.modpow(pk.n(), pk.nn());
    Ok(Ciphertext { c: (gv * rn) % pk.nn(), scale: 0 })
}

/// `g^v · h^s mod N²` for a signed plaintext and nonce.
pub fn encrypt_short(pk: &PublicKey, v: &BigInt, s: &BigInt) -> Ciphertext {
    Ciphertext { c: (pk.g_pow(v) * pk.h_pow(s)) % pk.nn(), scale: 0 }
}

/// Short-form encryption under a fresh nonce, which is returned for proofs.
pub fn encrypt_rng<R: RngCore + ?Sized>(pk: &PublicKey, v: &BigInt, rng: &mut R) -> (Ciphertext, BigInt) {
    let s = pk.fresh_nonce(rng);
    (encrypt_short(pk, v, &s), s)
}

pub fn add_ct(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, PaillierError> {
    if a.scale != b.scale {
        return Err(PaillierError::ScaleMismatch(a.scale, b.scale));
    }
    Ok(Ciphertext { c: (&a.c * &b.c) % pk.nn(), scale: a.scale })
}

pub fn sub_ct(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, PaillierError> {
    if a.scale != b.scale {
        return Err(PaillierError::ScaleMismatch(a.scale, b.scale));
    }
    let inv = b.c.modinv(pk.nn()).ok_or(PaillierError::InvalidCiphertext)?;
    Ok(Ciphertext { c: (&a.c * inv) % pk.nn(), scale: a.scale })
}

/// Adds a public plaintext in place of an encryption with zero randomness.
pub fn add_plain(pk: &PublicKey, a: &Ciphertext, v: &BigInt) -> Ciphertext {
    Ciphertext { c: (&a.c * pk.g_pow(v)) % pk.nn(), scale: a.scale }
}

/// `c^k`; the result carries `c.scale + k_scale`.
pub fn scalar_mul_ct(pk: &PublicKey, c: &Ciphertext, k: &BigInt, k_scale: u16) -> Ciphertext {
    let p = c.c.modpow(k.magnitude(), pk.nn());
    let c2 = if k.sign() == Sign::Minus {
        p.modinv(pk.nn()).expect("ciphertexts are units")
    } else {
        p
    };
    Ciphertext { c: c2, scale: c.scale + k_scale }
}

/// Re-randomizes with a fresh short nonce.
pub fn blind<R: RngCore + ?Sized>(pk: &PublicKey, c: &Ciphertext, rng: &mut R) -> Ciphertext {
    let s = pk.fresh_nonce(rng);
    blind_with(pk, c, &s)
}

pub fn blind_with(pk: &PublicKey, c: &Ciphertext, s: &BigInt) -> Ciphertext {
    Ciphertext { c: (&c.c * pk.h_pow(s)) % pk.nn(), scale: c.scale }
}

pub fn partial_decrypt(pk: &PublicKey, share: &SecretKeyShare, c: &Ciphertext) -> PartialDecryption {
    PartialDecryption { index: share.index, value: c.c.modpow(&share.share, pk.nn()) }
}

/// Joint decryption from all `m` partials, in any order.
pub fn combine(pk: &PublicKey, partials: &[PartialDecryption], m: usize) -> Result<BigUint, PaillierError> {
    if partials.len() != m {
        return Err(PaillierError::MissingPartials { expected: m, got: partials.len() });
    }
    let mut seen = alloc::vec![false; m];
    let mut acc = BigUint::one();
    for p in partials {
        let i = p.index as usize;
        if i >= m || seen[i] {
            return Err(PaillierError::BadPartialIndex(p.index));
        }
        seen[i] = true;
        acc = (acc * &p.value) % pk.nn();
    }
    let t = acc - 1u32;
    let (l, rem) = t.div_rem(pk.n());
    if !rem.is_zero() {
        return Err(PaillierError::CombineFailed);
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkeys;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn three_party_roundtrip_and_threshold() {
        let km = testkeys::key_1024(3);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (ct, _) = encrypt_rng(&km.pk, &BigInt::from(42), &mut rng);
        let parts: Vec<_> = km.shares.iter().map(|s| partial_decrypt(&km.pk, s, &ct)).collect();
        assert_eq!(combine(&km.pk, &parts, 3).unwrap(), BigUint::from(42u32));
        let mut rev = parts.clone();
        rev.reverse();
        assert_eq!(combine(&km.pk, &rev, 3).unwrap(), BigUint::from(42u32));
        assert!(matches!(
            combine(&km.pk, &parts[..2], 3),
            Err(PaillierError::MissingPartials { .. })
        ));
        let dup = alloc::vec![parts[0].clone(), parts[0].clone(), parts[1].clone()];
        assert_eq!(combine(&km.pk, &dup, 3), Err(PaillierError::BadPartialIndex(0)));
        // Two real partials plus a stand-in for the absent one do not decrypt.
        let forged = alloc::vec![
            parts[0].clone(),
            parts[1].clone(),
            PartialDecryption { index: 2, value: BigUint::one() },
        ];
        assert_ne!(combine(&km.pk, &forged, 3).ok(), Some(BigUint::from(42u32)));
    }

    #[test]
    fn textbook_encryption() {
        let km = testkeys::key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let r1 = random_unit(&mut rng, pk.n());
        let r2 = random_unit(&mut rng, pk.n());
        let v = BigUint::from(1234u32);
        let c1 = encrypt(pk, &v, &r1).unwrap();
        let c2 = encrypt(pk, &v, &r2).unwrap();
        assert_ne!(c1, c2);
        assert_eq!(km.secret.decrypt(pk, &c1), v);
        assert_eq!(encrypt(pk, &v, &r1).unwrap(), c1);
        let zero = encrypt(pk, &BigUint::zero(), &r1).unwrap();
        assert!(km.secret.decrypt(pk, &zero).is_zero());
        assert_eq!(encrypt(pk, &v, &BigUint::zero()), Err(PaillierError::NotUnit));
        assert_eq!(encrypt(pk, &v, &km.secret.p), Err(PaillierError::NotUnit));
    }

    #[test]
    fn homomorphic_operations() {
        let km = testkeys::key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (a, _) = encrypt_rng(pk, &BigInt::from(2), &mut rng);
        let (b, _) = encrypt_rng(pk, &BigInt::from(3), &mut rng);
        let s = add_ct(pk, &a, &b).unwrap();
        assert_eq!(km.secret.decrypt(pk, &s), BigUint::from(5u32));
        let (z, _) = encrypt_rng(pk, &BigInt::zero(), &mut rng);
        assert_eq!(km.secret.decrypt(pk, &add_ct(pk, &a, &z).unwrap()), BigUint::from(2u32));
        assert_eq!(km.secret.decrypt(pk, &scalar_mul_ct(pk, &a, &BigInt::one(), 0)), BigUint::from(2u32));
        assert!(km.secret.decrypt(pk, &scalar_mul_ct(pk, &a, &BigInt::zero(), 0)).is_zero());
        let neg = scalar_mul_ct(pk, &b, &BigInt::from(-4), 1);
        assert_eq!(neg.scale, 1);
        assert_eq!(km.secret.decrypt_signed(pk, &neg), BigInt::from(-12));
        let d = sub_ct(pk, &a, &b).unwrap();
        assert_eq!(km.secret.decrypt_signed(pk, &d), BigInt::from(-1));
        let mismatch = add_ct(pk, &a, &b.clone().with_scale(2));
        assert_eq!(mismatch, Err(PaillierError::ScaleMismatch(0, 2)));
    }

    #[test]
    fn blinding_keeps_plaintext() {
        let km = testkeys::key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (a, _) = encrypt_rng(pk, &BigInt::from(99), &mut rng);
        let b1 = blind(pk, &a, &mut rng);
        let b2 = blind(pk, &b1, &mut rng);
        assert_ne!(a.c, b1.c);
        assert_eq!(km.secret.decrypt(pk, &b1), BigUint::from(99u32));
        assert_eq!(km.secret.decrypt(pk, &b2), BigUint::from(99u32));
    }

    #[test]
    fn serialization_roundtrip() {
        let km = testkeys::key_1024(2);
        let pk2 = PublicKey::from_bytes(&km.pk.to_bytes()).unwrap();
        assert_eq!(pk2, km.pk);
        let share = &km.shares[1];
        assert_eq!(&SecretKeyShare::from_bytes(&share.to_bytes()).unwrap(), share);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (ct, _) = encrypt_rng(&km.pk, &BigInt::from(-7), &mut rng);
        let mut w = Writer::new();
        ct.clone().with_scale(3).write(&km.pk, &mut w);
        let bytes = w.finish();
        assert_eq!(bytes.len(), 2 + km.pk.ct_width());
        let back = Ciphertext::read(&km.pk, &mut Reader::new(&bytes)).unwrap();
        assert_eq!(back, ct.with_scale(3));
    }

    #[test]
    fn rejects_small_modulus() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(keygen_dealer(2, 512, &mut rng).err(), Some(PaillierError::ModulusTooSmall));
    }
}
