//! Big-integer helpers shared by the cryptographic layers.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_core::RngCore;

/// Uniform integer in `[0, 2^bits)`.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = (nbytes as u64) * 8 - bits;
    buf[0] &= 0xffu8 >> excess;
    BigUint::from_bytes_be(&buf)
}

/// Uniform integer in `[0, bound)` by rejection sampling. `bound` must be positive.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "random_below: empty range");
    let bits = bound.bits();
    loop {
        let x = random_bits(rng, bits);
        if &x < bound {
            return x;
        }
    }
}

/// Uniform element of the multiplicative group mod `n`.
pub fn random_unit<R: RngCore + ?Sized>(rng: &mut R, n: &BigUint) -> BigUint {
    loop {
        let x = random_below(rng, n);
        if !x.is_zero() && x.gcd(n).is_one() {
            return x;
        }
    }
}

/// Uniform signed integer in `(-2^bits, 2^bits)`.
pub fn random_signed_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigInt {
    let mag = random_bits(rng, bits);
    let neg = rng.next_u32() & 1 == 1;
    let v = BigInt::from(mag);
    if neg {
        -v
    } else {
        v
    }
}

/// Representative of `x mod m` in `[0, m)`.
pub fn reduce(x: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from(m.clone());
    let r = x.mod_floor(&mi);
    r.to_biguint().expect("mod_floor is non-negative")
}

/// Centered representative of `x mod m` in `(-m/2, m/2]`.
pub fn centered(x: &BigUint, m: &BigUint) -> BigInt {
    let r = x % m;
    let half = m >> 1u32;
    if r > half {
        BigInt::from(r) - BigInt::from(m.clone())
    } else {
        BigInt::from(r)
    }
}

pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    a.modinv(m)
}

/// `base^exp mod m` for a signed exponent; `None` when the base is not invertible.
pub fn pow_signed(base: &BigUint, exp: &BigInt, m: &BigUint) -> Option<BigUint> {
    let p = base.modpow(exp.magnitude(), m);
    if exp.is_negative() {
        p.modinv(m)
    } else {
        Some(p)
    }
}

/// `Π baseᵢ^eᵢ mod m` for signed exponents, with a single inversion for the
/// negative part. `None` if a base with a negative exponent is not a unit.
pub fn multi_pow<'a>(
    terms: impl IntoIterator<Item = (&'a BigUint, &'a BigInt)>,
    m: &BigUint,
) -> Option<BigUint> {
    let mut pos = BigUint::one();
    let mut neg = BigUint::one();
    for (b, e) in terms {
        if e.is_zero() {
            continue;
        }
        let p = b.modpow(e.magnitude(), m);
        if e.is_negative() {
            neg = (neg * p) % m;
        } else {
            pos = (pos * p) % m;
        }
    }
    if neg.is_one() {
        return Some(pos % m);
    }
    Some((pos * neg.modinv(m)?) % m)
}

/// Bit length of the magnitude, with 0 for zero.
pub fn bits_signed(x: &BigInt) -> u64 {
    x.magnitude().bits()
}

pub fn pow2(bits: u64) -> BigUint {
    BigUint::one() << bits
}

pub fn ipow2(bits: u64) -> BigInt {
    BigInt::one() << bits
}

/// `floor(x / 2^k)` on signed integers.
pub fn floor_shr(x: &BigInt, k: u64) -> BigInt {
    // BigInt's shift rounds toward negative infinity.
    x >> k
}

/// Lossy conversion to `f64` that saturates instead of failing.
pub fn to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

fn small_primes(limit: u32) -> Vec<u32> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

const TRIAL_LIMIT: u32 = 2000;
const FIXED_BASES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn miller_rabin_round(n: &BigUint, n1: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

fn split_odd(n1: &BigUint) -> (BigUint, u64) {
    let s = n1.trailing_zeros().unwrap_or(0);
    (n1 >> s, s)
}

fn trial_division(n: &BigUint) -> Option<bool> {
    for p in small_primes(TRIAL_LIMIT) {
        let bp = BigUint::from(p);
        if n == &bp {
            return Some(true);
        }
        if (n % &bp).is_zero() {
            return Some(false);
        }
    }
    None
}

/// Miller–Rabin with random bases after trial division.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    if let Some(v) = trial_division(n) {
        return v;
    }
    let n1 = n - 1u32;
    let (d, s) = split_odd(&n1);
    let three = BigUint::from(3u32);
    let span = n - &three;
    for _ in 0..rounds {
        let a = random_below(rng, &span) + 2u32;
        if !miller_rabin_round(n, &n1, &d, s, &a) {
            return false;
        }
    }
    true
}

/// Deterministic Miller–Rabin over the first 24 prime bases. Used to validate
/// configured moduli where no RNG is at hand.
pub fn is_prime_fixed_bases(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    if let Some(v) = trial_division(n) {
        return v;
    }
    let n1 = n - 1u32;
    let (d, s) = split_odd(&n1);
    FIXED_BASES
        .iter()
        .all(|&a| miller_rabin_round(n, &n1, &d, s, &BigUint::from(a)))
}

/// Random prime with exactly `bits` bits and the two top bits set.
pub fn gen_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    assert!(bits >= 8);
    loop {
        let mut c = random_bits(rng, bits);
        c |= pow2(bits - 1) | pow2(bits - 2) | BigUint::one();
        if is_probable_prime(&c, 32, rng) {
            return c;
        }
    }
}

/// Random safe prime `p = 2q + 1` with exactly `bits` bits and top two bits set.
///
/// Candidates `q ≡ 11 (mod 12)` are walked incrementally while a residue table
/// over small primes sieves out any `q` or `2q + 1` with a small factor.
pub fn gen_safe_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    assert!(bits >= 16);
    let primes: Vec<u32> = small_primes(1 << 14).into_iter().filter(|&p| p > 3).collect();
    let two = BigUint::from(2u32);
    loop {
        let mut q = random_bits(rng, bits - 1);
        q |= pow2(bits - 2) | pow2(bits - 3);
        let rem = (&q % 12u32).to_u32().unwrap_or(0);
        q += (11 + 12 - rem) % 12;
        let mut residues: Vec<u32> = primes
            .iter()
            .map(|&p| (&q % p).to_u32().unwrap_or(0))
            .collect();
        let mut offset = 0u64;
        for _ in 0..4096 {
            let sieved = primes.iter().zip(residues.iter()).all(|(&p, &r)| {
                // q ≢ 0 and 2q + 1 ≢ 0 (mod p)
                r != 0 && r != (p - 1) / 2
            });
            if sieved {
                let cand_q = &q + offset;
                let cand_p = &cand_q * 2u32 + 1u32;
                if cand_p.bits() != bits {
                    break;
                }
                let fermat_q = two.modpow(&(&cand_q - 1u32), &cand_q).is_one();
                if fermat_q
                    && two.modpow(&(&cand_p - 1u32), &cand_p).is_one()
                    && is_probable_prime(&cand_q, 24, rng)
                    && is_probable_prime(&cand_p, 8, rng)
                {
                    return cand_p;
                }
            }
            offset += 12;
            for (r, &p) in residues.iter_mut().zip(primes.iter()) {
                *r = (*r + 12) % p;
            }
        }
    }
}

/// Square root of a non-negative integer, rounded down.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Write `n = a² + b²` for a prime `p ≡ 1 (mod 4)` by Cornacchia's algorithm.
fn cornacchia_prime<R: RngCore + ?Sized>(p: &BigUint, rng: &mut R) -> Option<(BigUint, BigUint)> {
    // A square root of -1 comes from any non-residue c: c^((p-1)/4).
    let e = (p - 1u32) >> 2;
    let p1 = p - 1u32;
    let half = (p - 1u32) >> 1;
    let mut root = None;
    for _ in 0..128 {
        let c = random_below(rng, &(p - 2u32)) + 2u32;
        if c.modpow(&half, p) == p1 {
            root = Some(c.modpow(&e, p));
            break;
        }
    }
    let mut a = p.clone();
    let mut b = root?;
    if b > half {
        b = p - b;
    }
    let limit = isqrt(p);
    while b > limit {
        let r = &a % &b;
        a = b;
        b = r;
    }
    let rest = p - &b * &b;
    let c = isqrt(&rest);
    if &c * &c == rest {
        Some((b, c))
    } else {
        None
    }
}

/// Decompose `n` into four squares (Lagrange), via the Rabin–Shallit
/// randomized reduction to a prime `≡ 1 (mod 4)`.
pub fn four_squares<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> [BigUint; 4] {
    if n.bits() <= 20 {
        return four_squares_small(n.to_u64().unwrap_or(0));
    }
    // For n ≡ 0 (mod 4) no residual n − x₁² − x₂² is ≡ 1 (mod 4).
    if (n & BigUint::from(3u32)).is_zero() {
        return four_squares(&(n >> 2), rng).map(|x| x << 1);
    }
    loop {
        let x1 = random_below(rng, &(isqrt(n) + 1u32));
        let r1 = n - &x1 * &x1;
        let x2 = random_below(rng, &(isqrt(&r1) + 1u32));
        let p = &r1 - &x2 * &x2;
        if p.is_zero() {
            return [x1, x2, BigUint::zero(), BigUint::zero()];
        }
        if p.is_one() {
            return [x1, x2, BigUint::one(), BigUint::zero()];
        }
        if p == BigUint::from(2u32) {
            return [x1, x2, BigUint::one(), BigUint::one()];
        }
        if (&p & BigUint::from(3u32)) != BigUint::one() || !is_probable_prime(&p, 16, rng) {
            continue;
        }
        if let Some((a, b)) = cornacchia_prime(&p, rng) {
            return [x1, x2, a, b];
        }
    }
}

fn four_squares_small(n: u64) -> [BigUint; 4] {
    let root = |v: u64| -> u64 {
        let mut r = libm::sqrt(v as f64) as u64;
        while r * r > v {
            r -= 1;
        }
        while (r + 1) * (r + 1) <= v {
            r += 1;
        }
        r
    };
    let mut a = root(n);
    loop {
        let ra = n - a * a;
        let mut b = root(ra);
        loop {
            let rb = ra - b * b;
            let mut c = root(rb);
            loop {
                let rc = rb - c * c;
                let d = root(rc);
                if d * d == rc {
                    return [a, b, c, d].map(BigUint::from);
                }
                if c == 0 {
                    break;
                }
                c -= 1;
            }
            if b == 0 {
                break;
            }
            b -= 1;
        }
        // Lagrange guarantees termination before a underflows.
        a -= 1;
    }
}

/// Windowed fixed-base exponentiation table.
///
/// `rows[i][j] = base^(j · 2^(w·i)) mod m`, so an exponent of `k` bits costs
/// about `k / w` modular multiplications. Exponents wider than the table fall
/// back to one generic exponentiation for the high part.
#[derive(Clone, Debug)]
pub struct FixedBase {
    modulus: BigUint,
    window: u32,
    max_bits: u64,
    rows: Vec<Vec<BigUint>>,
    overflow_base: BigUint,
}

impl FixedBase {
    pub fn new(base: &BigUint, modulus: &BigUint, max_bits: u64, window: u32) -> Self {
        let width = 1usize << window;
        let nrows = max_bits.div_ceil(window as u64) as usize;
        let mut rows = Vec::with_capacity(nrows);
        let mut b = base % modulus;
        for _ in 0..nrows {
            let mut row = Vec::with_capacity(width);
            row.push(BigUint::one());
            for j in 1..width {
                let next = (&row[j - 1] * &b) % modulus;
                row.push(next);
            }
            // base^(2^w) for the next row
            b = (&row[width - 1] * &b) % modulus;
            rows.push(row);
        }
        Self {
            modulus: modulus.clone(),
            window,
            max_bits: nrows as u64 * window as u64,
            rows,
            overflow_base: b,
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn pow(&self, exp: &BigUint) -> BigUint {
        let mut acc = BigUint::one();
        let w = self.window as u64;
        let mask = (1u64 << w) - 1;
        let digits = exp.to_u64_digits();
        let limb_bits = 64u64;
        let total = exp.bits().min(self.max_bits);
        let mut i = 0u64;
        while i * w < total {
            let bit = i * w;
            let limb = (bit / limb_bits) as usize;
            let off = bit % limb_bits;
            let mut chunk = digits.get(limb).copied().unwrap_or(0) >> off;
            if off + w > limb_bits {
                chunk |= digits.get(limb + 1).copied().unwrap_or(0) << (limb_bits - off);
            }
            let d = (chunk & mask) as usize;
            if d != 0 {
                acc = (acc * &self.rows[i as usize][d]) % &self.modulus;
            }
            i += 1;
        }
        if exp.bits() > self.max_bits {
            let high = exp >> self.max_bits;
            acc = (acc * self.overflow_base.modpow(&high, &self.modulus)) % &self.modulus;
        }
        acc
    }

    /// Signed exponent; negative powers are inverted afterwards.
    pub fn pow_signed(&self, exp: &BigInt) -> BigUint {
        let p = self.pow(exp.magnitude());
        match exp.sign() {
            Sign::Minus => p.modinv(&self.modulus).expect("fixed base is a unit"),
            _ => p,
        }
    }
}
