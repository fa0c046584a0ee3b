//! One honest instance of each proof kind, serialized, with a verifier that
//! decodes and checks arbitrary bytes against the instance's statement.

use cotrain_core::codec::{Reader, Writer};
use cotrain_core::paillier::{blind_with, encrypt_rng, scalar_mul_ct, Ciphertext, PublicKey};
use cotrain_core::transcript::Transcript;
use cotrain_core::zkp::matmul::mul_plain_ct;
use cotrain_core::zkp::{
    gadget1_prove, gadget1_verify, gadget2_prove, gadget2_verify, prove_interval, prove_mult, prove_pok, prove_range,
    verify_interval, verify_mult, verify_pok, verify_range, CtMatrix, Gadget1Witness, Gadget2Witness, IntervalProof,
    MatMulProof, MatMulStatement, MultProof, MultStatement, MultWitness, PokProof, RangeProof,
};
use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pok,
    Mult,
    Range,
    Interval,
    Gadget1,
    Gadget2,
}

pub const KINDS: [Kind; 6] = [Kind::Pok, Kind::Mult, Kind::Range, Kind::Interval, Kind::Gadget1, Kind::Gadget2];

pub struct Case {
    pub proof: Vec<u8>,
    check: Box<dyn Fn(&[u8]) -> bool>,
}

impl Case {
    pub fn verifies(&self, bytes: &[u8]) -> bool {
        (self.check)(bytes)
    }
}

const LABEL: &str = "zk-suite";

fn decode<T>(bytes: &[u8], read: fn(&mut Reader<'_>) -> Result<T, cotrain_core::codec::CodecError>) -> Option<T> {
    let mut r = Reader::new(bytes);
    let v = read(&mut r).ok()?;
    r.finish().ok()?;
    Some(v)
}

fn encode(write: impl FnOnce(&mut Writer)) -> Vec<u8> {
    let mut w = Writer::new();
    write(&mut w);
    w.finish()
}

fn small(rng: &mut ChaCha20Rng, bits: u32) -> BigInt {
    BigInt::from(rng.gen_range(-(1i64 << bits)..(1i64 << bits)))
}

pub fn honest(kind: Kind, pk: &PublicKey, rng: &mut ChaCha20Rng) -> Case {
    let pk = pk.clone();
    match kind {
        Kind::Pok => {
            let v = small(rng, 60);
            let (c, s) = encrypt_rng(&pk, &v, rng);
            let p = prove_pok(&pk, &mut Transcript::new(LABEL), &c, &v, &s, rng).unwrap();
            Case {
                proof: encode(|w| p.write(w)),
                check: Box::new(move |b| decode(b, PokProof::read).is_some_and(|p| verify_pok(&pk, &mut Transcript::new(LABEL), &c, &p))),
            }
        }
        Kind::Mult => {
            let alpha = small(rng, 30);
            let (c_alpha, s_alpha) = encrypt_rng(&pk, &alpha, rng);
            let (ca, _) = encrypt_rng(&pk, &small(rng, 40), rng);
            let gamma = pk.fresh_nonce(rng);
            let cb = blind_with(&pk, &scalar_mul_ct(&pk, &ca, &alpha, 0), &gamma);
            let st = MultStatement { c_alpha: &c_alpha, ca: &ca, cb: &cb, alpha_bits: 31 };
            let wit = MultWitness { alpha: &alpha, s_alpha: &s_alpha, gamma: &gamma };
            let p = prove_mult(&pk, &mut Transcript::new(LABEL), &st, &wit, rng).unwrap();
            Case {
                proof: encode(|w| p.write(w)),
                check: Box::new(move |b| {
                    let st = MultStatement { c_alpha: &c_alpha, ca: &ca, cb: &cb, alpha_bits: 31 };
                    decode(b, MultProof::read).is_some_and(|p| verify_mult(&pk, &mut Transcript::new(LABEL), &st, &p))
                }),
            }
        }
        Kind::Range => {
            let lo = small(rng, 50);
            let hi = &lo + BigInt::from(rng.gen_range(0u64..1 << 50));
            let v = &lo + (&hi - &lo) / 3;
            let (c, s) = encrypt_rng(&pk, &v, rng);
            let p = prove_range(&pk, &mut Transcript::new(LABEL), &c, &v, &s, &lo, &hi, rng).unwrap();
            Case {
                proof: encode(|w| p.write(w)),
                check: Box::new(move |b| {
                    decode(b, RangeProof::read).is_some_and(|p| verify_range(&pk, &mut Transcript::new(LABEL), &c, &p, &lo, &hi))
                }),
            }
        }
        Kind::Interval => {
            let bound = BigUint::from(rng.gen_range(1u64..u64::MAX));
            let v = BigInt::from(rng.gen_range(0..=bound.iter_u64_digits().next().unwrap()));
            let (c, s) = encrypt_rng(&pk, &v, rng);
            let p = prove_interval(&pk, &mut Transcript::new(LABEL), &c, &v, &s, &bound, rng).unwrap();
            Case {
                proof: encode(|w| p.write(w)),
                check: Box::new(move |b| {
                    decode(b, IntervalProof::read).is_some_and(|p| verify_interval(&pk, &mut Transcript::new(LABEL), &c, &p, &bound))
                }),
            }
        }
        Kind::Gadget1 | Kind::Gadget2 => {
            let n = 2;
            let x: Vec<BigInt> = (0..n * n).map(|_| small(rng, 20)).collect();
            let y: Vec<BigInt> = (0..n * n).map(|_| small(rng, 30)).collect();
            let (cx, sx): (Vec<Ciphertext>, Vec<BigInt>) = x.iter().map(|v| encrypt_rng(&pk, v, rng)).unzip();
            let (cy, sy): (Vec<Ciphertext>, Vec<BigInt>) = y.iter().map(|v| encrypt_rng(&pk, v, rng)).unzip();
            let ex = CtMatrix::new(n, n, cx);
            let ey = CtMatrix::new(n, n, cy);
            let (ez, zeta) = mul_plain_ct(&pk, &x, n, 0, &ey, rng);
            let st = MatMulStatement { x: &ex, y: &ey, z: &ez, x_bits: 21 };
            let w1 = Gadget1Witness { x: &x, x_nonces: &sx, z_nonces: &zeta };
            let second = kind == Kind::Gadget2;
            let p = if second {
                let w2 = Gadget2Witness { product: w1, y: &y, y_nonces: &sy };
                gadget2_prove(&pk, &mut Transcript::new(LABEL), &st, &w2, rng).unwrap()
            } else {
                gadget1_prove(&pk, &mut Transcript::new(LABEL), &st, &w1, rng).unwrap()
            };
            Case {
                proof: encode(|w| p.write(w)),
                check: Box::new(move |b| {
                    let st = MatMulStatement { x: &ex, y: &ey, z: &ez, x_bits: 21 };
                    decode(b, MatMulProof::read).is_some_and(|p| {
                        let mut tr = Transcript::new(LABEL);
                        if second {
                            gadget2_verify(&pk, &mut tr, &st, &p).is_ok()
                        } else {
                            gadget1_verify(&pk, &mut tr, &st, &p).is_ok()
                        }
                    })
                }),
            }
        }
    }
}

/// `bytes` with one uniformly chosen bit inverted.
pub fn flip_bit(bytes: &[u8], rng: &mut ChaCha20Rng) -> Vec<u8> {
    let mut out = bytes.to_vec();
    let bit = rng.gen_range(0..out.len() * 8);
    out[bit / 8] ^= 1 << (bit % 8);
    out
}
