//! Matrix-product arguments.
//!
//! For `Z = X·Y` with `X` known to the prover, the verifier draws `t`, forms
//! `tᵢ = t^i mod q` and checks the single vector identity `(tX)·Y = tZ`.
//! `Enc(tX)` and `Enc(tZ)` are computed homomorphically from the public
//! ciphertexts. The prover supplies `P_lj = Y_lj^(tX)_l · h^γ` with one
//! multiplication proof each, and one equality proof per column that
//! `Π_l P_lj` and `Enc(tZ)_j` hold the same plaintext. Gadget 2 adds proofs
//! of knowledge for every entry of `Y`.
//!
//! `Z` must be formed as `Z_ij = Π_l Y_lj^X_il · h^ζ_ij`, which is what
//! [`mul_plain_ct`] does; the prover then knows every nonce it needs.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand_core::RngCore;

use super::mult::{one_ct, prove_mult, verify_mult, MultProof, MultStatement, MultWitness};
use super::pok::{prove_pok, verify_pok, PokProof};
use super::{enc_raw, ZkError};
use crate::arith::{multi_pow, pow2};
use crate::codec::{CodecError, Reader, Writer};
use crate::fixedpoint::ceil_log2;
use crate::paillier::{Ciphertext, PublicKey};
use crate::transcript::Transcript;

/// The 128-bit prime `2^128 − 159` from which challenge powers are taken.
pub fn challenge_modulus() -> BigUint {
    pow2(128) - 159u32
}

/// Row-major matrix of ciphertexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Ciphertext>,
}

impl CtMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Ciphertext>) -> Self {
        assert_eq!(data.len(), rows * cols, "ciphertext matrix shape");
        Self { rows, cols, data }
    }

    pub fn column_vector(data: Vec<Ciphertext>) -> Self {
        let n = data.len();
        Self::new(n, 1, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Ciphertext {
        &self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[Ciphertext] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Ciphertext> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }
}

/// Transposes a row-major plaintext or nonce matrix.
pub fn transpose_plain(v: &[BigInt], rows: usize, cols: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(v.len());
    for j in 0..cols {
        for i in 0..rows {
            out.push(v[i * cols + j].clone());
        }
    }
    out
}

/// `Z = X·E_Y` for a plaintext `X` (`rows × Y.rows`, row-major), blinding
/// each entry with a fresh `h^ζ`. Returns `Z` and the `ζ` nonces. Entries carry
/// `y.scale + x_scale`.
pub fn mul_plain_ct<R: RngCore + ?Sized>(
    pk: &PublicKey,
    x: &[BigInt],
    rows: usize,
    x_scale: u16,
    y: &CtMatrix,
    rng: &mut R,
) -> (CtMatrix, Vec<BigInt>) {
    let k = y.rows;
    assert_eq!(x.len(), rows * k, "plaintext matrix shape");
    let mut data = Vec::with_capacity(rows * y.cols);
    let mut zeta = Vec::with_capacity(rows * y.cols);
    for i in 0..rows {
        for j in 0..y.cols {
            let terms = (0..k).map(|l| (&y.get(l, j).c, &x[i * k + l]));
            let prod = multi_pow(terms, pk.nn()).expect("ciphertexts are units");
            let z = pk.fresh_nonce(rng);
            let c = (prod * pk.h_pow(&z)) % pk.nn();
            data.push(Ciphertext { c, scale: y.get(0, j).scale + x_scale });
            zeta.push(z);
        }
    }
    (CtMatrix::new(rows, y.cols, data), zeta)
}

#[derive(Debug, Clone, Copy)]
pub struct MatMulStatement<'a> {
    pub x: &'a CtMatrix,
    pub y: &'a CtMatrix,
    pub z: &'a CtMatrix,
    /// Public bound: `|X_ij| < 2^x_bits`.
    pub x_bits: u64,
}

impl MatMulStatement<'_> {
    fn check_shape(&self) -> Result<(), GadgetError> {
        if self.x.cols != self.y.rows || self.z.rows != self.x.rows || self.z.cols != self.y.cols {
            return Err(GadgetError::Malformed("dimensions"));
        }
        if self.x.rows == 0 || self.y.rows == 0 || self.y.cols == 0 {
            return Err(GadgetError::Malformed("empty matrix"));
        }
        Ok(())
    }

    fn alpha_bits(&self) -> u64 {
        128 + self.x_bits + ceil_log2(self.x.rows as u64) as u64 + 1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Gadget1Witness<'a> {
    /// Plaintext `X`, row-major.
    pub x: &'a [BigInt],
    /// Nonces of `E_X`.
    pub x_nonces: &'a [BigInt],
    /// `ζ` from [`mul_plain_ct`].
    pub z_nonces: &'a [BigInt],
}

#[derive(Debug, Clone, Copy)]
pub struct Gadget2Witness<'a> {
    pub product: Gadget1Witness<'a>,
    pub y: &'a [BigInt],
    pub y_nonces: &'a [BigInt],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatMulProof {
    /// `P_lj`, row-major over `(l, j)`.
    pub products: Vec<BigUint>,
    pub mults: Vec<MultProof>,
    pub equalities: Vec<MultProof>,
    /// Empty for Gadget 1.
    pub poks: Vec<PokProof>,
}

impl MatMulProof {
    pub fn write(&self, w: &mut Writer) {
        w.u32(self.products.len() as u32);
        for p in &self.products {
            w.uint(p);
        }
        w.u32(self.mults.len() as u32);
        for p in &self.mults {
            p.write(w);
        }
        w.u32(self.equalities.len() as u32);
        for p in &self.equalities {
            p.write(w);
        }
        w.u32(self.poks.len() as u32);
        for p in &self.poks {
            p.write(w);
        }
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        const MAX: usize = 1 << 16;
        let n = r.count(MAX)?;
        let products = (0..n).map(|_| r.uint()).collect::<Result<_, _>>()?;
        let n = r.count(MAX)?;
        let mults = (0..n).map(|_| MultProof::read(r)).collect::<Result<_, _>>()?;
        let n = r.count(MAX)?;
        let equalities = (0..n).map(|_| MultProof::read(r)).collect::<Result<_, _>>()?;
        let n = r.count(MAX)?;
        let poks = (0..n).map(|_| PokProof::read(r)).collect::<Result<_, _>>()?;
        Ok(Self { products, mults, equalities, poks })
    }

    /// Number of multiplication proofs, equality proofs included.
    pub fn mult_count(&self) -> usize {
        self.mults.len() + self.equalities.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GadgetError {
    #[error("malformed proof structure: {0}")]
    Malformed(&'static str),
    #[error("proof does not verify: {0}")]
    Invalid(&'static str),
}

fn absorb_statement(tr: &mut Transcript, tag: &[u8], st: &MatMulStatement<'_>) {
    tr.absorb(b"proof", tag);
    tr.absorb_u64(b"x_rows", st.x.rows as u64);
    tr.absorb_u64(b"x_cols", st.x.cols as u64);
    tr.absorb_u64(b"y_cols", st.y.cols as u64);
    tr.absorb_u64(b"x_bits", st.x_bits);
    tr.absorb_cts(b"x", &st.x.data);
    tr.absorb_cts(b"y", &st.y.data);
    tr.absorb_cts(b"z", &st.z.data);
}

/// `tᵢ = t^i mod q` for `i = 1..=n`, with `t ∈ [1, q)` drawn from the transcript.
pub fn challenge_vector(tr: &mut Transcript, n: usize) -> Vec<BigInt> {
    let q = challenge_modulus();
    let t = tr.challenge_below(b"t", &(&q - 1u32)) + 1u32;
    let mut out = Vec::with_capacity(n);
    let mut acc = BigUint::one();
    for _ in 0..n {
        acc = (acc * &t) % &q;
        out.push(BigInt::from(acc.clone()));
    }
    out
}

/// `Enc(tM)_j = Π_i M_ij^tᵢ` for each column `j`.
fn combine_rows(pk: &PublicKey, m: &CtMatrix, t: &[BigInt]) -> Option<Vec<BigUint>> {
    (0..m.cols)
        .map(|j| multi_pow((0..m.rows).map(|i| (&m.get(i, j).c, &t[i])), pk.nn()))
        .collect()
}

fn prove_product<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    wit: &Gadget1Witness<'_>,
    rng: &mut R,
) -> Result<MatMulProof, ZkError> {
    let (r, k, c) = (st.x.rows, st.x.cols, st.y.cols);
    if wit.x.len() != r * k || wit.x_nonces.len() != r * k || wit.z_nonces.len() != r * c {
        return Err(ZkError::Shape("witness dimensions"));
    }
    if wit.x.iter().any(|x| !super::fits(x, st.x_bits)) {
        return Err(ZkError::WitnessOutOfRange("matrix entry"));
    }
    let t = challenge_vector(tr, r);
    let nn = pk.nn();

    let mut alphas = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    let mut enc_tx = Vec::with_capacity(k);
    for l in 0..k {
        let a: BigInt = (0..r).map(|i| &t[i] * &wit.x[i * k + l]).sum();
        let s: BigInt = (0..r).map(|i| &t[i] * &wit.x_nonces[i * k + l]).sum();
        enc_tx.push(Ciphertext { c: enc_raw(pk, &a, &s), scale: 0 });
        alphas.push(a);
        sigmas.push(s);
    }

    let mut products = Vec::with_capacity(k * c);
    let mut gammas = Vec::with_capacity(k * c);
    for l in 0..k {
        for j in 0..c {
            let gamma = pk.fresh_nonce(rng);
            let base = super::pow_mod(&st.y.get(l, j).c, &alphas[l], nn).ok_or(ZkError::Shape("Y is not a unit"))?;
            products.push(Ciphertext { c: (base * pk.h_pow(&gamma)) % nn, scale: 0 });
            gammas.push(gamma);
        }
    }
    for p in &products {
        tr.absorb_uint(b"p", &p.c);
    }

    let alpha_bits = st.alpha_bits();
    let mut mults = Vec::with_capacity(k * c);
    for l in 0..k {
        for j in 0..c {
            let ms = MultStatement {
                c_alpha: &enc_tx[l],
                ca: st.y.get(l, j),
                cb: &products[l * c + j],
                alpha_bits,
            };
            let mw = MultWitness { alpha: &alphas[l], s_alpha: &sigmas[l], gamma: &gammas[l * c + j] };
            mults.push(prove_mult(pk, tr, &ms, &mw, rng)?);
        }
    }

    let enc_tz = combine_rows(pk, st.z, &t).ok_or(ZkError::Shape("Z is not a unit"))?;
    let g = one_ct(pk);
    let one = BigInt::one();
    let zero = BigInt::zero();
    let mut equalities = Vec::with_capacity(c);
    for j in 0..c {
        let sum_p = products.iter().skip(j).step_by(c).fold(BigUint::one(), |acc, p| (acc * &p.c) % nn);
        let delta: BigInt = (0..r).map(|i| &t[i] * &wit.z_nonces[i * c + j]).sum::<BigInt>()
            - gammas.iter().skip(j).step_by(c).sum::<BigInt>();
        let ca = Ciphertext { c: sum_p, scale: 0 };
        let cb = Ciphertext { c: enc_tz[j].clone(), scale: 0 };
        let ms = MultStatement { c_alpha: &g, ca: &ca, cb: &cb, alpha_bits: 1 };
        let mw = MultWitness { alpha: &one, s_alpha: &zero, gamma: &delta };
        equalities.push(prove_mult(pk, tr, &ms, &mw, rng)?);
    }
    Ok(MatMulProof { products: products.into_iter().map(|p| p.c).collect(), mults, equalities, poks: Vec::new() })
}

fn verify_product(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    proof: &MatMulProof,
) -> Result<(), GadgetError> {
    let (r, k, c) = (st.x.rows, st.x.cols, st.y.cols);
    if proof.products.len() != k * c || proof.mults.len() != k * c || proof.equalities.len() != c {
        return Err(GadgetError::Malformed("proof counts"));
    }
    let nn = pk.nn();
    if !proof.products.iter().all(|p| super::is_unit_below(p, nn, pk.n())) {
        return Err(GadgetError::Malformed("product ciphertext"));
    }
    let t = challenge_vector(tr, r);
    let enc_tx: Vec<Ciphertext> = combine_rows(pk, st.x, &t)
        .ok_or(GadgetError::Malformed("X is not a unit"))?
        .into_iter()
        .map(|c| Ciphertext { c, scale: 0 })
        .collect();
    for p in &proof.products {
        tr.absorb_uint(b"p", p);
    }
    let products: Vec<Ciphertext> =
        proof.products.iter().map(|p| Ciphertext { c: p.clone(), scale: 0 }).collect();
    let alpha_bits = st.alpha_bits();
    for l in 0..k {
        for j in 0..c {
            let ms = MultStatement {
                c_alpha: &enc_tx[l],
                ca: st.y.get(l, j),
                cb: &products[l * c + j],
                alpha_bits,
            };
            if !verify_mult(pk, tr, &ms, &proof.mults[l * c + j]) {
                return Err(GadgetError::Invalid("multiplication proof"));
            }
        }
    }
    let enc_tz = combine_rows(pk, st.z, &t).ok_or(GadgetError::Malformed("Z is not a unit"))?;
    let g = one_ct(pk);
    for j in 0..c {
        let sum_p = products.iter().skip(j).step_by(c).fold(BigUint::one(), |acc, p| (acc * &p.c) % nn);
        let ca = Ciphertext { c: sum_p, scale: 0 };
        let cb = Ciphertext { c: enc_tz[j].clone(), scale: 0 };
        let ms = MultStatement { c_alpha: &g, ca: &ca, cb: &cb, alpha_bits: 1 };
        if !verify_mult(pk, tr, &ms, &proof.equalities[j]) {
            return Err(GadgetError::Invalid("column equality"));
        }
    }
    Ok(())
}

pub fn gadget1_prove<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    wit: &Gadget1Witness<'_>,
    rng: &mut R,
) -> Result<MatMulProof, ZkError> {
    st.check_shape().map_err(|_| ZkError::Shape("statement dimensions"))?;
    absorb_statement(tr, b"gadget1", st);
    prove_product(pk, tr, st, wit, rng)
}

pub fn gadget1_verify(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    proof: &MatMulProof,
) -> Result<(), GadgetError> {
    st.check_shape()?;
    if !proof.poks.is_empty() {
        return Err(GadgetError::Malformed("unexpected knowledge proofs"));
    }
    absorb_statement(tr, b"gadget1", st);
    verify_product(pk, tr, st, proof)
}

pub fn gadget2_prove<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    wit: &Gadget2Witness<'_>,
    rng: &mut R,
) -> Result<MatMulProof, ZkError> {
    st.check_shape().map_err(|_| ZkError::Shape("statement dimensions"))?;
    let ny = st.y.data.len();
    if wit.y.len() != ny || wit.y_nonces.len() != ny {
        return Err(ZkError::Shape("witness dimensions"));
    }
    absorb_statement(tr, b"gadget2", st);
    let mut poks = Vec::with_capacity(ny);
    for ((c, v), s) in st.y.data.iter().zip(wit.y).zip(wit.y_nonces) {
        poks.push(prove_pok(pk, tr, c, v, s, rng)?);
    }
    let mut proof = prove_product(pk, tr, st, &wit.product, rng)?;
    proof.poks = poks;
    Ok(proof)
}

pub fn gadget2_verify(
    pk: &PublicKey,
    tr: &mut Transcript,
    st: &MatMulStatement<'_>,
    proof: &MatMulProof,
) -> Result<(), GadgetError> {
    st.check_shape()?;
    if proof.poks.len() != st.y.data.len() {
        return Err(GadgetError::Malformed("knowledge proofs for Y"));
    }
    absorb_statement(tr, b"gadget2", st);
    for (c, p) in st.y.data.iter().zip(&proof.poks) {
        if !verify_pok(pk, tr, c, p) {
            return Err(GadgetError::Invalid("knowledge of Y"));
        }
    }
    verify_product(pk, tr, st, proof)
}
