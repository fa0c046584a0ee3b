//! Committed inputs: a party encrypts the integer SVD factors of its summary
//! together with `A` and `b`, and proves on one transcript that
//!
//! 1. `A ≈ VΘVᵀ`, via `P = V·diag(θ)` and `Q = P·Vᵀ`;
//! 2. `b = V(Σ∘y*)` exactly;
//! 3. `VᵀV ≈ I`;
//! 4. `(Σ² + ρ)Θ ≈ I`;
//!
//! plus interval proofs bounding every entry of `A` and `b`. Approximate
//! identities hold within `ε_I` at the scale of the compared quantity.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand_core::RngCore;

use super::config::{Bounds, RunConfig};
use super::tamper::{Adversary, Tamper};
use super::{Check, ProtocolError};
use crate::admm::fixed::{scale, FixedSummary};
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{add_plain, blind_with, encrypt_rng, scalar_mul_ct, Ciphertext, PublicKey};
use crate::transcript::{Context, Transcript};
use crate::zkp::interval::prove_interval_unchecked;
use crate::zkp::matmul::{mul_plain_ct, transpose_plain};
use crate::zkp::{
    gadget1_prove, gadget1_verify, gadget2_prove, gadget2_verify, prove_mult, prove_pok, prove_range, verify_interval,
    verify_mult, verify_pok, verify_range, CtMatrix, Gadget1Witness, Gadget2Witness, IntervalProof, MatMulProof,
    MatMulStatement, MultProof, MultStatement, MultWitness, PokProof, RangeProof,
};

const DOMAIN: &str = "cotrain/input";
const INPUT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommittedInput {
    pub d: usize,
    pub v: Vec<Ciphertext>,
    pub sigma: Vec<Ciphertext>,
    pub theta: Vec<Ciphertext>,
    pub ystar: Vec<Ciphertext>,
    /// Upper triangle of `A`, row by row; the lower half mirrors it.
    pub a_upper: Vec<Ciphertext>,
    pub b: Vec<Ciphertext>,

    pub vtheta: Vec<Ciphertext>,
    pub vtheta_proofs: Vec<MultProof>,
    pub q: Vec<Ciphertext>,
    pub q_proof: MatMulProof,
    pub a_ranges: Vec<RangeProof>,

    pub s: Vec<Ciphertext>,
    pub s_proofs: Vec<MultProof>,
    pub b_proof: MatMulProof,
    pub ystar_poks: Vec<PokProof>,

    pub gram: Vec<Ciphertext>,
    pub gram_proof: MatMulProof,
    pub gram_ranges: Vec<RangeProof>,

    pub sigma_sq: Vec<Ciphertext>,
    pub sigma_sq_proofs: Vec<MultProof>,
    pub r: Vec<Ciphertext>,
    pub r_proofs: Vec<MultProof>,
    pub r_ranges: Vec<RangeProof>,

    pub a_intervals: Vec<IntervalProof>,
    pub b_intervals: Vec<IntervalProof>,
}

/// What the owner keeps to prove statements about its commitments later.
#[derive(Debug, Clone)]
pub struct InputWitness {
    pub summary: FixedSummary,
    /// Nonces of `E_A`, full `d × d`, symmetric.
    pub a_nonces: Vec<BigInt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProofCounts {
    pub mult: usize,
    pub range: usize,
    pub interval: usize,
    pub pok: usize,
}

impl ProofCounts {
    /// The bundle size for `d` features.
    pub fn for_dimension(d: usize) -> Self {
        Self { mult: 3 * d * d + 6 * d + 1, range: d * d + 2 * d, interval: d * (d + 1) / 2 + d, pok: d * d + 2 * d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputReject {
    pub check: Check,
    pub detail: &'static str,
}

fn upper_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

fn upper_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| (i..d).map(move |j| (i, j)))
}

impl CommittedInput {
    pub fn counts(&self) -> ProofCounts {
        ProofCounts {
            mult: self.vtheta_proofs.len()
                + self.q_proof.mult_count()
                + self.s_proofs.len()
                + self.b_proof.mult_count()
                + self.gram_proof.mult_count()
                + self.sigma_sq_proofs.len()
                + self.r_proofs.len(),
            range: self.a_ranges.len() + self.gram_ranges.len() + self.r_ranges.len(),
            interval: self.a_intervals.len() + self.b_intervals.len(),
            pok: self.q_proof.poks.len() + self.b_proof.poks.len() + self.ystar_poks.len(),
        }
    }

    /// `E_A` as a full row-major matrix.
    pub fn a_full(&self) -> Vec<Ciphertext> {
        let d = self.d;
        (0..d * d).map(|k| self.a_upper[upper_index(d, k / d, k % d)].clone()).collect()
    }

    fn commitments(&self) -> [(&'static [u8], &[Ciphertext]); 12] {
        [
            (b"v", &self.v),
            (b"sigma", &self.sigma),
            (b"theta", &self.theta),
            (b"ystar", &self.ystar),
            (b"a", &self.a_upper),
            (b"b", &self.b),
            (b"vtheta", &self.vtheta),
            (b"q", &self.q),
            (b"s", &self.s),
            (b"gram", &self.gram),
            (b"sigma_sq", &self.sigma_sq),
            (b"r", &self.r),
        ]
    }

    fn absorb(&self, tr: &mut Transcript) {
        tr.absorb_u64(b"d", self.d as u64);
        for (label, cts) in self.commitments() {
            tr.absorb_cts(label, cts);
        }
    }

    pub fn write(&self, pk: &PublicKey, w: &mut Writer) {
        w.u32(INPUT_VERSION).u32(self.d as u32);
        for (_, cts) in self.commitments() {
            w.u32(cts.len() as u32);
            for c in cts {
                c.write(pk, w);
            }
        }
        let mults = [&self.vtheta_proofs, &self.s_proofs, &self.sigma_sq_proofs, &self.r_proofs];
        for ps in mults {
            w.u32(ps.len() as u32);
            ps.iter().for_each(|p| p.write(w));
        }
        for g in [&self.q_proof, &self.b_proof, &self.gram_proof] {
            g.write(w);
        }
        for rs in [&self.a_ranges, &self.gram_ranges, &self.r_ranges] {
            w.u32(rs.len() as u32);
            rs.iter().for_each(|p| p.write(w));
        }
        w.u32(self.ystar_poks.len() as u32);
        self.ystar_poks.iter().for_each(|p| p.write(w));
        for is in [&self.a_intervals, &self.b_intervals] {
            w.u32(is.len() as u32);
            is.iter().for_each(|p| p.write(w));
        }
    }

    pub fn read(pk: &PublicKey, r: &mut Reader<'_>) -> Result<Self, ProtocolError> {
        const MAX: usize = 1 << 20;
        if r.u32()? != INPUT_VERSION {
            return Err(CodecError::Invalid("committed input version").into());
        }
        let d = r.u32()? as usize;
        if d == 0 || d > 1024 {
            return Err(CodecError::TooLong(d).into());
        }
        let mut cts = || -> Result<Vec<Ciphertext>, ProtocolError> {
            let n = r.count(MAX)?;
            (0..n).map(|_| Ciphertext::read(pk, r).map_err(ProtocolError::from)).collect()
        };
        let v = cts()?;
        let sigma = cts()?;
        let theta = cts()?;
        let ystar = cts()?;
        let a_upper = cts()?;
        let b = cts()?;
        let vtheta = cts()?;
        let q = cts()?;
        let s = cts()?;
        let gram = cts()?;
        let sigma_sq = cts()?;
        let rr = cts()?;
        fn list<T>(r: &mut Reader<'_>, f: fn(&mut Reader<'_>) -> Result<T, CodecError>) -> Result<Vec<T>, CodecError> {
            let n = r.count(1 << 20)?;
            (0..n).map(|_| f(r)).collect()
        }
        let vtheta_proofs = list(r, MultProof::read)?;
        let s_proofs = list(r, MultProof::read)?;
        let sigma_sq_proofs = list(r, MultProof::read)?;
        let r_proofs = list(r, MultProof::read)?;
        let q_proof = MatMulProof::read(r)?;
        let b_proof = MatMulProof::read(r)?;
        let gram_proof = MatMulProof::read(r)?;
        let a_ranges = list(r, RangeProof::read)?;
        let gram_ranges = list(r, RangeProof::read)?;
        let r_ranges = list(r, RangeProof::read)?;
        let ystar_poks = list(r, PokProof::read)?;
        let a_intervals = list(r, IntervalProof::read)?;
        let b_intervals = list(r, IntervalProof::read)?;
        Ok(Self {
            d,
            v,
            sigma,
            theta,
            ystar,
            a_upper,
            b,
            vtheta,
            vtheta_proofs,
            q,
            q_proof,
            a_ranges,
            s,
            s_proofs,
            b_proof,
            ystar_poks,
            gram,
            gram_proof,
            gram_ranges,
            sigma_sq,
            sigma_sq_proofs,
            r: rr,
            r_proofs,
            r_ranges,
            a_intervals,
            b_intervals,
        })
    }
}

fn encrypt_all<R: RngCore + ?Sized>(pk: &PublicKey, vals: &[BigInt], sc: u32, rng: &mut R) -> (Vec<Ciphertext>, Vec<BigInt>) {
    vals.iter()
        .map(|v| {
            let (c, s) = encrypt_rng(pk, v, rng);
            (c.with_scale(sc as u16), s)
        })
        .unzip()
}

fn pow2(k: u32) -> BigInt {
    BigInt::one() << k
}

/// `c · g^(−k)`, same scale.
fn shift_down(pk: &PublicKey, c: &Ciphertext, k: &BigInt) -> Ciphertext {
    add_plain(pk, c, &-k)
}

/// A range proof, or for a witness outside the range a proof over the
/// clamped value that will not verify.
#[allow(clippy::too_many_arguments)]
fn range_or_forge<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    tol: &BigInt,
    lenient: bool,
    rng: &mut R,
) -> Result<RangeProof, ProtocolError> {
    let lo = -tol;
    let claimed = if lenient { v.clone().clamp(lo.clone(), tol.clone()) } else { v.clone() };
    Ok(prove_range(pk, tr, c, &claimed, s, &lo, tol, rng)?)
}

/// Shifts a signed entry into `[0, 2B]` for an interval proof.
fn interval_shifted<R: RngCore + ?Sized>(
    pk: &PublicKey,
    tr: &mut Transcript,
    c: &Ciphertext,
    v: &BigInt,
    s: &BigInt,
    bound: &BigUint,
    lenient: bool,
    rng: &mut R,
) -> Result<IntervalProof, ProtocolError> {
    let shift = BigInt::from(bound.clone());
    let shifted = add_plain(pk, c, &shift);
    let value = v + &shift;
    let top = bound << 1u32;
    if !lenient && (value.sign() == num_bigint::Sign::Minus || value.magnitude() > &top) {
        return Err(crate::zkp::ZkError::WitnessOutOfRange("committed entry exceeds its bound").into());
    }
    Ok(prove_interval_unchecked(pk, tr, &shifted, &value, s, &top, rng))
}

/// Encrypts a summary and proves statements 1–4 and the bounds on `A`, `b`.
pub fn input_prepare<R: RngCore + ?Sized>(
    pk: &PublicKey,
    cfg: &RunConfig,
    bounds: &Bounds,
    ctx: &Context,
    fs: &FixedSummary,
    adversary: Option<&Adversary>,
    rng: &mut R,
) -> Result<(CommittedInput, InputWitness), ProtocolError> {
    let d = fs.d;
    if d != cfg.d {
        return Err(ProtocolError::Config("summary dimension differs from the configuration".into()));
    }
    let f = cfg.frac_bits;
    let fires = |t| Adversary::fires(adversary, t, 0);
    let lenient = adversary.is_some();
    let co = cfg.coefficients()?;

    let (e_v, s_v) = encrypt_all(pk, &fs.v, scale::V, rng);
    let (e_sigma, s_sigma) = encrypt_all(pk, &fs.sigma, scale::SIGMA, rng);
    let (e_theta, s_theta) = encrypt_all(pk, &fs.theta, scale::THETA, rng);
    let (e_ystar, s_ystar) = encrypt_all(pk, &fs.ystar, scale::YSTAR, rng);
    let mut a_commit = fs.a.clone();
    if fires(Tamper::WrongA) {
        a_commit[0] += pow2(2 * f);
    }
    if let Some(alt) = adversary.filter(|_| fires(Tamper::SubstitutedSummary)).map(|_| substitute(fs, f)) {
        a_commit = alt;
    }
    let upper: Vec<BigInt> = upper_pairs(d).map(|(i, j)| a_commit[i * d + j].clone()).collect();
    let (e_a, s_a_upper) = encrypt_all(pk, &upper, scale::A, rng);
    let a_nonces: Vec<BigInt> = (0..d * d).map(|k| s_a_upper[upper_index(d, k / d, k % d)].clone()).collect();

    let mut tr = ctx.transcript(DOMAIN, pk);
    // The products and gadget outputs are computed before anything is
    // absorbed so that every commitment enters the transcript up front.
    let mut pending_mults = Vec::new();
    let mut vtheta = Vec::with_capacity(d * d);
    let mut vtheta_val = Vec::with_capacity(d * d);
    let mut vtheta_nonce = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let gamma = pk.fresh_nonce(rng);
            let k = i * d + j;
            let cb = blind_with(pk, &scalar_mul_ct(pk, &e_v[k], &fs.theta[j], scale::THETA as u16), &gamma);
            vtheta_val.push(&fs.v[k] * &fs.theta[j]);
            vtheta_nonce.push(&s_v[k] * &fs.theta[j] + &gamma);
            pending_mults.push(gamma);
            vtheta.push(cb);
        }
    }
    let vt_plain = transpose_plain(&fs.v, d, d);
    let vt_nonces = transpose_plain(&s_v, d, d);
    let ev_mat = CtMatrix::new(d, d, e_v.clone());
    let evt_mat = ev_mat.transpose();
    let (q_mat, q_zeta) = mul_plain_ct(pk, &vtheta_val, d, (scale::THETA + scale::V) as u16, &evt_mat, rng);

    let mut s_ct = Vec::with_capacity(d);
    let mut s_val = Vec::with_capacity(d);
    let mut s_nonce = Vec::with_capacity(d);
    let mut s_gamma = Vec::with_capacity(d);
    for j in 0..d {
        let gamma = pk.fresh_nonce(rng);
        s_ct.push(blind_with(pk, &scalar_mul_ct(pk, &e_ystar[j], &fs.sigma[j], scale::SIGMA as u16), &gamma));
        s_val.push(&fs.ystar[j] * &fs.sigma[j]);
        s_nonce.push(&s_ystar[j] * &fs.sigma[j] + &gamma);
        s_gamma.push(gamma);
    }
    let s_mat = CtMatrix::column_vector(s_ct.clone());
    let (b_mat, b_zeta) = mul_plain_ct(pk, &fs.v, d, scale::V as u16, &s_mat, rng);

    let gram_x = if fires(Tamper::InconsistentV) {
        let mut w = vt_plain.clone();
        w[0] += pow2(f - 2);
        w
    } else {
        vt_plain.clone()
    };
    let (gram_mat, gram_zeta) = mul_plain_ct(pk, &gram_x, d, scale::V as u16, &ev_mat, rng);

    let mut sq = Vec::with_capacity(d);
    let mut sq_gamma = Vec::with_capacity(d);
    let mut rr = Vec::with_capacity(d);
    let mut r_gamma = Vec::with_capacity(d);
    let mut r_val = Vec::with_capacity(d);
    let mut r_nonce = Vec::with_capacity(d);
    for j in 0..d {
        let g1 = pk.fresh_nonce(rng);
        let c_sq = blind_with(pk, &scalar_mul_ct(pk, &e_sigma[j], &fs.sigma[j], scale::SIGMA as u16), &g1);
        let n_sq = &s_sigma[j] * &fs.sigma[j] + &g1;
        let shifted = add_plain(pk, &c_sq, &co.rho_sq_scale);
        let g2 = pk.fresh_nonce(rng);
        rr.push(blind_with(pk, &scalar_mul_ct(pk, &shifted, &fs.theta[j], scale::THETA as u16), &g2));
        r_val.push((&fs.sigma[j] * &fs.sigma[j] + &co.rho_sq_scale) * &fs.theta[j]);
        r_nonce.push(&n_sq * &fs.theta[j] + &g2);
        sq.push(c_sq);
        sq_gamma.push(g1);
        r_gamma.push(g2);
    }

    let mut ci = CommittedInput {
        d,
        v: e_v,
        sigma: e_sigma,
        theta: e_theta,
        ystar: e_ystar,
        a_upper: e_a,
        b: b_mat.into_vec(),
        vtheta,
        vtheta_proofs: Vec::new(),
        q: q_mat.into_vec(),
        q_proof: empty_gadget(),
        a_ranges: Vec::new(),
        s: s_ct,
        s_proofs: Vec::new(),
        b_proof: empty_gadget(),
        ystar_poks: Vec::new(),
        gram: gram_mat.into_vec(),
        gram_proof: empty_gadget(),
        gram_ranges: Vec::new(),
        sigma_sq: sq,
        sigma_sq_proofs: Vec::new(),
        r: rr,
        r_proofs: Vec::new(),
        r_ranges: Vec::new(),
        a_intervals: Vec::new(),
        b_intervals: Vec::new(),
    };
    ci.absorb(&mut tr);

    // Statement 1.
    for i in 0..d {
        for j in 0..d {
            let k = i * d + j;
            let st = MultStatement { c_alpha: &ci.theta[j], ca: &ci.v[k], cb: &ci.vtheta[k], alpha_bits: bounds.theta_bits };
            let wit = MultWitness { alpha: &fs.theta[j], s_alpha: &s_theta[j], gamma: &pending_mults[k] };
            ci.vtheta_proofs.push(prove_mult(pk, &mut tr, &st, &wit, rng)?);
        }
    }
    let p_mat = CtMatrix::new(d, d, ci.vtheta.clone());
    let q_mat = CtMatrix::new(d, d, ci.q.clone());
    let st = MatMulStatement { x: &p_mat, y: &evt_mat, z: &q_mat, x_bits: bounds.vtheta_bits };
    let wit = Gadget2Witness {
        product: Gadget1Witness { x: &vtheta_val, x_nonces: &vtheta_nonce, z_nonces: &q_zeta },
        y: &vt_plain,
        y_nonces: &vt_nonces,
    };
    ci.q_proof = gadget2_prove(pk, &mut tr, &st, &wit, rng)?;
    let tol4 = cfg.tolerance(4);
    let shift_a = pow2(2 * f);
    for (i, j) in upper_pairs(d) {
        let k = i * d + j;
        let diff_ct = crate::paillier::sub_ct(pk, &ci.q[k], &scalar_mul_ct(pk, &ci.a_upper[upper_index(d, i, j)], &shift_a, 2))?;
        let q_val: BigInt = (0..d).map(|l| &vtheta_val[i * d + l] * &fs.v[j * d + l]).sum();
        let q_nonce: BigInt = (0..d).map(|l| &vtheta_val[i * d + l] * &s_v[j * d + l]).sum::<BigInt>() + &q_zeta[k];
        let diff = q_val - &a_commit[k] * &shift_a;
        let nonce = q_nonce - &a_nonces[k] * &shift_a;
        ci.a_ranges.push(range_or_forge(pk, &mut tr, &diff_ct, &diff, &nonce, &tol4, lenient, rng)?);
    }

    // Statement 2.
    for j in 0..d {
        let st = MultStatement { c_alpha: &ci.sigma[j], ca: &ci.ystar[j], cb: &ci.s[j], alpha_bits: bounds.sigma_bits };
        let wit = MultWitness { alpha: &fs.sigma[j], s_alpha: &s_sigma[j], gamma: &s_gamma[j] };
        ci.s_proofs.push(prove_mult(pk, &mut tr, &st, &wit, rng)?);
    }
    let b_out = CtMatrix::column_vector(ci.b.clone());
    let st = MatMulStatement { x: &ev_mat, y: &s_mat, z: &b_out, x_bits: bounds.v_bits };
    let wit = Gadget2Witness {
        product: Gadget1Witness { x: &fs.v, x_nonces: &s_v, z_nonces: &b_zeta },
        y: &s_val,
        y_nonces: &s_nonce,
    };
    ci.b_proof = gadget2_prove(pk, &mut tr, &st, &wit, rng)?;
    for j in 0..d {
        ci.ystar_poks.push(prove_pok(pk, &mut tr, &ci.ystar[j], &fs.ystar[j], &s_ystar[j], rng)?);
    }

    // Statement 3.
    let g_mat = CtMatrix::new(d, d, ci.gram.clone());
    let st = MatMulStatement { x: &evt_mat, y: &ev_mat, z: &g_mat, x_bits: bounds.v_bits };
    let wit = Gadget1Witness { x: &gram_x, x_nonces: &vt_nonces, z_nonces: &gram_zeta };
    ci.gram_proof = gadget1_prove(pk, &mut tr, &st, &wit, rng)?;
    let tol2 = cfg.tolerance(2);
    for (i, j) in upper_pairs(d) {
        let k = i * d + j;
        let g_val: BigInt = (0..d).map(|l| &gram_x[i * d + l] * &fs.v[l * d + j]).sum();
        let g_nonce: BigInt = (0..d).map(|l| &gram_x[i * d + l] * &s_v[l * d + j]).sum::<BigInt>() + &gram_zeta[k];
        let target = if i == j { shift_a.clone() } else { BigInt::zero() };
        let c = shift_down(pk, &ci.gram[k], &target);
        ci.gram_ranges.push(range_or_forge(pk, &mut tr, &c, &(g_val - &target), &g_nonce, &tol2, lenient, rng)?);
    }

    // Statement 4.
    let one4 = pow2(4 * f);
    for j in 0..d {
        let st = MultStatement { c_alpha: &ci.sigma[j], ca: &ci.sigma[j], cb: &ci.sigma_sq[j], alpha_bits: bounds.sigma_bits };
        let wit = MultWitness { alpha: &fs.sigma[j], s_alpha: &s_sigma[j], gamma: &sq_gamma[j] };
        ci.sigma_sq_proofs.push(prove_mult(pk, &mut tr, &st, &wit, rng)?);
    }
    for j in 0..d {
        let shifted = add_plain(pk, &ci.sigma_sq[j], &co.rho_sq_scale);
        let st = MultStatement { c_alpha: &ci.theta[j], ca: &shifted, cb: &ci.r[j], alpha_bits: bounds.theta_bits };
        let wit = MultWitness { alpha: &fs.theta[j], s_alpha: &s_theta[j], gamma: &r_gamma[j] };
        ci.r_proofs.push(prove_mult(pk, &mut tr, &st, &wit, rng)?);
    }
    for j in 0..d {
        let c = shift_down(pk, &ci.r[j], &one4);
        ci.r_ranges.push(range_or_forge(pk, &mut tr, &c, &(&r_val[j] - &one4), &r_nonce[j], &tol4, lenient, rng)?);
    }

    // Bounds on A and b.
    let a_bound = bounds.a_bound();
    for (t, (i, j)) in upper_pairs(d).enumerate() {
        let k = i * d + j;
        ci.a_intervals.push(interval_shifted(pk, &mut tr, &ci.a_upper[t], &a_commit[k], &a_nonces[k], &a_bound, lenient, rng)?);
    }
    let b_bound = bounds.b_bound();
    for j in 0..d {
        let nonce: BigInt = (0..d).map(|l| &fs.v[j * d + l] * &s_nonce[l]).sum::<BigInt>() + &b_zeta[j];
        ci.b_intervals.push(interval_shifted(pk, &mut tr, &ci.b[j], &fs.b[j], &nonce, &b_bound, lenient, rng)?);
    }
    if fires(Tamper::OmitProof) {
        ci.a_intervals.pop();
    }

    let mut summary = fs.clone();
    summary.a = a_commit;
    Ok((ci, InputWitness { summary, a_nonces }))
}

fn empty_gadget() -> MatMulProof {
    MatMulProof { products: Vec::new(), mults: Vec::new(), equalities: Vec::new(), poks: Vec::new() }
}

/// `A` of a summary over the same `V` with every `θ` doubled, standing in for
/// a summary of different data.
fn substitute(fs: &FixedSummary, f: u32) -> Vec<BigInt> {
    let theta = fs.theta.iter().map(|t| t * 2).collect();
    FixedSummary::from_parts(fs.d, fs.v.clone(), fs.sigma.clone(), theta, fs.ystar.clone(), f).a
}

fn reject(check: Check, detail: &'static str) -> InputReject {
    InputReject { check, detail }
}

fn check_shape(ci: &CommittedInput, d: usize) -> Result<(), InputReject> {
    let tri = d * (d + 1) / 2;
    let structure = |ok: bool, what| if ok { Ok(()) } else { Err(reject(Check::InputStructure, what)) };
    structure(ci.d == d, "dimension")?;
    let sizes = [
        (ci.v.len(), d * d),
        (ci.sigma.len(), d),
        (ci.theta.len(), d),
        (ci.ystar.len(), d),
        (ci.a_upper.len(), tri),
        (ci.b.len(), d),
        (ci.vtheta.len(), d * d),
        (ci.q.len(), d * d),
        (ci.s.len(), d),
        (ci.gram.len(), d * d),
        (ci.sigma_sq.len(), d),
        (ci.r.len(), d),
    ];
    structure(sizes.iter().all(|(a, b)| a == b), "commitment count")?;
    let proofs = [
        (ci.vtheta_proofs.len(), d * d),
        (ci.a_ranges.len(), tri),
        (ci.s_proofs.len(), d),
        (ci.ystar_poks.len(), d),
        (ci.gram_ranges.len(), tri),
        (ci.sigma_sq_proofs.len(), d),
        (ci.r_proofs.len(), d),
        (ci.r_ranges.len(), d),
        (ci.a_intervals.len(), tri),
        (ci.b_intervals.len(), d),
    ];
    structure(proofs.iter().all(|(a, b)| a == b), "proof count")?;
    let scales: [(&[Ciphertext], u32); 12] = [
        (&ci.v, scale::V),
        (&ci.sigma, scale::SIGMA),
        (&ci.theta, scale::THETA),
        (&ci.ystar, scale::YSTAR),
        (&ci.a_upper, scale::A),
        (&ci.b, scale::B),
        (&ci.vtheta, scale::V + scale::THETA),
        (&ci.q, 4),
        (&ci.s, scale::SIGMA + scale::YSTAR),
        (&ci.gram, 2),
        (&ci.sigma_sq, 2),
        (&ci.r, 4),
    ];
    structure(scales.iter().all(|(cs, s)| cs.iter().all(|c| u32::from(c.scale) == *s)), "ciphertext scale")
}

/// Checks a committed input bundle. On rejection, names the first failing
/// statement.
pub fn verify_committed_input(
    pk: &PublicKey,
    cfg: &RunConfig,
    bounds: &Bounds,
    ctx: &Context,
    ci: &CommittedInput,
) -> Result<(), InputReject> {
    let d = cfg.d;
    check_shape(ci, d)?;
    let f = cfg.frac_bits;
    let co = cfg.coefficients().map_err(|_| reject(Check::InputStructure, "configuration"))?;
    let mut tr = ctx.transcript(DOMAIN, pk);
    ci.absorb(&mut tr);
    let s1 = |detail| reject(Check::Statement(1), detail);
    let s2 = |detail| reject(Check::Statement(2), detail);
    let s3 = |detail| reject(Check::Statement(3), detail);
    let s4 = |detail| reject(Check::Statement(4), detail);

    for i in 0..d {
        for j in 0..d {
            let k = i * d + j;
            let st = MultStatement { c_alpha: &ci.theta[j], ca: &ci.v[k], cb: &ci.vtheta[k], alpha_bits: bounds.theta_bits };
            if !verify_mult(pk, &mut tr, &st, &ci.vtheta_proofs[k]) {
                return Err(s1("V·diag(θ) product"));
            }
        }
    }
    let ev_mat = CtMatrix::new(d, d, ci.v.clone());
    let evt_mat = ev_mat.transpose();
    let p_mat = CtMatrix::new(d, d, ci.vtheta.clone());
    let q_mat = CtMatrix::new(d, d, ci.q.clone());
    let st = MatMulStatement { x: &p_mat, y: &evt_mat, z: &q_mat, x_bits: bounds.vtheta_bits };
    gadget2_verify(pk, &mut tr, &st, &ci.q_proof).map_err(|_| s1("VΘVᵀ product"))?;
    let tol4 = cfg.tolerance(4);
    let shift_a = pow2(2 * f);
    for (t, (i, j)) in upper_pairs(d).enumerate() {
        let diff = crate::paillier::sub_ct(pk, &ci.q[i * d + j], &scalar_mul_ct(pk, &ci.a_upper[t], &shift_a, 2))
            .map_err(|_| s1("scale"))?;
        if !verify_range(pk, &mut tr, &diff, &ci.a_ranges[t], &-&tol4, &tol4) {
            return Err(s1("A differs from VΘVᵀ"));
        }
    }

    for j in 0..d {
        let st = MultStatement { c_alpha: &ci.sigma[j], ca: &ci.ystar[j], cb: &ci.s[j], alpha_bits: bounds.sigma_bits };
        if !verify_mult(pk, &mut tr, &st, &ci.s_proofs[j]) {
            return Err(s2("Σ∘y* product"));
        }
    }
    let s_mat = CtMatrix::column_vector(ci.s.clone());
    let b_out = CtMatrix::column_vector(ci.b.clone());
    let st = MatMulStatement { x: &ev_mat, y: &s_mat, z: &b_out, x_bits: bounds.v_bits };
    gadget2_verify(pk, &mut tr, &st, &ci.b_proof).map_err(|_| s2("b differs from V(Σ∘y*)"))?;
    for j in 0..d {
        if !verify_pok(pk, &mut tr, &ci.ystar[j], &ci.ystar_poks[j]) {
            return Err(s2("knowledge of y*"));
        }
    }

    let g_mat = CtMatrix::new(d, d, ci.gram.clone());
    let st = MatMulStatement { x: &evt_mat, y: &ev_mat, z: &g_mat, x_bits: bounds.v_bits };
    gadget1_verify(pk, &mut tr, &st, &ci.gram_proof).map_err(|_| s3("VᵀV product"))?;
    let tol2 = cfg.tolerance(2);
    for (t, (i, j)) in upper_pairs(d).enumerate() {
        let target = if i == j { shift_a.clone() } else { BigInt::zero() };
        let c = shift_down(pk, &ci.gram[i * d + j], &target);
        if !verify_range(pk, &mut tr, &c, &ci.gram_ranges[t], &-&tol2, &tol2) {
            return Err(s3("VᵀV is not near the identity"));
        }
    }

    let one4 = pow2(4 * f);
    for j in 0..d {
        let st = MultStatement { c_alpha: &ci.sigma[j], ca: &ci.sigma[j], cb: &ci.sigma_sq[j], alpha_bits: bounds.sigma_bits };
        if !verify_mult(pk, &mut tr, &st, &ci.sigma_sq_proofs[j]) {
            return Err(s4("Σ² product"));
        }
    }
    for j in 0..d {
        let shifted = add_plain(pk, &ci.sigma_sq[j], &co.rho_sq_scale);
        let st = MultStatement { c_alpha: &ci.theta[j], ca: &shifted, cb: &ci.r[j], alpha_bits: bounds.theta_bits };
        if !verify_mult(pk, &mut tr, &st, &ci.r_proofs[j]) {
            return Err(s4("(Σ²+ρ)Θ product"));
        }
    }
    for j in 0..d {
        let c = shift_down(pk, &ci.r[j], &one4);
        if !verify_range(pk, &mut tr, &c, &ci.r_ranges[j], &-&tol4, &tol4) {
            return Err(s4("(Σ²+ρ)Θ is not near the identity"));
        }
    }

    let a_top = bounds.a_bound() << 1u32;
    let a_shift = BigInt::from(bounds.a_bound());
    for (t, c) in ci.a_upper.iter().enumerate() {
        if !verify_interval(pk, &mut tr, &add_plain(pk, c, &a_shift), &ci.a_intervals[t], &a_top) {
            return Err(reject(Check::InputBounds, "entry of A out of bounds"));
        }
    }
    let b_top = bounds.b_bound() << 1u32;
    let b_shift = BigInt::from(bounds.b_bound());
    for (c, p) in ci.b.iter().zip(&ci.b_intervals) {
        if !verify_interval(pk, &mut tr, &add_plain(pk, c, &b_shift), p, &b_top) {
            return Err(reject(Check::InputBounds, "entry of b out of bounds"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_index_enumerates_triangle() {
        let d = 4;
        let idx: Vec<usize> = upper_pairs(d).map(|(i, j)| upper_index(d, i, j)).collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert_eq!(upper_index(d, 3, 1), upper_index(d, 1, 3));
    }

    #[test]
    fn counts_formula() {
        let c = ProofCounts::for_dimension(2);
        assert_eq!((c.mult, c.range, c.interval, c.pok), (25, 8, 5, 8));
    }
}
