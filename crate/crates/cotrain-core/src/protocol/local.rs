//! Encrypted local update `W = A(b + ρ(z − u)·2^f)` with a Gadget 1 proof
//! binding the product to the committed `E_A`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_core::RngCore;

use super::config::Bounds;
use super::input::{CommittedInput, InputWitness};
use super::ProtocolError;
use crate::admm::fixed::scale;
use crate::codec::{CodecError, Reader, Writer};
use crate::paillier::{add_ct, scalar_mul_ct, sub_ct, Ciphertext, PaillierError, PublicKey};
use crate::transcript::Context;
use crate::zkp::matmul::mul_plain_ct;
use crate::zkp::{gadget1_prove, gadget1_verify, CtMatrix, Gadget1Witness, MatMulProof, MatMulStatement};

const DOMAIN: &str = "cotrain/local-update";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalUpdate {
    pub w: Vec<Ciphertext>,
    pub proof: MatMulProof,
}

impl LocalUpdate {
    pub fn write(&self, pk: &PublicKey, w: &mut Writer) {
        w.u32(self.w.len() as u32);
        self.w.iter().for_each(|c| c.write(pk, w));
        self.proof.write(w);
    }

    pub fn read(pk: &PublicKey, r: &mut Reader<'_>, d: usize) -> Result<Self, ProtocolError> {
        if r.u32()? as usize != d {
            return Err(CodecError::Invalid("local update length").into());
        }
        let w = (0..d).map(|_| Ciphertext::read(pk, r)).collect::<Result<_, _>>()?;
        Ok(Self { w, proof: MatMulProof::read(r)? })
    }
}

/// `E_b · (E_z / E_u)^(ρ·2^f)`, the public operand every verifier recomputes.
pub fn operand(pk: &PublicKey, rho: &BigInt, f: u32, b: &[Ciphertext], z: &[Ciphertext], u: &[Ciphertext]) -> Result<Vec<Ciphertext>, PaillierError> {
    let k = rho << f;
    b.iter()
        .zip(z)
        .zip(u)
        .map(|((b, z), u)| {
            let diff = sub_ct(pk, z, u)?;
            add_ct(pk, b, &scalar_mul_ct(pk, &diff, &k, (scale::OPERAND - scale::MODEL) as u16))
        })
        .collect()
}

/// Computes `E_W = A·O` and proves it. `rho` is normally the configured
/// scale-1 `ρ`; a different value models a cheating party.
#[allow(clippy::too_many_arguments)]
pub fn local_optimize<R: RngCore + ?Sized>(
    pk: &PublicKey,
    bounds: &Bounds,
    ctx: &Context,
    ci: &CommittedInput,
    wit: &InputWitness,
    rho: &BigInt,
    f: u32,
    z: &[Ciphertext],
    u: &[Ciphertext],
    rng: &mut R,
) -> Result<LocalUpdate, ProtocolError> {
    let d = ci.d;
    let y = CtMatrix::column_vector(operand(pk, rho, f, &ci.b, z, u)?);
    let x = CtMatrix::new(d, d, ci.a_full());
    let (zm, zeta) = mul_plain_ct(pk, &wit.summary.a, d, scale::A as u16, &y, rng);
    let st = MatMulStatement { x: &x, y: &y, z: &zm, x_bits: bounds.a_bits };
    let mut tr = ctx.transcript(DOMAIN, pk);
    let g = Gadget1Witness { x: &wit.summary.a, x_nonces: &wit.a_nonces, z_nonces: &zeta };
    let proof = gadget1_prove(pk, &mut tr, &st, &g, rng)?;
    Ok(LocalUpdate { w: zm.into_vec(), proof })
}

#[allow(clippy::too_many_arguments)]
pub fn verify_local(
    pk: &PublicKey,
    bounds: &Bounds,
    ctx: &Context,
    ci: &CommittedInput,
    rho: &BigInt,
    f: u32,
    z: &[Ciphertext],
    u: &[Ciphertext],
    upd: &LocalUpdate,
) -> bool {
    let d = ci.d;
    if upd.w.len() != d || upd.w.iter().any(|c| u32::from(c.scale) != scale::W) {
        return false;
    }
    let Ok(y) = operand(pk, rho, f, &ci.b, z, u) else {
        return false;
    };
    let y = CtMatrix::column_vector(y);
    let x = CtMatrix::new(d, d, ci.a_full());
    let zm = CtMatrix::column_vector(upd.w.clone());
    let st = MatMulStatement { x: &x, y: &y, z: &zm, x_bits: bounds.a_bits };
    let mut tr = ctx.transcript(DOMAIN, pk);
    gadget1_verify(pk, &mut tr, &st, &upd.proof).is_ok()
}
