//! Gadget 3 end to end outside the party driver: masks with interval
//! proofs, packed joint decryption and the resulting additive shares.

use cotrain_core::paillier::{combine, encrypt_rng, partial_decrypt, KeyMaterial};
use cotrain_core::protocol::convert::{conversion_shares, draw_masks, packed_targets, unpack, verify_masks};
use cotrain_core::protocol::{Bounds, RunConfig};
use cotrain_core::mpc::Field;
use cotrain_core::transcript::Context;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use rand::RngCore;
use rand_chacha::ChaCha20Rng;

pub fn ctx(cfg: &RunConfig, sender: u16) -> Context {
    Context { config_hash: cfg.hash(), phase: 3, iteration: 0, sender }
}

/// Uniform magnitude below `2^w_bits` with a random sign.
pub fn random_w(bounds: &Bounds, rng: &mut ChaCha20Rng) -> BigInt {
    let mut bytes = vec![0u8; bounds.w_bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    let mag = BigUint::from_bytes_be(&bytes) >> (bytes.len() as u64 * 8 - bounds.w_bits);
    BigInt::from_biguint(if rng.next_u32() & 1 == 1 { Sign::Minus } else { Sign::Plus }, mag)
}

/// Converts every value and returns, per value, the sum of all parties'
/// shares modulo `p`. Panics if an honest mask proof fails.
pub fn convert(km: &KeyMaterial, cfg: &RunConfig, values: &[BigInt], rng: &mut ChaCha20Rng) -> Vec<BigUint> {
    let pk = &km.pk;
    let bounds = Bounds::new(cfg).unwrap();
    let field = Field::new(cfg.fx().unwrap().mpc_modulus);
    let m = cfg.parties;
    let w: Vec<_> = values.iter().map(|v| encrypt_rng(pk, v, rng).0).collect();
    let drawn: Vec<_> = (0..m)
        .map(|i| {
            let (pc, r) = draw_masks(pk, &ctx(cfg, i), &bounds, values.len(), false, rng).unwrap();
            assert!(verify_masks(pk, &ctx(cfg, i), &bounds, &pc));
            (pc, r)
        })
        .collect();
    let packed = packed_targets(pk, &bounds, &w.iter().collect::<Vec<_>>(), &drawn.iter().map(|(pc, _)| pc).collect::<Vec<_>>());
    let plain: Vec<BigUint> = packed
        .iter()
        .map(|c| {
            let parts: Vec<_> = km.shares.iter().map(|s| partial_decrypt(pk, s, c)).collect();
            combine(pk, &parts, m as usize).unwrap()
        })
        .collect();
    let opened = unpack(&plain, &bounds, values.len());
    let shares: Vec<Vec<BigUint>> =
        drawn.iter().enumerate().map(|(i, (_, r))| conversion_shares(i as u16, &field, &bounds, &opened, r)).collect();
    (0..values.len())
        .map(|k| shares.iter().fold(BigUint::from(0u8), |acc, s| (acc + &s[k]).mod_floor(field.modulus())))
        .collect()
}

/// Whether the other parties reject `party`'s batch when its first mask is
/// oversized.
pub fn oversized_rejected(km: &KeyMaterial, cfg: &RunConfig, party: u16, count: usize, rng: &mut ChaCha20Rng) -> bool {
    let bounds = Bounds::new(cfg).unwrap();
    let (pc, _) = draw_masks(&km.pk, &ctx(cfg, party), &bounds, count, true, rng).unwrap();
    !verify_masks(&km.pk, &ctx(cfg, party), &bounds, &pc)
}
