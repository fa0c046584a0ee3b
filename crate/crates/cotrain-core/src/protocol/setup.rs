//! What the trusted dealer hands out before a run: the threshold key, MPC
//! material sized for the configuration, and public encryptions of every
//! input mask so conversions into the MPC can be checked later.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::config::{run_counts, Bounds, RunConfig};
use super::ProtocolError;
use crate::codec::{CodecError, Reader, Writer};
use crate::mpc::{dealer_generate, Counts, PartyMaterial};
use crate::paillier::{encrypt_rng, Ciphertext, KeyMaterial, PublicKey, SecretKeyShare};

const SETUP_VERSION: u32 = 1;

/// Shared by every party.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicSetup {
    pub config: RunConfig,
    pub pk: PublicKey,
    /// `E_ρ` for each owner's input masks, in consumption order.
    pub mask_cts: Vec<Vec<Ciphertext>>,
}

/// One party's secrets.
#[derive(Debug, Clone)]
pub struct PartySetup {
    pub key_share: SecretKeyShare,
    pub material: PartyMaterial,
}

pub fn material_counts(cfg: &RunConfig) -> Result<Counts, ProtocolError> {
    Ok(run_counts(cfg, &Bounds::new(cfg)?))
}

pub fn dealer_setup(cfg: &RunConfig, keys: &KeyMaterial, seed: [u8; 32]) -> Result<(PublicSetup, Vec<PartySetup>), ProtocolError> {
    cfg.validate()?;
    if keys.shares.len() != cfg.parties as usize {
        return Err(ProtocolError::Config("key shares do not match the party count".into()));
    }
    if keys.pk.bits() != u64::from(cfg.he_bits) {
        return Err(ProtocolError::Config("Paillier modulus size differs from the configuration".into()));
    }
    let bounds = Bounds::new(cfg)?;
    bounds.check_capacity()?;
    let counts = run_counts(cfg, &bounds);
    let fx = cfg.fx()?;
    let materials = dealer_generate(cfg.parties, &fx.mpc_modulus, &counts, seed);
    let mut enc_seed = seed;
    enc_seed[0] ^= 0x5a;
    let mut rng = ChaCha20Rng::from_seed(enc_seed);
    let mask_cts = materials
        .iter()
        .enumerate()
        .map(|(owner, mat)| {
            mat.input_masks[owner]
                .iter()
                .map(|m| {
                    let v = m.value.as_ref().expect("owners know their mask values");
                    encrypt_rng(&keys.pk, &BigInt::from(v.clone()), &mut rng).0
                })
                .collect()
        })
        .collect();
    let parties = materials
        .into_iter()
        .zip(&keys.shares)
        .map(|(material, share)| PartySetup { key_share: share.clone(), material })
        .collect();
    Ok((PublicSetup { config: cfg.clone(), pk: keys.pk.clone(), mask_cts }, parties))
}

impl PublicSetup {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_version(SETUP_VERSION);
        w.bytes(&self.config.to_bytes()).bytes(&self.pk.to_bytes());
        w.u32(self.mask_cts.len() as u32);
        for owner in &self.mask_cts {
            w.u32(owner.len() as u32);
            owner.iter().for_each(|c| c.write(&self.pk, &mut w));
        }
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::versioned(data, SETUP_VERSION)?;
        let config = RunConfig::from_bytes(r.bytes()?)?;
        let pk = PublicKey::from_bytes(r.bytes()?)?;
        let owners = r.count(1 << 16)?;
        if owners != config.parties as usize {
            return Err(CodecError::Invalid("mask owners").into());
        }
        let mut mask_cts = Vec::with_capacity(owners);
        for _ in 0..owners {
            let n = r.count(1 << 24)?;
            mask_cts.push((0..n).map(|_| Ciphertext::read(&pk, &mut r)).collect::<Result<_, _>>()?);
        }
        r.finish()?;
        Ok(Self { config, pk, mask_cts })
    }
}

impl PartySetup {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_version(SETUP_VERSION);
        w.bytes(&self.key_share.to_bytes()).raw(&self.material.to_bytes());
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::versioned(data, SETUP_VERSION)?;
        let key_share = SecretKeyShare::from_bytes(r.bytes()?)?;
        let material = PartyMaterial::from_bytes(r.raw(r.remaining())?)?;
        if key_share.index != material.party {
            return Err(CodecError::Invalid("key share and material belong to different parties").into());
        }
        Ok(Self { key_share, material })
    }
}
