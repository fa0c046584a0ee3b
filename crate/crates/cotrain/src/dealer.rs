//! The trusted dealer's output on disk: `public.bin` for everyone and one
//! `party-<i>.bin` per party. A party marks its file used on load and
//! refuses to load it twice.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use cotrain_core::paillier::{keygen_dealer_full, KeyMaterial};
use cotrain_core::protocol::{dealer_setup, PartySetup, PublicSetup, RunConfig};
use cotrain_core::testkeys;
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::HarnessError;

/// Randomness for the dealer: OS entropy, or a value derived from the run
/// seed in test mode so runs can be replayed.
pub fn dealer_seed(cfg: &RunConfig, test_mode: bool) -> [u8; 32] {
    if test_mode {
        derive_seed(b"dealer", cfg.seed, 0)
    } else {
        let mut s = [0u8; 32];
        OsRng.fill_bytes(&mut s);
        s
    }
}

pub fn derive_seed(label: &[u8], seed: u64, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"cotrain/");
    h.update(label);
    h.update(seed.to_be_bytes());
    h.update(index.to_be_bytes());
    h.finalize().into()
}

/// Threshold Paillier keys. Test mode uses the built-in fixture primes.
pub fn keys_for(cfg: &RunConfig, test_mode: bool, seed: [u8; 32]) -> Result<KeyMaterial, HarnessError> {
    let m = cfg.parties as usize;
    if test_mode {
        return testkeys::key_for_bits(u64::from(cfg.he_bits), m)
            .ok_or_else(|| HarnessError::Config(format!("no {}-bit fixture key", cfg.he_bits)));
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    keygen_dealer_full(m, u64::from(cfg.he_bits), &mut rng).map_err(|e| HarnessError::Protocol(e.into()))
}

pub fn deal(cfg: &RunConfig, test_mode: bool) -> Result<(PublicSetup, Vec<PartySetup>), HarnessError> {
    let seed = dealer_seed(cfg, test_mode);
    let keys = keys_for(cfg, test_mode, Sha256::digest(seed).into())?;
    Ok(dealer_setup(cfg, &keys, seed)?)
}

pub fn public_path(dir: &Path) -> PathBuf {
    dir.join("public.bin")
}

pub fn party_path(dir: &Path, id: u16) -> PathBuf {
    dir.join(format!("party-{id}.bin"))
}

fn used_path(dir: &Path, id: u16) -> PathBuf {
    dir.join(format!("party-{id}.used"))
}

pub fn write_dealer_files(dir: &Path, public: &PublicSetup, parties: &[PartySetup]) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let p = public_path(dir);
    fs::write(&p, public.to_bytes()).map_err(|e| HarnessError::io(&p, e))?;
    for (i, s) in parties.iter().enumerate() {
        let p = party_path(dir, i as u16);
        fs::write(&p, s.to_bytes()).map_err(|e| HarnessError::io(&p, e))?;
        let used = used_path(dir, i as u16);
        if used.exists() {
            fs::remove_file(&used).map_err(|e| HarnessError::io(&used, e))?;
        }
    }
    Ok(())
}

pub fn read_public(dir: &Path, expected: &RunConfig) -> Result<PublicSetup, HarnessError> {
    let p = public_path(dir);
    let bytes = fs::read(&p).map_err(|e| HarnessError::io(&p, e))?;
    let public = PublicSetup::from_bytes(&bytes)?;
    if &public.config != expected {
        return Err(HarnessError::Config(format!("{} was dealt for a different configuration", p.display())));
    }
    Ok(public)
}

/// Loads party `id`'s secrets and marks them used.
pub fn take_party(dir: &Path, id: u16) -> Result<PartySetup, HarnessError> {
    let used = used_path(dir, id);
    OpenOptions::new().write(true).create_new(true).open(&used).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AlreadyExists {
            HarnessError::Config(format!("dealer material for party {id} was already used; run the dealer again"))
        } else {
            HarnessError::io(&used, e)
        }
    })?;
    let p = party_path(dir, id);
    let bytes = fs::read(&p).map_err(|e| HarnessError::io(&p, e))?;
    let setup = PartySetup::from_bytes(&bytes)?;
    if setup.key_share.index != id {
        return Err(HarnessError::Config(format!("{} belongs to party {}", p.display(), setup.key_share.index)));
    }
    Ok(setup)
}
