//! Run configuration, its handshake hash, and the magnitude bounds every
//! party derives from it.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use sha2::{Digest, Sha256};

use super::ProtocolError;
use crate::admm::fixed::FixedCoefficients;
use crate::admm::ModelKind;
use crate::arith::bits_signed;
use crate::codec::{Reader, Writer};
use crate::fixedpoint::{ceil_log2, default_mpc_modulus, FxParams};
use crate::mpc::{truncate_triples, Counts, TruncSpec};
use crate::zkp::{CHALLENGE_BITS, INTERVAL_SLACK_BITS};

const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub parties: u16,
    pub d: usize,
    pub rho: f64,
    pub lambda: f64,
    pub iterations: u32,
    pub model: ModelKind,
    pub frac_bits: u32,
    pub int_bits: u32,
    pub stat_sec: u32,
    pub he_bits: u32,
    /// Near-identity tolerance `ε_I` in units of `2^−f`.
    pub eps_ulps: u64,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults for everything but the shape: 10 iterations, `f = 24`,
    /// 2048-bit Paillier and `ε_I = d·2^(−f+2)`.
    pub fn new(parties: u16, d: usize, rho: f64, lambda: f64, model: ModelKind) -> Self {
        Self {
            parties,
            d,
            rho,
            lambda,
            iterations: 10,
            model,
            frac_bits: 24,
            int_bits: 40,
            stat_sec: 40,
            he_bits: 2048,
            eps_ulps: 4 * d as u64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |s: &str| Err(ProtocolError::Config(s.into()));
        if self.parties == 0 {
            return bad("at least one party is required");
        }
        if self.d == 0 || self.d > 1024 {
            return bad("feature count must be in 1..=1024");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if self.eps_ulps == 0 {
            return bad("tolerance must be positive");
        }
        self.fx()?;
        Ok(())
    }

    pub fn fx(&self) -> Result<FxParams, ProtocolError> {
        Ok(FxParams::new(
            self.frac_bits,
            self.int_bits,
            default_mpc_modulus(),
            self.he_bits,
            self.stat_sec,
            u32::from(self.parties),
        )?)
    }

    pub fn coefficients(&self) -> Result<FixedCoefficients, ProtocolError> {
        Ok(FixedCoefficients::new(&self.fx()?, self.parties as usize, self.rho, self.lambda, self.model)?)
    }

    /// `ε_I` at scale `s`, i.e. `eps_ulps · 2^((s−1)f)`.
    pub fn tolerance(&self, scale: u32) -> BigInt {
        BigInt::from(self.eps_ulps) << ((scale - 1) * self.frac_bits)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_version(CONFIG_VERSION);
        w.u16(self.parties)
            .u32(self.d as u32)
            .u64(self.rho.to_bits())
            .u64(self.lambda.to_bits())
            .u32(self.iterations)
            .u8(match self.model {
                ModelKind::Lasso => 0,
                ModelKind::Ridge => 1,
            })
            .u32(self.frac_bits)
            .u32(self.int_bits)
            .u32(self.stat_sec)
            .u32(self.he_bits)
            .u64(self.eps_ulps)
            .u64(self.seed)
            .uint(&default_mpc_modulus());
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::versioned(data, CONFIG_VERSION)?;
        let cfg = Self {
            parties: r.u16()?,
            d: r.u32()? as usize,
            rho: f64::from_bits(r.u64()?),
            lambda: f64::from_bits(r.u64()?),
            iterations: r.u32()?,
            model: match r.u8()? {
                0 => ModelKind::Lasso,
                1 => ModelKind::Ridge,
                t => return Err(ProtocolError::Config(format!("unknown model tag {t}"))),
            },
            frac_bits: r.u32()?,
            int_bits: r.u32()?,
            stat_sec: r.u32()?,
            he_bits: r.u32()?,
            eps_ulps: r.u64()?,
            seed: r.u64()?,
        };
        if r.uint()? != default_mpc_modulus() {
            return Err(ProtocolError::Config("unsupported MPC modulus".into()));
        }
        r.finish()?;
        Ok(cfg)
    }

    /// Compared at the handshake; also absorbed into every proof transcript.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

/// Bit widths derived from a configuration. A value "fits in `k` bits" when
/// its magnitude is below `2^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub v_bits: u64,
    pub sigma_bits: u64,
    pub theta_bits: u64,
    /// Honest bound on entries of `A`, proven by interval proofs.
    pub a_bits: u64,
    /// Honest bound on entries of `b`, proven by interval proofs.
    pub b_bits: u64,
    /// Entries of `V·diag(θ)`.
    pub vtheta_bits: u64,
    /// Worst case over verified inputs for a local product `W`.
    pub w_bits: u64,
    /// Gadget 3 masks are drawn below `2^mask_bits`.
    pub mask_bits: u64,
    /// Width of one packed decryption slot.
    pub slot_bits: u64,
    pub slots: usize,
    /// Masks for the two end-of-run divisibility checks.
    pub check_mask_bits: [u64; 2],
    /// Largest plaintext of a masked divisibility check.
    pub check_bits: u64,
    pub n_bits: u64,
    pub k_w: u32,
    pub k_avg: u32,
    pub k_threshold: u32,
    pub k_ridge: u32,
}

impl Bounds {
    pub fn new(cfg: &RunConfig) -> Result<Self, ProtocolError> {
        let fx = cfg.fx()?;
        let co = cfg.coefficients()?;
        let f = u64::from(cfg.frac_bits);
        let int = u64::from(cfg.int_bits);
        let kappa = u64::from(cfg.stat_sec);
        let slack = INTERVAL_SLACK_BITS;
        let p = fx.mpc_modulus.bits();
        let lm = u64::from(ceil_log2(u64::from(cfg.parties)));
        let ld = u64::from(ceil_log2(cfg.d as u64));
        let n_bits = u64::from(cfg.he_bits);

        let v_bits = f + 1;
        let sigma_bits = int + f;
        let inv_rho = fx.to_int(1.0 / cfg.rho, 2)?;
        let theta_bits = bits_signed(&inv_rho) + 1;
        let a_bits = theta_bits + 1;
        let b_bits = int + 3 * f;
        let vtheta_bits = v_bits + theta_bits;

        // Plaintexts of the shared-back ciphertexts are sums of m shares
        // each proven below p·2^slack; u accumulates two of them per step.
        let share_sum = p + slack + lm + 1;
        let u_bits = share_sum + 2 + u64::from(ceil_log2(u64::from(cfg.iterations.max(1))));
        let rho_bits = bits_signed(&co.rho);
        let operand_bits = (b_bits + 2 + slack).max(rho_bits + u_bits + 1 + f) + 1;
        let w_bits = a_bits + 2 + slack + operand_bits + ld;

        let mask_bits = w_bits + 1 + kappa;
        let slot_bits = mask_bits + slack + lm + 2;
        let slots = (n_bits.saturating_sub(2) / slot_bits) as usize;

        let conversions = cfg.iterations as u64 * u64::from(cfg.parties) * cfg.d as u64;
        let values = cfg.iterations as u64 * (u64::from(cfg.parties) + 1) * cfg.d as u64;
        let diff_bits = w_bits.max(p + 1 + lm) + 1;
        let batched1 = diff_bits + CHALLENGE_BITS + u64::from(ceil_log2(conversions.max(1))) + 1;
        let mac_bits = 2 * p + slack + lm + 3;
        let batched2 = mac_bits + CHALLENGE_BITS + u64::from(ceil_log2(values.max(1))) + 1;
        let check_mask_bits = [batched1 + kappa, batched2 + kappa];
        let check_bits = p + check_mask_bits[0].max(check_mask_bits[1]) + slack + lm + 2;

        let k_w = (int + 5 * f + 1) as u32;
        let k_avg = (int + 2 * f + lm + 2) as u32;
        let k_threshold = (int + f + 2) as u32;
        let k_ridge = (int + 2 * f + 2) as u32;
        for k in [k_w, k_avg, k_threshold, k_ridge] {
            if u64::from(k) + kappa + 2 > p {
                return Err(ProtocolError::Config("MPC modulus too small for the comparison bounds".into()));
            }
        }
        Ok(Self {
            v_bits,
            sigma_bits,
            theta_bits,
            a_bits,
            b_bits,
            vtheta_bits,
            w_bits,
            mask_bits,
            slot_bits,
            slots,
            check_mask_bits,
            check_bits,
            n_bits,
            k_w,
            k_avg,
            k_threshold,
            k_ridge,
        })
    }

    /// Whether the Paillier modulus leaves room for every conversion and
    /// check plaintext. Input preparation alone does not need this.
    pub fn check_capacity(&self) -> Result<(), ProtocolError> {
        if self.slots == 0 || self.check_bits + 2 > self.n_bits {
            return Err(ProtocolError::Config(format!(
                "{}-bit Paillier modulus is too small for {}-bit conversion slots",
                self.n_bits, self.slot_bits
            )));
        }
        Ok(())
    }

    pub fn a_bound(&self) -> BigUint {
        BigUint::from(1u8) << self.a_bits
    }

    pub fn b_bound(&self) -> BigUint {
        BigUint::from(1u8) << self.b_bits
    }

    /// Added to `W` so that every conversion plaintext is non-negative.
    pub fn w_offset(&self) -> BigInt {
        BigInt::from(1u8) << self.w_bits
    }
}

/// The MPC operations of one coordination step, as truncations
/// `(k, shift, count)`, plain multiplications and input counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CoordPlan {
    pub truncations: Vec<(u32, u32, usize)>,
    pub products: usize,
    pub inputs_per_owner: usize,
}

pub(crate) fn coord_plan(cfg: &RunConfig, b: &Bounds) -> CoordPlan {
    let f = cfg.frac_bits;
    let m = cfg.parties as usize;
    let d = cfg.d;
    let mut truncations = alloc::vec![(b.k_w, 4 * f, m * d), (b.k_avg, f, d)];
    let products = match cfg.model {
        ModelKind::Lasso => {
            truncations.push((b.k_threshold, b.k_threshold - 1, 2 * d));
            2 * d
        }
        ModelKind::Ridge => {
            truncations.push((b.k_ridge, f, d));
            0
        }
    };
    CoordPlan { truncations, products, inputs_per_owner: m * d }
}

/// Offline material one full run consumes.
pub fn run_counts(cfg: &RunConfig, b: &Bounds) -> Counts {
    let plan = coord_plan(cfg, b);
    let iters = cfg.iterations as usize;
    let kappa = cfg.stat_sec;
    let mut trunc: Vec<TruncSpec> = Vec::new();
    let mut triples = plan.products;
    for &(k, shift, count) in &plan.truncations {
        triples += count * truncate_triples(shift);
        let high_bits = (k + kappa).saturating_sub(shift).max(1);
        match trunc.iter_mut().find(|t| t.shift == shift) {
            Some(t) => {
                t.high_bits = t.high_bits.max(high_bits);
                t.count += count * iters;
            }
            None => trunc.push(TruncSpec { shift, high_bits, count: count * iters }),
        }
    }
    Counts { triples: triples * iters, trunc, input_masks: plan.inputs_per_owner * iters }
}
