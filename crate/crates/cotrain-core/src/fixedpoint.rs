//! Fixed-point encoding of reals as residues modulo the MPC prime or the
//! Paillier plaintext modulus.
//!
//! A real `v` at scale `s` is the signed integer `round(v · 2^(s·f))`, embedded
//! as its residue; negative values use the upper half of the residue range.
//! Truncation is a floor on the signed value, which is also what the MPC
//! truncation protocol computes.

use num_bigint::{BigInt, BigUint};
use num_traits::{FromPrimitive, Zero};

use crate::arith::{self, centered, reduce};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FxError {
    #[error("invalid fixed-point parameters: {0}")]
    InvalidParams(&'static str),
    #[error("value out of encodable range")]
    Overflow,
    #[error("value is not finite")]
    NotFinite,
    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(u32, u32),
    #[error("operands live in different moduli")]
    ModulusMismatch,
    #[error("cannot truncate a value at scale {0}")]
    ScaleTooSmall(u32),
    #[error("homomorphic modulus not bound")]
    HeModulusUnbound,
}

/// The prime `2^256 - 189`.
pub fn default_mpc_modulus() -> BigUint {
    arith::pow2(256) - 189u32
}

/// `ceil(log2(m))`, with 0 for `m <= 1`.
pub fn ceil_log2(m: u64) -> u32 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FxParams {
    pub frac_bits: u32,
    pub int_bits: u32,
    pub mpc_modulus: BigUint,
    pub he_bits: u32,
    pub stat_sec: u32,
    pub parties: u32,
    he_modulus: Option<BigUint>,
}

impl FxParams {
    pub fn new(
        frac_bits: u32,
        int_bits: u32,
        mpc_modulus: BigUint,
        he_bits: u32,
        stat_sec: u32,
        parties: u32,
    ) -> Result<Self, FxError> {
        if frac_bits < 1 {
            return Err(FxError::InvalidParams("fractional bits must be at least 1"));
        }
        if parties < 1 {
            return Err(FxError::InvalidParams("at least one party is required"));
        }
        let p_bits = mpc_modulus.bits();
        let lm = ceil_log2(parties as u64) as u64;
        let need = 2 * (int_bits as u64 + frac_bits as u64) + lm + stat_sec as u64;
        if need >= p_bits {
            return Err(FxError::InvalidParams("MPC modulus too small for two products"));
        }
        if p_bits + stat_sec as u64 + lm >= he_bits as u64 {
            return Err(FxError::InvalidParams("Paillier modulus too small for masking"));
        }
        if !arith::is_prime_fixed_bases(&mpc_modulus) {
            return Err(FxError::InvalidParams("MPC modulus is not prime"));
        }
        Ok(Self {
            frac_bits,
            int_bits,
            mpc_modulus,
            he_bits,
            stat_sec,
            parties,
            he_modulus: None,
        })
    }

    pub fn with_defaults(parties: u32) -> Self {
        Self::new(24, 40, default_mpc_modulus(), 2048, 40, parties)
            .expect("default parameters are consistent")
    }

    /// Attaches the actual Paillier modulus once keys exist.
    pub fn bind_he_modulus(mut self, n: &BigUint) -> Result<Self, FxError> {
        if n.bits() != self.he_bits as u64 {
            return Err(FxError::InvalidParams("Paillier modulus size differs from config"));
        }
        self.he_modulus = Some(n.clone());
        Ok(self)
    }

    pub fn he_modulus(&self) -> Option<&BigUint> {
        self.he_modulus.as_ref()
    }

    pub fn modulus(&self, tag: ModulusTag) -> Result<&BigUint, FxError> {
        match tag {
            ModulusTag::Mpc => Ok(&self.mpc_modulus),
            ModulusTag::He => self.he_modulus.as_ref().ok_or(FxError::HeModulusUnbound),
        }
    }

    /// `round(v · 2^(scale·f))` as a signed integer.
    pub fn to_int(&self, v: f64, scale: u32) -> Result<BigInt, FxError> {
        if !v.is_finite() {
            return Err(FxError::NotFinite);
        }
        if libm::fabs(v) >= libm::ldexp(1.0, self.int_bits as i32) {
            return Err(FxError::Overflow);
        }
        let scaled = libm::round(libm::ldexp(v, (scale * self.frac_bits) as i32));
        BigInt::from_f64(scaled).ok_or(FxError::NotFinite)
    }

    /// Inverse of [`FxParams::to_int`].
    pub fn from_int(&self, x: &BigInt, scale: u32) -> f64 {
        libm::ldexp(arith::to_f64(x), -((scale * self.frac_bits) as i32))
    }

    /// One unit in the last place at scale 1.
    pub fn ulp(&self) -> f64 {
        libm::ldexp(1.0, -(self.frac_bits as i32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulusTag {
    Mpc,
    He,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FxValue {
    residue: BigUint,
    scale: u32,
    tag: ModulusTag,
    modulus: BigUint,
    frac_bits: u32,
}

impl FxValue {
    pub fn from_residue(residue: BigUint, scale: u32, tag: ModulusTag, params: &FxParams) -> Result<Self, FxError> {
        let modulus = params.modulus(tag)?.clone();
        Ok(Self {
            residue: residue % &modulus,
            scale,
            tag,
            modulus,
            frac_bits: params.frac_bits,
        })
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn tag(&self) -> ModulusTag {
        self.tag
    }

    /// The signed integer this residue represents.
    pub fn signed(&self) -> BigInt {
        centered(&self.residue, &self.modulus)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), FxError> {
        if self.tag != other.tag || self.modulus != other.modulus {
            return Err(FxError::ModulusMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FxError> {
        self.check_compatible(other)?;
        if self.scale != other.scale {
            return Err(FxError::ScaleMismatch(self.scale, other.scale));
        }
        Ok(Self {
            residue: (&self.residue + &other.residue) % &self.modulus,
            ..self.clone()
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FxError> {
        self.check_compatible(other)?;
        Ok(Self {
            residue: (&self.residue * &other.residue) % &self.modulus,
            scale: self.scale + other.scale,
            ..self.clone()
        })
    }
}

pub fn encode(v: f64, params: &FxParams, tag: ModulusTag) -> Result<FxValue, FxError> {
    encode_at(v, 1, params, tag)
}

pub fn encode_at(v: f64, scale: u32, params: &FxParams, tag: ModulusTag) -> Result<FxValue, FxError> {
    let modulus = params.modulus(tag)?;
    let x = params.to_int(v, scale)?;
    Ok(FxValue {
        residue: reduce(&x, modulus),
        scale,
        tag,
        modulus: modulus.clone(),
        frac_bits: params.frac_bits,
    })
}

pub fn decode(x: &FxValue) -> f64 {
    let s = x.signed();
    if s.is_zero() {
        return 0.0;
    }
    libm::ldexp(arith::to_f64(&s), -((x.scale * x.frac_bits) as i32))
}

/// Drops one factor of `2^f`, rounding toward negative infinity.
pub fn truncate_plain(x: &FxValue) -> Result<FxValue, FxError> {
    if x.scale < 2 {
        return Err(FxError::ScaleTooSmall(x.scale));
    }
    let t = arith::floor_shr(&x.signed(), x.frac_bits as u64);
    Ok(FxValue {
        residue: reduce(&t, &x.modulus),
        scale: x.scale - 1,
        ..x.clone()
    })
}
