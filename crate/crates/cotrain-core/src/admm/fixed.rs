//! Integer replay of the secure training pipeline.
//!
//! Every quantity here is the exact integer the encrypted and shared
//! computation produces, so a correct secure run releases the same model
//! bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{AdmmError, ModelKind, Summary};
use crate::arith::floor_shr;
use crate::fixedpoint::{FxError, FxParams};

/// Power of `2^f` carried by each committed or derived quantity.
pub mod scale {
    pub const V: u32 = 1;
    pub const SIGMA: u32 = 1;
    pub const YSTAR: u32 = 1;
    pub const THETA: u32 = 2;
    pub const A: u32 = 2;
    /// `b = V·(Σ∘y*)` is committed as that exact product.
    pub const B: u32 = V + SIGMA + YSTAR;
    /// Local-update operand `b + ρ(z − u)`.
    pub const OPERAND: u32 = B;
    pub const W: u32 = A + OPERAND;
    pub const MODEL: u32 = 1;
}

/// A summary rounded to the integers the party commits to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSummary {
    pub d: usize,
    /// Row-major `d × d`.
    pub v: Vec<BigInt>,
    pub sigma: Vec<BigInt>,
    pub theta: Vec<BigInt>,
    pub ystar: Vec<BigInt>,
    /// Row-major `d × d`, symmetric.
    pub a: Vec<BigInt>,
    pub b: Vec<BigInt>,
}

impl FixedSummary {
    pub fn encode(s: &Summary, params: &FxParams) -> Result<Self, FxError> {
        let d = s.d();
        let enc = |v: f64, sc: u32| params.to_int(v, sc);
        let mut v = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                v.push(enc(s.v[(i, j)], scale::V)?);
            }
        }
        let sigma = s.sigma.iter().map(|x| enc(*x, scale::SIGMA)).collect::<Result<_, _>>()?;
        let theta = s.theta.iter().map(|x| enc(*x, scale::THETA)).collect::<Result<_, _>>()?;
        let ystar = s.ystar.iter().map(|x| enc(*x, scale::YSTAR)).collect::<Result<_, _>>()?;
        Ok(Self::from_parts(d, v, sigma, theta, ystar, params.frac_bits))
    }

    /// Derives `A = round(VΘVᵀ / 2^2f)` and the exact `b = V(Σ∘y*)` from the
    /// committed integers.
    pub fn from_parts(d: usize, v: Vec<BigInt>, sigma: Vec<BigInt>, theta: Vec<BigInt>, ystar: Vec<BigInt>, f: u32) -> Self {
        let shift = 2 * f as u64;
        let half = BigInt::from(1) << (shift - 1);
        let mut a = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let acc: BigInt = (0..d).map(|k| &v[i * d + k] * &theta[k] * &v[j * d + k]).sum();
                let r = floor_shr(&(acc + &half), shift);
                a[j * d + i] = r.clone();
                a[i * d + j] = r;
            }
        }
        let b = (0..d)
            .map(|i| (0..d).map(|k| &v[i * d + k] * &sigma[k] * &ystar[k]).sum())
            .collect();
        Self { d, v, sigma, theta, ystar, a, b }
    }

    pub fn a_at(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.d + j]
    }

    pub fn v_at(&self, i: usize, j: usize) -> &BigInt {
        &self.v[i * self.d + j]
    }
}

/// Public constants of the coordination step, rounded once and shared by
/// every party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedCoefficients {
    pub model: ModelKind,
    pub parties: usize,
    /// `ρ` at scale 1, multiplied into `z − u`.
    pub rho: BigInt,
    /// `ρ` at scale 2, added to `Σ²`.
    pub rho_sq_scale: BigInt,
    /// `round(2^f / m)`.
    pub inv_parties: BigInt,
    /// `round(λ/(mρ) · 2^f)`.
    pub kappa: BigInt,
    /// `round(ρ/(2λ/m + ρ) · 2^f)`.
    pub ridge_gain: BigInt,
}

impl FixedCoefficients {
    pub fn new(params: &FxParams, parties: usize, rho: f64, lambda: f64, model: ModelKind) -> Result<Self, FxError> {
        let m = parties as f64;
        Ok(Self {
            model,
            parties,
            rho: params.to_int(rho, 1)?,
            rho_sq_scale: params.to_int(rho, 2)?,
            inv_parties: params.to_int(1.0 / m, 1)?,
            kappa: params.to_int(lambda / (m * rho), 1)?,
            ridge_gain: params.to_int(rho / (2.0 * lambda / m + rho), 1)?,
        })
    }
}

/// `W = A (b + ρ(z − u)·2^f)` at scale [`scale::W`].
pub fn local_product(fs: &FixedSummary, co: &FixedCoefficients, f: u32, z: &[BigInt], u: &[BigInt]) -> Vec<BigInt> {
    let d = fs.d;
    let operand: Vec<BigInt> = (0..d)
        .map(|j| &fs.b[j] + ((&co.rho * (&z[j] - &u[j])) << f))
        .collect();
    (0..d)
        .map(|i| (0..d).map(|j| fs.a_at(i, j) * &operand[j]).sum())
        .collect()
}

/// Brings a local product back to scale 1.
pub fn truncate_product(w: &[BigInt], f: u32) -> Vec<BigInt> {
    let shift = ((scale::W - scale::MODEL) * f) as u64;
    w.iter().map(|x| floor_shr(x, shift)).collect()
}

pub fn soft_threshold_int(a: &BigInt, kappa: &BigInt) -> BigInt {
    if a > kappa {
        a - kappa
    } else if a < &-kappa {
        a + kappa
    } else {
        BigInt::zero()
    }
}

/// Consensus step on scale-1 integers.
pub fn coordinate(w_tilde: &[Vec<BigInt>], us: &[Vec<BigInt>], co: &FixedCoefficients, f: u32) -> Vec<BigInt> {
    let d = w_tilde[0].len();
    (0..d)
        .map(|j| {
            let s: BigInt = w_tilde.iter().zip(us).map(|(w, u)| &w[j] + &u[j]).sum();
            let avg = floor_shr(&(s * &co.inv_parties), f as u64);
            match co.model {
                ModelKind::Lasso => soft_threshold_int(&avg, &co.kappa),
                ModelKind::Ridge => floor_shr(&(avg * &co.ridge_gain), f as u64),
            }
        })
        .collect()
}

/// Integer ADMM state mirroring the secure run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedState {
    pub z: Vec<BigInt>,
    pub us: Vec<Vec<BigInt>>,
    pub w_tilde: Vec<Vec<BigInt>>,
    pub k: usize,
}

impl FixedState {
    pub fn zero(m: usize, d: usize) -> Self {
        Self {
            z: vec![BigInt::zero(); d],
            us: vec![vec![BigInt::zero(); d]; m],
            w_tilde: vec![vec![BigInt::zero(); d]; m],
            k: 0,
        }
    }

    pub fn step(&mut self, summaries: &[FixedSummary], co: &FixedCoefficients, f: u32) {
        self.w_tilde = summaries
            .iter()
            .zip(&self.us)
            .map(|(fs, u)| truncate_product(&local_product(fs, co, f, &self.z, u), f))
            .collect();
        self.z = coordinate(&self.w_tilde, &self.us, co, f);
        for (u, w) in self.us.iter_mut().zip(&self.w_tilde) {
            for j in 0..u.len() {
                u[j] = &u[j] + &w[j] - &self.z[j];
            }
        }
        self.k += 1;
    }
}

/// Runs the integer pipeline and returns `z` at scale 1.
pub fn train_fixed(
    summaries: &[FixedSummary],
    co: &FixedCoefficients,
    params: &FxParams,
    iters: usize,
) -> Result<Vec<BigInt>, AdmmError> {
    let first = summaries.first().ok_or(AdmmError::NoParties)?;
    if summaries.iter().any(|s| s.d != first.d) {
        return Err(AdmmError::Dimension("summaries disagree on feature count"));
    }
    let mut st = FixedState::zero(summaries.len(), first.d);
    for _ in 0..iters {
        st.step(summaries, co, params.frac_bits);
    }
    Ok(st.z)
}

/// Largest magnitude over a slice, for range diagnostics.
pub fn max_abs(xs: &[BigInt]) -> BigInt {
    xs.iter().map(|x| x.abs()).max().unwrap_or_default()
}
