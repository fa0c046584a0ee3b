//! A plaintext oracle for the committed-input statements, and summaries
//! perturbed to sit exactly on either side of the tolerance.

use cotrain_core::admm::fixed::FixedSummary;
use cotrain_core::protocol::RunConfig;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// The first approximate identity that `fs` violates, if any: 1 for
/// `A ≈ VΘVᵀ`, 3 for `VᵀV ≈ I`, 4 for `(Σ² + ρ)Θ ≈ I`.
pub fn first_violation(cfg: &RunConfig, fs: &FixedSummary) -> Option<u8> {
    let d = fs.d;
    let f = cfg.frac_bits;
    let co = cfg.coefficients().unwrap();
    let (tol2, tol4) = (cfg.tolerance(2), cfg.tolerance(4));
    let within = |x: &BigInt, tol: &BigInt| x.abs() <= *tol;
    let v = |i: usize, j: usize| &fs.v[i * d + j];
    for i in 0..d {
        for j in i..d {
            let q: BigInt = (0..d).map(|l| v(i, l) * &fs.theta[l] * v(j, l)).sum();
            if !within(&(q - (&fs.a[i * d + j] << (2 * f))), &tol4) {
                return Some(1);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let g: BigInt = (0..d).map(|l| v(l, i) * v(l, j)).sum();
            let target = if i == j { BigInt::one() << (2 * f) } else { BigInt::zero() };
            if !within(&(g - target), &tol2) {
                return Some(3);
            }
        }
    }
    for j in 0..d {
        let r = (&fs.sigma[j] * &fs.sigma[j] + &co.rho_sq_scale) * &fs.theta[j] - (BigInt::one() << (4 * f));
        if !within(&r, &tol4) {
            return Some(4);
        }
    }
    None
}

/// `fs` perturbed along one statement's free parameter so that the step
/// `inside → outside` is a single unit in the last place.
pub struct Boundary {
    pub statement: u8,
    pub inside: FixedSummary,
    pub outside: FixedSummary,
}

/// Largest `δ ≥ 0` with `pred(δ)`, given `pred(0)`.
fn last_true(pred: impl Fn(&BigInt) -> bool) -> BigInt {
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one();
    while pred(&hi) {
        lo = hi.clone();
        hi <<= 1;
    }
    while &hi - &lo > BigInt::one() {
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        if pred(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn boundary(cfg: &RunConfig, fs: &FixedSummary, statement: u8) -> Boundary {
    assert_eq!(first_violation(cfg, fs), None, "honest summary already violates a statement");
    let f = cfg.frac_bits;
    let perturb = |delta: &BigInt| -> FixedSummary {
        let mut s = fs.clone();
        match statement {
            1 => s.a[0] += delta,
            3 => {
                let mut v = s.v.clone();
                v[0] += delta;
                s = FixedSummary::from_parts(s.d, v, s.sigma, s.theta, s.ystar, f);
            }
            4 => s.theta[0] += delta,
            _ => panic!("statement {statement} has no tolerance"),
        }
        s
    };
    let ok = |delta: &BigInt| first_violation(cfg, &perturb(delta)).is_none();
    let delta = last_true(ok);
    let inside = perturb(&delta);
    let outside = perturb(&(delta + 1));
    Boundary { statement, inside, outside }
}
