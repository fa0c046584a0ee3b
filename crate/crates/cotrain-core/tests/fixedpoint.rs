use cotrain_core::fixedpoint::{decode, default_mpc_modulus, encode, encode_at, truncate_plain, FxParams, FxValue, ModulusTag};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed};
use proptest::prelude::*;

fn params(f: u32) -> FxParams {
    FxParams::new(f, 40, default_mpc_modulus(), 2048, 40, 4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn encode_decode_within_half_ulp(v in -1.0e9f64..1.0e9, f in 8u32..30) {
        let p = params(f);
        let x = encode(v, &p, ModulusTag::Mpc).unwrap();
        prop_assert!((decode(&x) - v).abs() <= p.ulp() / 2.0 + v.abs() * f64::EPSILON);
    }

    #[test]
    fn multiply_truncate_is_floor_of_exact_product(a in -(1i64 << 50)..(1i64 << 50), b in -(1i64 << 50)..(1i64 << 50), f in 8u32..30) {
        let p = params(f);
        let m = default_mpc_modulus();
        let enc = |v: i64| FxValue::from_residue(reduce(&BigInt::from(v), &m), 1, ModulusTag::Mpc, &p).unwrap();
        let t = truncate_plain(&enc(a).mul(&enc(b)).unwrap()).unwrap();
        let exact = BigInt::from(a) * BigInt::from(b);
        let scaled = t.signed() << f;
        // 0 <= ab - t·2^f < 2^f, i.e. error below one unit in the last place.
        prop_assert!(!(&exact - &scaled).is_negative());
        prop_assert!(exact - scaled < BigInt::one() << f);
        prop_assert_eq!(t.scale(), 1);
    }

    #[test]
    fn addition_is_exact_in_the_residue_ring(a in -(1i64 << 60)..(1i64 << 60), b in -(1i64 << 60)..(1i64 << 60)) {
        let p = params(16);
        let m = default_mpc_modulus();
        let x = FxValue::from_residue(reduce(&BigInt::from(a), &m), 1, ModulusTag::Mpc, &p).unwrap();
        let y = FxValue::from_residue(reduce(&BigInt::from(b), &m), 1, ModulusTag::Mpc, &p).unwrap();
        prop_assert_eq!(x.add(&y).unwrap().signed(), BigInt::from(a) + BigInt::from(b));
    }
}

fn reduce(x: &BigInt, m: &BigUint) -> BigUint {
    x.mod_floor(&BigInt::from(m.clone())).to_biguint().unwrap()
}

#[test]
fn scales_compose() {
    let p = params(12);
    let a = encode_at(0.75, 2, &p, ModulusTag::Mpc).unwrap();
    assert_eq!(a.signed(), BigInt::from(3) << 22);
    assert_eq!(decode(&truncate_plain(&a).unwrap()), 0.75);
}
