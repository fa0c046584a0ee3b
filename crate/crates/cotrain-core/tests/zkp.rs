mod common;

use common::zk::{flip_bit, honest, KINDS};
use cotrain_core::paillier::encrypt_rng;
use cotrain_core::testkeys::key_1024;
use cotrain_core::transcript::Transcript;
use cotrain_core::zkp::{prove_range, verify_range};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn every_kind_is_complete_and_rejects_bit_flips() {
    let km = key_1024(2);
    let mut rng = ChaCha20Rng::seed_from_u64(40);
    for kind in KINDS {
        for _ in 0..5 {
            let case = honest(kind, &km.pk, &mut rng);
            assert!(case.verifies(&case.proof), "{kind:?} honest proof rejected");
            for _ in 0..4 {
                let bad = flip_bit(&case.proof, &mut rng);
                assert!(!case.verifies(&bad), "{kind:?} accepted a flipped proof");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn range_proofs_accept_exactly_the_range(lo in -(1i64 << 40)..(1i64 << 40), width in 0i64..(1 << 30), pick in 0.0f64..1.0, seed: u64) {
        let km = key_1024(2);
        let pk = &km.pk;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (lo, hi) = (BigInt::from(lo), BigInt::from(lo + width));
        let v = &lo + BigInt::from((width as f64 * pick) as i64);
        let (c, s) = encrypt_rng(pk, &v, &mut rng);
        let p = prove_range(pk, &mut Transcript::new("p"), &c, &v, &s, &lo, &hi, &mut rng).unwrap();
        prop_assert!(verify_range(pk, &mut Transcript::new("p"), &c, &p, &lo, &hi));
        // The same proof does not cover a range that excludes v.
        if v > lo {
            prop_assert!(!verify_range(pk, &mut Transcript::new("p"), &c, &p, &lo, &(&v - 1)));
        }
        prop_assert!(prove_range(pk, &mut Transcript::new("p"), &c, &(&hi + 1), &s, &lo, &hi, &mut rng).is_err());
    }
}
