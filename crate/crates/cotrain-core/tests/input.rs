mod common;

use common::input::{boundary, first_violation};
use common::net::random_summaries;
use cotrain_core::admm::ModelKind;
use cotrain_core::protocol::{input_prepare, verify_committed_input, Adversary, Bounds, ProofCounts, RunConfig};
use cotrain_core::testkeys::key_1024;
use cotrain_core::transcript::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn config(d: usize) -> RunConfig {
    let mut cfg = RunConfig::new(2, d, 1.0, 0.1, ModelKind::Lasso);
    cfg.he_bits = 1024;
    cfg
}

fn ctx(cfg: &RunConfig) -> Context {
    Context { config_hash: cfg.hash(), phase: 1, iteration: 0, sender: 0 }
}

#[test]
fn honest_bundle_verifies_and_has_the_expected_size() {
    let km = key_1024(2);
    let cfg = config(3);
    let bounds = Bounds::new(&cfg).unwrap();
    let fs = &random_summaries(&cfg, 25, 3)[0];
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (ci, wit) = input_prepare(&km.pk, &cfg, &bounds, &ctx(&cfg), fs, None, &mut rng).unwrap();
    assert_eq!(ci.counts(), ProofCounts::for_dimension(3));
    assert_eq!(&wit.summary, fs);
    assert_eq!(verify_committed_input(&km.pk, &cfg, &bounds, &ctx(&cfg), &ci), Ok(()));
    let other = Context { sender: 1, ..ctx(&cfg) };
    assert!(verify_committed_input(&km.pk, &cfg, &bounds, &other, &ci).is_err());
}

#[test]
fn tolerance_boundaries_are_exact() {
    let km = key_1024(2);
    let cfg = config(2);
    let bounds = Bounds::new(&cfg).unwrap();
    let lenient = Adversary { mutations: Vec::new() };
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let fs = &random_summaries(&cfg, 20, 4)[1];
    for statement in [1u8, 3, 4] {
        let b = boundary(&cfg, fs, statement);
        assert_eq!(first_violation(&cfg, &b.inside), None);
        assert_eq!(first_violation(&cfg, &b.outside), Some(statement));
        let (ci, _) = input_prepare(&km.pk, &cfg, &bounds, &ctx(&cfg), &b.inside, None, &mut rng).unwrap();
        assert_eq!(verify_committed_input(&km.pk, &cfg, &bounds, &ctx(&cfg), &ci), Ok(()), "statement {statement}");
        assert!(input_prepare(&km.pk, &cfg, &bounds, &ctx(&cfg), &b.outside, None, &mut rng).is_err());
        let (ci, _) = input_prepare(&km.pk, &cfg, &bounds, &ctx(&cfg), &b.outside, Some(&lenient), &mut rng).unwrap();
        let err = verify_committed_input(&km.pk, &cfg, &bounds, &ctx(&cfg), &ci).unwrap_err();
        assert_eq!(err.check.id(), format!("input-statement-{statement}"));
    }
}
