mod common;

use common::net::{random_summaries, simulate};
use cotrain_core::admm::fixed::train_fixed;
use cotrain_core::admm::ModelKind;
use cotrain_core::protocol::{Adversary, Phase, ProtocolError, RunConfig, Tamper};
use num_bigint::BigInt;
use cotrain_core::testkeys::key_2048;

fn small(model: ModelKind, iterations: u32) -> RunConfig {
    let mut cfg = RunConfig::new(2, 2, 1.0, 0.2, model);
    cfg.iterations = iterations;
    cfg
}

#[test]
fn honest_lasso_run_matches_integer_replay() {
    let cfg = small(ModelKind::Lasso, 2);
    let keys = key_2048(2);
    let summaries = random_summaries(&cfg, 30, 1);
    let expected = train_fixed(&summaries, &cfg.coefficients().unwrap(), &cfg.fx().unwrap(), 2).unwrap();
    for out in simulate(&cfg, &keys, &summaries, None, 7) {
        let out = out.unwrap_or_else(|f| panic!("{}", f.error));
        assert_eq!(out.model_fixed, expected);
    }
}

#[test]
fn ridge_run_and_zero_iterations() {
    let keys = key_2048(2);
    let cfg = small(ModelKind::Ridge, 1);
    let summaries = random_summaries(&cfg, 30, 2);
    let expected = train_fixed(&summaries, &cfg.coefficients().unwrap(), &cfg.fx().unwrap(), 1).unwrap();
    assert!(expected.iter().any(|x| x != &BigInt::from(0)));
    for out in simulate(&cfg, &keys, &summaries, None, 3) {
        assert_eq!(out.unwrap().model_fixed, expected);
    }
    let cfg = small(ModelKind::Lasso, 0);
    for out in simulate(&cfg, &keys, &summaries, None, 4) {
        assert_eq!(out.unwrap().model, vec![0.0; 2]);
    }
}

fn expected_check(t: Tamper) -> &'static str {
    match t {
        Tamper::WrongA => "input-statement-1",
        Tamper::InconsistentV => "input-statement-3",
        Tamper::SubstitutedSummary => "input-statement-1",
        Tamper::OmitProof => "input-structure",
        Tamper::StaleReplay | Tamper::WrongRho => "local-update-gadget1",
        Tamper::TruncatedBroadcast => "framing",
        Tamper::DuplicateMessage => "sequence",
        Tamper::OversizedMask => "gadget3-mask-interval",
        Tamper::ShareShift | Tamper::MacShift => "gadget4-mac",
        Tamper::MismatchedConfig => "config-hash",
    }
}

fn expected_phase(t: Tamper) -> Phase {
    match t {
        Tamper::ShareShift | Tamper::MacShift => Phase::Verify,
        Tamper::DuplicateMessage => Phase::ToShares,
        other => other.phase(),
    }
}

#[test]
fn every_tamper_aborts_every_honest_party() {
    let cfg = {
        let mut c = RunConfig::new(3, 2, 1.0, 0.2, ModelKind::Lasso);
        c.iterations = 2;
        c
    };
    let keys = key_2048(3);
    let summaries = random_summaries(&cfg, 30, 5);
    for t in Tamper::ALL {
        let outs = simulate(&cfg, &keys, &summaries, Some((1, Adversary::new(t, 1))), 9);
        for (i, out) in outs.iter().enumerate() {
            let err = match out {
                Ok(_) => panic!("{}: party {i} released a model", t.as_str()),
                Err(f) => &f.error,
            };
            if i == 1 {
                continue;
            }
            let ProtocolError::Abort(report) = err else { panic!("{}: {err}", t.as_str()) };
            assert_eq!(report.check.id(), expected_check(t), "{}: {report}", t.as_str());
            assert_eq!(report.phase, expected_phase(t), "{}: {report}", t.as_str());
            if report.phase != Phase::Verify {
                assert_eq!(report.sender, 1, "{}: {report}", t.as_str());
            }
        }
    }
}
