use cotrain::data::{gen_synthetic, parse_csv, read_model, write_csv, write_model};
use cotrain_core::admm::{train_plaintext, ModelKind};
use proptest::prelude::*;

#[test]
fn noiseless_ridge_recovers_the_generating_weights() {
    let s = gen_synthetic(3, 200, 5, 0.0, 17).unwrap();
    let w = train_plaintext(&s.parties, 0.0, 1e-3, 200, ModelKind::Ridge).unwrap();
    for (got, want) in w.iter().zip(&s.weights) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
}

#[test]
fn csv_and_model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = gen_synthetic(1, 30, 3, 0.2, 4).unwrap();
    let p = dir.path().join("d.csv");
    write_csv(&p, &s.parties[0]).unwrap();
    let back = parse_csv(std::fs::File::open(&p).unwrap(), "y").unwrap();
    assert_eq!(back, s.parties[0]);
    let m = dir.path().join("m.csv");
    write_model(&m, &s.weights).unwrap();
    assert_eq!(read_model(&m).unwrap(), s.weights);
}

proptest! {
    #[test]
    fn model_text_round_trips(w in proptest::collection::vec(-1e6f64..1e6, 1..12)) {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        write_model(&m, &w).unwrap();
        prop_assert_eq!(read_model(&m).unwrap(), w);
    }
}
