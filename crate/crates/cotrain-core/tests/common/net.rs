use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread;

use cotrain_core::admm::fixed::FixedSummary;
use cotrain_core::admm::{compute_summary, Dataset};
use cotrain_core::linalg::Matrix;
use cotrain_core::paillier::KeyMaterial;
use cotrain_core::protocol::{
    dealer_setup, run_party, Adversary, NetError, Network, NoClock, PartyInput, RunConfig, RunFailure, RunOutcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// In-memory broadcast network: one FIFO per ordered pair.
pub struct MemNet {
    me: usize,
    tx: Vec<Option<Sender<Vec<u8>>>>,
    rx: Vec<Option<Receiver<Vec<u8>>>>,
}

pub fn mem_nets(m: usize) -> Vec<MemNet> {
    let mut tx: Vec<Vec<Option<Sender<Vec<u8>>>>> = (0..m).map(|_| (0..m).map(|_| None).collect()).collect();
    let mut rx: Vec<Vec<Option<Receiver<Vec<u8>>>>> = (0..m).map(|_| (0..m).map(|_| None).collect()).collect();
    for from in 0..m {
        for to in 0..m {
            if from != to {
                let (s, r) = channel();
                tx[from][to] = Some(s);
                rx[to][from] = Some(r);
            }
        }
    }
    tx.into_iter().zip(rx).enumerate().map(|(me, (tx, rx))| MemNet { me, tx, rx }).collect()
}

impl Network for MemNet {
    fn broadcast(&mut self, frame: &[u8]) -> Result<(), NetError> {
        for s in self.tx.iter().flatten() {
            // A peer that already stopped is not an error for the sender.
            let _ = s.send(frame.to_vec());
        }
        Ok(())
    }

    fn receive(&mut self, from: u16) -> Result<Vec<u8>, NetError> {
        let r = self.rx.get(from as usize).and_then(Option::as_ref).filter(|_| from as usize != self.me);
        r.ok_or_else(|| NetError("no link".into()))?.recv().map_err(|_| NetError(format!("party {from} disconnected")))
    }
}

/// A random dataset with `n` rows and `d` features.
pub fn random_dataset(rng: &mut ChaCha20Rng, n: usize, d: usize) -> Dataset {
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y = rows.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.1..0.1)).collect();
    Dataset::new(Matrix::from_rows(&rows), y).unwrap()
}

pub fn random_summaries(cfg: &RunConfig, n: usize, seed: u64) -> Vec<FixedSummary> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let fx = cfg.fx().unwrap();
    (0..cfg.parties)
        .map(|_| {
            let ds = random_dataset(&mut rng, n, cfg.d);
            FixedSummary::encode(&compute_summary(&ds, cfg.rho).unwrap(), &fx).unwrap()
        })
        .collect()
}

/// Runs every party on its own thread; `adversary` is `(party, script)`.
pub fn simulate(
    cfg: &RunConfig,
    keys: &KeyMaterial,
    summaries: &[FixedSummary],
    adversary: Option<(u16, Adversary)>,
    seed: u8,
) -> Vec<Result<RunOutcome, RunFailure>> {
    let (public, secrets) = dealer_setup(cfg, keys, [seed; 32]).unwrap();
    thread::scope(|s| {
        let handles: Vec<_> = secrets
            .into_iter()
            .zip(mem_nets(cfg.parties as usize))
            .enumerate()
            .map(|(i, (secrets, mut net))| {
                let input = PartyInput {
                    setup: public.clone(),
                    secrets,
                    summary: summaries[i].clone(),
                    adversary: adversary.as_ref().filter(|(p, _)| *p as usize == i).map(|(_, a)| a.clone()),
                    seed: [seed ^ (i as u8 + 1); 32],
                };
                s.spawn(move || run_party(input, &mut net, &NoClock))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("party thread panicked")).collect()
    })
}
