#![allow(dead_code)]

pub mod gadget3;
pub mod input;
pub mod net;
pub mod zk;

use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread;

use cotrain_core::mpc::{dealer_generate, reconstruct_alpha, AuthShare, Counts, Field, MpcError, MpcSession, RoundChannel};
use num_bigint::BigUint;

/// Full mesh of in-memory links, one queue per ordered pair of parties.
pub struct MemChannel {
    me: usize,
    tx: Vec<Option<Sender<Vec<u8>>>>,
    rx: Vec<Option<Receiver<Vec<u8>>>>,
}

pub fn mesh(m: usize) -> Vec<MemChannel> {
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
    tx.into_iter().zip(rx).enumerate().map(|(me, (tx, rx))| MemChannel { me, tx, rx }).collect()
}

impl RoundChannel for MemChannel {
    fn exchange(&mut self, payload: Vec<u8>) -> Result<Vec<Vec<u8>>, MpcError> {
        for s in self.tx.iter().flatten() {
            s.send(payload.clone()).map_err(|_| MpcError::Channel("peer gone".into()))?;
        }
        let mut out = Vec::with_capacity(self.rx.len());
        for (j, r) in self.rx.iter().enumerate() {
            if j == self.me {
                out.push(payload.clone());
            } else {
                out.push(r.as_ref().unwrap().recv().map_err(|_| MpcError::Channel("peer gone".into()))?);
            }
        }
        Ok(out)
    }
}

pub struct Run<T> {
    pub outputs: Vec<T>,
    pub alpha: BigUint,
    pub field: Field,
}

/// Runs `f` once per party on its own thread over a fresh mesh.
pub fn run_parties<T, F>(m: u16, counts: &Counts, seed: u8, f: F) -> Run<T>
where
    T: Send,
    F: Fn(&mut MpcSession<MemChannel>) -> T + Sync,
{
    let p = cotrain_core::fixedpoint::default_mpc_modulus();
    let mats = dealer_generate(m, &p, counts, [seed; 32]);
    let alpha = reconstruct_alpha(&mats);
    let field = mats[0].field();
    let outputs = thread::scope(|s| {
        let handles: Vec<_> = mats
            .into_iter()
            .zip(mesh(m as usize))
            .enumerate()
            .map(|(i, (mat, ch))| {
                let f = &f;
                s.spawn(move || {
                    let mut session = MpcSession::new(mat, ch, [i as u8 ^ seed; 32]);
                    f(&mut session)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("party thread panicked")).collect()
    });
    Run { outputs, alpha, field }
}

/// Reconstructs wire `k` from every party's output vector, checking the MAC.
pub fn open_wire(run_shares: &[Vec<AuthShare>], k: usize, alpha: &BigUint, field: &Field) -> BigUint {
    let shares: Vec<AuthShare> = run_shares.iter().map(|v| v[k].clone()).collect();
    cotrain_core::mpc::reconstruct(&shares, alpha, field).expect("MAC invariant violated")
}
