//! One party's run, from the configuration handshake to model release.
//!
//! Every phase is a broadcast round: a party sends its frame, reads exactly
//! one frame from each peer in id order, and verifies everything before
//! moving on. The first failed check ends the run with an [`AbortReport`],
//! which is also broadcast so that peers stop waiting.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::config::{coord_plan, Bounds, RunConfig};
use super::convert::{
    batch_weights, check_mask, conversion_difference, conversion_shares, decode_share_sum, divisible, draw_masks,
    encrypt_shares, input_ciphertext, mac_difference, masked_check, packed_targets, read_partials, sum_cts, unpack,
    verify_check_mask, verify_masks, verify_shares, write_partials, ProvenCts,
};
use super::input::{input_prepare, verify_committed_input, CommittedInput};
use super::local::{local_optimize, verify_local, LocalUpdate};
use super::setup::{PartySetup, PublicSetup};
use super::tamper::{Adversary, Tamper};
use super::wire::{Frame, Network};
use super::{AbortReport, Check, Phase, ProtocolError};
use crate::admm::fixed::{scale, FixedSummary};
use crate::admm::ModelKind;
use crate::codec::{Reader, Writer};
use crate::mpc::{AuthShare, Field, MpcError, MpcSession, RoundChannel};
use crate::paillier::{add_ct, combine, partial_decrypt, sub_ct, Ciphertext, PartialDecryption, PublicKey, SecretKeyShare};
use crate::transcript::Context;

/// Microsecond timestamps for per-phase timing. Use [`NoClock`] when timing
/// is not needed.
pub trait Clock {
    fn micros(&self) -> u64;
}

pub struct NoClock;

impl Clock for NoClock {
    fn micros(&self) -> u64 {
        0
    }
}

/// Everything one party brings to a run.
#[derive(Debug, Clone)]
pub struct PartyInput {
    pub setup: PublicSetup,
    pub secrets: PartySetup,
    pub summary: FixedSummary,
    pub adversary: Option<Adversary>,
    /// Seeds this party's local randomness.
    pub seed: [u8; 32],
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub micros: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub frames: u64,
}

/// Per-phase totals, indexed by [`Phase`] tag for `Handshake..=Release`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub phases: [PhaseStats; 8],
}

impl RunStats {
    pub fn get(&self, phase: Phase) -> &PhaseStats {
        &self.phases[(phase as usize).min(7)]
    }

    pub fn total_bytes_sent(&self) -> u64 {
        self.phases.iter().map(|p| p.bytes_sent).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub model: Vec<f64>,
    /// The released model at scale 1.
    pub model_fixed: Vec<BigInt>,
    pub stats: RunStats,
}

/// A run that stopped: the report plus whatever statistics were gathered.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: ProtocolError,
    pub stats: RunStats,
}

/// MPC rounds over the broadcast network. Also keeps the public log digest
/// and the traffic counters for every round, MPC or not.
struct NetChannel<'a, N: Network, C: Clock> {
    net: &'a mut N,
    clock: &'a C,
    me: u16,
    parties: u16,
    phase: Phase,
    iteration: u32,
    log: Sha256,
    stats: RunStats,
    failure: Option<AbortReport>,
}

impl<N: Network, C: Clock> NetChannel<'_, N, C> {
    fn report(&self, sender: u16, check: Check, detail: impl Into<String>) -> AbortReport {
        AbortReport {
            reporter: self.me,
            phase: self.phase,
            iteration: self.iteration,
            sender,
            check,
            detail: detail.into(),
        }
    }

    fn send(&mut self, payload: Vec<u8>) -> Result<(), AbortReport> {
        let bytes = Frame::new(self.phase, self.iteration, self.me, payload).encode();
        self.net.broadcast(&bytes).map_err(|e| self.report(self.me, Check::Transport, e.0))?;
        let st = &mut self.stats.phases[self.phase as usize];
        st.bytes_sent += bytes.len() as u64;
        st.frames += 1;
        Ok(())
    }

    /// Sends `payload` (`copies` times) and collects one payload per party,
    /// ours included, in id order.
    fn round(&mut self, payload: Vec<u8>, copies: usize) -> Result<Vec<Vec<u8>>, AbortReport> {
        for _ in 1..copies {
            self.send(payload.clone())?;
        }
        self.send(payload.clone())?;
        let mut all = Vec::with_capacity(self.parties as usize);
        for j in 0..self.parties {
            if j == self.me {
                all.push(payload.clone());
                continue;
            }
            let bytes = self.net.receive(j).map_err(|e| self.report(j, Check::Transport, e.0))?;
            self.stats.phases[self.phase as usize].bytes_received += bytes.len() as u64;
            let frame = Frame::decode(&bytes).map_err(|e| self.report(j, Check::Framing, e.to_string()))?;
            if frame.sender != j {
                return Err(self.report(j, Check::Framing, "sender id does not match the link"));
            }
            if frame.phase == Phase::Abort as u8 {
                let text = String::from_utf8_lossy(&frame.payload);
                let detail = match AbortReport::parse(&text) {
                    Some(r) => alloc::format!("party {} reported {}", r.reporter, r.check.id()),
                    None => "unparseable abort report".to_string(),
                };
                return Err(self.report(j, Check::PeerAbort, detail));
            }
            if frame.phase != self.phase as u8 || frame.iteration != self.iteration {
                return Err(self.report(
                    j,
                    Check::Sequence,
                    alloc::format!("expected {} {}, got tag {} {}", self.phase.as_str(), self.iteration, frame.phase, frame.iteration),
                ));
            }
            all.push(frame.payload);
        }
        self.log.update([self.phase as u8]);
        self.log.update(self.iteration.to_be_bytes());
        for p in &all {
            self.log.update((p.len() as u64).to_be_bytes());
            self.log.update(p);
        }
        Ok(all)
    }

    fn digest(&self) -> [u8; 32] {
        self.log.clone().finalize().into()
    }
}

impl<N: Network, C: Clock> RoundChannel for NetChannel<'_, N, C> {
    fn exchange(&mut self, payload: Vec<u8>) -> Result<Vec<Vec<u8>>, MpcError> {
        self.round(payload, 1).map_err(|r| {
            let msg = r.detail.clone();
            self.failure = Some(r);
            MpcError::Channel(msg)
        })
    }
}

/// What the end-of-run checks need from each iteration.
struct IterationLog {
    /// `E_W` of every owner, owner-major.
    w: Vec<Ciphertext>,
    /// Shared-back values (`z` then each owner's `w̃`) with summed value and
    /// MAC ciphertexts and the public offsets.
    values: Vec<Ciphertext>,
    macs: Vec<Ciphertext>,
    deltas: Vec<BigUint>,
}

struct Driver<'a, N: Network, C: Clock> {
    me: u16,
    m: usize,
    d: usize,
    cfg: RunConfig,
    bounds: Bounds,
    pk: PublicKey,
    hash: [u8; 32],
    mask_cts: Vec<Vec<Ciphertext>>,
    key_share: SecretKeyShare,
    field: Field,
    adversary: Option<Adversary>,
    sess: MpcSession<NetChannel<'a, N, C>>,
    rng: ChaCha20Rng,
    phase_start: u64,
}

/// Runs one party to completion over `net`.
pub fn run_party<N: Network, C: Clock>(input: PartyInput, net: &mut N, clock: &C) -> Result<RunOutcome, RunFailure> {
    let PartyInput { setup, secrets, summary, adversary, seed } = input;
    let me = secrets.key_share.index;
    let parties = setup.config.parties;
    let chan = NetChannel {
        net,
        clock,
        me,
        parties,
        phase: Phase::Handshake,
        iteration: 0,
        log: Sha256::new_with_prefix(b"cotrain/public-log"),
        stats: RunStats::default(),
        failure: None,
    };
    let mut rng = ChaCha20Rng::from_seed(seed);
    let mut sess_seed = [0u8; 32];
    rng.fill_bytes(&mut sess_seed);
    let sess = MpcSession::new(secrets.material, chan, sess_seed);
    let field = sess.field().clone();
    let cfg = setup.config.clone();
    let bounds = match Bounds::new(&cfg) {
        Ok(b) => b,
        Err(error) => return Err(RunFailure { error, stats: RunStats::default() }),
    };
    let mut drv = Driver {
        me,
        m: parties as usize,
        d: cfg.d,
        hash: cfg.hash(),
        cfg,
        bounds,
        pk: setup.pk,
        mask_cts: setup.mask_cts,
        key_share: secrets.key_share,
        field,
        adversary,
        sess,
        rng,
        phase_start: clock.micros(),
    };
    let result = drv.run(&summary);
    drv.enter(Phase::Release, drv.cfg.iterations);
    let stats = drv.sess.channel_mut().stats.clone();
    match result {
        Ok((model_fixed, model)) => Ok(RunOutcome { model, model_fixed, stats }),
        Err(error) => {
            if let ProtocolError::Abort(report) = &error {
                let frame = Frame::new(Phase::Abort, report.iteration, me, report.to_text().into_bytes()).encode();
                let _ = drv.sess.channel_mut().net.broadcast(&frame);
            }
            Err(RunFailure { error, stats })
        }
    }
}

impl<'a, N: Network, C: Clock> Driver<'a, N, C> {
    fn chan(&mut self) -> &mut NetChannel<'a, N, C> {
        self.sess.channel_mut()
    }

    /// Switches the phase label and charges the elapsed time to the old one.
    fn enter(&mut self, phase: Phase, iteration: u32) {
        let chan = self.sess.channel_mut();
        let now = chan.clock.micros();
        let old = chan.phase as usize;
        chan.stats.phases[old].micros += now.saturating_sub(self.phase_start);
        chan.phase = phase;
        chan.iteration = iteration;
        self.phase_start = now;
    }

    fn ctx(&mut self, sender: u16) -> Context {
        let config_hash = self.hash;
        let chan = self.chan();
        Context { config_hash, phase: chan.phase as u8, iteration: chan.iteration, sender }
    }

    fn abort(&mut self, sender: u16, check: Check, detail: impl Into<String>) -> ProtocolError {
        ProtocolError::Abort(self.chan().report(sender, check, detail))
    }

    fn fires(&self, t: Tamper, iteration: u32) -> bool {
        Adversary::fires(self.adversary.as_ref(), t, iteration)
    }

    fn round(&mut self, payload: Vec<u8>) -> Result<Vec<Vec<u8>>, ProtocolError> {
        self.chan().round(payload, 1).map_err(ProtocolError::Abort)
    }

    /// Maps an MPC failure to the report for this party.
    fn mpc_err(&mut self, e: MpcError) -> ProtocolError {
        if let Some(r) = self.chan().failure.take() {
            return ProtocolError::Abort(r);
        }
        let me = self.me;
        match e {
            MpcError::MacCheck { index } => {
                self.abort(me, Check::MacCheck, alloc::format!("MAC check failed at opening {index:?}"))
            }
            MpcError::Desync { party } | MpcError::Malformed { party } | MpcError::BadCommitment { party } => {
                self.abort(party, Check::Mpc, e.to_string())
            }
            other => self.abort(me, Check::Mpc, other.to_string()),
        }
    }

    fn framing(&mut self, sender: u16, e: impl ToString) -> ProtocolError {
        self.abort(sender, Check::Framing, e.to_string())
    }

    fn run(&mut self, summary: &FixedSummary) -> Result<(Vec<BigInt>, Vec<f64>), ProtocolError> {
        self.handshake()?;
        let (inputs, wit) = self.input_prep(summary)?;
        let d = self.d;
        let m = self.m;
        let rho = self.cfg.coefficients()?.rho;
        let f = self.cfg.frac_bits;
        let mut e_z = vec![Ciphertext::one().with_scale(scale::MODEL as u16); d];
        let mut e_u = vec![e_z.clone(); m];
        let mut u_sh = vec![vec![AuthShare::zero(); d]; m];
        let mut prev_update: Option<Vec<u8>> = None;
        let mut logs = Vec::with_capacity(self.cfg.iterations as usize);

        for k in 0..self.cfg.iterations {
            // Local optimization.
            self.enter(Phase::LocalOpt, k);
            let my_rho = if self.fires(Tamper::WrongRho, k) { &rho << 1u32 } else { rho.clone() };
            let ctx = self.ctx(self.me);
            let me = self.me as usize;
            let upd = local_optimize(&self.pk, &self.bounds, &ctx, &inputs[me], &wit, &my_rho, f, &e_z, &e_u[me], &mut self.rng)?;
            let mut w = Writer::new();
            upd.write(&self.pk, &mut w);
            let mut payload = w.finish();
            let honest_payload = payload.clone();
            if self.fires(Tamper::StaleReplay, k) {
                if let Some(prev) = &prev_update {
                    payload = prev.clone();
                }
            }
            if self.fires(Tamper::TruncatedBroadcast, k) {
                payload.truncate(payload.len() / 2);
            }
            let copies = if self.fires(Tamper::DuplicateMessage, k) { 2 } else { 1 };
            prev_update = Some(honest_payload);
            let all = self.chan().round(payload, copies).map_err(ProtocolError::Abort)?;
            let mut w_all: Vec<Ciphertext> = Vec::with_capacity(m * d);
            for (j, bytes) in all.iter().enumerate() {
                let j16 = j as u16;
                let upd = if j == me {
                    upd.clone()
                } else {
                    let mut r = Reader::new(bytes);
                    let upd = LocalUpdate::read(&self.pk, &mut r, d).map_err(|e| self.framing(j16, e))?;
                    r.finish().map_err(|e| self.framing(j16, e))?;
                    let ctx = self.ctx(j16);
                    if !verify_local(&self.pk, &self.bounds, &ctx, &inputs[j], &rho, f, &e_z, &e_u[j], &upd) {
                        return Err(self.abort(j16, Check::LocalUpdate, "local update proof rejected"));
                    }
                    upd
                };
                w_all.extend(upd.w);
            }

            // Gadget 3: masks, masked joint decryption, MPC input.
            self.enter(Phase::ToShares, k);
            let oversize = self.fires(Tamper::OversizedMask, k);
            let ctx = self.ctx(self.me);
            let (mine, mask_values) = draw_masks(&self.pk, &ctx, &self.bounds, m * d, oversize, &mut self.rng)?;
            let mut w = Writer::new();
            mine.write(&self.pk, &mut w);
            let all = self.round(w.finish())?;
            let mut masks = Vec::with_capacity(m);
            for (j, bytes) in all.iter().enumerate() {
                let j16 = j as u16;
                if j == me {
                    masks.push(mine.clone());
                    continue;
                }
                let mut r = Reader::new(bytes);
                let pc = ProvenCts::read(&self.pk, &mut r, m * d).map_err(|e| self.framing(j16, e))?;
                r.finish().map_err(|e| self.framing(j16, e))?;
                let ctx = self.ctx(j16);
                if !verify_masks(&self.pk, &ctx, &self.bounds, &pc) {
                    return Err(self.abort(j16, Check::MaskInterval, "conversion mask interval proof rejected"));
                }
                masks.push(pc);
            }
            let w_refs: Vec<&Ciphertext> = w_all.iter().collect();
            let mask_refs: Vec<&ProvenCts> = masks.iter().collect();
            let targets = packed_targets(&self.pk, &self.bounds, &w_refs, &mask_refs);
            let opened = self.joint_decrypt(&targets)?;
            let opened = unpack(&opened, &self.bounds, m * d);
            let my_shares = conversion_shares(self.me, &self.field, &self.bounds, &opened, &mask_values);
            let per_inputter = self.sess.input(&vec![m * d; m], &my_shares).map_err(|e| self.mpc_err(e))?;
            let field = self.field.clone();
            let w_sh: Vec<AuthShare> = (0..m * d)
                .map(|q| per_inputter.iter().fold(AuthShare::zero(), |acc, v| acc.add(&v[q], &field)))
                .collect();

            // Coordination.
            self.enter(Phase::Coord, k);
            let (z_sh, wt_sh) = self.coordinate(&w_sh, &u_sh).map_err(|e| self.mpc_err(e))?;
            for j in 0..m {
                for c in 0..d {
                    u_sh[j][c] = u_sh[j][c].add(&wt_sh[j * d + c], &field).sub(&z_sh[c], &field);
                }
            }

            // Shares back to ciphertexts.
            self.enter(Phase::FromShares, k);
            let mut out: Vec<AuthShare> = z_sh.clone();
            out.extend(wt_sh.iter().cloned());
            let ctx = self.ctx(self.me);
            let (vals, macs) = encrypt_shares(
                &self.pk,
                &ctx,
                &field,
                &out,
                self.fires(Tamper::ShareShift, k),
                self.fires(Tamper::MacShift, k),
                &mut self.rng,
            )?;
            let mut w = Writer::new();
            vals.write(&self.pk, &mut w);
            macs.write(&self.pk, &mut w);
            let all = self.round(w.finish())?;
            let n_out = out.len();
            let mut val_cts: Vec<Vec<Ciphertext>> = Vec::with_capacity(m);
            let mut mac_cts: Vec<Vec<Ciphertext>> = Vec::with_capacity(m);
            for (j, bytes) in all.iter().enumerate() {
                let j16 = j as u16;
                if j == me {
                    val_cts.push(vals.cts.clone());
                    mac_cts.push(macs.cts.clone());
                    continue;
                }
                let mut r = Reader::new(bytes);
                let v = ProvenCts::read(&self.pk, &mut r, n_out).map_err(|e| self.framing(j16, e))?;
                let mc = ProvenCts::read(&self.pk, &mut r, n_out).map_err(|e| self.framing(j16, e))?;
                r.finish().map_err(|e| self.framing(j16, e))?;
                let ctx = self.ctx(j16);
                if !verify_shares(&self.pk, &ctx, &field, &v, &mc) {
                    return Err(self.abort(j16, Check::ShareInterval, "share interval proof rejected"));
                }
                val_cts.push(v.cts);
                mac_cts.push(mc.cts);
            }
            let vrefs: Vec<&[Ciphertext]> = val_cts.iter().map(Vec::as_slice).collect();
            let mrefs: Vec<&[Ciphertext]> = mac_cts.iter().map(Vec::as_slice).collect();
            let values = sum_cts(&self.pk, &vrefs, scale::MODEL as u16);
            let mac_sums = sum_cts(&self.pk, &mrefs, 0);
            e_z = values[..d].to_vec();
            for (j, u) in e_u.iter_mut().enumerate() {
                for (c, uc) in u.iter_mut().enumerate() {
                    let grown = add_ct(&self.pk, uc, &values[d + j * d + c])?;
                    *uc = sub_ct(&self.pk, &grown, &e_z[c])?;
                }
            }
            let deltas = out.iter().map(|s| s.delta.clone()).collect();
            logs.push(IterationLog { w: w_all, values, macs: mac_sums, deltas });
        }

        self.enter(Phase::Verify, self.cfg.iterations);
        let left = self.sess.leftover();
        if left != 0 {
            return Err(ProtocolError::Config(alloc::format!("{left} items of dealer material were not consumed")));
        }
        self.verify_conversions(&logs)?;
        self.verify_macs(&logs)?;

        self.enter(Phase::Release, self.cfg.iterations);
        let plain = self.joint_decrypt(&e_z)?;
        let model_fixed: Vec<BigInt> = plain.iter().map(|p| decode_share_sum(p, &self.field)).collect();
        let fx = self.cfg.fx()?;
        let model = model_fixed.iter().map(|x| fx.from_int(x, scale::MODEL)).collect();
        Ok((model_fixed, model))
    }

    fn handshake(&mut self) -> Result<(), ProtocolError> {
        self.enter(Phase::Handshake, 0);
        let mine = if self.fires(Tamper::MismatchedConfig, 0) {
            let mut alt = self.cfg.clone();
            alt.lambda *= 2.0;
            alt.hash()
        } else {
            self.hash
        };
        let all = self.round(mine.to_vec())?;
        for (j, h) in all.iter().enumerate() {
            if h.as_slice() != self.hash {
                return Err(self.abort(j as u16, Check::ConfigHash, "configuration hash differs"));
            }
        }
        Ok(())
    }

    fn input_prep(&mut self, summary: &FixedSummary) -> Result<(Vec<CommittedInput>, super::InputWitness), ProtocolError> {
        self.enter(Phase::InputPrep, 0);
        let ctx = self.ctx(self.me);
        let (ci, wit) = input_prepare(&self.pk, &self.cfg, &self.bounds, &ctx, summary, self.adversary.as_ref(), &mut self.rng)?;
        let mut w = Writer::new();
        ci.write(&self.pk, &mut w);
        let all = self.round(w.finish())?;
        let mut inputs = Vec::with_capacity(self.m);
        for (j, bytes) in all.iter().enumerate() {
            let j16 = j as u16;
            if j16 == self.me {
                inputs.push(ci.clone());
                continue;
            }
            let mut r = Reader::new(bytes);
            let other = CommittedInput::read(&self.pk, &mut r).map_err(|e| self.framing(j16, e))?;
            r.finish().map_err(|e| self.framing(j16, e))?;
            let ctx = self.ctx(j16);
            if let Err(rej) = verify_committed_input(&self.pk, &self.cfg, &self.bounds, &ctx, &other) {
                return Err(self.abort(j16, rej.check, rej.detail));
            }
            inputs.push(other);
        }
        Ok((inputs, wit))
    }

    /// One broadcast of partial decryptions and their combination.
    fn joint_decrypt(&mut self, cts: &[Ciphertext]) -> Result<Vec<BigUint>, ProtocolError> {
        let mine: Vec<PartialDecryption> = cts.iter().map(|c| partial_decrypt(&self.pk, &self.key_share, c)).collect();
        let mut w = Writer::new();
        write_partials(&self.pk, &mine, &mut w);
        let all = self.round(w.finish())?;
        let mut per_party = Vec::with_capacity(self.m);
        for (j, bytes) in all.iter().enumerate() {
            let j16 = j as u16;
            if j16 == self.me {
                per_party.push(mine.clone());
                continue;
            }
            let mut r = Reader::new(bytes);
            let parts = read_partials(&self.pk, &mut r, cts.len(), j16).map_err(|e| self.framing(j16, e))?;
            r.finish().map_err(|e| self.framing(j16, e))?;
            per_party.push(parts);
        }
        let mut out = Vec::with_capacity(cts.len());
        for k in 0..cts.len() {
            let parts: Vec<PartialDecryption> = per_party.iter().map(|p| p[k].clone()).collect();
            match combine(&self.pk, &parts, self.m) {
                Ok(v) => out.push(v),
                Err(e) => {
                    let me = self.me;
                    return Err(self.abort(me, Check::JointDecryption, e.to_string()));
                }
            }
        }
        Ok(out)
    }

    /// `w̃ = W / 2^4f`, `z = S_κ(Σ(w̃ + u)/m)` or its ridge counterpart.
    fn coordinate(&mut self, w_sh: &[AuthShare], u_sh: &[Vec<AuthShare>]) -> Result<(Vec<AuthShare>, Vec<AuthShare>), MpcError> {
        let (m, d) = (self.m, self.d);
        let plan = coord_plan(&self.cfg, &self.bounds);
        let co = self.cfg.coefficients().map_err(|_| MpcError::Invalid("coefficients"))?;
        let field = self.field.clone();
        let (k_w, shift_w, _) = plan.truncations[0];
        let wt = self.sess.truncate(w_sh, k_w, shift_w)?;
        let inv_m = field.from_int(&co.inv_parties);
        let scaled: Vec<AuthShare> = (0..d)
            .map(|c| {
                (0..m)
                    .fold(AuthShare::zero(), |acc, j| acc.add(&wt[j * d + c], &field).add(&u_sh[j][c], &field))
                    .mul_public(&inv_m, &field)
            })
            .collect();
        let (k_avg, shift_avg, _) = plan.truncations[1];
        let avg = self.sess.truncate(&scaled, k_avg, shift_avg)?;
        let z = match self.cfg.model {
            ModelKind::Lasso => {
                let kappa = field.from_int(&co.kappa);
                self.sess.soft_threshold(&avg, &kappa, self.bounds.k_threshold)?
            }
            ModelKind::Ridge => {
                let gain = field.from_int(&co.ridge_gain);
                let prod: Vec<AuthShare> = avg.iter().map(|a| a.mul_public(&gain, &field)).collect();
                let (k, shift, _) = plan.truncations[2];
                self.sess.truncate(&prod, k, shift)?
            }
        };
        Ok((z, wt))
    }

    /// A jointly masked decryption of `diff`, which must be a multiple of `p`.
    fn divisibility_check(&mut self, diff: &Ciphertext, bits: u64, check: Check) -> Result<(), ProtocolError> {
        let ctx = self.ctx(self.me);
        let mine = check_mask(&self.pk, &ctx, bits, &mut self.rng)?;
        let mut w = Writer::new();
        mine.write(&self.pk, &mut w);
        let all = self.round(w.finish())?;
        let mut masks = Vec::with_capacity(self.m);
        for (j, bytes) in all.iter().enumerate() {
            let j16 = j as u16;
            if j16 == self.me {
                masks.push(mine.cts[0].clone());
                continue;
            }
            let mut r = Reader::new(bytes);
            let pc = ProvenCts::read(&self.pk, &mut r, 1).map_err(|e| self.framing(j16, e))?;
            r.finish().map_err(|e| self.framing(j16, e))?;
            let ctx = self.ctx(j16);
            if !verify_check_mask(&self.pk, &ctx, bits, &pc) {
                return Err(self.abort(j16, Check::MaskInterval, "check mask interval proof rejected"));
            }
            masks.push(pc.cts[0].clone());
        }
        let refs: Vec<&Ciphertext> = masks.iter().collect();
        let masked = masked_check(&self.pk, diff, &refs, self.field.modulus());
        let plain = self.joint_decrypt(core::slice::from_ref(&masked))?;
        if !divisible(&plain[0], self.pk.n(), self.field.modulus()) {
            let me = self.me;
            return Err(self.abort(me, check, "batched difference is not a multiple of p"));
        }
        Ok(())
    }

    /// Every `E_W` against what the parties fed into the MPC for it.
    fn verify_conversions(&mut self, logs: &[IterationLog]) -> Result<(), ProtocolError> {
        let (m, d) = (self.m, self.d);
        let per_iter = m * d;
        let records = self.sess.inputs().to_vec();
        if records.len() != logs.len() * m * per_iter {
            let me = self.me;
            return Err(self.abort(me, Check::Gadget4Conversion, "input log length"));
        }
        let mut inputs = Vec::with_capacity(logs.len() * per_iter);
        for t in 0..logs.len() {
            for q in 0..per_iter {
                let mut eps = BigUint::default();
                let mut masks = Vec::with_capacity(m);
                for i in 0..m {
                    let rec = &records[t * m * per_iter + i * per_iter + q];
                    eps += &rec.epsilon;
                    masks.push(&self.mask_cts[rec.owner as usize][rec.mask_index]);
                }
                inputs.push(input_ciphertext(&self.pk, &eps, &masks));
            }
        }
        let w: Vec<&Ciphertext> = logs.iter().flat_map(|l| l.w.iter()).collect();
        let seed = self.chan().digest();
        let weights = batch_weights(&seed, b"conversion", w.len());
        let diff = conversion_difference(&self.pk, &w, &inputs, &weights);
        self.divisibility_check(&diff, self.bounds.check_mask_bits[0], Check::Gadget4Conversion)
    }

    /// MAC check, then every shared-back value against its MACs under `α`.
    fn verify_macs(&mut self, logs: &[IterationLog]) -> Result<(), ProtocolError> {
        self.sess.mac_check().map_err(|e| self.mpc_err(e))?;
        let alpha = self.sess.reveal_alpha().map_err(|e| self.mpc_err(e))?;
        let values: Vec<Ciphertext> = logs.iter().flat_map(|l| l.values.iter().cloned()).collect();
        let macs: Vec<Ciphertext> = logs.iter().flat_map(|l| l.macs.iter().cloned()).collect();
        let deltas: Vec<BigUint> = logs.iter().flat_map(|l| l.deltas.iter().cloned()).collect();
        let seed = self.chan().digest();
        let weights = batch_weights(&seed, b"mac", values.len());
        let diff = mac_difference(&self.pk, &alpha, &values, &deltas, &macs, &weights);
        self.divisibility_check(&diff, self.bounds.check_mask_bits[1], Check::Gadget4Mac)
    }
}
