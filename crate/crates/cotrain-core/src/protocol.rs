//! The phase driver: committed inputs, the encrypted local updates, the
//! conversions into and out of the MPC, the end-of-run conversion checks and
//! model release.

use alloc::string::{String, ToString};
use core::fmt;

use crate::codec::CodecError;
use crate::fixedpoint::FxError;
use crate::mpc::MpcError;
use crate::paillier::PaillierError;
use crate::zkp::ZkError;

pub mod config;
pub mod convert;
pub mod input;
pub mod local;
pub mod party;
pub mod setup;
pub mod tamper;
pub mod wire;

pub use config::{Bounds, RunConfig};
pub use input::{input_prepare, verify_committed_input, CommittedInput, InputWitness, ProofCounts};
pub use party::{run_party, Clock, NoClock, PartyInput, PhaseStats, RunFailure, RunOutcome, RunStats};
pub use setup::{dealer_setup, material_counts, PartySetup, PublicSetup};
pub use tamper::{Adversary, Mutation, Tamper};
pub use wire::{Frame, NetError, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Phase {
    Handshake = 0,
    InputPrep = 1,
    LocalOpt = 2,
    ToShares = 3,
    Coord = 4,
    FromShares = 5,
    Verify = 6,
    Release = 7,
    Abort = 0xFF,
}

impl Phase {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => Phase::Handshake,
            1 => Phase::InputPrep,
            2 => Phase::LocalOpt,
            3 => Phase::ToShares,
            4 => Phase::Coord,
            5 => Phase::FromShares,
            6 => Phase::Verify,
            7 => Phase::Release,
            0xFF => Phase::Abort,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Handshake => "handshake",
            Phase::InputPrep => "input-prep",
            Phase::LocalOpt => "local-opt",
            Phase::ToShares => "to-shares",
            Phase::Coord => "coord",
            Phase::FromShares => "from-shares",
            Phase::Verify => "verify",
            Phase::Release => "release",
            Phase::Abort => "abort",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Phase::Handshake,
            Phase::InputPrep,
            Phase::LocalOpt,
            Phase::ToShares,
            Phase::Coord,
            Phase::FromShares,
            Phase::Verify,
            Phase::Release,
            Phase::Abort,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
    }
}

/// The check whose failure ended a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    ConfigHash,
    Framing,
    Sequence,
    InputStructure,
    Statement(u8),
    InputBounds,
    LocalUpdate,
    MaskInterval,
    JointDecryption,
    ShareInterval,
    Mpc,
    MacCheck,
    Gadget4Conversion,
    Gadget4Mac,
    PeerAbort,
    Transport,
}

impl Check {
    pub fn id(self) -> String {
        match self {
            Check::ConfigHash => "config-hash".into(),
            Check::Framing => "framing".into(),
            Check::Sequence => "sequence".into(),
            Check::InputStructure => "input-structure".into(),
            Check::Statement(k) => alloc::format!("input-statement-{k}"),
            Check::InputBounds => "input-bounds".into(),
            Check::LocalUpdate => "local-update-gadget1".into(),
            Check::MaskInterval => "gadget3-mask-interval".into(),
            Check::JointDecryption => "joint-decryption".into(),
            Check::ShareInterval => "share-interval".into(),
            Check::Mpc => "mpc-protocol".into(),
            Check::MacCheck => "mpc-mac-check".into(),
            Check::Gadget4Conversion => "gadget4-conversion".into(),
            Check::Gadget4Mac => "gadget4-mac".into(),
            Check::PeerAbort => "peer-abort".into(),
            Check::Transport => "transport".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if let Some(k) = s.strip_prefix("input-statement-") {
            return k.parse().ok().map(Check::Statement);
        }
        [
            Check::ConfigHash,
            Check::Framing,
            Check::Sequence,
            Check::InputStructure,
            Check::InputBounds,
            Check::LocalUpdate,
            Check::MaskInterval,
            Check::JointDecryption,
            Check::ShareInterval,
            Check::Mpc,
            Check::MacCheck,
            Check::Gadget4Conversion,
            Check::Gadget4Mac,
            Check::PeerAbort,
            Check::Transport,
        ]
        .into_iter()
        .find(|c| c.id() == s)
    }
}

/// Why a party stopped. `sender` is the party whose message failed the check
/// (or the reporter itself for local failures); the report never carries data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbortReport {
    pub reporter: u16,
    pub phase: Phase,
    pub iteration: u32,
    pub sender: u16,
    pub check: Check,
    pub detail: String,
}

impl AbortReport {
    /// `key=value` lines, one field per line.
    pub fn to_text(&self) -> String {
        alloc::format!(
            "abort\nreporter={}\nphase={}\niteration={}\nsender={}\ncheck={}\ndetail={}\n",
            self.reporter,
            self.phase.as_str(),
            self.iteration,
            self.sender,
            self.check.id(),
            self.detail.replace('\n', " "),
        )
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        if lines.next()? != "abort" {
            return None;
        }
        let mut get = |key: &str| -> Option<String> {
            let line = lines.next()?;
            line.strip_prefix(key)?.strip_prefix('=').map(ToString::to_string)
        };
        Some(Self {
            reporter: get("reporter")?.parse().ok()?,
            phase: Phase::parse(&get("phase")?)?,
            iteration: get("iteration")?.parse().ok()?,
            sender: get("sender")?.parse().ok()?,
            check: Check::parse(&get("check")?)?,
            detail: get("detail")?,
        })
    }
}

impl fmt::Display for AbortReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "party {} aborted at {} iteration {}: check {} failed for party {} ({})",
            self.reporter,
            self.phase.as_str(),
            self.iteration,
            self.check.id(),
            self.sender,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Encoding(#[from] FxError),
    #[error(transparent)]
    Proof(#[from] ZkError),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Abort(AbortReport),
}
