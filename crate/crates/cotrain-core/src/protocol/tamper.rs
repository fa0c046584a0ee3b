//! Scripted deviations for detection tests. A party running with an
//! [`Adversary`] follows the protocol except for one mutation.

use alloc::vec;
use alloc::vec::Vec;

use super::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tamper {
    /// Commits to `A + 1` in its first entry.
    WrongA,
    /// Proves `VᵀV ≈ I` over a matrix other than the committed `V`.
    InconsistentV,
    /// Resends its previous local-update message.
    StaleReplay,
    /// Encrypts its share of `z₀` plus one.
    ShareShift,
    /// Encrypts its MAC share of `z₀` plus one.
    MacShift,
    /// Draws one conversion mask far beyond the bound.
    OversizedMask,
    /// Drops the last interval proof on `A`.
    OmitProof,
    /// Commits to `A` and `b` from a different dataset.
    SubstitutedSummary,
    /// Computes its local update with `2ρ`.
    WrongRho,
    /// Cuts its local-update payload in half.
    TruncatedBroadcast,
    /// Sends its local-update message twice.
    DuplicateMessage,
    /// Starts from a configuration with a different `λ`.
    MismatchedConfig,
}

impl Tamper {
    pub const ALL: [Tamper; 12] = [
        Tamper::WrongA,
        Tamper::InconsistentV,
        Tamper::StaleReplay,
        Tamper::ShareShift,
        Tamper::MacShift,
        Tamper::OversizedMask,
        Tamper::OmitProof,
        Tamper::SubstitutedSummary,
        Tamper::WrongRho,
        Tamper::TruncatedBroadcast,
        Tamper::DuplicateMessage,
        Tamper::MismatchedConfig,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tamper::WrongA => "wrong-a",
            Tamper::InconsistentV => "inconsistent-v",
            Tamper::StaleReplay => "stale-replay",
            Tamper::ShareShift => "share-shift",
            Tamper::MacShift => "mac-shift",
            Tamper::OversizedMask => "oversized-mask",
            Tamper::OmitProof => "omit-proof",
            Tamper::SubstitutedSummary => "substituted-summary",
            Tamper::WrongRho => "wrong-rho",
            Tamper::TruncatedBroadcast => "truncated-broadcast",
            Tamper::DuplicateMessage => "duplicate-message",
            Tamper::MismatchedConfig => "mismatched-config",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// The phase in which the mutation happens.
    pub fn phase(self) -> Phase {
        match self {
            Tamper::WrongA | Tamper::InconsistentV | Tamper::OmitProof | Tamper::SubstitutedSummary => Phase::InputPrep,
            Tamper::StaleReplay | Tamper::WrongRho | Tamper::TruncatedBroadcast | Tamper::DuplicateMessage => {
                Phase::LocalOpt
            }
            Tamper::ShareShift | Tamper::MacShift => Phase::FromShares,
            Tamper::OversizedMask => Phase::ToShares,
            Tamper::MismatchedConfig => Phase::Handshake,
        }
    }
}

/// One mutation, applied at a given iteration for per-iteration phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mutation {
    pub tamper: Tamper,
    pub iteration: u32,
}

/// The deviations one cheating party applies during a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adversary {
    pub mutations: Vec<Mutation>,
}

impl Adversary {
    pub fn new(tamper: Tamper, iteration: u32) -> Self {
        Self { mutations: vec![Mutation { tamper, iteration }] }
    }

    pub(crate) fn fires(adv: Option<&Self>, tamper: Tamper, iteration: u32) -> bool {
        adv.is_some_and(|a| {
            a.mutations.iter().any(|m| {
                m.tamper == tamper
                    && match tamper.phase() {
                        Phase::InputPrep | Phase::Handshake => true,
                        _ => m.iteration == iteration,
                    }
            })
        })
    }
}
