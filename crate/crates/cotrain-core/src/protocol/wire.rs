//! Broadcast framing: `len:u32 ‖ phase:u8 ‖ iteration:u32 ‖ sender:u16 ‖
//! payload`, big-endian, where `len` counts everything after itself.

use alloc::string::String;
use alloc::vec::Vec;

use super::Phase;

pub const HEADER_LEN: usize = 4 + 1 + 4 + 2;
/// Largest accepted frame body.
pub const MAX_FRAME: usize = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub phase: u8,
    pub iteration: u32,
    pub sender: u16,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("frame shorter than its header")]
    Short,
    #[error("length prefix {declared} disagrees with {actual} bytes")]
    Length { declared: usize, actual: usize },
    #[error("frame of {0} bytes exceeds the limit")]
    TooLong(usize),
}

impl Frame {
    pub fn new(phase: Phase, iteration: u32, sender: u16, payload: Vec<u8>) -> Self {
        Self { phase: phase as u8, iteration, sender, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let body = 1 + 4 + 2 + self.payload.len();
        let mut out = Vec::with_capacity(4 + body);
        out.extend_from_slice(&(body as u32).to_be_bytes());
        out.push(self.phase);
        out.extend_from_slice(&self.iteration.to_be_bytes());
        out.extend_from_slice(&self.sender.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < HEADER_LEN {
            return Err(FrameError::Short);
        }
        let declared = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
        if declared > MAX_FRAME {
            return Err(FrameError::TooLong(declared));
        }
        if declared != bytes.len() - 4 {
            return Err(FrameError::Length { declared, actual: bytes.len() - 4 });
        }
        Ok(Self {
            phase: bytes[4],
            iteration: u32::from_be_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]),
            sender: u16::from_be_bytes([bytes[9], bytes[10]]),
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }

    /// Body length announced by a 4-byte prefix, for stream readers.
    pub fn body_len(prefix: [u8; 4]) -> Result<usize, FrameError> {
        let n = u32::from_be_bytes(prefix) as usize;
        if n > MAX_FRAME {
            return Err(FrameError::TooLong(n));
        }
        if n < HEADER_LEN - 4 {
            return Err(FrameError::Short);
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("network: {0}")]
pub struct NetError(pub String);

/// A party's view of the broadcast medium. Delivery is per-sender FIFO;
/// frames are opaque bytes here and parsed by the protocol.
pub trait Network {
    /// Sends one encoded frame to every other party.
    fn broadcast(&mut self, frame: &[u8]) -> Result<(), NetError>;
    /// Next frame from `from`, blocking.
    fn receive(&mut self, from: u16) -> Result<Vec<u8>, NetError>;
}
