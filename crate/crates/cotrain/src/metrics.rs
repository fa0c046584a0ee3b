//! Prediction error and the per-run report.

use std::fmt::Write as _;
use std::path::Path;

use cotrain_core::admm::Dataset;
use cotrain_core::protocol::{Phase, RunStats};

use crate::HarnessError;

/// `l2 = ‖Xw − y‖²`, `mae = mean |Xw − y|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Errors {
    pub l2: f64,
    pub mae: f64,
}

pub fn evaluate(w: &[f64], ds: &Dataset) -> Errors {
    let pred = ds.x.matvec(w);
    let (l2, abs) = pred.iter().zip(&ds.y).fold((0.0, 0.0), |(l2, abs), (p, y)| {
        let r = p - y;
        (l2 + r * r, abs + r.abs())
    });
    Errors { l2, mae: if ds.n() == 0 { 0.0 } else { abs / ds.n() as f64 } }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub errors: Errors,
    pub stats: RunStats,
}

const PHASES: [Phase; 8] = [
    Phase::Handshake,
    Phase::InputPrep,
    Phase::LocalOpt,
    Phase::ToShares,
    Phase::Coord,
    Phase::FromShares,
    Phase::Verify,
    Phase::Release,
];

impl MetricsReport {
    /// `metric,value` rows: the two errors, then per-phase wall-clock and
    /// traffic.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        writeln!(out, "l2,{}", self.errors.l2).unwrap();
        writeln!(out, "mae,{}", self.errors.mae).unwrap();
        for p in PHASES {
            let s = self.stats.get(p);
            let name = p.as_str();
            writeln!(out, "{name}.seconds,{}", s.micros as f64 / 1e6).unwrap();
            writeln!(out, "{name}.bytes_sent,{}", s.bytes_sent).unwrap();
            writeln!(out, "{name}.bytes_received,{}", s.bytes_received).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_csv()).map_err(|e| HarnessError::io(path, e))
    }
}
