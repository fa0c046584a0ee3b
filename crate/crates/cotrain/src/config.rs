//! The shared run file: a versioned TOML document that every party and the
//! dealer read. Relative paths resolve against the file's directory.
//!
//! ```toml
//! version = 1
//!
//! [run]
//! parties = 4
//! features = 10
//! rho = 1000.0
//! lambda = 50.0
//! iterations = 10
//! model = "lasso"          # or "ridge"
//! # frac_bits, int_bits, stat_sec, he_bits, eps_ulps, seed are optional
//!
//! [data]
//! source = "synthetic"     # or "csv": reads <dir>/party-<i>.csv
//! samples = 1000           # rows per party
//! test_samples = 1000
//! noise = 0.5
//! seed = 1
//! dir = "data"
//! label = "y"
//!
//! [transport]
//! mode = "memory"          # or "tcp"
//! addresses = ["127.0.0.1:7100", "127.0.0.1:7101"]
//! timeout_secs = 600
//!
//! [dealer]
//! dir = "dealer"
//! test_mode = false     # true: fixture keys and seeded randomness, for tests only
//!
//! [output]
//! dir = "out"
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use cotrain_core::admm::ModelKind;
use cotrain_core::protocol::RunConfig;
use serde::Deserialize;

use crate::HarnessError;

pub const FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: u32,
    run: RawRun,
    #[serde(default)]
    data: RawData,
    #[serde(default)]
    transport: RawTransport,
    #[serde(default)]
    dealer: RawDealer,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    parties: u16,
    features: usize,
    rho: f64,
    lambda: f64,
    iterations: Option<u32>,
    model: String,
    frac_bits: Option<u32>,
    int_bits: Option<u32>,
    stat_sec: Option<u32>,
    he_bits: Option<u32>,
    eps_ulps: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawData {
    source: String,
    samples: usize,
    test_samples: usize,
    noise: f64,
    seed: u64,
    dir: PathBuf,
    label: String,
}

impl Default for RawData {
    fn default() -> Self {
        Self {
            source: "synthetic".into(),
            samples: 1000,
            test_samples: 1000,
            noise: 0.5,
            seed: 1,
            dir: "data".into(),
            label: "y".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTransport {
    mode: String,
    addresses: Vec<String>,
    timeout_secs: u64,
}

impl Default for RawTransport {
    fn default() -> Self {
        Self { mode: "memory".into(), addresses: Vec::new(), timeout_secs: 600 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDealer {
    dir: PathBuf,
    test_mode: bool,
}

impl Default for RawDealer {
    fn default() -> Self {
        Self { dir: "dealer".into(), test_mode: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Every party regenerates the same draw and keeps its own slice.
    Synthetic { samples: usize, test_samples: usize, noise: f64, seed: u64 },
    /// `party-<i>.csv` and, if present, `test.csv` under `dir`.
    Csv { dir: PathBuf, label: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportMode {
    Memory,
    Tcp(Vec<SocketAddr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub run: RunConfig,
    pub data: DataSource,
    pub transport: TransportMode,
    pub timeout: Duration,
    pub dealer_dir: PathBuf,
    pub test_mode: bool,
    pub output_dir: PathBuf,
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if raw.version != FILE_VERSION {
            return Err(HarnessError::Config(format!("unsupported config version {}", raw.version)));
        }
        let r = raw.run;
        let model = ModelKind::parse(&r.model).ok_or_else(|| HarnessError::Config(format!("unknown model {:?}", r.model)))?;
        let mut run = RunConfig::new(r.parties, r.features, r.rho, r.lambda, model);
        run.iterations = r.iterations.unwrap_or(run.iterations);
        run.frac_bits = r.frac_bits.unwrap_or(run.frac_bits);
        run.int_bits = r.int_bits.unwrap_or(run.int_bits);
        run.stat_sec = r.stat_sec.unwrap_or(run.stat_sec);
        run.he_bits = r.he_bits.unwrap_or(run.he_bits);
        run.eps_ulps = r.eps_ulps.unwrap_or(run.eps_ulps);
        run.seed = r.seed.unwrap_or(run.seed);
        run.validate()?;

        let d = raw.data;
        let data = match d.source.as_str() {
            "synthetic" => DataSource::Synthetic {
                samples: d.samples,
                test_samples: d.test_samples,
                noise: d.noise,
                seed: d.seed,
            },
            "csv" => DataSource::Csv { dir: base.join(d.dir), label: d.label },
            other => return Err(HarnessError::Config(format!("unknown data source {other:?}"))),
        };

        let t = raw.transport;
        let transport = match t.mode.as_str() {
            "memory" => TransportMode::Memory,
            "tcp" => {
                let addrs = t
                    .addresses
                    .iter()
                    .map(|a| a.parse().map_err(|_| HarnessError::Config(format!("bad address {a:?}"))))
                    .collect::<Result<Vec<SocketAddr>, _>>()?;
                if addrs.len() != run.parties as usize {
                    return Err(HarnessError::Config(format!(
                        "{} addresses for {} parties",
                        addrs.len(),
                        run.parties
                    )));
                }
                for (i, a) in addrs.iter().enumerate() {
                    if addrs[..i].contains(a) {
                        return Err(HarnessError::Config(format!("address {a} listed twice")));
                    }
                }
                TransportMode::Tcp(addrs)
            }
            other => return Err(HarnessError::Config(format!("unknown transport mode {other:?}"))),
        };

        Ok(Self {
            run,
            data,
            transport,
            timeout: Duration::from_secs(t.timeout_secs.max(1)),
            dealer_dir: base.join(raw.dealer.dir),
            test_mode: raw.dealer.test_mode,
            output_dir: base.join(raw.output.dir),
        })
    }
}
