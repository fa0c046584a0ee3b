//! Runs the protocol from a harness config: every party in one process over
//! the memory bus, or a single party over TCP. Results land in the output
//! directory as `model.csv`, `metrics.csv` and, on abort, `abort.txt`.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use cotrain_core::admm::fixed::FixedSummary;
use cotrain_core::admm::{compute_summary, Dataset};
use cotrain_core::linalg::Matrix;
use cotrain_core::protocol::{
    run_party, Adversary, Clock, Network, PartyInput, PartySetup, PublicSetup, RunFailure, RunOutcome,
};
use rand::rngs::OsRng;
use rand::RngCore;

use crate::config::{DataSource, HarnessConfig, TransportMode};
use crate::data::{gen_synthetic, load_csv, sample_like};
use crate::dealer::{deal, derive_seed, read_public, take_party};
use crate::metrics::{evaluate, MetricsReport};
use crate::script::AdversaryScript;
use crate::transport::{memory_bus, TcpNet};
use crate::HarnessError;

/// Wall-clock microseconds since the run started.
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

pub type PartyResult = Result<RunOutcome, RunFailure>;

/// Party `id`'s training set.
pub fn party_dataset(cfg: &HarnessConfig, id: u16) -> Result<Dataset, HarnessError> {
    let ds = match &cfg.data {
        DataSource::Synthetic { samples, noise, seed, .. } => {
            let mut s = gen_synthetic(cfg.run.parties as usize, *samples, cfg.run.d, *noise, *seed)?;
            s.parties.swap_remove(id as usize)
        }
        DataSource::Csv { dir, label } => load_csv(&dir.join(format!("party-{id}.csv")), label)?,
    };
    if ds.d() != cfg.run.d {
        return Err(HarnessError::Data(format!("party {id} has {} features, config says {}", ds.d(), cfg.run.d)));
    }
    Ok(ds)
}

/// Synthetic test rows are drawn with the data seed plus this offset.
pub const TEST_SEED_OFFSET: u64 = 0x7e57;

/// The held-out set: fresh synthetic rows, or `test.csv` when present.
pub fn test_dataset(cfg: &HarnessConfig) -> Result<Option<Dataset>, HarnessError> {
    match &cfg.data {
        DataSource::Synthetic { samples, test_samples, noise, seed } => {
            let s = gen_synthetic(cfg.run.parties as usize, *samples, cfg.run.d, *noise, *seed)?;
            Ok(Some(sample_like(&s.weights, *test_samples, *noise, TEST_SEED_OFFSET.wrapping_add(*seed))?))
        }
        DataSource::Csv { dir, label } => {
            let path = dir.join("test.csv");
            if path.exists() {
                Ok(Some(load_csv(&path, label)?))
            } else {
                Ok(None)
            }
        }
    }
}

/// All parties' rows stacked, for evaluation when there is no test set.
pub fn pooled(datasets: &[Dataset]) -> Result<Dataset, HarnessError> {
    let d = datasets.first().map_or(0, Dataset::d);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for ds in datasets {
        x.extend_from_slice(ds.x.as_slice());
        y.extend_from_slice(&ds.y);
    }
    Ok(Dataset::new(Matrix::from_vec(y.len(), d, x), y)?)
}

pub fn encode_summary(cfg: &HarnessConfig, ds: &Dataset) -> Result<FixedSummary, HarnessError> {
    let fx = cfg.run.fx()?;
    let s = compute_summary(ds, cfg.run.rho)?;
    FixedSummary::encode(&s, &fx).map_err(|e| HarnessError::Protocol(e.into()))
}

pub fn party_seed(cfg: &HarnessConfig, id: u16) -> [u8; 32] {
    if cfg.test_mode {
        derive_seed(b"party", cfg.run.seed, u64::from(id))
    } else {
        let mut s = [0u8; 32];
        OsRng.fill_bytes(&mut s);
        s
    }
}

/// Every party on its own thread over the in-memory bus, with fresh dealer
/// material. Results are in party order.
pub fn simulate(cfg: &HarnessConfig, adversary: Option<&AdversaryScript>) -> Result<Vec<PartyResult>, HarnessError> {
    let m = cfg.run.parties;
    if let Some(s) = adversary {
        if s.party >= m {
            return Err(HarnessError::Config(format!("adversary party {} out of range", s.party)));
        }
    }
    let datasets = (0..m).map(|i| party_dataset(cfg, i)).collect::<Result<Vec<_>, _>>()?;
    let summaries = datasets.iter().map(|ds| encode_summary(cfg, ds)).collect::<Result<Vec<_>, _>>()?;
    let (public, secrets) = deal(&cfg.run, cfg.test_mode)?;
    let inputs: Vec<PartyInput> = secrets
        .into_iter()
        .zip(summaries)
        .enumerate()
        .map(|(i, (secrets, summary))| PartyInput {
            setup: public.clone(),
            secrets,
            summary,
            adversary: adversary.filter(|s| usize::from(s.party) == i).map(|s| s.adversary.clone()),
            seed: party_seed(cfg, i as u16),
        })
        .collect();
    let clock = StdClock::new();
    let results = thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .into_iter()
            .zip(memory_bus(m as usize, cfg.timeout))
            .map(|(input, mut net)| {
                let clock = &clock;
                scope.spawn(move || run_party(input, &mut net, clock))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("party thread panicked")).collect()
    });
    Ok(results)
}

/// Party `id`'s inputs from the dealer directory and its own data.
pub fn load_party_input(
    cfg: &HarnessConfig,
    id: u16,
) -> Result<(PublicSetup, PartySetup, FixedSummary), HarnessError> {
    if id >= cfg.run.parties {
        return Err(HarnessError::Config(format!("party id {id} out of range for {} parties", cfg.run.parties)));
    }
    let public = read_public(&cfg.dealer_dir, &cfg.run)?;
    let ds = party_dataset(cfg, id)?;
    let summary = encode_summary(cfg, &ds)?;
    let secrets = take_party(&cfg.dealer_dir, id)?;
    Ok((public, secrets, summary))
}

/// One party of a TCP run.
pub fn run_tcp_party(cfg: &HarnessConfig, id: u16, adversary: Option<Adversary>) -> Result<PartyResult, HarnessError> {
    let TransportMode::Tcp(addrs) = &cfg.transport else {
        return Err(HarnessError::Config("party mode needs [transport] mode = \"tcp\"".into()));
    };
    let (setup, secrets, summary) = load_party_input(cfg, id)?;
    let input = PartyInput { setup, secrets, summary, adversary, seed: party_seed(cfg, id) };
    let mut net = TcpNet::connect(id as usize, addrs, cfg.timeout).map_err(|e| HarnessError::Net(e.to_string()))?;
    Ok(run_with(input, &mut net))
}

pub fn run_with<N: Network>(input: PartyInput, net: &mut N) -> PartyResult {
    run_party(input, net, &StdClock::new())
}

/// Where a run's files went and whether the model was released.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub released: bool,
    pub files: Vec<PathBuf>,
}

/// Writes `model.csv` and `metrics.csv` for a released model, or
/// `abort.txt` (and `abort-party-<i>.txt` per failing party) otherwise.
/// `results` pairs party ids with their outcomes; `eval` is the data the
/// metrics are computed on.
pub fn write_outputs(dir: &Path, results: &[(u16, &PartyResult)], eval: &Dataset) -> Result<Written, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files = Vec::new();
    let mut write = |name: String, body: String| -> Result<(), HarnessError> {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))?;
        files.push(p);
        Ok(())
    };
    let failures: Vec<(u16, &RunFailure)> =
        results.iter().filter_map(|(i, r)| r.as_ref().err().map(|f| (*i, f))).collect();
    if let Some((_, first)) = failures.first() {
        if results.len() > 1 {
            for (i, f) in &failures {
                write(format!("abort-party-{i}.txt"), failure_text(f))?;
            }
        }
        write("abort.txt".into(), failure_text(first))?;
        return Ok(Written { released: false, files });
    }
    let outcomes: Vec<&RunOutcome> = results.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let Some(first) = outcomes.first() else {
        return Err(HarnessError::Config("no party results to write".into()));
    };
    if outcomes.iter().any(|o| o.model_fixed != first.model_fixed) {
        return Err(HarnessError::Data("parties released different models".into()));
    }
    let model: String = first.model.iter().map(|v| format!("{v}\n")).collect();
    write("model.csv".into(), model)?;
    let report = MetricsReport { errors: evaluate(&first.model, eval), stats: first.stats.clone() };
    write("metrics.csv".into(), report.to_csv())?;
    Ok(Written { released: true, files })
}

/// The machine-readable abort report, or a synthesized one for failures
/// that happened outside a protocol check.
pub fn failure_text(f: &RunFailure) -> String {
    match &f.error {
        cotrain_core::protocol::ProtocolError::Abort(report) => report.to_text(),
        other => format!("error\ndetail={}\n", other.to_string().replace('\n', " ")),
    }
}
