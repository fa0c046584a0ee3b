//! Command-line entry point. Exit status: 0 when a model was released, 2
//! when the protocol aborted, 1 for usage, configuration and IO errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{DataSource, HarnessConfig, TransportMode};
use crate::data::{gen_synthetic, load_csv, read_model, sample_like, write_csv, write_model};
use crate::dealer::{deal, write_dealer_files};
use crate::metrics::evaluate;
use crate::run::{TEST_SEED_OFFSET, party_dataset, pooled, run_tcp_party, simulate, test_dataset, write_outputs, PartyResult};
use crate::script::AdversaryScript;
use crate::HarnessError;

pub const EXIT_RELEASED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cotrain", version, about = "Maliciously secure multi-party training of regularized linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate keys and correlated randomness into the dealer directory.
    Dealer {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one party over TCP.
    Party {
        #[arg(long)]
        id: u16,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every party in this process.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Let one party cheat according to this script.
        #[arg(long)]
        adversary: Option<PathBuf>,
    },
    /// Write the configured synthetic data as CSV files.
    GenData {
        #[arg(long)]
        config: PathBuf,
        /// Destination directory for party-<i>.csv, test.csv and weights.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Report L2 error and MAE of a model on a CSV dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "y")]
        label: String,
    },
    /// Run the scripted cheating party: in-process for memory transport,
    /// or just that party for TCP.
    Adversary {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_RELEASED,
                _ => EXIT_ERROR,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<i32, HarnessError> {
    match command {
        Command::Dealer { config } => {
            let cfg = HarnessConfig::load(&config)?;
            let (public, parties) = deal(&cfg.run, cfg.test_mode)?;
            write_dealer_files(&cfg.dealer_dir, &public, &parties)?;
            println!("dealer material for {} parties written to {}", parties.len(), cfg.dealer_dir.display());
            Ok(EXIT_RELEASED)
        }
        Command::Party { id, config } => {
            let cfg = HarnessConfig::load(&config)?;
            tcp_party(&cfg, id, None)
        }
        Command::Simulate { config, adversary } => {
            let cfg = HarnessConfig::load(&config)?;
            let script = adversary.as_deref().map(AdversaryScript::load).transpose()?;
            in_process(&cfg, script.as_ref())
        }
        Command::GenData { config, out } => {
            let cfg = HarnessConfig::load(&config)?;
            gen_data(&cfg, &out)?;
            Ok(EXIT_RELEASED)
        }
        Command::Evaluate { model, data, label } => {
            let w = read_model(&model)?;
            let ds = load_csv(&data, &label)?;
            if ds.d() != w.len() {
                return Err(HarnessError::Data(format!("model has {} weights, data has {} features", w.len(), ds.d())));
            }
            let e = evaluate(&w, &ds);
            println!("l2,{}\nmae,{}", e.l2, e.mae);
            Ok(EXIT_RELEASED)
        }
        Command::Adversary { script, config } => {
            let cfg = HarnessConfig::load(&config)?;
            let script = AdversaryScript::load(&script)?;
            match cfg.transport {
                TransportMode::Memory => in_process(&cfg, Some(&script)),
                TransportMode::Tcp(_) => tcp_party(&cfg, script.party, Some(script.adversary)),
            }
        }
    }
}

fn in_process(cfg: &HarnessConfig, script: Option<&AdversaryScript>) -> Result<i32, HarnessError> {
    let results = simulate(cfg, script)?;
    let eval = match test_dataset(cfg)? {
        Some(t) => t,
        None => pooled(&(0..cfg.run.parties).map(|i| party_dataset(cfg, i)).collect::<Result<Vec<_>, _>>()?)?,
    };
    let tagged: Vec<(u16, &PartyResult)> = results.iter().enumerate().map(|(i, r)| (i as u16, r)).collect();
    finish(&cfg.output_dir, &tagged, &eval)
}

fn tcp_party(
    cfg: &HarnessConfig,
    id: u16,
    adversary: Option<cotrain_core::protocol::Adversary>,
) -> Result<i32, HarnessError> {
    let result = run_tcp_party(cfg, id, adversary)?;
    let eval = match test_dataset(cfg)? {
        Some(t) => t,
        None => party_dataset(cfg, id)?,
    };
    finish(&cfg.output_dir.join(format!("party-{id}")), &[(id, &result)], &eval)
}

fn finish(dir: &Path, results: &[(u16, &PartyResult)], eval: &cotrain_core::admm::Dataset) -> Result<i32, HarnessError> {
    let written = write_outputs(dir, results, eval)?;
    for (id, r) in results {
        if let Err(f) = r {
            eprintln!("party {id}: {}", f.error);
        }
    }
    let verb = if written.released { "model released" } else { "protocol aborted" };
    println!("{verb}; wrote {}", written.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "));
    Ok(if written.released { EXIT_RELEASED } else { EXIT_ABORT })
}

fn gen_data(cfg: &HarnessConfig, out: &Path) -> Result<(), HarnessError> {
    let DataSource::Synthetic { samples, test_samples, noise, seed } = cfg.data else {
        return Err(HarnessError::Config("gen-data needs a synthetic [data] section".into()));
    };
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let s = gen_synthetic(cfg.run.parties as usize, samples, cfg.run.d, noise, seed)?;
    for (i, ds) in s.parties.iter().enumerate() {
        write_csv(&out.join(format!("party-{i}.csv")), ds)?;
    }
    write_csv(&out.join("test.csv"), &sample_like(&s.weights, test_samples, noise, TEST_SEED_OFFSET.wrapping_add(seed))?)?;
    write_model(&out.join("weights.csv"), &s.weights)?;
    println!("wrote {} party files, test.csv and weights.csv to {}", s.parties.len(), out.display());
    Ok(())
}
