#![allow(dead_code)]

use std::net::TcpListener;
use std::path::{Path, PathBuf};

/// Writes a two-party LASSO config with fixture keys into `dir`.
pub fn small_config(dir: &Path, transport: &str) -> PathBuf {
    let text = format!(
        "version = 1\n\
         [run]\nparties = 2\nfeatures = 2\nrho = 1.0\nlambda = 0.5\niterations = 2\nmodel = \"lasso\"\nseed = 3\n\
         [data]\nsource = \"synthetic\"\nsamples = 40\ntest_samples = 40\nnoise = 0.3\nseed = 5\n\
         {transport}\n\
         [dealer]\ndir = \"dealer\"\ntest_mode = true\n\
         [output]\ndir = \"out\"\n"
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Loopback addresses with ports that were free a moment ago.
pub fn free_addresses(n: usize) -> Vec<String> {
    let listeners: Vec<TcpListener> = (0..n).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
    listeners.iter().map(|l| l.local_addr().unwrap().to_string()).collect()
}

pub fn tcp_section(addrs: &[String]) -> String {
    let list: Vec<String> = addrs.iter().map(|a| format!("\"{a}\"")).collect();
    format!("[transport]\nmode = \"tcp\"\naddresses = [{}]\ntimeout_secs = 120", list.join(", "))
}

pub const MEMORY: &str = "[transport]\nmode = \"memory\"";

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn cli(args: &[&str]) -> i32 {
    cotrain::cli::main(std::iter::once("cotrain").chain(args.iter().copied()))
}
