mod common;

use std::thread;
use std::time::Duration;

use common::{free_addresses, small_config, tcp_section};
use cotrain::config::{HarnessConfig, TransportMode};
use cotrain::dealer::deal;
use cotrain::run::{encode_summary, party_dataset, party_seed, run_with};
use cotrain::transport::{memory_bus, Recorder, TcpNet};
use cotrain_core::protocol::{Network, PartyInput};
use num_bigint::Sign;

fn inputs(cfg: &HarnessConfig) -> Vec<PartyInput> {
    let (public, secrets) = deal(&cfg.run, true).unwrap();
    secrets
        .into_iter()
        .enumerate()
        .map(|(i, secrets)| {
            let ds = party_dataset(cfg, i as u16).unwrap();
            PartyInput {
                setup: public.clone(),
                secrets,
                summary: encode_summary(cfg, &ds).unwrap(),
                adversary: None,
                seed: party_seed(cfg, i as u16),
            }
        })
        .collect()
}

fn run_all<N: Network + Send>(inputs: Vec<PartyInput>, nets: Vec<N>) -> Vec<Vec<Vec<u8>>> {
    thread::scope(|s| {
        let hs: Vec<_> = inputs
            .into_iter()
            .zip(nets)
            .map(|(input, net)| {
                s.spawn(move || {
                    let mut rec = Recorder::new(net);
                    run_with(input, &mut rec).expect("honest run released");
                    rec.sent
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}

#[test]
fn tcp_and_memory_carry_identical_frames() {
    let dir = tempfile::tempdir().unwrap();
    let addrs = free_addresses(2);
    let cfg = HarnessConfig::load(&small_config(dir.path(), &tcp_section(&addrs))).unwrap();
    let TransportMode::Tcp(sockets) = cfg.transport.clone() else { unreachable!() };

    let ins = inputs(&cfg);
    let summaries: Vec<_> = ins.iter().map(|i| i.summary.clone()).collect();
    let over_memory = run_all(ins.clone(), memory_bus(2, Duration::from_secs(120)));
    let over_tcp = thread::scope(|s| {
        let hs: Vec<_> = (0..2)
            .map(|i| {
                let sockets = sockets.clone();
                s.spawn(move || TcpNet::connect(i, &sockets, Duration::from_secs(120)).unwrap())
            })
            .collect();
        let nets: Vec<TcpNet> = hs.into_iter().map(|h| h.join().unwrap()).collect();
        run_all(ins, nets)
    });
    assert_eq!(over_memory, over_tcp);

    // No summary entry appears in the clear in anything a party sends.
    for (i, sent) in over_memory.iter().enumerate() {
        let s = &summaries[i];
        for v in s.a.iter().chain(&s.v).chain(&s.theta).chain(&s.sigma) {
            let (sign, bytes) = v.to_bytes_be();
            if sign == Sign::NoSign || bytes.len() < 6 {
                continue;
            }
            assert!(!sent.iter().any(|f| contains(f, &bytes)), "party {i} leaked {v}");
        }
    }
}

#[test]
fn tcp_connect_rejects_an_impostor() {
    let addrs = free_addresses(2);
    let sockets: Vec<_> = addrs.iter().map(|a| a.parse().unwrap()).collect();
    let target = sockets[0];
    let h = thread::spawn(move || TcpNet::connect(0, &sockets, Duration::from_secs(10)).err());
    let mut stream = loop {
        match std::net::TcpStream::connect(target) {
            Ok(s) => break s,
            Err(_) => thread::sleep(Duration::from_millis(20)),
        }
    };
    std::io::Write::write_all(&mut stream, &7u16.to_be_bytes()).unwrap();
    let err = h.join().unwrap().expect("bad peer id accepted");
    assert!(err.to_string().contains("unexpected peer id 7"));
}
