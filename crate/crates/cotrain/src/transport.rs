//! Broadcast transports: an in-memory bus for `simulate` and a TCP mesh with
//! one process per party. Both deliver per-sender FIFO and carry the same
//! frames byte for byte.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use cotrain_core::protocol::{Frame, NetError, Network};

type Inbox = Receiver<Result<Vec<u8>, String>>;

/// One party's end of the in-memory bus.
pub struct MemNet {
    me: usize,
    tx: Vec<Option<Sender<Result<Vec<u8>, String>>>>,
    rx: Vec<Option<Inbox>>,
    timeout: Duration,
}

/// A full mesh of in-memory links for `m` parties.
pub fn memory_bus(m: usize, timeout: Duration) -> Vec<MemNet> {
    let mut tx: Vec<Vec<_>> = (0..m).map(|_| (0..m).map(|_| None).collect()).collect();
    let mut rx: Vec<Vec<_>> = (0..m).map(|_| (0..m).map(|_| None).collect()).collect();
    for from in 0..m {
        for to in 0..m {
            if from != to {
                let (s, r) = channel();
                tx[from][to] = Some(s);
                rx[to][from] = Some(r);
            }
        }
    }
    tx.into_iter().zip(rx).enumerate().map(|(me, (tx, rx))| MemNet { me, tx, rx, timeout }).collect()
}

fn recv(inbox: Option<&Inbox>, from: u16, timeout: Duration) -> Result<Vec<u8>, NetError> {
    let inbox = inbox.ok_or_else(|| NetError(format!("no link to party {from}")))?;
    match inbox.recv_timeout(timeout) {
        Ok(Ok(frame)) => Ok(frame),
        Ok(Err(e)) => Err(NetError(format!("party {from}: {e}"))),
        Err(RecvTimeoutError::Timeout) => Err(NetError(format!("timed out waiting for party {from}"))),
        Err(RecvTimeoutError::Disconnected) => Err(NetError(format!("party {from} disconnected"))),
    }
}

impl Network for MemNet {
    fn broadcast(&mut self, frame: &[u8]) -> Result<(), NetError> {
        for s in self.tx.iter().flatten() {
            // A peer that has already stopped does not fail the sender.
            let _ = s.send(Ok(frame.to_vec()));
        }
        Ok(())
    }

    fn receive(&mut self, from: u16) -> Result<Vec<u8>, NetError> {
        if from as usize == self.me {
            return Err(NetError("cannot receive from self".into()));
        }
        recv(self.rx.get(from as usize).and_then(Option::as_ref), from, self.timeout)
    }
}

/// One party's TCP links. Each peer gets a writer thread and a reader
/// thread, so a slow peer never blocks sends to the others.
pub struct TcpNet {
    me: usize,
    tx: Vec<Option<Sender<Vec<u8>>>>,
    rx: Vec<Option<Inbox>>,
    timeout: Duration,
    writers: Vec<thread::JoinHandle<()>>,
}

impl TcpNet {
    /// Listens on `addrs[me]`, dials every lower id and accepts every higher
    /// one. Each connection opens with the dialer's 2-byte id.
    pub fn connect(me: usize, addrs: &[SocketAddr], timeout: Duration) -> io::Result<Self> {
        let m = addrs.len();
        let listener = TcpListener::bind(addrs[me])?;
        let mut streams: Vec<Option<TcpStream>> = (0..m).map(|_| None).collect();
        let deadline = Instant::now() + timeout;
        for (j, addr) in addrs.iter().enumerate().take(me) {
            let mut s = loop {
                match TcpStream::connect(addr) {
                    Ok(s) => break s,
                    Err(_) if Instant::now() < deadline => thread::sleep(Duration::from_millis(50)),
                    Err(e) => return Err(e),
                }
            };
            s.write_all(&(me as u16).to_be_bytes())?;
            streams[j] = Some(s);
        }
        for _ in me + 1..m {
            let (mut s, _) = listener.accept()?;
            let mut id = [0u8; 2];
            s.read_exact(&mut id)?;
            let j = u16::from_be_bytes(id) as usize;
            if j <= me || j >= m || streams[j].is_some() {
                return Err(io::Error::new(io::ErrorKind::InvalidData, format!("unexpected peer id {j}")));
            }
            streams[j] = Some(s);
        }
        let mut tx = Vec::with_capacity(m);
        let mut rx = Vec::with_capacity(m);
        let mut writers = Vec::with_capacity(m);
        for s in streams {
            let Some(s) = s else {
                tx.push(None);
                rx.push(None);
                continue;
            };
            s.set_nodelay(true)?;
            let mut reader = s.try_clone()?;
            let mut writer = s;
            let (wtx, wrx) = channel::<Vec<u8>>();
            writers.push(thread::spawn(move || {
                for frame in wrx {
                    if writer.write_all(&frame).is_err() {
                        break;
                    }
                }
                let _ = writer.shutdown(std::net::Shutdown::Write);
            }));
            let (rtx, rrx) = channel();
            thread::spawn(move || loop {
                match read_frame(&mut reader) {
                    Ok(Some(frame)) => {
                        if rtx.send(Ok(frame)).is_err() {
                            break;
                        }
                    }
                    Ok(None) => break,
                    Err(e) => {
                        let _ = rtx.send(Err(e.to_string()));
                        break;
                    }
                }
            });
            tx.push(Some(wtx));
            rx.push(Some(rrx));
        }
        Ok(Self { me, tx, rx, timeout, writers })
    }
}

impl Drop for TcpNet {
    /// Flushes queued frames, such as a final abort report, before the
    /// process can exit.
    fn drop(&mut self) {
        self.tx.clear();
        for w in self.writers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Reads one length-prefixed frame; `None` on a clean end of stream.
fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut prefix = [0u8; 4];
    match r.read_exact(&mut prefix) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = Frame::body_len(prefix).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let mut frame = Vec::with_capacity(4 + len);
    frame.extend_from_slice(&prefix);
    frame.resize(4 + len, 0);
    r.read_exact(&mut frame[4..])?;
    Ok(Some(frame))
}

impl Network for TcpNet {
    fn broadcast(&mut self, frame: &[u8]) -> Result<(), NetError> {
        for s in self.tx.iter().flatten() {
            let _ = s.send(frame.to_vec());
        }
        Ok(())
    }

    fn receive(&mut self, from: u16) -> Result<Vec<u8>, NetError> {
        if from as usize == self.me {
            return Err(NetError("cannot receive from self".into()));
        }
        recv(self.rx.get(from as usize).and_then(Option::as_ref), from, self.timeout)
    }
}

/// Wraps a transport and keeps a copy of every frame this party sends and
/// receives, in order.
pub struct Recorder<N> {
    pub inner: N,
    pub sent: Vec<Vec<u8>>,
    pub received: Vec<(u16, Vec<u8>)>,
}

impl<N> Recorder<N> {
    pub fn new(inner: N) -> Self {
        Self { inner, sent: Vec::new(), received: Vec::new() }
    }
}

impl<N: Network> Network for Recorder<N> {
    fn broadcast(&mut self, frame: &[u8]) -> Result<(), NetError> {
        self.sent.push(frame.to_vec());
        self.inner.broadcast(frame)
    }

    fn receive(&mut self, from: u16) -> Result<Vec<u8>, NetError> {
        let f = self.inner.receive(from)?;
        self.received.push((from, f.clone()));
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memory_bus_is_fifo_per_sender() {
        let mut nets = memory_bus(3, Duration::from_secs(1));
        nets[0].broadcast(b"a").unwrap();
        nets[0].broadcast(b"b").unwrap();
        nets[2].broadcast(b"c").unwrap();
        assert_eq!(nets[1].receive(0).unwrap(), b"a");
        assert_eq!(nets[1].receive(2).unwrap(), b"c");
        assert_eq!(nets[1].receive(0).unwrap(), b"b");
        assert!(nets[1].receive(1).is_err());
    }

    #[test]
    fn read_frame_rejects_oversized_prefix() {
        let mut bytes: &[u8] = &[0xFF, 0xFF, 0xFF, 0xFF, 0];
        assert!(read_frame(&mut bytes).is_err());
        let mut empty: &[u8] = &[];
        assert!(read_frame(&mut empty).unwrap().is_none());
    }
}
