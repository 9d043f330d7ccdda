//! TCP relay that injects a fixed one-way delay and shapes bandwidth with a
//! token bucket, for running the real protocol over a simulated WAN link.

use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use parking_lot::Mutex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkProfile {
    pub one_way: Duration,
    /// Link rate in bits per second; `None` is unshaped.
    pub bandwidth_bps: Option<u64>,
    /// Bucket depth in bytes.
    pub burst_bytes: u64,
}

impl LinkProfile {
    pub fn new(one_way: Duration, bandwidth_bps: Option<u64>) -> Self {
        LinkProfile {
            one_way,
            bandwidth_bps,
            burst_bytes: 1500,
        }
    }

    /// Time to push `bytes` onto the link at the shaped rate.
    pub fn transfer_time(&self, bytes: usize) -> Duration {
        match self.bandwidth_bps {
            Some(bps) => Duration::from_secs_f64(bytes as f64 * 8.0 / bps as f64),
            None => Duration::ZERO,
        }
    }
}

/// Token bucket over bytes, refilled continuously at `rate_bps / 8`.
#[derive(Debug, Clone)]
pub struct TokenBucket {
    bytes_per_sec: f64,
    capacity: f64,
    tokens: f64,
    last: Instant,
}

impl TokenBucket {
    pub fn new(rate_bps: u64, burst_bytes: u64, now: Instant) -> Self {
        TokenBucket {
            bytes_per_sec: rate_bps as f64 / 8.0,
            capacity: burst_bytes.max(1) as f64,
            tokens: burst_bytes.max(1) as f64,
            last: now,
        }
    }

    /// Takes `bytes` tokens (going negative if needed) and returns when the
    /// last of them has left the link: once the debt has been refilled.
    pub fn reserve(&mut self, bytes: usize, now: Instant) -> Instant {
        let now = now.max(self.last);
        let refill = (now - self.last).as_secs_f64() * self.bytes_per_sec;
        self.tokens = (self.tokens + refill).min(self.capacity);
        self.last = now;
        self.tokens -= bytes as f64;
        if self.tokens >= 0.0 {
            now
        } else {
            now + Duration::from_secs_f64(-self.tokens / self.bytes_per_sec)
        }
    }
}

/// A listening relay in front of `upstream`.
pub struct LatencyProxy {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    streams: Arc<Mutex<Vec<TcpStream>>>,
    accept: Option<JoinHandle<()>>,
}

impl LatencyProxy {
    pub fn spawn(upstream: SocketAddr, profile: LinkProfile) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let streams = Arc::new(Mutex::new(Vec::new()));
        let accept = {
            let stop = Arc::clone(&stop);
            let streams = Arc::clone(&streams);
            thread::spawn(move || {
                for client in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(client) = client else { continue };
                    let Ok(server) = TcpStream::connect(upstream) else { continue };
                    let _ = relay_pair(client, server, profile, &streams);
                }
            })
        };
        Ok(LatencyProxy {
            addr,
            stop,
            streams,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }
}

impl Drop for LatencyProxy {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
        for s in self.streams.lock().drain(..) {
            let _ = s.shutdown(Shutdown::Both);
        }
    }
}

fn relay_pair(
    client: TcpStream,
    server: TcpStream,
    profile: LinkProfile,
    streams: &Mutex<Vec<TcpStream>>,
) -> io::Result<()> {
    client.set_nodelay(true)?;
    server.set_nodelay(true)?;
    {
        let mut s = streams.lock();
        s.push(client.try_clone()?);
        s.push(server.try_clone()?);
    }
    spawn_direction(client.try_clone()?, server.try_clone()?, profile)?;
    spawn_direction(server, client, profile)?;
    Ok(())
}

/// One direction of the link: a reader stamps each chunk on arrival and a
/// writer releases it after shaping and propagation delay.
fn spawn_direction(mut from: TcpStream, mut to: TcpStream, profile: LinkProfile) -> io::Result<()> {
    let (tx, rx) = mpsc::channel::<(Instant, Vec<u8>)>();
    thread::Builder::new().spawn(move || {
        let mut buf = vec![0u8; 64 * 1024];
        loop {
            match from.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(k) => {
                    if tx.send((Instant::now(), buf[..k].to_vec())).is_err() {
                        break;
                    }
                }
            }
        }
    })?;
    thread::Builder::new().spawn(move || {
        let mut bucket = profile
            .bandwidth_bps
            .map(|bps| TokenBucket::new(bps, profile.burst_bytes, Instant::now()));
        for (arrived, chunk) in rx {
            let sent = match &mut bucket {
                Some(b) => b.reserve(chunk.len(), arrived),
                None => arrived,
            };
            let due = sent + profile.one_way;
            let now = Instant::now();
            if due > now {
                thread::sleep(due - now);
            }
            if to.write_all(&chunk).is_err() {
                break;
            }
        }
        let _ = to.shutdown(Shutdown::Write);
    })?;
    Ok(())
}
