//! Sustained complaint throughput of a live server, optionally behind a
//! simulated WAN link.

use std::net::{SocketAddr, TcpListener};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use facts_core::IndexChoice;

use crate::client::{BeginReply, ClientOptions, FactsClient};
use crate::config::ServerConfig;
use crate::error::FactsError;
use crate::latency::{LatencyProxy, LinkProfile};
use crate::server::{self, FactsServer, SessionOutcome};
use crate::wire::ComplainCode;

/// 8 Mbps.
pub const DEFAULT_BANDWIDTH_BPS: u64 = 8_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputConfig {
    pub n: u64,
    pub t: u64,
    pub clients: usize,
    /// One-way delay injected in each direction.
    pub latency: Duration,
    /// Shaped link rate when latency is injected.
    pub bandwidth_bps: Option<u64>,
    pub warmup: Duration,
    pub duration: Duration,
    /// Originate exchanges timed on an idle server.
    pub originate_samples: usize,
}

impl Default for ThroughputConfig {
    fn default() -> Self {
        ThroughputConfig {
            n: 100_000,
            t: 100,
            clients: 8,
            latency: Duration::ZERO,
            bandwidth_bps: Some(DEFAULT_BANDWIDTH_BPS),
            warmup: Duration::from_millis(500),
            duration: Duration::from_secs(3),
            originate_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    /// Accepted complaints whose session closed inside the window.
    pub accepted: usize,
    pub window: Duration,
    pub per_sec: f64,
    /// Bytes of one `COMPLAIN_SNAPSHOT` frame, header included.
    pub snapshot_frame_bytes: usize,
    pub snapshot_payload_bytes: usize,
    /// Mean time the table was held per session (server side).
    pub mean_lock_hold: Duration,
    /// Mean client time from `COMPLAIN_BEGIN` to holding the snapshot,
    /// including queueing.
    pub mean_begin_to_snapshot: Duration,
    /// Mean client time from sending the index to the verdict.
    pub mean_index_round_trip: Duration,
    /// Lock-bound prediction `1 / (2 latency + transfer)`; `None` without
    /// injected latency.
    pub model_per_sec: Option<f64>,
    /// Mean Originate exchange time on an idle server.
    pub mean_originate: Duration,
}

impl ThroughputReport {
    /// Originate time left after removing the injected round trip.
    pub fn originate_overhead(&self, latency: Duration) -> Duration {
        self.mean_originate.saturating_sub(2 * latency)
    }
}

/// Lock-bound model: the table is held for the snapshot's trip to the
/// client and the index's trip back.
pub fn model_per_sec(latency: Duration, bandwidth_bps: Option<u64>, snapshot_frame_bytes: usize) -> f64 {
    let index_frame_bytes = 5 + 8;
    let transfer = LinkProfile::new(latency, bandwidth_bps).transfer_time(snapshot_frame_bytes + index_frame_bytes);
    1.0 / (2.0 * latency.as_secs_f64() + transfer.as_secs_f64())
}

#[derive(Default)]
struct ClientTimes {
    begin_to_snapshot: Vec<Duration>,
    index_round_trip: Vec<Duration>,
}

pub fn run_throughput(cfg: &ThroughputConfig) -> Result<ThroughputReport, FactsError> {
    if cfg.clients == 0 {
        return Err(FactsError::Invalid("at least one client required".into()));
    }
    let (srv, creds) = FactsServer::from_config(&ServerConfig {
        users: cfg.clients,
        n: cfg.n,
        t: cfg.t,
        quota: u32::MAX,
        ..ServerConfig::default()
    })?;
    let handle = server::spawn(Arc::clone(&srv), TcpListener::bind("127.0.0.1:0")?, None)?;
    let proxy = if cfg.latency > Duration::ZERO {
        Some(LatencyProxy::spawn(handle.addr(), LinkProfile::new(cfg.latency, cfg.bandwidth_bps))?)
    } else {
        None
    };
    let addr: SocketAddr = proxy.as_ref().map_or(handle.addr(), |p| p.addr());

    let mut clients = Vec::with_capacity(cfg.clients);
    for (i, cred) in creds.iter().enumerate() {
        let mut c = FactsClient::connect(
            addr,
            cred,
            ClientOptions {
                seed: Some(i as u64),
                ..ClientOptions::default()
            },
        )?;
        let x = format!("throughput message {i}").into_bytes();
        let tag = c.originate(&x)?;
        let me = c.id().clone();
        assert!(c.rcv_msg(&me, &tag.to_bytes(), &x));
        clients.push(c);
    }

    let mut originate = Duration::ZERO;
    for _ in 0..cfg.originate_samples {
        let t0 = Instant::now();
        clients[0].originate(b"timing probe")?;
        originate += t0.elapsed();
    }
    let mean_originate = originate / cfg.originate_samples.max(1) as u32;

    let stop = Arc::new(AtomicBool::new(false));
    let workers: Vec<_> = clients
        .into_iter()
        .map(|mut c| {
            let stop = Arc::clone(&stop);
            thread::spawn(move || -> Result<ClientTimes, FactsError> {
                let mut times = ClientTimes::default();
                let entry = c.inbox().len() - 1;
                while !stop.load(Ordering::Relaxed) {
                    let t0 = Instant::now();
                    let snap = c.connection().complain_begin()?;
                    let t1 = Instant::now();
                    let BeginReply::Snapshot { bytes, .. } = snap else {
                        break;
                    };
                    let choice = match c.choose_index(entry, &bytes)? {
                        IndexChoice::Write { index, .. } => Some(index),
                        IndexChoice::Abort => None,
                    };
                    let t2 = Instant::now();
                    let code = c.connection().complain_index(choice)?;
                    times.begin_to_snapshot.push(t1 - t0);
                    times.index_round_trip.push(t2.elapsed());
                    if !matches!(code, ComplainCode::Accepted | ComplainCode::Aborted) {
                        break;
                    }
                }
                Ok(times)
            })
        })
        .collect();

    let start = Instant::now();
    thread::sleep(cfg.warmup + cfg.duration);
    stop.store(true, Ordering::Relaxed);
    let mut times = ClientTimes::default();
    for w in workers {
        let t = w.join().map_err(|_| FactsError::Invalid("client thread panicked".into()))??;
        times.begin_to_snapshot.extend(t.begin_to_snapshot);
        times.index_round_trip.extend(t.index_round_trip);
    }
    drop(proxy);
    drop(handle);

    let (from, to) = (start + cfg.warmup, start + cfg.warmup + cfg.duration);
    let log = srv.session_log();
    let in_window: Vec<_> = log.iter().filter(|r| r.end >= from && r.end < to).collect();
    let accepted = in_window.iter().filter(|r| r.outcome == SessionOutcome::Accepted).count();
    let hold: Duration = in_window.iter().map(|r| r.end - r.start).sum();
    let mean = |xs: &[Duration]| xs.iter().sum::<Duration>() / xs.len().max(1) as u32;

    let u = srv.params()?.u as usize;
    let snapshot_payload_bytes = u.div_ceil(8);
    let snapshot_frame_bytes = 5 + snapshot_payload_bytes;
    Ok(ThroughputReport {
        accepted,
        window: cfg.duration,
        per_sec: accepted as f64 / cfg.duration.as_secs_f64(),
        snapshot_frame_bytes,
        snapshot_payload_bytes,
        mean_lock_hold: hold / in_window.len().max(1) as u32,
        mean_begin_to_snapshot: mean(&times.begin_to_snapshot),
        mean_index_round_trip: mean(&times.index_round_trip),
        model_per_sec: (cfg.latency > Duration::ZERO)
            .then(|| model_per_sec(cfg.latency, cfg.bandwidth_bps, snapshot_frame_bytes)),
        mean_originate,
    })
}
