//! Thread-per-connection TCP front end.

use std::collections::HashMap;
use std::io::{self, BufReader, ErrorKind};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use facts_core::UserId;
use parking_lot::Mutex;

use super::state::FactsServer;
use crate::wire::{
    decode_audit_req, decode_index, encode_originate_resp, read_frame, write_frame, ComplainCode,
    Frame, Hello, MsgType, WireError,
};

const HELLO_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToServer,
    ToClient,
}

/// Type and size of one frame seen by the server. Payload bytes are not kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub conn: u64,
    pub user: UserId,
    pub dir: Direction,
    pub kind: MsgType,
    pub len: usize,
}

/// Shared recorder of every frame the server reads or writes.
#[derive(Debug, Default)]
pub struct Transcript {
    records: Mutex<Vec<FrameRecord>>,
}

impl Transcript {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn records(&self) -> Vec<FrameRecord> {
        self.records.lock().clone()
    }

    /// Records of one connection, in order, as `(direction, type, size)`.
    pub fn connection(&self, conn: u64) -> Vec<(Direction, MsgType, usize)> {
        self.records
            .lock()
            .iter()
            .filter(|r| r.conn == conn)
            .map(|r| (r.dir, r.kind, r.len))
            .collect()
    }

    pub fn clear(&self) {
        self.records.lock().clear();
    }

    fn push(&self, rec: FrameRecord) {
        self.records.lock().push(rec);
    }
}

/// A running listener. Dropping it stops accepting and closes every open
/// connection.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    conns: Arc<Mutex<HashMap<u64, TcpStream>>>,
    accept: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(&mut self) {
        if self.stop.swap(true, Ordering::SeqCst) {
            return;
        }
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
        for (_, c) in self.conns.lock().drain() {
            let _ = c.shutdown(Shutdown::Both);
        }
    }

    /// Blocks on the accept loop (for the `serve` command).
    pub fn join(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Serves `server` on `listener` until the handle is dropped.
pub fn spawn(
    server: Arc<FactsServer>,
    listener: TcpListener,
    transcript: Option<Arc<Transcript>>,
) -> io::Result<ServerHandle> {
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let conns = Arc::new(Mutex::new(HashMap::new()));
    let accept = {
        let stop = Arc::clone(&stop);
        let conns = Arc::clone(&conns);
        thread::Builder::new().name("facts-accept".into()).spawn(move || {
            let ids = AtomicU64::new(0);
            for stream in listener.incoming() {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let id = ids.fetch_add(1, Ordering::Relaxed);
                if let Ok(clone) = stream.try_clone() {
                    conns.lock().insert(id, clone);
                }
                let conns = Arc::clone(&conns);
                let conn = Connection {
                    id,
                    server: Arc::clone(&server),
                    transcript: transcript.clone(),
                };
                let _ = thread::Builder::new()
                    .name(format!("facts-conn-{}", conn.id))
                    .spawn(move || {
                        if let Err(e) = conn.run(stream) {
                            log::debug!("connection {} closed: {e}", conn.id);
                        }
                        // The handle's clone keeps the socket open otherwise.
                        if let Some(s) = conns.lock().remove(&conn.id) {
                            let _ = s.shutdown(Shutdown::Both);
                        }
                    });
            }
        })?
    };
    Ok(ServerHandle {
        addr,
        stop,
        conns,
        accept: Some(accept),
    })
}

/// Resets the epoch every `period` until `stop` is set.
pub fn spawn_epoch_timer(server: Arc<FactsServer>, period: Duration, stop: Arc<AtomicBool>) -> JoinHandle<()> {
    thread::spawn(move || {
        let mut next = Instant::now() + period;
        while !stop.load(Ordering::SeqCst) {
            let now = Instant::now();
            if now >= next {
                match server.epoch_reset() {
                    Ok(id) => log::info!("epoch {id} started"),
                    Err(e) => log::warn!("epoch reset failed: {e}"),
                }
                next += period;
            } else {
                thread::sleep((next - now).min(Duration::from_millis(200)));
            }
        }
    })
}

struct Connection {
    id: u64,
    server: Arc<FactsServer>,
    transcript: Option<Arc<Transcript>>,
}

fn is_timeout(e: &WireError) -> bool {
    matches!(e, WireError::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

impl Connection {
    fn record(&self, user: &UserId, dir: Direction, f: &Frame) {
        if let Some(t) = &self.transcript {
            t.push(FrameRecord {
                conn: self.id,
                user: user.clone(),
                dir,
                kind: f.kind,
                len: f.wire_len(),
            });
        }
    }

    fn run(&self, stream: TcpStream) -> Result<(), WireError> {
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        let mut reader = BufReader::new(stream);

        reader.get_ref().set_read_timeout(Some(HELLO_TIMEOUT))?;
        let hello = Hello::read_from(&mut reader)?;
        if self.server.authenticate(&hello.user, &hello.token_digest).is_err() {
            log::info!("rejected hello for {}", hello.user);
            return Ok(());
        }
        reader.get_ref().set_read_timeout(None)?;
        let user = hello.user;
        let send = |w: &mut TcpStream, f: Frame| -> Result<(), WireError> {
            self.record(&user, Direction::ToClient, &f);
            write_frame(w, &f)?;
            Ok(())
        };

        let info = self.server.epoch_info(&user).map_err(|_| WireError::Payload("epoch"))?;
        let mut conn_epoch = info.epoch_id;
        send(&mut writer, Frame::new(MsgType::EpochInfo, info.encode()))?;

        // Open complaint session awaiting this client's index.
        let mut pending: Option<(u64, Instant)> = None;
        loop {
            let frame = match read_frame(&mut reader) {
                Ok(f) => f,
                Err(e) if is_timeout(&e) => {
                    // The client let its session deadline pass: reap it and
                    // wait for whatever it sends next.
                    if let Some((ticket, deadline)) = pending {
                        let now = Instant::now();
                        if deadline > now {
                            thread::sleep(deadline - now);
                        }
                        self.server.expire_session(ticket);
                    }
                    reader.get_ref().set_read_timeout(None)?;
                    continue;
                }
                Err(e) => {
                    if let Some((ticket, _)) = pending {
                        // Disconnected mid-session: release the table now.
                        self.server.finish_complaint(&user, ticket, None);
                    }
                    return match e {
                        WireError::Io(io) if io.kind() == ErrorKind::UnexpectedEof => Ok(()),
                        e => Err(e),
                    };
                }
            };
            self.record(&user, Direction::ToServer, &frame);
            match frame.kind {
                MsgType::OriginateReq => {
                    let h: [u8; 32] = frame
                        .payload
                        .as_slice()
                        .try_into()
                        .map_err(|_| WireError::Payload("originate request"))?;
                    let (e, sigma) = self
                        .server
                        .handle_originate(&user, &h)
                        .map_err(|_| WireError::Payload("originate"))?;
                    send(&mut writer, Frame::new(MsgType::OriginateResp, encode_originate_resp(&e, &sigma)))?;
                }
                MsgType::ComplainBegin => {
                    if let Some((ticket, _)) = pending.take() {
                        self.server.finish_complaint(&user, ticket, None);
                        reader.get_ref().set_read_timeout(None)?;
                    }
                    match self.server.begin_complaint(&user) {
                        Err(code) => send(&mut writer, code.frame())?,
                        Ok(session) => {
                            if session.epoch_id != conn_epoch {
                                let info = self
                                    .server
                                    .epoch_info(&user)
                                    .map_err(|_| WireError::Payload("epoch"))?;
                                conn_epoch = info.epoch_id;
                                send(&mut writer, Frame::new(MsgType::EpochInfo, info.encode()))?;
                            }
                            pending = Some((session.ticket, session.deadline));
                            send(
                                &mut writer,
                                Frame::new(MsgType::ComplainSnapshot, session.snapshot.as_bytes().to_vec()),
                            )?;
                            let left = session.deadline.saturating_duration_since(Instant::now());
                            reader
                                .get_ref()
                                .set_read_timeout(Some(left.max(Duration::from_millis(1))))?;
                        }
                    }
                }
                MsgType::ComplainIndex => {
                    let choice = decode_index(&frame.payload)?;
                    let code = match pending.take() {
                        Some((ticket, _)) => {
                            reader.get_ref().set_read_timeout(None)?;
                            self.server.finish_complaint(&user, ticket, choice)
                        }
                        None => ComplainCode::Timeout,
                    };
                    send(&mut writer, code.frame())?;
                }
                MsgType::AuditReq => {
                    let (tag, x) = decode_audit_req(&frame.payload)?;
                    let verdict = self.server.handle_audit(tag, x);
                    send(&mut writer, Frame::new(MsgType::AuditResp, verdict.encode()))?;
                }
                MsgType::TableSyncReq => {
                    let bytes = self.server.sync_table().map_err(|_| WireError::Payload("sync"))?;
                    send(&mut writer, Frame::new(MsgType::TableSyncResp, bytes))?;
                }
                MsgType::EpochInfo => {
                    let info = self.server.epoch_info(&user).map_err(|_| WireError::Payload("epoch"))?;
                    conn_epoch = info.epoch_id;
                    send(&mut writer, Frame::new(MsgType::EpochInfo, info.encode()))?;
                }
                other => {
                    log::info!("unexpected {other:?} from {user}; closing");
                    if let Some((ticket, _)) = pending {
                        self.server.finish_complaint(&user, ticket, None);
                    }
                    return Ok(());
                }
            }
        }
    }
}
