//! In-process complaint service. The network layer in [`super::net`] is a
//! thin framing shell around these handlers.
//!
//! Complaint sessions are serialized by a ticket queue: `begin_complaint`
//! draws a ticket, waits until it is being served and no session is live,
//! then holds the table until `finish_complaint`, an abort or the deadline.
//! Every handler that touches the queue also reaps an expired session, so a
//! silent client cannot hold the table past its deadline.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use facts_core::tag::DIGEST_LEN;
use facts_core::{
    audit_open, derive_item_set, derive_user_set, server_issue_tag, test_count, user_set_key,
    validate_index, BitTable, CcbfParams, IndexSet, ServerKeys, Tag, TippingCurve, UserId,
    UserSnapshot,
};
use parking_lot::{Condvar, Mutex, MutexGuard, RwLock};
use rand::rngs::OsRng;
use rand::RngCore;

use crate::config::ServerConfig;
use crate::error::ServerError;
use crate::wire::{token_digest, AuditVerdict, ComplainCode, EpochInfo};

/// Login material handed to a registered user at setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub id: UserId,
    pub token: [u8; 32],
}

#[derive(Debug, Clone)]
pub struct UserRecord {
    pub id: UserId,
    pub complaints_used: u32,
    token_digest: [u8; DIGEST_LEN],
}

/// An open complaint session, as handed to the complaining client.
#[derive(Debug, Clone)]
pub struct ComplaintSession {
    pub ticket: u64,
    pub epoch_id: u64,
    pub user: UserId,
    pub snapshot: UserSnapshot,
    pub deadline: Instant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionOutcome {
    Accepted,
    Aborted,
    Rejected,
    TimedOut,
}

/// One lock tenure, for the serialization checker.
#[derive(Debug, Clone)]
pub struct SessionRecord {
    pub ticket: u64,
    pub user: UserId,
    pub start: Instant,
    pub end: Instant,
    pub outcome: SessionOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochStats {
    pub epoch_id: u64,
    pub complaint_total: u64,
    pub table_ones: u64,
    pub popcount: u64,
}

struct Live {
    ticket: u64,
    user: UserId,
    start: Instant,
    deadline: Instant,
    user_set: Arc<IndexSet>,
}

struct Epoch {
    epoch_id: u64,
    table: BitTable,
    complaint_total: u64,
    users: HashMap<UserId, UserRecord>,
    user_sets: HashMap<UserId, Arc<IndexSet>>,
    next_ticket: u64,
    serving: u64,
    live: Option<Live>,
    log: Vec<SessionRecord>,
}

impl Epoch {
    /// Ends the live session if its deadline has passed.
    fn reap(&mut self, now: Instant) -> bool {
        match &self.live {
            Some(live) if now >= live.deadline => {
                self.release(now, SessionOutcome::TimedOut);
                true
            }
            _ => false,
        }
    }

    fn release(&mut self, now: Instant, outcome: SessionOutcome) {
        if let Some(live) = self.live.take() {
            self.log.push(SessionRecord {
                ticket: live.ticket,
                user: live.user,
                start: live.start,
                end: now,
                outcome,
            });
            self.serving += 1;
        }
    }
}

struct State {
    params: CcbfParams,
    quota: u32,
    deadline: Duration,
    recheck: Option<TippingCurve>,
    keys: RwLock<ServerKeys>,
    epoch: Mutex<Epoch>,
    turn: Condvar,
}

impl State {
    /// Waits until `ticket` is at the head of the queue and the table is
    /// free, reaping expired sessions along the way.
    fn wait_turn<'a>(&'a self, mut epoch: MutexGuard<'a, Epoch>, ticket: u64) -> MutexGuard<'a, Epoch> {
        loop {
            let now = Instant::now();
            if epoch.reap(now) {
                self.turn.notify_all();
            }
            if epoch.live.is_none() && epoch.serving == ticket {
                return epoch;
            }
            match epoch.live.as_ref().map(|l| l.deadline) {
                Some(deadline) => {
                    self.turn.wait_until(&mut epoch, deadline);
                }
                None => {
                    self.turn.wait(&mut epoch);
                }
            }
        }
    }

    fn user_set(&self, epoch: &mut Epoch, user: &UserId) -> Arc<IndexSet> {
        if let Some(set) = epoch.user_sets.get(user) {
            return Arc::clone(set);
        }
        let key = user_set_key(self.keys.read().derive_key(), user.as_bytes());
        let set = Arc::new(
            derive_user_set(user.as_bytes(), &key, &self.params)
                .expect("parameters were validated at setup"),
        );
        epoch.user_sets.insert(user.clone(), Arc::clone(&set));
        set
    }
}

/// The FACTS server: one epoch of CCBF state plus the signing keys.
#[derive(Default)]
pub struct FactsServer {
    state: OnceLock<State>,
}

impl FactsServer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Convenience: a server already set up from `cfg`.
    pub fn from_config(cfg: &ServerConfig) -> Result<(Arc<Self>, Vec<Credential>), ServerError> {
        let server = Arc::new(Self::new());
        let creds = server.setup(cfg)?;
        Ok((server, creds))
    }

    /// Generates keys, registers `cfg.users` users named `user-0 ..` with
    /// fresh tokens and allocates the zeroed table.
    pub fn setup(&self, cfg: &ServerConfig) -> Result<Vec<Credential>, ServerError> {
        if self.state.get().is_some() {
            return Err(ServerError::AlreadySetUp);
        }
        if cfg.users == 0 {
            return Err(ServerError::NoUsers);
        }
        let params = facts_core::choose_params(cfg.n, cfg.t)?.with_lambda(cfg.lambda)?;
        let recheck = if cfg.audit_recheck {
            Some(TippingCurve::new(params.s, params.u, params.v, params.t)?)
        } else {
            None
        };
        let mut rng = OsRng;
        let mut creds = Vec::with_capacity(cfg.users);
        let mut users = HashMap::with_capacity(cfg.users);
        for i in 0..cfg.users {
            let id = UserId::new(format!("user-{i}")).expect("short ascii id");
            let mut token = [0u8; 32];
            rng.fill_bytes(&mut token);
            users.insert(
                id.clone(),
                UserRecord {
                    id: id.clone(),
                    complaints_used: 0,
                    token_digest: token_digest(&token),
                },
            );
            creds.push(Credential { id, token });
        }
        let state = State {
            params,
            quota: cfg.quota,
            deadline: cfg.session_deadline(),
            recheck,
            keys: RwLock::new(ServerKeys::generate(&mut rng)),
            epoch: Mutex::new(Epoch {
                epoch_id: 0,
                table: BitTable::new(params.s),
                complaint_total: 0,
                users,
                user_sets: HashMap::new(),
                next_ticket: 0,
                serving: 0,
                live: None,
                log: Vec::new(),
            }),
            turn: Condvar::new(),
        };
        self.state.set(state).map_err(|_| ServerError::AlreadySetUp)?;
        Ok(creds)
    }

    fn state(&self) -> Result<&State, ServerError> {
        self.state.get().ok_or(ServerError::NotSetUp)
    }

    pub fn params(&self) -> Result<CcbfParams, ServerError> {
        Ok(self.state()?.params)
    }

    pub fn verifying_key(&self) -> Result<ed25519_dalek::VerifyingKey, ServerError> {
        Ok(self.state()?.keys.read().verifying_key())
    }

    /// Checks a hello: the user must exist and the token digest must match.
    pub fn authenticate(&self, user: &UserId, digest: &[u8; DIGEST_LEN]) -> Result<(), ServerError> {
        let state = self.state()?;
        let epoch = state.epoch.lock();
        match epoch.users.get(user) {
            Some(rec) if rec.token_digest == *digest => Ok(()),
            _ => Err(ServerError::Unauthenticated),
        }
    }

    fn known(&self, state: &State, user: &UserId) -> Result<(), ServerError> {
        if state.epoch.lock().users.contains_key(user) {
            Ok(())
        } else {
            Err(ServerError::Unauthenticated)
        }
    }

    /// The epoch configuration for `user`, including its user-set key.
    pub fn epoch_info(&self, user: &UserId) -> Result<EpochInfo, ServerError> {
        let state = self.state()?;
        let epoch = state.epoch.lock();
        if !epoch.users.contains_key(user) {
            return Err(ServerError::Unauthenticated);
        }
        let keys = state.keys.read();
        Ok(EpochInfo {
            epoch_id: epoch.epoch_id,
            params: state.params,
            quota: state.quota,
            deadline_ms: state.deadline.as_millis() as u64,
            user_key: user_set_key(keys.derive_key(), user.as_bytes()),
            server_key: keys.verifying_key().to_bytes(),
        })
    }

    /// Tag issuance. Identical for originations and forwards; never touches
    /// the table.
    pub fn handle_originate(
        &self,
        user: &UserId,
        h: &[u8; DIGEST_LEN],
    ) -> Result<(Vec<u8>, [u8; 64]), ServerError> {
        let state = self.state()?;
        self.known(state, user)?;
        let keys = state.keys.read();
        Ok(server_issue_tag(&keys, user, h, &mut OsRng))
    }

    /// Opens a complaint session, queueing behind any live one.
    pub fn begin_complaint(&self, user: &UserId) -> Result<ComplaintSession, ComplainCode> {
        let state = self.state().map_err(|_| ComplainCode::Unauthenticated)?;
        let mut epoch = state.epoch.lock();
        Self::admissible(state, &epoch, user)?;
        let ticket = epoch.next_ticket;
        epoch.next_ticket += 1;
        let mut epoch = state.wait_turn(epoch, ticket);

        // Quota or cap may have run out while queued.
        if let Err(code) = Self::admissible(state, &epoch, user) {
            epoch.serving += 1;
            state.turn.notify_all();
            return Err(code);
        }
        let user_set = state.user_set(&mut epoch, user);
        let snapshot = UserSnapshot::capture(&epoch.table, &user_set);
        let start = Instant::now();
        let deadline = start + state.deadline;
        epoch.live = Some(Live {
            ticket,
            user: user.clone(),
            start,
            deadline,
            user_set,
        });
        Ok(ComplaintSession {
            ticket,
            epoch_id: epoch.epoch_id,
            user: user.clone(),
            snapshot,
            deadline,
        })
    }

    fn admissible(state: &State, epoch: &Epoch, user: &UserId) -> Result<(), ComplainCode> {
        let rec = epoch.users.get(user).ok_or(ComplainCode::Unauthenticated)?;
        if rec.complaints_used >= state.quota {
            return Err(ComplainCode::Quota);
        }
        if epoch.complaint_total >= state.params.n {
            return Err(ComplainCode::EpochFull);
        }
        Ok(())
    }

    /// Closes session `ticket` with the client's index, or `None` to abort.
    ///
    /// A valid index sets one bit and spends quota; an invalid one only
    /// spends quota; an abort spends nothing. A session that is no longer
    /// live (reaped, or never opened) answers `Timeout`.
    pub fn finish_complaint(&self, user: &UserId, ticket: u64, choice: Option<u64>) -> ComplainCode {
        let Ok(state) = self.state() else {
            return ComplainCode::Unauthenticated;
        };
        let mut epoch = state.epoch.lock();
        let now = Instant::now();
        if epoch.reap(now) {
            state.turn.notify_all();
        }
        let user_set = match &epoch.live {
            Some(live) if live.ticket == ticket && live.user == *user => Arc::clone(&live.user_set),
            _ => return ComplainCode::Timeout,
        };
        let (code, outcome) = match choice {
            None => (ComplainCode::Aborted, SessionOutcome::Aborted),
            Some(i) => {
                let ok = validate_index(&mut epoch.table, &user_set, i).is_ok();
                let rec = epoch.users.get_mut(user).expect("live session user is registered");
                rec.complaints_used += 1;
                if ok {
                    epoch.complaint_total += 1;
                    (ComplainCode::Accepted, SessionOutcome::Accepted)
                } else {
                    (ComplainCode::Rejected, SessionOutcome::Rejected)
                }
            }
        };
        epoch.release(now, outcome);
        state.turn.notify_all();
        code
    }

    /// Ends session `ticket` if it is live and past its deadline. Returns
    /// whether it did.
    pub fn expire_session(&self, ticket: u64) -> bool {
        let Ok(state) = self.state() else {
            return false;
        };
        let mut epoch = state.epoch.lock();
        let expired = matches!(&epoch.live, Some(l) if l.ticket == ticket) && epoch.reap(Instant::now());
        if expired {
            state.turn.notify_all();
        }
        expired
    }

    /// Opens a tag for anyone who presents it with its message. The CCBF
    /// count is only re-checked when the recheck hook is configured.
    pub fn handle_audit(&self, tag_bytes: &[u8], x: &[u8]) -> AuditVerdict {
        let Ok(state) = self.state() else {
            return AuditVerdict::InvalidTag;
        };
        let Ok(tag) = Tag::from_bytes(tag_bytes) else {
            return AuditVerdict::InvalidTag;
        };
        let opened = audit_open(&state.keys.read(), &tag, x);
        let Ok(id) = opened else {
            return AuditVerdict::InvalidTag;
        };
        if let Some(curve) = &state.recheck {
            let item = derive_item_set(tag_bytes, &state.params).expect("tag bytes are non-empty");
            let epoch = state.epoch.lock();
            let tau = curve.tau(epoch.table.ones()).expect("m never exceeds s");
            if !test_count(&epoch.table, &item, tau) {
                return AuditVerdict::BelowThreshold;
            }
        }
        log::info!("audit opened a tag originated by {id}");
        AuditVerdict::Originator(id)
    }

    /// Canonical table bytes.
    pub fn sync_table(&self) -> Result<Vec<u8>, ServerError> {
        Ok(self.state()?.epoch.lock().table.to_snapshot_bytes())
    }

    /// Starts a new epoch once any live session has ended: zeroes the table
    /// and quotas and rotates the user-set derivation key.
    pub fn epoch_reset(&self) -> Result<u64, ServerError> {
        let state = self.state()?;
        let mut epoch = state.epoch.lock();
        let ticket = epoch.next_ticket;
        epoch.next_ticket += 1;
        let mut epoch = state.wait_turn(epoch, ticket);
        epoch.table.clear();
        epoch.complaint_total = 0;
        epoch.user_sets.clear();
        for rec in epoch.users.values_mut() {
            rec.complaints_used = 0;
        }
        epoch.epoch_id += 1;
        state.keys.write().rotate_derive_key(&mut OsRng);
        epoch.serving += 1;
        state.turn.notify_all();
        Ok(epoch.epoch_id)
    }

    pub fn stats(&self) -> Result<EpochStats, ServerError> {
        let epoch = self.state()?.epoch.lock();
        Ok(EpochStats {
            epoch_id: epoch.epoch_id,
            complaint_total: epoch.complaint_total,
            table_ones: epoch.table.ones(),
            popcount: epoch.table.popcount(),
        })
    }

    pub fn user_record(&self, user: &UserId) -> Option<UserRecord> {
        self.state().ok()?.epoch.lock().users.get(user).cloned()
    }

    pub fn session_log(&self) -> Vec<SessionRecord> {
        self.state()
            .map(|s| s.epoch.lock().log.clone())
            .unwrap_or_default()
    }

    /// Whether a complaint session currently holds the table.
    pub fn session_live(&self) -> bool {
        self.state().is_ok_and(|s| s.epoch.lock().live.is_some())
    }

    pub fn session_deadline(&self) -> Result<Duration, ServerError> {
        Ok(self.state()?.deadline)
    }
}

/// Pairs of log records whose lock tenures intersect.
pub fn overlapping_sessions(log: &[SessionRecord]) -> Vec<(u64, u64)> {
    let mut sorted: Vec<&SessionRecord> = log.iter().collect();
    sorted.sort_by_key(|r| r.start);
    let mut overlaps = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if b.start >= a.end {
                break;
            }
            overlaps.push((a.ticket, b.ticket));
        }
    }
    overlaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use facts_core::{hash_message, select_index, IndexChoice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(quota: u32, deadline_ms: u64) -> (Arc<FactsServer>, Vec<Credential>) {
        FactsServer::from_config(&ServerConfig {
            users: 4,
            n: 2_000,
            t: 50,
            quota,
            lambda: 10,
            session_deadline_ms: deadline_ms,
            ..ServerConfig::default()
        })
        .unwrap()
    }

    fn user_set(server: &FactsServer, id: &UserId) -> IndexSet {
        let info = server.epoch_info(id).unwrap();
        derive_user_set(id.as_bytes(), &info.user_key, &info.params).unwrap()
    }

    #[test]
    fn setup_examples() {
        let (server, creds) = FactsServer::from_config(&ServerConfig {
            users: 100,
            n: 100_000,
            t: 100,
            quota: 10,
            lambda: 10,
            ..ServerConfig::default()
        })
        .unwrap();
        assert_eq!(creds.len(), 100);
        let table = server.sync_table().unwrap();
        assert_eq!(
            BitTable::from_snapshot_bytes(&table).unwrap().len(),
            9_600_000
        );
        assert!(table[16..].iter().all(|&b| b == 0));
        assert!(matches!(
            server.setup(&ServerConfig::default()),
            Err(ServerError::AlreadySetUp)
        ));
        assert!(matches!(
            FactsServer::new().setup(&ServerConfig {
                users: 0,
                ..ServerConfig::default()
            }),
            Err(ServerError::NoUsers)
        ));
        assert!(matches!(FactsServer::new().sync_table(), Err(ServerError::NotSetUp)));
    }

    #[test]
    fn authentication() {
        let (server, creds) = small(3, 1000);
        let c = &creds[1];
        assert!(server.authenticate(&c.id, &token_digest(&c.token)).is_ok());
        assert!(server.authenticate(&c.id, &token_digest(&creds[0].token)).is_err());
        let stranger = UserId::new("mallory").unwrap();
        assert!(server.authenticate(&stranger, &[0; 32]).is_err());
        assert!(server.handle_originate(&stranger, &[0; 32]).is_err());
        assert_eq!(server.begin_complaint(&stranger).unwrap_err(), ComplainCode::Unauthenticated);
    }

    #[test]
    fn originate_names_channel_identity_and_leaves_table() {
        let (server, creds) = small(3, 1000);
        let pk = server.verifying_key().unwrap();
        let r = [3u8; 32];
        let h = hash_message(&r, b"hello");
        let mut opened = Vec::new();
        for c in &creds[..2] {
            let (e, sigma) = server.handle_originate(&c.id, &h).unwrap();
            let tag = Tag { r, e, sigma };
            facts_core::verify_tag(&pk, &tag, b"hello").unwrap();
            match server.handle_audit(&tag.to_bytes(), b"hello") {
                AuditVerdict::Originator(id) => opened.push(id),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(opened, vec![creds[0].id.clone(), creds[1].id.clone()]);
        for _ in 0..10_000 {
            server.handle_originate(&creds[2].id, &h).unwrap();
        }
        assert_eq!(server.stats().unwrap().table_ones, 0);
    }

    #[test]
    fn complaint_lifecycle_and_quota() {
        let (server, creds) = small(3, 1000);
        let id = &creds[0].id;
        let set = user_set(&server, id);
        let item = derive_item_set(b"some tag", &server.params().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let s = server.begin_complaint(id).unwrap();
        assert_eq!(s.snapshot.count_zeros(), set.len());
        assert_eq!(server.finish_complaint(id, s.ticket, None), ComplainCode::Aborted);
        assert_eq!(server.user_record(id).unwrap().complaints_used, 0);

        let s = server.begin_complaint(id).unwrap();
        let outside = (0..).find(|i| !set.contains(*i)).unwrap();
        assert_eq!(server.finish_complaint(id, s.ticket, Some(outside)), ComplainCode::Rejected);
        assert_eq!(server.stats().unwrap().table_ones, 0);

        for _ in 0..2 {
            let s = server.begin_complaint(id).unwrap();
            let IndexChoice::Write { index, .. } = select_index(&set, &s.snapshot, &item, &mut rng).unwrap() else {
                panic!("fresh user cannot abort")
            };
            assert_eq!(server.finish_complaint(id, s.ticket, Some(index)), ComplainCode::Accepted);
        }
        assert_eq!(server.begin_complaint(id).unwrap_err(), ComplainCode::Quota);
        let st = server.stats().unwrap();
        assert_eq!((st.complaint_total, st.table_ones, st.popcount), (2, 2, 2));
        // Finishing twice is a stale session.
        assert_eq!(server.finish_complaint(id, 0, None), ComplainCode::Timeout);
    }

    #[test]
    fn queued_sessions_run_in_order() {
        let (server, creds) = small(5, 2000);
        let first = server.begin_complaint(&creds[0].id).unwrap();
        let s2 = Arc::clone(&server);
        let id2 = creds[1].id.clone();
        let waiter = std::thread::spawn(move || {
            let s = s2.begin_complaint(&id2).unwrap();
            let at = Instant::now();
            s2.finish_complaint(&id2, s.ticket, None);
            at
        });
        std::thread::sleep(Duration::from_millis(100));
        let released = Instant::now();
        server.finish_complaint(&creds[0].id, first.ticket, None);
        assert!(waiter.join().unwrap() >= released);
        assert!(overlapping_sessions(&server.session_log()).is_empty());
    }

    #[test]
    fn silent_session_is_reaped() {
        let (server, creds) = small(5, 200);
        let stuck = server.begin_complaint(&creds[0].id).unwrap();
        let t0 = Instant::now();
        let next = server.begin_complaint(&creds[1].id).unwrap();
        let waited = t0.elapsed();
        assert!(waited >= Duration::from_millis(150) && waited < Duration::from_millis(1200), "{waited:?}");
        assert_eq!(
            server.finish_complaint(&creds[0].id, stuck.ticket, Some(0)),
            ComplainCode::Timeout
        );
        assert_eq!(server.user_record(&creds[0].id).unwrap().complaints_used, 0);
        server.finish_complaint(&creds[1].id, next.ticket, None);
        let log = server.session_log();
        assert_eq!(log[0].outcome, SessionOutcome::TimedOut);
    }

    #[test]
    fn epoch_cap_and_reset() {
        let (server, creds) = FactsServer::from_config(&ServerConfig {
            users: 30,
            n: 1_000,
            t: 50,
            quota: 100,
            ..ServerConfig::default()
        })
        .unwrap();
        let params = server.params().unwrap();
        let item = derive_item_set(b"x", &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let id = &creds[0].id;
        let before = user_set(&server, id);
        let mut accepted = 0;
        'outer: for c in &creds {
            let set = user_set(&server, &c.id);
            loop {
                let s = match server.begin_complaint(&c.id) {
                    Ok(s) => s,
                    Err(ComplainCode::EpochFull) => break 'outer,
                    Err(ComplainCode::Quota) => break,
                    Err(e) => panic!("{e:?}"),
                };
                let choice = match select_index(&set, &s.snapshot, &item, &mut rng).unwrap() {
                    IndexChoice::Write { index, .. } => Some(index),
                    IndexChoice::Abort => None,
                };
                if server.finish_complaint(&c.id, s.ticket, choice) == ComplainCode::Accepted {
                    accepted += 1;
                }
            }
        }
        assert_eq!(accepted, params.n);
        let st = server.stats().unwrap();
        assert_eq!((st.complaint_total, st.table_ones, st.popcount), (params.n, params.n, params.n));

        assert_eq!(server.epoch_reset().unwrap(), 1);
        let table = server.sync_table().unwrap();
        assert!(table[16..].iter().all(|&b| b == 0));
        assert_eq!(server.user_record(id).unwrap().complaints_used, 0);
        assert_ne!(user_set(&server, id), before);
        let s = server.begin_complaint(id).unwrap();
        assert_eq!(s.epoch_id, 1);
        server.finish_complaint(id, s.ticket, None);
    }

    #[test]
    fn audit_recheck_hook() {
        let (server, creds) = FactsServer::from_config(&ServerConfig {
            users: 2,
            n: 2_000,
            t: 50,
            audit_recheck: true,
            ..ServerConfig::default()
        })
        .unwrap();
        let r = [1u8; 32];
        let (e, sigma) = server.handle_originate(&creds[0].id, &hash_message(&r, b"m")).unwrap();
        let tag = Tag { r, e, sigma }.to_bytes();
        assert_eq!(server.handle_audit(&tag, b"m"), AuditVerdict::BelowThreshold);
        assert_eq!(server.handle_audit(&tag, b"other"), AuditVerdict::InvalidTag);
        assert_eq!(server.handle_audit(&tag[1..], b"m"), AuditVerdict::InvalidTag);
    }

    #[test]
    fn overlap_checker_detects_overlap() {
        let t0 = Instant::now();
        let rec = |ticket, a: u64, b: u64| SessionRecord {
            ticket,
            user: UserId::new("u").unwrap(),
            start: t0 + Duration::from_millis(a),
            end: t0 + Duration::from_millis(b),
            outcome: SessionOutcome::Aborted,
        };
        assert!(overlapping_sessions(&[rec(0, 0, 10), rec(1, 10, 20)]).is_empty());
        assert_eq!(overlapping_sessions(&[rec(1, 5, 20), rec(0, 0, 10)]), vec![(0, 1)]);
    }
}
