//! User side of FACTS: origination and forwarding, receipt verification,
//! complaints and audit triggering.

use std::io::BufReader;
use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use ed25519_dalek::VerifyingKey;
use facts_core::tag::{fresh_salt, DIGEST_LEN, SIGNATURE_LEN};
use facts_core::{
    derive_item_set, derive_user_set, hash_message, select_index, test_count, verify_tag, BitTable,
    CcbfParams, IndexChoice, IndexSet, Tag, TippingCurve, UserId, UserSnapshot,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::eems::Eems;
use crate::error::FactsError;
use crate::server::Credential;
use crate::wire::{
    decode_originate_resp, encode_audit_req, encode_index, read_frame, write_frame, AuditVerdict,
    ComplainCode, EpochInfo, Frame, Hello, MsgType,
};

/// An authenticated protocol connection. One request is in flight at a time.
pub struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    info: EpochInfo,
}

/// Server reply to `COMPLAIN_BEGIN`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BeginReply {
    Snapshot {
        bytes: Vec<u8>,
        /// The server pushed a new `EPOCH_INFO` first.
        epoch_changed: bool,
    },
    Refused(ComplainCode),
}

impl Connection {
    pub fn connect<A: ToSocketAddrs>(addr: A, id: &UserId, token: &[u8; 32]) -> Result<Self, FactsError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        std::io::Write::write_all(&mut writer, &Hello::new(id.clone(), token).encode())?;
        let mut reader = BufReader::new(stream);
        let info = match read_frame(&mut reader) {
            Ok(f) => EpochInfo::decode(&f.expect(MsgType::EpochInfo)?.payload)?,
            Err(_) => return Err(FactsError::Complaint(ComplainCode::Unauthenticated)),
        };
        Ok(Connection { reader, writer, info })
    }

    pub fn info(&self) -> &EpochInfo {
        &self.info
    }

    pub fn send(&mut self, frame: &Frame) -> Result<(), FactsError> {
        write_frame(&mut self.writer, frame)?;
        Ok(())
    }

    pub fn recv(&mut self) -> Result<Frame, FactsError> {
        Ok(read_frame(&mut self.reader)?)
    }

    fn request(&mut self, frame: Frame, reply: MsgType) -> Result<Frame, FactsError> {
        self.send(&frame)?;
        Ok(self.recv()?.expect(reply)?)
    }

    /// One Originate exchange: send `h`, receive `(e, sigma)`.
    pub fn originate(&mut self, h: &[u8; DIGEST_LEN]) -> Result<(Vec<u8>, [u8; SIGNATURE_LEN]), FactsError> {
        let resp = self.request(Frame::new(MsgType::OriginateReq, h.to_vec()), MsgType::OriginateResp)?;
        Ok(decode_originate_resp(&resp.payload)?)
    }

    pub fn complain_begin(&mut self) -> Result<BeginReply, FactsError> {
        self.send(&Frame::empty(MsgType::ComplainBegin))?;
        let mut epoch_changed = false;
        loop {
            let f = self.recv()?;
            match f.kind {
                MsgType::EpochInfo => {
                    self.info = EpochInfo::decode(&f.payload)?;
                    epoch_changed = true;
                }
                MsgType::ComplainSnapshot => {
                    return Ok(BeginReply::Snapshot {
                        bytes: f.payload,
                        epoch_changed,
                    })
                }
                MsgType::ComplainResult => {
                    let code = f.payload.first().copied().unwrap_or(u8::MAX);
                    return Ok(BeginReply::Refused(ComplainCode::from_byte(code)?));
                }
                _ => return Err(f.expect(MsgType::ComplainSnapshot).unwrap_err().into()),
            }
        }
    }

    pub fn complain_index(&mut self, choice: Option<u64>) -> Result<ComplainCode, FactsError> {
        let f = self.request(Frame::new(MsgType::ComplainIndex, encode_index(choice)), MsgType::ComplainResult)?;
        let code = f.payload.first().copied().unwrap_or(u8::MAX);
        Ok(ComplainCode::from_byte(code)?)
    }

    pub fn sync_table(&mut self) -> Result<BitTable, FactsError> {
        let f = self.request(Frame::empty(MsgType::TableSyncReq), MsgType::TableSyncResp)?;
        Ok(BitTable::from_snapshot_bytes(&f.payload)?)
    }

    pub fn audit(&mut self, tag: &[u8], x: &[u8]) -> Result<AuditVerdict, FactsError> {
        let f = self.request(Frame::new(MsgType::AuditReq, encode_audit_req(tag, x)), MsgType::AuditResp)?;
        Ok(AuditVerdict::decode(&f.payload)?)
    }

    pub fn refresh_epoch(&mut self) -> Result<&EpochInfo, FactsError> {
        let f = self.request(Frame::empty(MsgType::EpochInfo), MsgType::EpochInfo)?;
        self.info = EpochInfo::decode(&f.payload)?;
        Ok(&self.info)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InboxEntry {
    pub from: UserId,
    pub tag: Tag,
    pub x: Vec<u8>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClientOptions {
    /// Run [`FactsClient::check_and_audit`] after every accepted complaint.
    pub audit_after_complain: bool,
    /// Reuse a synced table younger than this; `None` always re-syncs.
    pub table_max_age: Option<Duration>,
    /// Seed for the client's local randomness; `None` seeds from the OS.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditCheck {
    Audited { verdict: AuditVerdict, count: u64, tau: u64 },
    BelowThreshold { count: u64, tau: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComplaintOutcome {
    Complained { index: u64, hit_item: bool, audit: Option<AuditCheck> },
    Aborted,
    Rejected,
}

/// Client state: identity, epoch material, verified inbox.
pub struct FactsClient {
    id: UserId,
    conn: Connection,
    params: CcbfParams,
    server_key: VerifyingKey,
    user_set: IndexSet,
    inbox: Vec<InboxEntry>,
    item_sets: Vec<Option<IndexSet>>,
    curve: Option<TippingCurve>,
    table: Option<(Instant, BitTable)>,
    options: ClientOptions,
    rng: ChaCha20Rng,
}

impl FactsClient {
    pub fn connect<A: ToSocketAddrs>(addr: A, cred: &Credential, options: ClientOptions) -> Result<Self, FactsError> {
        let conn = Connection::connect(addr, &cred.id, &cred.token)?;
        let info = conn.info().clone();
        let rng = match options.seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_entropy(),
        };
        Ok(FactsClient {
            id: cred.id.clone(),
            params: info.params,
            server_key: info.verifying_key()?,
            user_set: derive_user_set(cred.id.as_bytes(), &info.user_key, &info.params)?,
            conn,
            inbox: Vec::new(),
            item_sets: Vec::new(),
            curve: None,
            table: None,
            options,
            rng,
        })
    }

    pub fn id(&self) -> &UserId {
        &self.id
    }

    pub fn params(&self) -> &CcbfParams {
        &self.params
    }

    pub fn server_key(&self) -> &VerifyingKey {
        &self.server_key
    }

    pub fn user_set(&self) -> &IndexSet {
        &self.user_set
    }

    pub fn inbox(&self) -> &[InboxEntry] {
        &self.inbox
    }

    pub fn connection(&mut self) -> &mut Connection {
        &mut self.conn
    }

    /// Runs one Originate exchange for `x` and assembles the tag.
    pub fn originate(&mut self, x: &[u8]) -> Result<Tag, FactsError> {
        let r = fresh_salt(&mut self.rng);
        let (e, sigma) = self.conn.originate(&hash_message(&r, x))?;
        let tag = Tag { r, e, sigma };
        verify_tag(&self.server_key, &tag, x)?;
        Ok(tag)
    }

    /// Sends `x` to `to`. Without a tag this originates; with one it still
    /// runs a full Originate exchange, discards the result and forwards the
    /// original tag, so the server sees the same traffic either way.
    pub fn send_msg(&mut self, eems: &Eems, to: &UserId, tag: Option<&Tag>, x: &[u8]) -> Result<Tag, FactsError> {
        let fresh = self.originate(x)?;
        let tag = tag.cloned().unwrap_or(fresh);
        eems.send(&self.id, to, &tag.to_bytes(), x);
        Ok(tag)
    }

    /// Accepts `(tag, x)` into the inbox iff the tag verifies.
    pub fn rcv_msg(&mut self, from: &UserId, tag: &[u8], x: &[u8]) -> bool {
        let Ok(tag) = facts_core::tag::verify_tag_bytes(&self.server_key, tag, x) else {
            return false;
        };
        self.inbox.push(InboxEntry {
            from: from.clone(),
            tag,
            x: x.to_vec(),
        });
        self.item_sets.push(None);
        true
    }

    /// Runs [`rcv_msg`](Self::rcv_msg) on everything waiting in the mailbox;
    /// returns how many were accepted.
    pub fn receive_pending(&mut self, eems: &Eems) -> usize {
        eems.take(&self.id)
            .into_iter()
            .filter(|env| self.rcv_msg(&env.from, &env.tag, &env.x))
            .count()
    }

    fn item_set(&mut self, entry: usize) -> Result<&IndexSet, FactsError> {
        let e = self.inbox.get(entry).ok_or(FactsError::NoEntry(entry))?;
        if self.item_sets[entry].is_none() {
            self.item_sets[entry] = Some(derive_item_set(&e.tag.to_bytes(), &self.params)?);
        }
        Ok(self.item_sets[entry].as_ref().unwrap())
    }

    /// Complains about inbox entry `entry`. Only a bare table index (or the
    /// abort marker) leaves the client.
    pub fn complain(&mut self, entry: usize) -> Result<ComplaintOutcome, FactsError> {
        self.item_set(entry)?;
        let bytes = match self.conn.complain_begin()? {
            BeginReply::Refused(code) => return Err(FactsError::Complaint(code)),
            BeginReply::Snapshot { bytes, epoch_changed } => {
                if epoch_changed {
                    let info = self.conn.info().clone();
                    self.user_set = derive_user_set(self.id.as_bytes(), &info.user_key, &self.params)?;
                    self.table = None;
                }
                bytes
            }
        };
        let choice = match self.choose_index(entry, &bytes) {
            Ok(c) => c,
            Err(e) => {
                // Release the table before surfacing the error.
                self.conn.complain_index(None)?;
                return Err(e);
            }
        };
        let (index, hit_item) = match choice {
            IndexChoice::Write { index, hit_item } => (Some(index), hit_item),
            IndexChoice::Abort => (None, false),
        };
        match self.conn.complain_index(index)? {
            ComplainCode::Accepted => {
                self.table = None;
                let audit = if self.options.audit_after_complain {
                    Some(self.check_and_audit(entry)?)
                } else {
                    None
                };
                Ok(ComplaintOutcome::Complained {
                    index: index.expect("accepted complaints carry an index"),
                    hit_item,
                    audit,
                })
            }
            ComplainCode::Aborted => Ok(ComplaintOutcome::Aborted),
            ComplainCode::Rejected => Ok(ComplaintOutcome::Rejected),
            other => Err(FactsError::Complaint(other)),
        }
    }

    /// Client half of the index choice for entry `entry`, given the packed
    /// snapshot of the user's table positions.
    pub fn choose_index(&mut self, entry: usize, snapshot: &[u8]) -> Result<IndexChoice, FactsError> {
        self.item_set(entry)?;
        let snap = UserSnapshot::from_bytes(snapshot, self.user_set.len())?;
        let item = self.item_sets[entry].as_ref().unwrap();
        Ok(select_index(&self.user_set, &snap, item, &mut self.rng)?)
    }

    fn fresh_table(&mut self) -> Result<&BitTable, FactsError> {
        let stale = match (&self.table, self.options.table_max_age) {
            (Some((at, _)), Some(max)) => at.elapsed() > max,
            _ => true,
        };
        if stale {
            let table = self.conn.sync_table()?;
            if table.len() != self.params.s {
                return Err(FactsError::Invalid("table size differs from epoch parameters".into()));
            }
            self.table = Some((Instant::now(), table));
        }
        Ok(&self.table.as_ref().unwrap().1)
    }

    /// Tests entry `entry` against the tipping point at the synced table's
    /// load and submits it for audit if the count is reached.
    pub fn check_and_audit(&mut self, entry: usize) -> Result<AuditCheck, FactsError> {
        self.item_set(entry)?;
        if self.curve.is_none() {
            let p = self.params;
            self.curve = Some(TippingCurve::new(p.s, p.u, p.v, p.t)?);
        }
        self.fresh_table()?;
        let table = &self.table.as_ref().unwrap().1;
        let item = self.item_sets[entry].as_ref().unwrap();
        let tau = self.curve.as_ref().unwrap().tau(table.ones())?;
        let count = table.count_ones_in(item);
        if !test_count(table, item, tau) {
            return Ok(AuditCheck::BelowThreshold { count, tau });
        }
        let e = &self.inbox[entry];
        let verdict = self.conn.audit(&e.tag.to_bytes(), &e.x)?;
        Ok(AuditCheck::Audited { verdict, count, tau })
    }
}
