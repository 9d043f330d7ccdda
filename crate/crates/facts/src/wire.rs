//! FACTS wire protocol.
//!
//! Every frame is `[length: u32 BE][type: u8][payload]`, where `length`
//! counts the type byte plus the payload. A connection opens with a fixed
//! 65-byte hello (not framed): a 33-byte identity block (`id_len: u8` then
//! the identity zero-padded to 32 bytes) followed by `SHA3-256(token)`.
//! The server answers a good hello with an `EPOCH_INFO` frame and closes the
//! connection on a bad one.

use std::io::{self, Read, Write};

use ed25519_dalek::VerifyingKey;
use facts_core::identity::MAX_ID_LEN;
use facts_core::tag::{DIGEST_LEN, SIGNATURE_LEN};
use facts_core::{CcbfParams, UserId};
use sha3::{Digest, Sha3_256};
use thiserror::Error;

/// Largest frame accepted: enough for the table of a 20M-complaint epoch.
pub const MAX_FRAME_LEN: u32 = 256 << 20;
pub const HELLO_LEN: usize = 1 + MAX_ID_LEN + DIGEST_LEN;
/// `COMPLAIN_INDEX` payload announcing an abort.
pub const ABORT_INDEX: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("frame length {0} out of range")]
    FrameLength(u32),
    #[error("malformed {0} payload")]
    Payload(&'static str),
    #[error("expected {expected:?}, got {got:?}")]
    Unexpected { expected: MsgType, got: MsgType },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgType {
    OriginateReq = 0x01,
    OriginateResp = 0x02,
    ComplainBegin = 0x03,
    ComplainSnapshot = 0x04,
    ComplainIndex = 0x05,
    ComplainResult = 0x06,
    AuditReq = 0x07,
    AuditResp = 0x08,
    TableSyncReq = 0x09,
    TableSyncResp = 0x0A,
    EpochInfo = 0x0B,
}

impl TryFrom<u8> for MsgType {
    type Error = WireError;

    fn try_from(b: u8) -> Result<Self, WireError> {
        use MsgType::*;
        Ok(match b {
            0x01 => OriginateReq,
            0x02 => OriginateResp,
            0x03 => ComplainBegin,
            0x04 => ComplainSnapshot,
            0x05 => ComplainIndex,
            0x06 => ComplainResult,
            0x07 => AuditReq,
            0x08 => AuditResp,
            0x09 => TableSyncReq,
            0x0A => TableSyncResp,
            0x0B => EpochInfo,
            other => return Err(WireError::UnknownType(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: MsgType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: MsgType, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    pub fn empty(kind: MsgType) -> Self {
        Frame {
            kind,
            payload: Vec::new(),
        }
    }

    /// Bytes on the wire, header included.
    pub fn wire_len(&self) -> usize {
        5 + self.payload.len()
    }

    pub fn expect(self, kind: MsgType) -> Result<Self, WireError> {
        if self.kind == kind {
            Ok(self)
        } else {
            Err(WireError::Unexpected {
                expected: kind,
                got: self.kind,
            })
        }
    }
}

pub fn write_frame<W: Write + ?Sized>(w: &mut W, frame: &Frame) -> io::Result<()> {
    let len = u32::try_from(frame.payload.len() + 1)
        .ok()
        .filter(|&l| l <= MAX_FRAME_LEN)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    let mut buf = Vec::with_capacity(frame.wire_len());
    buf.extend_from_slice(&len.to_be_bytes());
    buf.push(frame.kind as u8);
    buf.extend_from_slice(&frame.payload);
    w.write_all(&buf)?;
    w.flush()
}

pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Frame, WireError> {
    let mut header = [0u8; 5];
    r.read_exact(&mut header)?;
    let len = u32::from_be_bytes(header[..4].try_into().unwrap());
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(WireError::FrameLength(len));
    }
    let kind = MsgType::try_from(header[4])?;
    let mut payload = vec![0u8; len as usize - 1];
    r.read_exact(&mut payload)?;
    Ok(Frame { kind, payload })
}

/// Connection opener.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub user: UserId,
    pub token_digest: [u8; DIGEST_LEN],
}

pub fn token_digest(token: &[u8; 32]) -> [u8; DIGEST_LEN] {
    Sha3_256::digest(token).into()
}

impl Hello {
    pub fn new(user: UserId, token: &[u8; 32]) -> Self {
        Hello {
            user,
            token_digest: token_digest(token),
        }
    }

    pub fn encode(&self) -> [u8; HELLO_LEN] {
        let mut out = [0u8; HELLO_LEN];
        let id = self.user.as_bytes();
        out[0] = id.len() as u8;
        out[1..1 + id.len()].copy_from_slice(id);
        out[1 + MAX_ID_LEN..].copy_from_slice(&self.token_digest);
        out
    }

    pub fn decode(bytes: &[u8; HELLO_LEN]) -> Result<Self, WireError> {
        let len = bytes[0] as usize;
        if len == 0 || len > MAX_ID_LEN {
            return Err(WireError::Payload("hello"));
        }
        if bytes[1 + len..1 + MAX_ID_LEN].iter().any(|&b| b != 0) {
            return Err(WireError::Payload("hello"));
        }
        let user = UserId::from_bytes(&bytes[1..1 + len]).map_err(|_| WireError::Payload("hello"))?;
        Ok(Hello {
            user,
            token_digest: bytes[1 + MAX_ID_LEN..].try_into().unwrap(),
        })
    }

    pub fn read_from<R: Read + ?Sized>(r: &mut R) -> Result<Self, WireError> {
        let mut buf = [0u8; HELLO_LEN];
        r.read_exact(&mut buf)?;
        Self::decode(&buf)
    }
}

/// Verdict codes carried by `COMPLAIN_RESULT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ComplainCode {
    Accepted = 0,
    Aborted = 1,
    Rejected = 2,
    Quota = 3,
    EpochFull = 4,
    Timeout = 5,
    Unauthenticated = 6,
}

impl ComplainCode {
    pub fn from_byte(b: u8) -> Result<Self, WireError> {
        use ComplainCode::*;
        Ok(match b {
            0 => Accepted,
            1 => Aborted,
            2 => Rejected,
            3 => Quota,
            4 => EpochFull,
            5 => Timeout,
            6 => Unauthenticated,
            _ => return Err(WireError::Payload("complain result")),
        })
    }

    pub fn frame(self) -> Frame {
        Frame::new(MsgType::ComplainResult, vec![self as u8])
    }
}

/// `COMPLAIN_INDEX` payload: the index as u64 BE, or [`ABORT_INDEX`].
pub fn encode_index(choice: Option<u64>) -> Vec<u8> {
    choice.unwrap_or(ABORT_INDEX).to_be_bytes().to_vec()
}

pub fn decode_index(payload: &[u8]) -> Result<Option<u64>, WireError> {
    let bytes: [u8; 8] = payload
        .try_into()
        .map_err(|_| WireError::Payload("complain index"))?;
    let i = u64::from_be_bytes(bytes);
    Ok((i != ABORT_INDEX).then_some(i))
}

/// `ORIGINATE_RESP` payload: `len(e): u16 BE ‖ e ‖ sigma`.
pub fn encode_originate_resp(e: &[u8], sigma: &[u8; SIGNATURE_LEN]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 + e.len() + SIGNATURE_LEN);
    out.extend_from_slice(&(e.len() as u16).to_be_bytes());
    out.extend_from_slice(e);
    out.extend_from_slice(sigma);
    out
}

pub fn decode_originate_resp(p: &[u8]) -> Result<(Vec<u8>, [u8; SIGNATURE_LEN]), WireError> {
    let err = WireError::Payload("originate response");
    if p.len() < 2 {
        return Err(err);
    }
    let e_len = u16::from_be_bytes([p[0], p[1]]) as usize;
    if p.len() != 2 + e_len + SIGNATURE_LEN {
        return Err(err);
    }
    Ok((
        p[2..2 + e_len].to_vec(),
        p[2 + e_len..].try_into().unwrap(),
    ))
}

/// `AUDIT_REQ` payload: `len(tag): u16 BE ‖ tag ‖ x`.
pub fn encode_audit_req(tag: &[u8], x: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 + tag.len() + x.len());
    out.extend_from_slice(&(tag.len() as u16).to_be_bytes());
    out.extend_from_slice(tag);
    out.extend_from_slice(x);
    out
}

pub fn decode_audit_req(p: &[u8]) -> Result<(&[u8], &[u8]), WireError> {
    if p.len() < 2 {
        return Err(WireError::Payload("audit request"));
    }
    let len = u16::from_be_bytes([p[0], p[1]]) as usize;
    if p.len() < 2 + len {
        return Err(WireError::Payload("audit request"));
    }
    Ok((&p[2..2 + len], &p[2 + len..]))
}

/// `AUDIT_RESP` codes; `Opened` is followed by the originator identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum AuditCode {
    Opened = 0,
    InvalidTag = 1,
    BelowThreshold = 2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditVerdict {
    Originator(UserId),
    InvalidTag,
    BelowThreshold,
}

impl AuditVerdict {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            AuditVerdict::Originator(id) => {
                let mut out = vec![AuditCode::Opened as u8];
                out.extend_from_slice(id.as_bytes());
                out
            }
            AuditVerdict::InvalidTag => vec![AuditCode::InvalidTag as u8],
            AuditVerdict::BelowThreshold => vec![AuditCode::BelowThreshold as u8],
        }
    }

    pub fn decode(p: &[u8]) -> Result<Self, WireError> {
        let err = || WireError::Payload("audit response");
        let (&code, rest) = p.split_first().ok_or_else(err)?;
        match code {
            0 => Ok(AuditVerdict::Originator(
                UserId::from_bytes(rest).map_err(|_| err())?,
            )),
            1 if rest.is_empty() => Ok(AuditVerdict::InvalidTag),
            2 if rest.is_empty() => Ok(AuditVerdict::BelowThreshold),
            _ => Err(err()),
        }
    }
}

/// Epoch configuration pushed to a client: table parameters, its quota,
/// the session deadline, its user-set key for this epoch and the server's
/// signature key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochInfo {
    pub epoch_id: u64,
    pub params: CcbfParams,
    pub quota: u32,
    pub deadline_ms: u64,
    pub user_key: [u8; 32],
    pub server_key: [u8; 32],
}

pub const EPOCH_INFO_LEN: usize = 8 * 7 + 4 + 4 + 32 + 32;

impl EpochInfo {
    pub fn encode(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::with_capacity(EPOCH_INFO_LEN);
        for x in [self.epoch_id, p.s, p.u, p.v, p.n, p.t, self.deadline_ms] {
            out.extend_from_slice(&x.to_be_bytes());
        }
        out.extend_from_slice(&self.quota.to_be_bytes());
        out.extend_from_slice(&p.lambda_stat.to_be_bytes());
        out.extend_from_slice(&self.user_key);
        out.extend_from_slice(&self.server_key);
        out
    }

    pub fn decode(b: &[u8]) -> Result<Self, WireError> {
        let err = || WireError::Payload("epoch info");
        if b.len() != EPOCH_INFO_LEN {
            return Err(err());
        }
        let u64_at = |i: usize| u64::from_be_bytes(b[i * 8..i * 8 + 8].try_into().unwrap());
        let u32_at = |o: usize| u32::from_be_bytes(b[o..o + 4].try_into().unwrap());
        let params = CcbfParams::new(u64_at(1), u64_at(2), u64_at(3), u64_at(4), u64_at(5), u32_at(60))
            .map_err(|_| err())?;
        Ok(EpochInfo {
            epoch_id: u64_at(0),
            params,
            quota: u32_at(56),
            deadline_ms: u64_at(6),
            user_key: b[64..96].try_into().unwrap(),
            server_key: b[96..128].try_into().unwrap(),
        })
    }

    pub fn verifying_key(&self) -> Result<VerifyingKey, WireError> {
        VerifyingKey::from_bytes(&self.server_key).map_err(|_| WireError::Payload("server key"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let mut buf = Vec::new();
        write_frame(&mut buf, &Frame::new(MsgType::ComplainIndex, encode_index(Some(7)))).unwrap();
        assert_eq!(buf[..4], 9u32.to_be_bytes());
        assert_eq!(buf[4], 0x05);
        assert_eq!(buf[5..], 7u64.to_be_bytes());
        let back = read_frame(&mut &buf[..]).unwrap();
        assert_eq!(decode_index(&back.payload).unwrap(), Some(7));
        assert_eq!(decode_index(&encode_index(None)).unwrap(), None);
        assert_eq!(encode_index(None), vec![0xFF; 8]);
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(matches!(
            read_frame(&mut &[0, 0, 0, 1, 0x0C][..]),
            Err(WireError::UnknownType(0x0C))
        ));
        assert!(matches!(
            read_frame(&mut &[0, 0, 0, 0, 0x01][..]),
            Err(WireError::FrameLength(0))
        ));
        assert!(matches!(
            read_frame(&mut &[0x7f, 0, 0, 0, 0x01][..]),
            Err(WireError::FrameLength(_))
        ));
        assert!(matches!(
            read_frame(&mut &[0, 0, 0, 3, 0x01, 9][..]),
            Err(WireError::Io(_))
        ));
    }

    #[test]
    fn hello_block() {
        let hello = Hello::new(UserId::new("alice").unwrap(), &[5; 32]);
        let bytes = hello.encode();
        assert_eq!(bytes.len(), 65);
        assert_eq!(bytes[0], 5);
        assert_eq!(&bytes[1..6], b"alice");
        assert!(bytes[6..33].iter().all(|&b| b == 0));
        assert_eq!(Hello::decode(&bytes).unwrap(), hello);
        let mut bad = bytes;
        bad[0] = 33;
        assert!(Hello::decode(&bad).is_err());
        let mut bad = bytes;
        bad[20] = 1;
        assert!(Hello::decode(&bad).is_err());
    }

    #[test]
    fn payload_codecs() {
        let (e, s) = decode_originate_resp(&encode_originate_resp(&[1, 2, 3], &[9; 64])).unwrap();
        assert_eq!((e, s), (vec![1, 2, 3], [9; 64]));
        assert!(decode_originate_resp(&[0, 5, 1]).is_err());

        let req = encode_audit_req(b"tag", b"message");
        assert_eq!(decode_audit_req(&req).unwrap(), (&b"tag"[..], &b"message"[..]));

        for v in [
            AuditVerdict::Originator(UserId::new("bob").unwrap()),
            AuditVerdict::InvalidTag,
            AuditVerdict::BelowThreshold,
        ] {
            assert_eq!(AuditVerdict::decode(&v.encode()).unwrap(), v);
        }

        let info = EpochInfo {
            epoch_id: 3,
            params: facts_core::choose_params(100_000, 100).unwrap(),
            quota: 10,
            deadline_ms: 5000,
            user_key: [1; 32],
            server_key: [2; 32],
        };
        let bytes = info.encode();
        assert_eq!(bytes.len(), EPOCH_INFO_LEN);
        assert_eq!(EpochInfo::decode(&bytes).unwrap(), info);
    }
}
