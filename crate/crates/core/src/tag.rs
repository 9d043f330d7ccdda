//! Origination tags.
//!
//! A tag is `(r, e, sigma)`: a random 32-byte salt, the originator identity
//! encrypted under the server's ChaCha20-Poly1305 key, and the server's
//! Ed25519 signature over `h ‖ e` where `h = SHA3-256(r ‖ x)`. The server
//! signs without seeing `x`; receivers verify without learning the identity.
//!
//! Canonical encoding (also the CCBF item key):
//!
//! ```text
//! version (1) ‖ r (32) ‖ len(e) (2, big-endian) ‖ e ‖ sigma (64)
//! e = nonce (12) ‖ ciphertext ‖ poly1305 tag (16)
//! ```

use alloc::vec::Vec;
use core::fmt;

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use rand::{CryptoRng, RngCore};
use sha3::{Digest, Sha3_256};

use crate::error::TagError;
use crate::identity::{UserId, MAX_ID_LEN};

pub const TAG_VERSION: u8 = 0x01;
pub const SALT_LEN: usize = 32;
pub const DIGEST_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;
const NONCE_LEN: usize = 12;
const AEAD_TAG_LEN: usize = 16;
/// Shortest and longest identity ciphertexts (1..=32 identity bytes).
pub const MIN_E_LEN: usize = NONCE_LEN + 1 + AEAD_TAG_LEN;
pub const MAX_E_LEN: usize = NONCE_LEN + MAX_ID_LEN + AEAD_TAG_LEN;

/// `SHA3-256(r ‖ x)`.
pub fn hash_message(r: &[u8; SALT_LEN], x: &[u8]) -> [u8; DIGEST_LEN] {
    let mut h = Sha3_256::new();
    h.update(r);
    h.update(x);
    h.finalize().into()
}

/// Fresh random salt for an origination.
pub fn fresh_salt<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> [u8; SALT_LEN] {
    let mut r = [0u8; SALT_LEN];
    rng.fill_bytes(&mut r);
    r
}

/// The server's secrets: signing key, identity-encryption key and the
/// user-set derivation key of the current epoch.
pub struct ServerKeys {
    signing: SigningKey,
    id_key: [u8; 32],
    derive_key: [u8; 32],
}

impl fmt::Debug for ServerKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ServerKeys")
            .field("verifying_key", &self.verifying_key())
            .finish_non_exhaustive()
    }
}

impl ServerKeys {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let signing = SigningKey::from_bytes(&seed);
        let mut id_key = [0u8; 32];
        rng.fill_bytes(&mut id_key);
        let mut derive_key = [0u8; 32];
        rng.fill_bytes(&mut derive_key);
        ServerKeys {
            signing,
            id_key,
            derive_key,
        }
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn derive_key(&self) -> &[u8; 32] {
        &self.derive_key
    }

    /// New derivation key for a new epoch; all user sets change with it.
    pub fn rotate_derive_key<R: RngCore + CryptoRng + ?Sized>(&mut self, rng: &mut R) {
        rng.fill_bytes(&mut self.derive_key);
    }

    fn cipher(&self) -> ChaCha20Poly1305 {
        ChaCha20Poly1305::new(Key::from_slice(&self.id_key))
    }
}

/// `(r, e, sigma)` bound to one message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tag {
    pub r: [u8; SALT_LEN],
    pub e: Vec<u8>,
    pub sigma: [u8; SIGNATURE_LEN],
}

impl Tag {
    pub fn encoded_len(&self) -> usize {
        1 + SALT_LEN + 2 + self.e.len() + SIGNATURE_LEN
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.push(TAG_VERSION);
        out.extend_from_slice(&self.r);
        out.extend_from_slice(&(self.e.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.e);
        out.extend_from_slice(&self.sigma);
        out
    }

    /// Strict parse of the canonical encoding; trailing bytes are an error.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TagError> {
        let (&version, rest) = bytes.split_first().ok_or(TagError::Length)?;
        if version != TAG_VERSION {
            return Err(TagError::Version(version));
        }
        if rest.len() < SALT_LEN + 2 {
            return Err(TagError::Length);
        }
        let (r, rest) = rest.split_at(SALT_LEN);
        let (len, rest) = rest.split_at(2);
        let e_len = u16::from_be_bytes([len[0], len[1]]) as usize;
        if !(MIN_E_LEN..=MAX_E_LEN).contains(&e_len) {
            return Err(TagError::Ciphertext);
        }
        if rest.len() != e_len + SIGNATURE_LEN {
            return Err(TagError::Length);
        }
        let (e, sigma) = rest.split_at(e_len);
        Ok(Tag {
            r: r.try_into().unwrap(),
            e: e.to_vec(),
            sigma: sigma.try_into().unwrap(),
        })
    }
}

fn signed_message(h: &[u8; DIGEST_LEN], e: &[u8]) -> Vec<u8> {
    let mut msg = Vec::with_capacity(DIGEST_LEN + e.len());
    msg.extend_from_slice(h);
    msg.extend_from_slice(e);
    msg
}

/// Server side of origination: encrypt the originator under a fresh nonce
/// (associated data: the tag version byte) and sign `h ‖ e`.
pub fn server_issue_tag<R: RngCore + CryptoRng + ?Sized>(
    keys: &ServerKeys,
    originator: &UserId,
    h: &[u8; DIGEST_LEN],
    rng: &mut R,
) -> (Vec<u8>, [u8; SIGNATURE_LEN]) {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let ciphertext = keys
        .cipher()
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: originator.as_bytes(),
                aad: &[TAG_VERSION],
            },
        )
        .expect("ChaCha20-Poly1305 encryption of a short identity cannot fail");
    let mut e = Vec::with_capacity(NONCE_LEN + ciphertext.len());
    e.extend_from_slice(&nonce);
    e.extend_from_slice(&ciphertext);
    let sigma = keys.signing.sign(&signed_message(h, &e)).to_bytes();
    (e, sigma)
}

/// Receiver check: recompute `h` from the tag's salt and `x`, then verify
/// the server signature over `h ‖ e`.
pub fn verify_tag(server_key: &VerifyingKey, tag: &Tag, x: &[u8]) -> Result<(), TagError> {
    if !(MIN_E_LEN..=MAX_E_LEN).contains(&tag.e.len()) {
        return Err(TagError::Ciphertext);
    }
    let h = hash_message(&tag.r, x);
    let sig = Signature::from_bytes(&tag.sigma);
    server_key
        .verify_strict(&signed_message(&h, &tag.e), &sig)
        .map_err(|_| TagError::Signature)
}

/// [`verify_tag`] on canonical tag bytes.
pub fn verify_tag_bytes(server_key: &VerifyingKey, tag: &[u8], x: &[u8]) -> Result<Tag, TagError> {
    let tag = Tag::from_bytes(tag)?;
    verify_tag(server_key, &tag, x)?;
    Ok(tag)
}

/// Audit: verify the tag exactly like a receiver would, and only then
/// decrypt the originator identity.
pub fn audit_open(keys: &ServerKeys, tag: &Tag, x: &[u8]) -> Result<UserId, TagError> {
    verify_tag(&keys.verifying_key(), tag, x)?;
    let (nonce, ciphertext) = tag.e.split_at(NONCE_LEN);
    let plain = keys
        .cipher()
        .decrypt(
            Nonce::from_slice(nonce),
            Payload {
                msg: ciphertext,
                aad: &[TAG_VERSION],
            },
        )
        .map_err(|_| TagError::Decrypt)?;
    UserId::from_bytes(&plain).map_err(|_| TagError::Identity)
}
