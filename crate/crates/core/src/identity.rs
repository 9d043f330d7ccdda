use alloc::string::String;
use core::fmt;

use crate::error::ParamError;

/// Longest identity accepted, in bytes; matches the fixed hello block.
pub const MAX_ID_LEN: usize = 32;

/// A user identity: 1 to 32 bytes of UTF-8.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Result<Self, ParamError> {
        let id = id.into();
        if id.is_empty() || id.len() > MAX_ID_LEN {
            return Err(ParamError::IdentityLength(id.len()));
        }
        Ok(UserId(id))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ParamError> {
        let s = core::str::from_utf8(bytes).map_err(|_| ParamError::IdentityLength(bytes.len()))?;
        Self::new(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::str::FromStr for UserId {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UserId::new(s)
    }
}
