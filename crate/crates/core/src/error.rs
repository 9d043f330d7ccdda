use thiserror::Error;

/// Invalid or inconsistent CCBF / math parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("user-set size u={u} must be in 1..={s}")]
    UserSetSize { u: u64, s: u64 },
    #[error("item-set size v={v} must be in 1..={s}")]
    ItemSetSize { v: u64, s: u64 },
    #[error("threshold t={t} must be at least 1 and at most n={n}")]
    Threshold { t: u64, n: u64 },
    #[error("threshold t={t} is below the recipe minimum {min}")]
    ThresholdTooSmall { t: u64, min: u64 },
    #[error("threshold t={t} exceeds n/20 = {max}")]
    ThresholdTooLarge { t: u64, max: u64 },
    #[error("precondition `{name}` violated: {lhs} vs {rhs}")]
    Precondition {
        name: &'static str,
        lhs: f64,
        rhs: f64,
    },
    #[error("argument order violated: need {0}")]
    ArgumentOrder(&'static str),
    #[error("table load m={m} exceeds table size s={s}")]
    TableLoad { m: u64, s: u64 },
    #[error("statistical parameter lambda must be at least 1")]
    Lambda,
    #[error("item key must be nonempty")]
    EmptyItemKey,
    #[error("identity must be 1..=32 bytes, got {0}")]
    IdentityLength(usize),
}

/// CCBF contract violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CcbfError {
    #[error("expected a {expected} set")]
    WrongSetKind { expected: &'static str },
    #[error("snapshot covers {got} positions but the user set has {expected}")]
    SnapshotLength { expected: usize, got: usize },
    #[error("index set was derived for a table of a different size")]
    TableMismatch,
}

/// Malformed table snapshot bytes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("snapshot truncated: need {need} bytes, got {got}")]
    Length { need: usize, got: usize },
    #[error("header count m={m} disagrees with popcount {popcount}")]
    Count { m: u64, popcount: u64 },
    #[error("padding bits beyond s are set")]
    Padding,
    #[error("table size {0} does not fit this platform")]
    TooLarge(u64),
}

/// Tag parsing, verification or opening failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("tag truncated or has trailing bytes")]
    Length,
    #[error("unsupported tag version {0:#04x}")]
    Version(u8),
    #[error("identity ciphertext malformed")]
    Ciphertext,
    #[error("signature does not verify")]
    Signature,
    #[error("identity ciphertext failed authentication")]
    Decrypt,
    #[error("decrypted identity is malformed")]
    Identity,
}
