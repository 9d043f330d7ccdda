//! Collaborative counting Bloom filter (CCBF) primitives and the origination
//! tags of the FACTS complaint-tally scheme.
//!
//! A CCBF is a single world-readable bit table. Every complaint flips exactly
//! one bit, and each user may only write inside a private, fixed subset of
//! table positions (its *user set*). An item (here, a message tag) owns a
//! public subset of positions (its *item set*), and the number of set bits in
//! that subset is compared against the *tipping point*: the expected number of
//! filled item slots after `t` increments given the current table load.
//!
//! The crate is `no_std` and only needs `alloc`. Networking, files and the
//! experiment harness live in the companion `facts` crate.
//!
//! Module map:
//!
//! * [`params`]: CCBF sizing, including the `s = 96n`, `v ≈ 7.409t`,
//!   `u ≈ 47.31n/t` recipe and its precondition checks.
//! * [`table`]: the packed bit table and its snapshot encoding.
//! * [`index_set`]: deterministic user-set and item-set derivation.
//! * [`increment`]: the client index choice, server validation and count test.
//! * [`tipping`]: exact intersection probabilities, the fill recurrence and
//!   the tipping point.
//! * [`tail`]: false-positive / false-negative safe complaint counts.
//! * [`tag`]: salted hashing, identity encryption, signatures and audits.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod identity;
pub mod increment;
pub mod index_set;
pub mod params;
pub mod table;
pub mod tag;
pub mod tail;
pub mod tipping;

pub use error::{CcbfError, ParamError, SnapshotError, TagError};
pub use identity::UserId;
pub use increment::{
    increment, select_index, test_count, validate_index, IncrementOutcome, IndexChoice,
    IndexRejection,
};
pub use index_set::{derive_item_set, derive_user_set, user_set_key, IndexSet, SetKind};
pub use params::{choose_params, CcbfParams};
pub use table::{BitTable, UserSnapshot};
pub use tag::{audit_open, hash_message, server_issue_tag, verify_tag, ServerKeys, Tag};
pub use tail::{tail_thresholds, TailThresholds};
pub use tipping::{
    fill_probability, intersection_prob, r_table, tipping_point, TippingCurve, TippingTables,
};
