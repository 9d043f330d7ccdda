//! Increment and TestCount.
//!
//! An increment is split the way the protocol splits it: the client picks an
//! index from its user-set snapshot ([`select_index`]) and the server checks
//! and applies it ([`validate_index`]). [`increment`] runs both halves against
//! one table. Writers need `&mut BitTable`, which is the exclusive-writer
//! contract; [`test_count`] only reads.

use rand::Rng;

use crate::error::CcbfError;
use crate::index_set::{IndexSet, SetKind};
use crate::table::{BitTable, UserSnapshot};

/// What the client decided to send.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexChoice {
    /// Flip `index`; `hit_item` is true iff it lies in the item set.
    Write { index: u64, hit_item: bool },
    /// Every position of the user set is already 1.
    Abort,
}

/// Result of a full increment against a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncrementOutcome {
    /// The index flipped from 0 to 1, or `None` on abort.
    pub written_index: Option<u64>,
    pub hit_item: bool,
}

impl IncrementOutcome {
    pub fn is_abort(&self) -> bool {
        self.written_index.is_none()
    }
}

/// Why the server refused an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRejection {
    NotInUserSet,
    AlreadySet,
}

fn expect_kind(set: &IndexSet, kind: SetKind) -> Result<(), CcbfError> {
    if set.kind() == kind {
        Ok(())
    } else {
        Err(CcbfError::WrongSetKind {
            expected: match kind {
                SetKind::User => "user",
                SetKind::Item => "item",
            },
        })
    }
}

/// Client half of an increment.
///
/// With `S` the zero positions of the user set: abort if `S` is empty, else
/// pick uniformly from `S ∩ item_set` when that is nonempty, else uniformly
/// from `S`.
pub fn select_index<R: Rng + ?Sized>(
    user_set: &IndexSet,
    snapshot: &UserSnapshot,
    item_set: &IndexSet,
    rng: &mut R,
) -> Result<IndexChoice, CcbfError> {
    expect_kind(user_set, SetKind::User)?;
    expect_kind(item_set, SetKind::Item)?;
    if snapshot.len() != user_set.len() {
        return Err(CcbfError::SnapshotLength {
            expected: user_set.len(),
            got: snapshot.len(),
        });
    }
    if user_set.table_len() != item_set.table_len() {
        return Err(CcbfError::TableMismatch);
    }

    let users = user_set.indices();
    let items = item_set.indices();

    // Both lists are sorted: one merge pass finds S ∩ V and counts |S|.
    let mut hits = alloc::vec::Vec::new();
    let mut zeros = 0usize;
    let mut k = 0usize;
    for (j, &i) in users.iter().enumerate() {
        if snapshot.get(j) {
            continue;
        }
        zeros += 1;
        while k < items.len() && items[k] < i {
            k += 1;
        }
        if k < items.len() && items[k] == i {
            hits.push(i);
        }
    }

    if !hits.is_empty() {
        let index = hits[rng.gen_range(0..hits.len())];
        return Ok(IndexChoice::Write {
            index,
            hit_item: true,
        });
    }
    if zeros == 0 {
        return Ok(IndexChoice::Abort);
    }
    let target = rng.gen_range(0..zeros);
    let index = users
        .iter()
        .enumerate()
        .filter(|&(j, _)| !snapshot.get(j))
        .nth(target)
        .map(|(_, &i)| i)
        .expect("target < number of zero positions");
    Ok(IndexChoice::Write {
        index,
        hit_item: false,
    })
}

/// Server half: accept `i` iff it is in the user set and `T[i] = 0`, and on
/// acceptance set it. The table is untouched on rejection.
pub fn validate_index(
    table: &mut BitTable,
    user_set: &IndexSet,
    i: u64,
) -> Result<(), IndexRejection> {
    if user_set.kind() != SetKind::User || !user_set.contains(i) || i >= table.len() {
        return Err(IndexRejection::NotInUserSet);
    }
    if table.set(i) {
        Ok(())
    } else {
        Err(IndexRejection::AlreadySet)
    }
}

/// Runs both halves of an increment on `table`.
pub fn increment<R: Rng + ?Sized>(
    table: &mut BitTable,
    user_set: &IndexSet,
    item_set: &IndexSet,
    rng: &mut R,
) -> Result<IncrementOutcome, CcbfError> {
    if user_set.table_len() != table.len() {
        return Err(CcbfError::TableMismatch);
    }
    let snapshot = UserSnapshot::capture(table, user_set);
    match select_index(user_set, &snapshot, item_set, rng)? {
        IndexChoice::Abort => Ok(IncrementOutcome {
            written_index: None,
            hit_item: false,
        }),
        IndexChoice::Write { index, hit_item } => {
            validate_index(table, user_set, index)
                .expect("an index chosen from a fresh snapshot is always writable");
            Ok(IncrementOutcome {
                written_index: Some(index),
                hit_item,
            })
        }
    }
}

/// True iff at least `tau` positions of the item set are 1.
pub fn test_count(table: &BitTable, item_set: &IndexSet, tau: u64) -> bool {
    tau == 0 || table.count_ones_in(item_set) >= tau
}
