//! Deterministic derivation of user sets and item sets.
//!
//! Both kinds are drawn by Floyd's algorithm from a SHA3-256 counter-mode
//! stream, so either side of the protocol can recompute them from a short
//! seed. User sets are keyed with a per-user secret handed out by the server;
//! item sets hash only the public item key (the serialized tag), so any
//! receiver can compute them.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use sha3::{Digest, Sha3_256};

use crate::error::ParamError;
use crate::params::CcbfParams;

const USER_SET_DOMAIN: &[u8] = b"facts/user-set/v1";
const ITEM_SET_DOMAIN: &[u8] = b"facts/item-set/v1";
const USER_KEY_DOMAIN: &[u8] = b"facts/user-key/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetKind {
    User,
    Item,
}

/// A sorted set of distinct table positions, tagged with its kind and the
/// key it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<u64>,
    kind: SetKind,
    owner: Vec<u8>,
    table_len: u64,
}

impl IndexSet {
    /// Builds a set from explicit positions; they are sorted and must be
    /// distinct and `< s`.
    pub fn from_indices(
        kind: SetKind,
        owner: &[u8],
        s: u64,
        mut indices: Vec<u64>,
    ) -> Result<Self, ParamError> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(ParamError::ArgumentOrder("distinct indices"));
        }
        if indices.last().is_some_and(|&i| i >= s) {
            return Err(ParamError::ArgumentOrder("indices below s"));
        }
        Ok(IndexSet {
            indices,
            kind,
            owner: owner.to_vec(),
            table_len: s,
        })
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn owner(&self) -> &[u8] {
        &self.owner
    }

    /// Size of the table the set was drawn for.
    pub fn table_len(&self) -> u64 {
        self.table_len
    }

    pub fn contains(&self, i: u64) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// SHA3-256 in counter mode over a fixed prefix, read as little-endian u64s.
struct HashStream {
    prefix: Sha3_256,
    counter: u64,
    block: [u8; 32],
    used: usize,
}

impl HashStream {
    fn new(domain: &[u8], key: &[u8], owner: &[u8], s: u64, count: u64) -> Self {
        let mut prefix = Sha3_256::new();
        prefix.update((domain.len() as u64).to_le_bytes());
        prefix.update(domain);
        prefix.update(s.to_le_bytes());
        prefix.update(count.to_le_bytes());
        prefix.update((key.len() as u64).to_le_bytes());
        prefix.update(key);
        prefix.update((owner.len() as u64).to_le_bytes());
        prefix.update(owner);
        HashStream {
            prefix,
            counter: 0,
            block: [0; 32],
            used: 32,
        }
    }

    fn next_u64(&mut self) -> u64 {
        if self.used == 32 {
            let mut h = self.prefix.clone();
            h.update(self.counter.to_le_bytes());
            self.block.copy_from_slice(&h.finalize());
            self.counter += 1;
            self.used = 0;
        }
        let out = u64::from_le_bytes(self.block[self.used..self.used + 8].try_into().unwrap());
        self.used += 8;
        out
    }

    /// Uniform in `0..bound` by rejection.
    fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }
}

/// Floyd's algorithm: `count` distinct values of `0..s`, each size-`count`
/// subset equally likely given a uniform stream.
fn floyd_sample(stream: &mut HashStream, s: u64, count: u64) -> Vec<u64> {
    let mut chosen = BTreeSet::new();
    for j in (s - count)..s {
        let r = stream.below(j + 1);
        if !chosen.insert(r) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

/// The per-user derivation secret for `user_id`, given the epoch's server
/// derivation key. The server hands this to the user so both sides can
/// compute the same user set, while other users cannot.
pub fn user_set_key(derive_key: &[u8; 32], user_id: &[u8]) -> [u8; 32] {
    let mut h = Sha3_256::new();
    h.update((USER_KEY_DOMAIN.len() as u64).to_le_bytes());
    h.update(USER_KEY_DOMAIN);
    h.update(derive_key);
    h.update((user_id.len() as u64).to_le_bytes());
    h.update(user_id);
    h.finalize().into()
}

/// The `u` table positions `user_id` may write.
pub fn derive_user_set(
    user_id: &[u8],
    key: &[u8; 32],
    params: &CcbfParams,
) -> Result<IndexSet, ParamError> {
    if params.u == 0 || params.u > params.s {
        return Err(ParamError::UserSetSize {
            u: params.u,
            s: params.s,
        });
    }
    let mut stream = HashStream::new(USER_SET_DOMAIN, key, user_id, params.s, params.u);
    Ok(IndexSet {
        indices: floyd_sample(&mut stream, params.s, params.u),
        kind: SetKind::User,
        owner: user_id.to_vec(),
        table_len: params.s,
    })
}

/// The `v` public table positions of an item (a serialized tag).
pub fn derive_item_set(item_key: &[u8], params: &CcbfParams) -> Result<IndexSet, ParamError> {
    if item_key.is_empty() {
        return Err(ParamError::EmptyItemKey);
    }
    if params.v == 0 || params.v > params.s {
        return Err(ParamError::ItemSetSize {
            v: params.v,
            s: params.s,
        });
    }
    let mut stream = HashStream::new(ITEM_SET_DOMAIN, &[], item_key, params.s, params.v);
    Ok(IndexSet {
        indices: floyd_sample(&mut stream, params.s, params.v),
        kind: SetKind::Item,
        owner: item_key.to_vec(),
        table_len: params.s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn params(s: u64, u: u64, v: u64) -> CcbfParams {
        CcbfParams::new(s, u, v, 1000, 1, 1).unwrap()
    }

    #[test]
    fn full_sets_when_size_equals_table() {
        let p = params(10, 10, 5);
        let user = derive_user_set(b"A", &[7; 32], &p).unwrap();
        assert_eq!(user.indices(), &(0..10).collect::<Vec<_>>()[..]);
        let p = params(5, 5, 5);
        let item = derive_item_set(b"any key", &p).unwrap();
        assert_eq!(item.indices(), &[0, 1, 2, 3, 4]);
        assert_eq!(item.kind(), SetKind::Item);
    }

    #[test]
    fn derivation_is_deterministic_and_keyed() {
        let p = params(100_000, 500, 300);
        let a1 = derive_user_set(b"A", &[1; 32], &p).unwrap();
        let a2 = derive_user_set(b"A", &[1; 32], &p).unwrap();
        let a3 = derive_user_set(b"A", &[2; 32], &p).unwrap();
        let b = derive_user_set(b"B", &[1; 32], &p).unwrap();
        assert_eq!(a1, a2);
        assert_ne!(a1.indices(), a3.indices());
        assert_ne!(a1.indices(), b.indices());
        assert_eq!(
            derive_item_set(b"tag", &p).unwrap(),
            derive_item_set(b"tag", &p).unwrap()
        );
    }

    #[test]
    fn errors() {
        let mut p = params(10, 10, 5);
        p.u = 11;
        assert!(matches!(
            derive_user_set(b"A", &[0; 32], &p),
            Err(ParamError::UserSetSize { .. })
        ));
        let mut p = params(10, 10, 5);
        p.v = 11;
        assert!(matches!(
            derive_item_set(b"x", &p),
            Err(ParamError::ItemSetSize { .. })
        ));
        assert_eq!(
            derive_item_set(b"", &params(10, 1, 1)),
            Err(ParamError::EmptyItemKey)
        );
    }

    #[test]
    fn user_keys_separate_users_and_epochs() {
        let k = user_set_key(&[3; 32], b"alice");
        assert_eq!(k, user_set_key(&[3; 32], b"alice"));
        assert_ne!(k, user_set_key(&[3; 32], b"bob"));
        assert_ne!(k, user_set_key(&[4; 32], b"alice"));
    }

    #[test]
    fn from_indices_validates() {
        assert!(IndexSet::from_indices(SetKind::User, b"", 10, vec![3, 1, 3]).is_err());
        assert!(IndexSet::from_indices(SetKind::User, b"", 10, vec![10]).is_err());
        let set = IndexSet::from_indices(SetKind::User, b"", 10, vec![9, 2]).unwrap();
        assert_eq!(set.indices(), &[2, 9]);
        assert!(set.contains(9) && !set.contains(3));
    }

    proptest! {
        #[test]
        fn sets_have_exact_size_and_range(s in 1u64..5000, frac in 0.0f64..1.0, key in any::<[u8; 32]>()) {
            let u = ((s as f64 * frac) as u64).max(1);
            let p = params(s, u, u);
            let set = derive_user_set(b"user", &key, &p).unwrap();
            prop_assert_eq!(set.len() as u64, u);
            prop_assert!(set.indices().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(set.indices().iter().all(|&i| i < s));
            let item = derive_item_set(&key, &p).unwrap();
            prop_assert_eq!(item.len() as u64, u);
        }
    }
}
