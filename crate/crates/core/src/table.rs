//! The public bit table `T` and its byte encodings.
//!
//! Bits are packed into 64-bit words, bit `i` living in word `i / 64` at bit
//! position `i % 64`. Serialized, the words are written little-endian and
//! truncated to `ceil(s / 8)` bytes, so bit `i` is bit `i % 8` of byte `i / 8`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SnapshotError;
use crate::index_set::IndexSet;

/// Length of the snapshot header: `s` and `m` as 8-byte little-endian.
pub const SNAPSHOT_HEADER: usize = 16;

#[derive(Clone, PartialEq, Eq)]
pub struct BitTable {
    s: u64,
    words: Vec<u64>,
    m: u64,
}

impl core::fmt::Debug for BitTable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BitTable")
            .field("s", &self.s)
            .field("m", &self.m)
            .finish()
    }
}

impl BitTable {
    pub fn new(s: u64) -> Self {
        BitTable {
            s,
            words: vec![0; s.div_ceil(64) as usize],
            m: 0,
        }
    }

    /// Table size `s` in bits.
    pub fn len(&self) -> u64 {
        self.s
    }

    pub fn is_empty(&self) -> bool {
        self.s == 0
    }

    /// Number of set bits `m`.
    pub fn ones(&self) -> u64 {
        self.m
    }

    pub fn zeros(&self) -> u64 {
        self.s - self.m
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.s);
        self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    /// Sets bit `i`; returns `false` (and changes nothing) if it was already 1.
    #[inline]
    pub fn set(&mut self, i: u64) -> bool {
        assert!(i < self.s, "index {i} outside table of {} bits", self.s);
        let word = &mut self.words[(i >> 6) as usize];
        let mask = 1u64 << (i & 63);
        if *word & mask != 0 {
            return false;
        }
        *word |= mask;
        self.m += 1;
        true
    }

    /// Zeroes every bit (epoch reset).
    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
        self.m = 0;
    }

    /// Recounts the set bits from scratch.
    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// How many positions of `set` are 1.
    pub fn count_ones_in(&self, set: &IndexSet) -> u64 {
        set.indices().iter().filter(|&&i| self.get(i)).count() as u64
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Canonical snapshot: `s` (u64 LE) ‖ `m` (u64 LE) ‖ `ceil(s/8)` packed bytes.
    pub fn to_snapshot_bytes(&self) -> Vec<u8> {
        let body = self.s.div_ceil(8) as usize;
        let mut out = Vec::with_capacity(SNAPSHOT_HEADER + body);
        out.extend_from_slice(&self.s.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(SNAPSHOT_HEADER + body);
        out
    }

    /// Parses a canonical snapshot, rejecting a wrong length, set padding
    /// bits or an `m` that disagrees with the popcount.
    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        if bytes.len() < SNAPSHOT_HEADER {
            return Err(SnapshotError::Length {
                need: SNAPSHOT_HEADER,
                got: bytes.len(),
            });
        }
        let s = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let m = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let body = usize::try_from(s.div_ceil(8)).map_err(|_| SnapshotError::TooLarge(s))?;
        let need = SNAPSHOT_HEADER
            .checked_add(body)
            .ok_or(SnapshotError::TooLarge(s))?;
        if bytes.len() != need {
            return Err(SnapshotError::Length {
                need,
                got: bytes.len(),
            });
        }
        let mut table = BitTable::new(s);
        for (word, chunk) in table.words.iter_mut().zip(bytes[SNAPSHOT_HEADER..].chunks(8)) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *word = u64::from_le_bytes(buf);
        }
        if s % 64 != 0 {
            let last = *table.words.last().unwrap();
            if last >> (s % 64) != 0 {
                return Err(SnapshotError::Padding);
            }
        }
        let popcount = table.popcount();
        if popcount != m {
            return Err(SnapshotError::Count { m, popcount });
        }
        table.m = m;
        Ok(table)
    }
}

/// The bit values of `T` at a user's positions, in user-set order, packed
/// LSB-first into `ceil(u/8)` bytes. This is what the server hands out when a
/// complaint session opens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSnapshot {
    bytes: Vec<u8>,
    len: usize,
}

impl UserSnapshot {
    pub fn capture(table: &BitTable, user_set: &IndexSet) -> Self {
        let len = user_set.len();
        let mut bytes = vec![0u8; len.div_ceil(8)];
        for (j, &i) in user_set.indices().iter().enumerate() {
            if table.get(i) {
                bytes[j / 8] |= 1 << (j % 8);
            }
        }
        UserSnapshot { bytes, len }
    }

    /// Rebuilds a snapshot of `len` positions from its packed bytes.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, SnapshotError> {
        let need = len.div_ceil(8);
        if bytes.len() != need {
            return Err(SnapshotError::Length {
                need,
                got: bytes.len(),
            });
        }
        if !len.is_multiple_of(8) && bytes[need - 1] >> (len % 8) != 0 {
            return Err(SnapshotError::Padding);
        }
        Ok(UserSnapshot {
            bytes: bytes.to_vec(),
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Value of `T` at the `j`-th user position.
    #[inline]
    pub fn get(&self, j: usize) -> bool {
        self.bytes[j / 8] >> (j % 8) & 1 == 1
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.bytes.iter().map(|b| b.count_ones() as usize).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_is_one_shot() {
        let mut t = BitTable::new(70);
        assert!(t.set(69));
        assert!(!t.set(69));
        assert!(t.set(0));
        assert_eq!(t.ones(), 2);
        assert_eq!(t.popcount(), 2);
        assert!(t.get(69) && t.get(0) && !t.get(1));
        t.clear();
        assert_eq!((t.ones(), t.popcount()), (0, 0));
    }

    #[test]
    fn snapshot_layout_is_lsb_first() {
        let mut t = BitTable::new(12);
        t.set(0);
        t.set(9);
        t.set(11);
        let bytes = t.to_snapshot_bytes();
        assert_eq!(bytes.len(), 16 + 2);
        assert_eq!(&bytes[0..8], &12u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &3u64.to_le_bytes());
        assert_eq!(&bytes[16..], &[0b0000_0001, 0b0000_1010]);
    }

    #[test]
    fn snapshot_rejects_bad_input() {
        let mut t = BitTable::new(12);
        t.set(3);
        let good = t.to_snapshot_bytes();

        let mut lying = good.clone();
        lying[8] = 2;
        assert!(matches!(
            BitTable::from_snapshot_bytes(&lying),
            Err(SnapshotError::Count { .. })
        ));

        let mut padded = good.clone();
        padded[17] |= 0x80;
        assert_eq!(
            BitTable::from_snapshot_bytes(&padded),
            Err(SnapshotError::Padding)
        );

        assert!(matches!(
            BitTable::from_snapshot_bytes(&good[..17]),
            Err(SnapshotError::Length { .. })
        ));
    }

    #[test]
    fn fresh_table_snapshot_is_all_zero() {
        let t = BitTable::new(1001);
        let bytes = t.to_snapshot_bytes();
        assert_eq!(bytes.len(), 16 + 126);
        assert!(bytes[8..].iter().all(|&b| b == 0));
    }

    proptest! {
        #[test]
        fn snapshot_roundtrip(s in 1u64..600, picks in proptest::collection::vec(any::<u64>(), 0..80)) {
            let mut t = BitTable::new(s);
            for p in picks {
                t.set(p % s);
            }
            let back = BitTable::from_snapshot_bytes(&t.to_snapshot_bytes()).unwrap();
            prop_assert_eq!(back.ones(), t.popcount());
            prop_assert_eq!(back, t);
        }
    }
}
