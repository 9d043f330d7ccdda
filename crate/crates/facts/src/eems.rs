//! In-process stand-in for the end-to-end encrypted messenger: an
//! authenticated mailbox per user that carries `(tag, x)` verbatim and keeps
//! a transcript of every delivery.

use std::collections::{HashMap, VecDeque};

use facts_core::UserId;
use parking_lot::Mutex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub from: UserId,
    pub to: UserId,
    pub tag: Vec<u8>,
    pub x: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct Eems {
    mailboxes: Mutex<HashMap<UserId, VecDeque<Envelope>>>,
    transcript: Mutex<Vec<Envelope>>,
}

impl Eems {
    pub fn new() -> Self {
        Self::default()
    }

    /// Delivers `(tag, x)` from `from` (the authenticated sender) to `to`.
    pub fn send(&self, from: &UserId, to: &UserId, tag: &[u8], x: &[u8]) {
        let env = Envelope {
            from: from.clone(),
            to: to.clone(),
            tag: tag.to_vec(),
            x: x.to_vec(),
        };
        self.transcript.lock().push(env.clone());
        self.mailboxes.lock().entry(to.clone()).or_default().push_back(env);
    }

    /// Drains `user`'s mailbox.
    pub fn take(&self, user: &UserId) -> Vec<Envelope> {
        self.mailboxes
            .lock()
            .get_mut(user)
            .map(|q| q.drain(..).collect())
            .unwrap_or_default()
    }

    pub fn transcript(&self) -> Vec<Envelope> {
        self.transcript.lock().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delivers_in_order_and_records() {
        let eems = Eems::new();
        let a = UserId::new("a").unwrap();
        let b = UserId::new("b").unwrap();
        eems.send(&a, &b, b"t1", b"x1");
        eems.send(&a, &b, b"t2", b"x2");
        let got = eems.take(&b);
        assert_eq!(got.iter().map(|e| e.x.as_slice()).collect::<Vec<_>>(), [b"x1", b"x2"]);
        assert!(eems.take(&b).is_empty());
        assert!(eems.take(&a).is_empty());
        assert_eq!(eems.transcript().len(), 2);
    }
}
