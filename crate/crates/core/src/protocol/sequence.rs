#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqVerdict {
    Accept,
    Stale,
}

/// Serial-number comparison on 16 bits: accept only the forward half window.
pub fn accept_sequence(last_seen: u16, incoming: u16) -> SeqVerdict {
    let ahead = incoming.wrapping_sub(last_seen);
    if ahead != 0 && ahead < 0x8000 {
        SeqVerdict::Accept
    } else {
        SeqVerdict::Stale
    }
}

/// Sequence state for one (peer, direction). The first frame is always
/// accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SequenceTracker {
    last: Option<u16>,
}

impl SequenceTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last(&self) -> Option<u16> {
        self.last
    }

    /// Judge `incoming` and advance on acceptance.
    pub fn observe(&mut self, incoming: u16) -> SeqVerdict {
        let verdict = self.last.map_or(SeqVerdict::Accept, |l| accept_sequence(l, incoming));
        if verdict == SeqVerdict::Accept {
            self.last = Some(incoming);
        }
        verdict
    }

    pub fn is_duplicate(&self, incoming: u16) -> bool {
        self.last == Some(incoming)
    }
}

/// Outgoing sequence counter, wrapping at 2^16.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SequenceCounter {
    next: u16,
}

impl SequenceCounter {
    pub fn starting_at(next: u16) -> Self {
        Self { next }
    }

    pub fn take(&mut self) -> u16 {
        let s = self.next;
        self.next = self.next.wrapping_add(1);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(accept_sequence(5, 6), SeqVerdict::Accept);
        assert_eq!(accept_sequence(5, 5), SeqVerdict::Stale);
        assert_eq!(accept_sequence(65535, 0), SeqVerdict::Accept);
        assert_eq!(accept_sequence(6, 5), SeqVerdict::Stale);
        assert_eq!(accept_sequence(0, 0x7fff), SeqVerdict::Accept);
        assert_eq!(accept_sequence(0, 0x8000), SeqVerdict::Stale);
    }

    #[test]
    fn tracker_rejects_replays_and_reordering() {
        let mut t = SequenceTracker::new();
        assert_eq!(t.observe(40_000), SeqVerdict::Accept);
        assert_eq!(t.observe(40_002), SeqVerdict::Accept);
        assert_eq!(t.observe(40_001), SeqVerdict::Stale);
        assert!(t.is_duplicate(40_002));
        assert_eq!(t.observe(40_002), SeqVerdict::Stale);
        assert_eq!(t.last(), Some(40_002));
    }

    #[test]
    fn counter_wraps() {
        let mut c = SequenceCounter::starting_at(u16::MAX);
        assert_eq!((c.take(), c.take()), (u16::MAX, 0));
    }
}
