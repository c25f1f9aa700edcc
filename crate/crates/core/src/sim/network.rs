use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

/// Who a datagram is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    Server,
    Bot(u8),
}

#[derive(Debug, Clone, PartialEq)]
struct InFlight {
    due_us: u64,
    order: u64,
    to: Endpoint,
    bytes: Vec<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NetStats {
    pub sent: u64,
    pub lost: u64,
    pub delivered: u64,
}

/// In-memory lossy datagram network. Each datagram is dropped with
/// probability `loss`, otherwise delayed by `max(0, N(latency, jitter))`.
/// Delivery is by due time, then by send order, so jitter can reorder.
#[derive(Debug, Clone)]
pub struct SimNetwork {
    latency_us: f64,
    jitter_us: f64,
    loss: f64,
    queue: Vec<InFlight>,
    order: u64,
    stats: NetStats,
}

impl SimNetwork {
    pub fn new(latency_ms: f64, jitter_ms: f64, loss: f64) -> Self {
        Self {
            latency_us: latency_ms * 1e3,
            jitter_us: jitter_ms * 1e3,
            loss,
            queue: Vec::new(),
            order: 0,
            stats: NetStats::default(),
        }
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn send(&mut self, to: Endpoint, bytes: Vec<u8>, now_us: u64, rng: &mut impl Rng) {
        self.stats.sent += 1;
        if self.loss > 0.0 && rng.random::<f64>() < self.loss {
            self.stats.lost += 1;
            return;
        }
        let delay = if self.jitter_us > 0.0 {
            Normal::new(self.latency_us, self.jitter_us).expect("finite jitter").sample(rng)
        } else {
            self.latency_us
        };
        let due_us = now_us + delay.max(0.0).round() as u64;
        self.queue.push(InFlight { due_us, order: self.order, to, bytes });
        self.order += 1;
    }

    /// Remove and return everything due by `now_us`, in delivery order.
    pub fn deliver(&mut self, now_us: u64) -> Vec<(Endpoint, Vec<u8>)> {
        let (mut due, rest): (Vec<_>, Vec<_>) = self.queue.drain(..).partition(|m| m.due_us <= now_us);
        self.queue = rest;
        due.sort_by_key(|m| (m.due_us, m.order));
        self.stats.delivered += due.len() as u64;
        due.into_iter().map(|m| (m.to, m.bytes)).collect()
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn fixed_latency_is_fifo() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = SimNetwork::new(5.0, 0.0, 0.0);
        for i in 0..10u8 {
            net.send(Endpoint::Bot(1), vec![i], u64::from(i) * 100, &mut rng);
        }
        assert!(net.deliver(4_999).is_empty());
        let got: Vec<u8> = net.deliver(10_000).into_iter().map(|(_, b)| b[0]).collect();
        assert_eq!(got, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn total_loss_delivers_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = SimNetwork::new(0.0, 0.0, 1.0);
        for _ in 0..100 {
            net.send(Endpoint::Server, vec![0], 0, &mut rng);
        }
        assert!(net.deliver(u64::MAX).is_empty());
        assert_eq!(net.stats().lost, 100);
    }

    #[test]
    fn jitter_never_delivers_early() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = SimNetwork::new(1.0, 5.0, 0.0);
        for _ in 0..1000 {
            net.send(Endpoint::Server, vec![0], 1_000_000, &mut rng);
        }
        assert!(net.deliver(999_999).is_empty());
        assert_eq!(net.deliver(u64::MAX).len(), 1000);
    }
}
