//! Sources of identity and time.
//!
//! Every id and timestamp written into a project comes from a [`Runtime`], so
//! a seeded id source and a stepping clock make whole sessions reproducible.

use chrono::{DateTime, Duration, Utc};
use parking_lot::Mutex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at a fixed instant and advances by `step` on every read.
#[derive(Debug)]
pub struct SteppingClock {
    next: Mutex<DateTime<Utc>>,
    step: Duration,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        Self {
            next: Mutex::new(start),
            step,
        }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let mut next = self.next.lock();
        let now = *next;
        *next = now + self.step;
        now
    }
}

/// Random 128-bit identifiers rendered as 32 lowercase hex characters.
#[derive(Debug)]
pub struct IdSource {
    rng: Mutex<ChaCha20Rng>,
}

impl IdSource {
    pub fn from_entropy() -> Self {
        Self {
            rng: Mutex::new(ChaCha20Rng::from_os_rng()),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    pub fn next_id(&self) -> String {
        let mut bytes = [0u8; 16];
        self.rng.lock().fill_bytes(&mut bytes);
        hex::encode(bytes)
    }
}

#[derive(Clone)]
pub struct Runtime {
    clock: Arc<dyn Clock>,
    ids: Arc<IdSource>,
}

impl Runtime {
    pub fn new(clock: Arc<dyn Clock>, ids: IdSource) -> Self {
        Self {
            clock,
            ids: Arc::new(ids),
        }
    }

    /// Wall clock and OS entropy.
    pub fn system() -> Self {
        Self::new(Arc::new(SystemClock), IdSource::from_entropy())
    }

    /// Seeded ids and a one-second stepping clock starting at 2024-01-01.
    pub fn deterministic(seed: u64) -> Self {
        let start = DateTime::parse_from_rfc3339("2024-01-01T00:00:00Z")
            .expect("valid literal")
            .with_timezone(&Utc);
        Self::new(
            Arc::new(SteppingClock::new(start, Duration::seconds(1))),
            IdSource::seeded(seed),
        )
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn next_id(&self) -> String {
        self.ids.next_id()
    }
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime").finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_are_32_hex_chars_and_unique() {
        let ids = IdSource::from_entropy();
        let set: HashSet<_> = (0..1000).map(|_| ids.next_id()).collect();
        assert_eq!(set.len(), 1000);
        assert!(set
            .iter()
            .all(|id| id.len() == 32 && id.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase())));
    }

    #[test]
    fn seeded_ids_repeat() {
        let a = IdSource::seeded(7);
        let b = IdSource::seeded(7);
        assert_eq!(a.next_id(), b.next_id());
    }

    #[test]
    fn stepping_clock_advances() {
        let rt = Runtime::deterministic(1);
        let t0 = rt.now();
        let t1 = rt.now();
        assert_eq!(t1 - t0, Duration::seconds(1));
    }
}
