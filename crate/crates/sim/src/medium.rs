//! Shared channel record used to check exclusivity.

use beaconmac_core::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub start: Micros,
    pub end: Micros,
    pub sender: usize,
    pub collided: bool,
}

/// Transmissions on the fully connected channel, checked for overlaps.
#[derive(Debug, Default, Clone)]
pub struct Medium {
    log: Vec<(Transmission, bool)>,
    collisions: u64,
    frames: u64,
    violations: usize,
}

impl Medium {
    pub fn record(&mut self, start: Micros, end: Micros, sender: usize, collided: bool) {
        debug_assert!(end >= start);
        self.frames += 1;
        if collided {
            self.collisions += 1;
        }
        self.log.push((Transmission { start, end, sender, collided }, false));
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn collided_frames(&self) -> u64 {
        self.collisions
    }

    fn scan(&mut self) -> usize {
        self.log.sort_by_key(|(t, _)| (t.start, t.end));
        let mut bad = 0;
        let mut active: Vec<Transmission> = Vec::new();
        for (t, checked) in &self.log {
            active.retain(|a| a.end > t.start);
            if !checked {
                bad += active.iter().filter(|a| !(a.collided && t.collided)).count();
            }
            active.push(*t);
        }
        bad
    }

    /// Checks everything recorded so far. The caller promises that no later
    /// record starts before `now`, so only frames still on air are kept.
    pub fn flush(&mut self, now: Micros) {
        self.violations += self.scan();
        self.log.retain(|(t, _)| t.end > now);
        self.log.iter_mut().for_each(|(_, c)| *c = true);
    }

    /// Overlapping pairs where at least one frame is not marked collided.
    pub fn exclusivity_violations(&mut self) -> usize {
        let pending = self.scan();
        self.violations + pending
    }
}
