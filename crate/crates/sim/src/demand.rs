//! The head node's demand table and scheduling packet.

use beaconmac_core::{Micros, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Realtime,
    NonRealtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemandEntry {
    pub sender: usize,
    pub receiver: usize,
    pub kind: EntryKind,
    /// Packets the sender last reported as ready (non-realtime only).
    pub pending: u32,
    /// Beacon in which the request was accepted.
    pub since_beacon: u64,
}

/// Outstanding requests, at most one per sender, kept in arrival order.
#[derive(Debug, Clone, Default)]
pub struct DemandTable {
    entries: Vec<DemandEntry>,
    rr_rt: usize,
    rr_nrt: usize,
}

impl DemandTable {
    pub fn contains(&self, sender: usize) -> bool {
        self.entries.iter().any(|e| e.sender == sender)
    }

    pub fn get_mut(&mut self, sender: usize) -> Option<&mut DemandEntry> {
        self.entries.iter_mut().find(|e| e.sender == sender)
    }

    /// Adds or refreshes the entry of `entry.sender`.
    pub fn insert(&mut self, entry: DemandEntry) {
        match self.get_mut(entry.sender) {
            Some(e) => e.pending = entry.pending,
            None => self.entries.push(entry),
        }
    }

    pub fn remove(&mut self, sender: usize) -> Option<DemandEntry> {
        let pos = self.entries.iter().position(|e| e.sender == sender)?;
        Some(self.entries.remove(pos))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DemandEntry] {
        &self.entries
    }

    fn of_kind(&self, kind: EntryKind) -> Vec<DemandEntry> {
        self.entries.iter().filter(|e| e.kind == kind).copied().collect()
    }

    /// Round-robin choice of at most `m` realtime senders.
    pub fn select_realtime(&mut self, m: u32) -> Vec<DemandEntry> {
        let rt = self.of_kind(EntryKind::Realtime);
        if rt.is_empty() {
            return Vec::new();
        }
        let take = rt.len().min(m as usize);
        let start = self.rr_rt % rt.len();
        self.rr_rt = (start + take) % rt.len();
        (0..take).map(|k| rt[(start + k) % rt.len()]).collect()
    }

    /// Round-robin, one packet at a time, until `capacity` packets are
    /// handed out or every reported packet is covered. Returns
    /// `(entry, packets)` blocks in service order.
    pub fn allocate_nonrealtime(&mut self, capacity: u32) -> Vec<(DemandEntry, u32)> {
        let nrt = self.of_kind(EntryKind::NonRealtime);
        if nrt.is_empty() || capacity == 0 {
            return Vec::new();
        }
        let len = nrt.len();
        let start = self.rr_nrt % len;
        let mut got = vec![0u32; len];
        let mut left = capacity;
        let mut last = None;
        'outer: loop {
            let mut progressed = false;
            for k in 0..len {
                let i = (start + k) % len;
                if got[i] < nrt[i].pending {
                    got[i] += 1;
                    left -= 1;
                    last = Some(i);
                    progressed = true;
                    if left == 0 {
                        break 'outer;
                    }
                }
            }
            if !progressed {
                break;
            }
        }
        if let Some(l) = last {
            self.rr_nrt = (l + 1) % len;
        }
        (0..len)
            .map(|k| (start + k) % len)
            .filter(|&i| got[i] > 0)
            .map(|i| (nrt[i], got[i]))
            .collect()
    }
}

/// Airtime of a scheduling packet carrying `grants` entries.
pub fn scheduling_airtime(params: &ProtocolParams, grants: u32) -> Micros {
    let bits = params.sched_header_bits + grants as u64 * params.sched_entry_bits;
    params.phy_preamble_us + (bits * 1_000_000).div_ceil(params.basic_rate_bps)
}

/// One scheduled transmission inside a contention-free period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub sender: usize,
    pub receiver: usize,
    pub start: Micros,
    pub duration: Micros,
    pub packets: u32,
}

/// What the head broadcasts in an announcement period.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchedulingPacket {
    pub grants: Vec<Grant>,
    pub pending: Vec<usize>,
    pub nominee: Option<usize>,
    pub contention: Vec<(Micros, Micros)>,
}

impl SchedulingPacket {
    /// No two grants overlap in time.
    pub fn grants_disjoint(&self) -> bool {
        let mut g = self.grants.clone();
        g.sort_by_key(|g| g.start);
        g.windows(2).all(|w| w[0].start + w[0].duration <= w[1].start)
    }
}
