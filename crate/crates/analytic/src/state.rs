//! Realtime sender populations and their enumeration.

use std::collections::HashMap;

use crate::combin::binom;
use crate::error::AnalyticError;

/// Counts of realtime senders in states 1..4; state 5 holds the rest.
///
/// 1: on, contending. 2: on, in the demand table. 3: off with a pending
/// aggregate, in the table. 4: off, in the table. 5: off, out of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemState {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n4: u32,
}

impl SystemState {
    pub const fn new(n1: u32, n2: u32, n3: u32, n4: u32) -> Self {
        Self { n1, n2, n3, n4 }
    }

    pub fn total(&self) -> u32 {
        self.n1 + self.n2 + self.n3 + self.n4
    }

    /// Number of senders in state 5, checked against `n`.
    pub fn n5(&self, n: u32) -> Result<u32, AnalyticError> {
        n.checked_sub(self.total()).ok_or(AnalyticError::InfeasibleState(self.as_array(), n))
    }

    pub fn check(&self, n: u32) -> Result<(), AnalyticError> {
        self.n5(n).map(|_| ())
    }

    /// Senders currently held in the demand table.
    pub fn in_table(&self) -> u32 {
        self.n2 + self.n3 + self.n4
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.n1, self.n2, self.n3, self.n4]
    }
}

/// Per-beacon transition tallies.
///
/// x1: 3->5, x2: 3->4, x3: 4->5, x4: 1->2, x5: 2->3, x6: 4->2, x7: 1->5,
/// x8: 5->1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TransitionCount {
    pub x: [u32; 8],
}

impl TransitionCount {
    pub fn get(&self, i: usize) -> u32 {
        self.x[i - 1]
    }

    /// Applies the tallies to `s`, or `None` if a population goes negative.
    pub fn apply(&self, s: &SystemState) -> Option<SystemState> {
        let [x1, x2, x3, x4, x5, x6, x7, x8] = self.x.map(i64::from);
        let n1 = s.n1 as i64 + x8 - x7 - x4;
        let n2 = s.n2 as i64 + x4 - x5 + x6;
        let n4 = s.n4 as i64 + x2 - x3 - x6;
        if x1 + x2 != s.n3 as i64 || n1 < 0 || n2 < 0 || n4 < 0 {
            return None;
        }
        Some(SystemState::new(n1 as u32, n2 as u32, x5 as u32, n4 as u32))
    }

    /// The five balance equations linking `s` and `t`.
    pub fn balances(&self, s: &SystemState, t: &SystemState) -> bool {
        let [x1, x2, x3, x4, x5, x6, x7, x8] = self.x.map(i64::from);
        let d = |a: u32, b: u32| b as i64 - a as i64;
        x8 - x7 - x4 == d(s.n1, t.n1)
            && x4 - x5 + x6 == d(s.n2, t.n2)
            && x5 == t.n3 as i64
            && x1 + x2 == s.n3 as i64
            && x2 - x3 - x6 == d(s.n4, t.n4)
    }
}

/// One outcome of a contention period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContentionEvent {
    pub x4: u32,
    pub x4p: u32,
    pub w_l: u32,
}

/// Every feasible state for `n` calls, in lexicographic order, with an index.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: u32,
    states: Vec<SystemState>,
    index: HashMap<SystemState, usize>,
}

impl StateSpace {
    pub fn new(n: u32) -> Self {
        let mut states = Vec::new();
        for n1 in 0..=n {
            for n2 in 0..=n - n1 {
                for n3 in 0..=n - n1 - n2 {
                    for n4 in 0..=n - n1 - n2 - n3 {
                        states.push(SystemState::new(n1, n2, n3, n4));
                    }
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { n, states, index }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn index_of(&self, s: &SystemState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// `C(n+4, 4)`.
    pub fn expected_len(n: u32) -> usize {
        binom(n as i64 + 4, 4) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_count_matches_binomial() {
        for n in 0..12 {
            assert_eq!(StateSpace::new(n).len(), StateSpace::expected_len(n));
        }
        assert_eq!(StateSpace::new(10).len(), 1001);
    }

    #[test]
    fn enumeration_is_lexicographic_and_indexed() {
        let sp = StateSpace::new(4);
        assert!(sp.states().windows(2).all(|w| w[0] < w[1]));
        for (i, s) in sp.states().iter().enumerate() {
            assert_eq!(sp.index_of(s), Some(i));
            assert!(s.total() <= 4);
        }
        assert_eq!(sp.states()[0], SystemState::new(0, 0, 0, 0));
    }

    #[test]
    fn infeasible_state_detected() {
        assert!(SystemState::new(2, 2, 0, 1).check(4).is_err());
        assert_eq!(SystemState::new(1, 1, 0, 1).n5(4).unwrap(), 1);
    }

    proptest::proptest! {
        #[test]
        fn apply_satisfies_balances(n1 in 0u32..4, n2 in 0u32..4, n3 in 0u32..4, n4 in 0u32..4,
                                    x in proptest::array::uniform8(0u32..4)) {
            let s = SystemState::new(n1, n2, n3, n4);
            let xc = TransitionCount { x };
            if let Some(t) = xc.apply(&s) {
                proptest::prop_assert!(xc.balances(&s, &t));
            }
        }
    }
}
