//! Reachability tallies of Commander spans.

use std::collections::BTreeMap;

use crate::maze::Cell;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub attempts: u32,
    pub successes: u32,
}

impl Tally {
    pub fn record(&mut self, success: bool) {
        self.attempts += 1;
        self.successes += u32::from(success);
    }

    /// Success rate, or `None` without attempts.
    pub fn rate(&self) -> Option<f64> {
        (self.attempts > 0).then(|| f64::from(self.successes) / f64::from(self.attempts))
    }
}

/// Attempts and successes of reaching a commanded region within one
/// Commander span, per (source region, target region) and per (start cell,
/// target region).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReachabilityStats {
    pairs: BTreeMap<(usize, usize), Tally>,
    cells: BTreeMap<(Cell, usize), Tally>,
}

impl ReachabilityStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, from: usize, start: Cell, target: usize, success: bool) {
        self.pairs.entry((from, target)).or_default().record(success);
        self.cells.entry((start, target)).or_default().record(success);
    }

    pub fn pair(&self, from: usize, target: usize) -> Tally {
        self.pairs.get(&(from, target)).copied().unwrap_or_default()
    }

    pub fn cell(&self, start: Cell, target: usize) -> Tally {
        self.cells.get(&(start, target)).copied().unwrap_or_default()
    }

    /// Targets with at least one attempt from `start`.
    pub fn cell_targets(&self, start: Cell) -> impl Iterator<Item = (usize, Tally)> + '_ {
        self.cells
            .range((start, 0)..=(start, usize::MAX))
            .map(|(&(_, t), &tally)| (t, tally))
    }

    /// Forgets every tally involving `region`, either as source, as target or
    /// through one of its `cells`.
    pub fn reset_region(&mut self, region: usize, cells: &[Cell]) {
        self.pairs.retain(|&(f, t), _| f != region && t != region);
        self.cells.retain(|&(c, t), _| t != region && !cells.contains(&c));
    }
}

/// Estimated probability of reaching `target` within one Commander span when
/// commanded from `from`; `None` marks an unknown pair.
pub fn estimate_reachability(stats: &ReachabilityStats, from: usize, target: usize) -> Option<f64> {
    stats.pair(from, target).rate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        let mut s = ReachabilityStats::new();
        let c = Cell::new(1, 1);
        assert_eq!(estimate_reachability(&s, 0, 1), None);
        for _ in 0..5 {
            s.record(0, c, 1, false);
            s.record(0, c, 2, true);
        }
        assert_eq!(estimate_reachability(&s, 0, 1), Some(0.0));
        assert_eq!(estimate_reachability(&s, 0, 2), Some(1.0));
        assert_eq!(s.cell_targets(c).count(), 2);
        s.reset_region(2, &[]);
        assert_eq!(estimate_reachability(&s, 0, 2), None);
        assert_eq!(s.cell(c, 1).attempts, 5);
        s.reset_region(7, &[c]);
        assert_eq!(s.cell(c, 1).attempts, 0);
        assert_eq!(s.pair(0, 1).attempts, 5);
    }
}
