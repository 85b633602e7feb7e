//! SequOOL: sequential optimistic opening for noiseless targets.
//!
//! The root center is evaluated, the root is opened, then for each depth
//! `h = 1..=h_max` the `floor(h_max / h)` best cells of depth `h` are opened.
//! Opening a cell splits it and evaluates both children centers. The
//! schedule is cut off as soon as the budget is spent.

use std::collections::VecDeque;

use crate::algorithms::doo::DooNodeStat;
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

/// `H(n) = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Openings per depth `1..=h_max` with `h_max = floor(n / H(n))`.
pub fn sequool_schedule(budget: u64) -> Result<Vec<u64>> {
    if budget < 10 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: "SequOOL needs at least 10 evaluations".into(),
        });
    }
    let h_max = (budget as f64 / harmonic(budget)).floor() as u64;
    Ok((1..=h_max).map(|h| h_max / h).collect())
}

#[derive(Debug)]
pub struct SequOol {
    budget: u64,
    schedule: Vec<u64>,
    tree: PartitionTree<DooNodeStat>,
    queue: VecDeque<NodeId>,
    root_opened: bool,
    next_depth: usize,
    clock: RoundClock,
    pending: Option<NodeId>,
    evals: u64,
    best: Option<NodeId>,
}

impl SequOol {
    pub fn new(domain: Domain, partition: Box<dyn Partition>, budget: u64) -> Result<Self> {
        Ok(Self {
            budget,
            schedule: sequool_schedule(budget)?,
            tree: PartitionTree::new(domain, partition),
            queue: VecDeque::from([NodeId::ROOT]),
            root_opened: false,
            next_depth: 1,
            clock: RoundClock::new(),
            pending: None,
            evals: 0,
            best: None,
        })
    }

    pub fn h_max(&self) -> usize {
        self.schedule.len()
    }

    pub fn tree(&self) -> &PartitionTree<DooNodeStat> {
        &self.tree
    }

    fn open(&mut self, id: NodeId) -> Result<()> {
        match self.tree.make_children(id) {
            Ok(children) => self.queue.extend(children),
            Err(Error::Unsplittable { .. }) => self.tree.stat_mut(id).terminal = true,
            Err(e) => return Err(e),
        }
        Ok(())
    }

    /// Runs schedule steps until some evaluation is queued; `false` when done.
    fn refill(&mut self) -> Result<bool> {
        while self.queue.is_empty() {
            if !self.root_opened {
                self.root_opened = true;
                self.open(NodeId::ROOT)?;
                continue;
            }
            if self.next_depth > self.schedule.len() {
                return Ok(false);
            }
            let h = self.next_depth;
            let quota = self.schedule[h - 1] as usize;
            self.next_depth += 1;
            let mut cells: Vec<(NodeId, f64)> = self
                .tree
                .layer(h)
                .iter()
                .filter_map(|&id| self.tree.stat(id).value.map(|v| (id, v)))
                .collect();
            // layer order is index order; a stable sort keeps lower indices first on ties
            cells.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (id, _) in cells.into_iter().take(quota) {
                self.open(id)?;
            }
        }
        Ok(true)
    }

    fn recommendation(&self) -> Option<Point> {
        self.best
            .map(|id| self.tree.node(id).representative().clone())
    }
}

impl Algorithm for SequOol {
    fn name(&self) -> &'static str {
        "sequool"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        if self.evals < self.budget && self.refill()? {
            let id = self.queue.pop_front().expect("refilled");
            self.pending = Some(id);
            return Ok(self.tree.node(id).representative().clone());
        }
        self.pending = None;
        Ok(self.recommendation().expect("root evaluated first"))
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        if let Some(id) = self.pending.take() {
            self.tree.stat_mut(id).value = Some(reward);
            self.evals += 1;
            let better = match self.best {
                None => true,
                Some(b) => {
                    let bv = self.tree.stat(b).value.expect("evaluated");
                    reward > bv
                        || (reward == bv && self.tree.node(id).key() < self.tree.node(b).key())
                }
            };
            if better {
                self.best = Some(id);
            }
        }
        self.clock.finish_reward();
        Ok(())
    }

    fn get_last_point(&self) -> Result<Point> {
        self.recommendation().ok_or(Error::NoRecommendation)
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }

    fn dump_tree(&self) -> String {
        self.tree.dump()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::BinaryPartition;

    #[test]
    fn schedule_for_100() {
        assert!((harmonic(100) - 5.1874).abs() < 1e-4);
        let s = sequool_schedule(100).unwrap();
        assert_eq!(s.len(), 19);
        assert_eq!(&s[..5], &[19, 9, 6, 4, 3]);
        assert!(s[10..].iter().all(|&k| k == 1));
    }

    #[test]
    fn schedule_rejects_small_budget() {
        assert!(sequool_schedule(9).is_err());
        assert!(sequool_schedule(10).is_ok());
    }

    /// Total openings for `h_max = m` is the divisor summatory `D(m) = sum_h floor(m/h)`.
    #[test]
    fn openings_bounded_for_all_budgets() {
        let n_max: u64 = 1_000_000;
        let mut h = 0.0;
        let mut hn = Vec::with_capacity(n_max as usize + 1);
        hn.push(0.0);
        for n in 1..=n_max {
            h += 1.0 / n as f64;
            hn.push(h);
        }
        let m_max = (n_max as f64 / hn[n_max as usize]).floor() as usize + 1;
        let mut divisors = vec![0u64; m_max + 1];
        for d in 1..=m_max {
            for k in (d..=m_max).step_by(d) {
                divisors[k] += 1;
            }
        }
        let mut summatory = vec![0u64; m_max + 1];
        for m in 1..=m_max {
            summatory[m] = summatory[m - 1] + divisors[m];
        }
        for n in 10..=n_max {
            let m = (n as f64 / hn[n as usize]).floor() as usize;
            let total = summatory[m];
            assert!(
                total as f64 <= m as f64 * (1.0 + (m as f64).ln()),
                "n = {n}"
            );
            assert!(total <= n, "n = {n}");
        }
    }

    #[test]
    fn evaluates_root_then_children() {
        let mut s = SequOol::new(Domain::unit(1), Box::new(BinaryPartition), 20).unwrap();
        let mut xs = Vec::new();
        for t in 1..=3 {
            let x = s.pull(t).unwrap();
            xs.push(x[0]);
            s.receive_reward(t, x[0]).unwrap();
        }
        assert_eq!(xs, vec![0.5, 0.25, 0.75]);
        assert_eq!(s.get_last_point().unwrap().coords(), &[0.75]);
    }
}
