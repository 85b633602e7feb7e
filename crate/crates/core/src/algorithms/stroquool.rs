//! StroquOOL: the noisy counterpart of SequOOL.
//!
//! At each depth `h`, for `p` from `p_max` down to `0`, the
//! `floor(h_max / (h 2^p))` best not-yet-opened cells are opened with `2^p`
//! evaluations per child. Half of the budget is reserved for a final
//! cross-validation that re-evaluates the best cell of every evaluation
//! level and recommends the best average.

use std::collections::VecDeque;

use crate::algorithms::stats::MeanStats;
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

/// Per-node evaluations and how many times the node has been opened.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OpenCountStat {
    pub base: MeanStats,
    pub opens: u32,
}

impl OpenCountStat {
    pub fn evals(&self) -> u64 {
        self.base.count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StroquoolPlan {
    pub budget: u64,
    pub h_max: u64,
    pub p_max: u32,
    /// The root is opened with `2^root_level` evaluations per child.
    pub root_level: u32,
    /// `(depth, level, cells to open)` in execution order; zero counts omitted.
    pub steps: Vec<(usize, u32, u64)>,
    /// Evaluations available before cross-validation.
    pub explore_budget: u64,
    /// Re-evaluations per cross-validation candidate.
    pub cv_evals: u64,
}

fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// `p_max = ceil(log2 n)`, `h_max = floor(n / (2 (p_max + 1)^2))`.
pub fn stroquool_schedule(budget: u64) -> Result<StroquoolPlan> {
    if budget < 16 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: "StroquOOL needs at least 16 evaluations".into(),
        });
    }
    let p_max = ceil_log2(budget);
    let levels = u64::from(p_max) + 1;
    let h_max = budget / (2 * levels * levels);
    let root_level = if h_max >= 1 {
        63 - h_max.leading_zeros()
    } else {
        0
    };
    let mut steps = Vec::new();
    for h in 1..=h_max {
        for p in (0..=p_max).rev() {
            let k = h_max.checked_shr(p).unwrap_or(0) / h;
            if k > 0 {
                steps.push((h as usize, p, k));
            }
        }
    }
    Ok(StroquoolPlan {
        budget,
        h_max,
        p_max,
        root_level,
        steps,
        explore_budget: budget - budget / 2,
        cv_evals: budget / (2 * levels),
    })
}

#[derive(Debug)]
enum Phase {
    Explore,
    Validate {
        candidates: Vec<NodeId>,
        stats: Vec<MeanStats>,
    },
    Done,
}

#[derive(Debug)]
pub struct StroquOol {
    plan: StroquoolPlan,
    tree: PartitionTree<OpenCountStat>,
    queue: VecDeque<NodeId>,
    root_opened: bool,
    next_step: usize,
    phase: Phase,
    clock: RoundClock,
    pending: Option<NodeId>,
    explore_evals: u64,
    evals: u64,
}

impl StroquOol {
    pub fn new(domain: Domain, partition: Box<dyn Partition>, budget: u64) -> Result<Self> {
        Ok(Self {
            plan: stroquool_schedule(budget)?,
            tree: PartitionTree::new(domain, partition),
            queue: VecDeque::new(),
            root_opened: false,
            next_step: 0,
            phase: Phase::Explore,
            clock: RoundClock::new(),
            pending: None,
            explore_evals: 0,
            evals: 0,
        })
    }

    pub fn plan(&self) -> &StroquoolPlan {
        &self.plan
    }

    pub fn tree(&self) -> &PartitionTree<OpenCountStat> {
        &self.tree
    }

    fn open(&mut self, id: NodeId, level: u32) -> Result<()> {
        self.tree.stat_mut(id).opens += 1;
        match self.tree.make_children(id) {
            Ok(children) => {
                for c in children {
                    self.queue.extend(std::iter::repeat_n(c, 1 << level));
                }
            }
            Err(Error::Unsplittable { .. }) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn refill_explore(&mut self) -> Result<bool> {
        while self.queue.is_empty() {
            if !self.root_opened {
                self.root_opened = true;
                self.open(NodeId::ROOT, self.plan.root_level)?;
                continue;
            }
            let Some(&(h, p, k)) = self.plan.steps.get(self.next_step) else {
                return Ok(false);
            };
            self.next_step += 1;
            let mut cells: Vec<(NodeId, f64)> = self
                .tree
                .layer(h)
                .iter()
                .filter_map(|&id| {
                    let s = self.tree.stat(id);
                    (s.opens == 0 && s.evals() > 0).then_some((id, s.base.mean()))
                })
                .collect();
            cells.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (id, _) in cells.into_iter().take(k as usize) {
                self.open(id, p)?;
            }
        }
        Ok(true)
    }

    /// Highest-mean node among those with at least `min_evals` evaluations.
    fn best_with(&self, min_evals: u64) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for id in self.tree.ids() {
            let s = self.tree.stat(id);
            if s.evals() < min_evals.max(1) {
                continue;
            }
            best = match best {
                None => Some(id),
                Some(b) => {
                    let (m, bm) = (s.base.mean(), self.tree.stat(b).base.mean());
                    let better =
                        m > bm || (m == bm && self.tree.node(id).key() < self.tree.node(b).key());
                    Some(if better { id } else { b })
                }
            };
        }
        best
    }

    fn start_validation(&mut self) {
        self.queue.clear();
        let mut candidates: Vec<NodeId> = Vec::new();
        for p in 0..=self.plan.p_max {
            if let Some(id) = self.best_with(1u64 << p) {
                if !candidates.contains(&id) {
                    candidates.push(id);
                }
            }
        }
        if self.plan.cv_evals == 0 || candidates.is_empty() {
            self.phase = Phase::Done;
            return;
        }
        for &c in &candidates {
            self.queue
                .extend(std::iter::repeat_n(c, self.plan.cv_evals as usize));
        }
        let stats = vec![MeanStats::default(); candidates.len()];
        self.phase = Phase::Validate { candidates, stats };
    }

    fn next_node(&mut self) -> Result<Option<NodeId>> {
        if let Phase::Explore = self.phase {
            if self.explore_evals < self.plan.explore_budget && self.refill_explore()? {
                return Ok(self.queue.pop_front());
            }
            self.start_validation();
        }
        match self.phase {
            Phase::Validate { .. } => Ok(self.queue.pop_front()),
            _ => Ok(None),
        }
    }

    fn recommendation(&self) -> Option<NodeId> {
        if let Phase::Validate { candidates, stats } = &self.phase {
            let mut best: Option<(usize, f64)> = None;
            for (i, s) in stats.iter().enumerate() {
                if s.count() > 0 && best.is_none_or(|(_, m)| s.mean() > m) {
                    best = Some((i, s.mean()));
                }
            }
            if let Some((i, _)) = best {
                return Some(candidates[i]);
            }
        }
        self.best_with(1)
    }
}

impl Algorithm for StroquOol {
    fn name(&self) -> &'static str {
        "stroquool"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        if self.evals < self.plan.budget {
            if let Some(id) = self.next_node()? {
                self.pending = Some(id);
                return Ok(self.tree.node(id).representative().clone());
            }
        }
        self.pending = None;
        Ok(self
            .recommendation()
            .map(|id| self.tree.node(id).representative().clone())
            .unwrap_or_else(|| self.tree.domain().center()))
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        if let Some(id) = self.pending.take() {
            self.evals += 1;
            match &mut self.phase {
                Phase::Explore => {
                    self.tree.stat_mut(id).base.update(reward);
                    self.explore_evals += 1;
                }
                Phase::Validate { candidates, stats } => {
                    let i = candidates.iter().position(|&c| c == id).expect("candidate");
                    stats[i].update(reward);
                }
                Phase::Done => {}
            }
        }
        self.clock.finish_reward();
        Ok(())
    }

    fn get_last_point(&self) -> Result<Point> {
        self.recommendation()
            .map(|id| self.tree.node(id).representative().clone())
            .ok_or(Error::NoRecommendation)
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }

    fn dump_tree(&self) -> String {
        self.tree.dump()
    }
}
