//! Stochastic Simultaneous Optimistic Optimization.
//!
//! Sweeps depths `0..=min(depth, h_max)`. At each depth the leaf with the
//! largest b-value is either sampled (fewer than `k` evaluations) or, once
//! saturated, expanded if its b-value beats every node expanded earlier in
//! the sweep.

use crate::algorithms::stats::{argmax, MeanStats};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoSooNodeStat {
    pub base: MeanStats,
    /// Upper confidence value `b_{h,i}`.
    pub b: f64,
    pub terminal: bool,
}

impl Default for StoSooNodeStat {
    fn default() -> Self {
        Self {
            base: MeanStats::default(),
            b: f64::INFINITY,
            terminal: false,
        }
    }
}

/// `mu + sqrt(ln(n^2 / delta) / (2T))`, `+inf` when unvisited.
pub fn stosoo_bvalue(stat: &MeanStats, budget: u64, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::config(format!("delta = {delta} must be positive")));
    }
    if stat.count() == 0 {
        return Ok(f64::INFINITY);
    }
    let n = budget as f64;
    let log = (n * n / delta).ln().max(0.0);
    Ok(stat.mean() + (log / (2.0 * stat.count() as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoSooConfig {
    pub budget: u64,
    /// Evaluations per node before it may be expanded.
    pub k: u64,
    pub h_max: usize,
    pub delta: f64,
}

impl StoSooConfig {
    /// `k = ceil(n / ln(n)^3)`, `h_max = floor(sqrt(n / k))`, `delta = 1 / sqrt(n)`.
    pub fn for_budget(budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::BudgetTooSmall {
                budget,
                reason: "at least one evaluation is required".into(),
            });
        }
        let n = budget as f64;
        let k = (n / n.ln().powi(3)).ceil().min(n).max(1.0) as u64;
        let h_max = (n / k as f64).sqrt().floor() as usize;
        Ok(Self {
            budget,
            k,
            h_max,
            delta: 1.0 / n.sqrt(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::config(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct StoSoo {
    cfg: StoSooConfig,
    tree: PartitionTree<StoSooNodeStat>,
    clock: RoundClock,
    pending: Option<NodeId>,
    evals: u64,
    depth_cursor: usize,
    v_max: f64,
    sweep_progress: bool,
    exhausted: bool,
}

impl StoSoo {
    pub fn new(domain: Domain, partition: Box<dyn Partition>, cfg: StoSooConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tree: PartitionTree::new(domain, partition),
            clock: RoundClock::new(),
            pending: None,
            evals: 0,
            depth_cursor: 0,
            v_max: f64::NEG_INFINITY,
            sweep_progress: false,
            exhausted: false,
        })
    }

    pub fn config(&self) -> &StoSooConfig {
        &self.cfg
    }

    pub fn tree(&self) -> &PartitionTree<StoSooNodeStat> {
        &self.tree
    }

    /// Advances the sweep until a node needs an evaluation.
    fn next_node(&mut self) -> Result<Option<NodeId>> {
        loop {
            let top = self.tree.max_depth().min(self.cfg.h_max);
            if self.depth_cursor > top {
                if !self.sweep_progress {
                    return Ok(None);
                }
                self.depth_cursor = 0;
                self.v_max = f64::NEG_INFINITY;
                self.sweep_progress = false;
            }
            let tree = &self.tree;
            let leaves = tree.layer(self.depth_cursor).iter().filter_map(|&id| {
                let node = tree.node(id);
                (node.is_leaf() && !node.stat.terminal).then_some((id, node.stat.b))
            });
            let Some(id) = argmax(leaves) else {
                self.depth_cursor += 1;
                continue;
            };
            let stat = *self.tree.stat(id);
            if stat.base.count() < self.cfg.k {
                self.depth_cursor += 1;
                self.sweep_progress = true;
                return Ok(Some(id));
            }
            if stat.b >= self.v_max {
                match self.tree.make_children(id) {
                    Ok(_) => {
                        self.v_max = stat.b;
                        self.sweep_progress = true;
                    }
                    Err(Error::Unsplittable { .. }) => {
                        self.tree.stat_mut(id).terminal = true;
                        self.sweep_progress = true;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            self.depth_cursor += 1;
        }
    }

    /// Highest empirical mean among saturated nodes, or among visited ones early on.
    fn recommendation(&self) -> Option<Point> {
        let pick = |min_count: u64| {
            let mut best: Option<NodeId> = None;
            for id in self.tree.ids() {
                let s = self.tree.stat(id).base;
                if s.count() < min_count {
                    continue;
                }
                best = match best {
                    None => Some(id),
                    Some(b) => {
                        let bm = self.tree.stat(b).base.mean();
                        let better = s.mean() > bm
                            || (s.mean() == bm
                                && self.tree.node(id).key() < self.tree.node(b).key());
                        Some(if better { id } else { b })
                    }
                };
            }
            best
        };
        pick(self.cfg.k)
            .or_else(|| pick(1))
            .map(|id| self.tree.node(id).representative().clone())
    }
}

impl Algorithm for StoSoo {
    fn name(&self) -> &'static str {
        "stosoo"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        if self.evals < self.cfg.budget && !self.exhausted {
            match self.next_node()? {
                Some(id) => {
                    self.pending = Some(id);
                    return Ok(self.tree.node(id).representative().clone());
                }
                None => self.exhausted = true,
            }
        }
        self.pending = None;
        Ok(self
            .recommendation()
            .unwrap_or_else(|| self.tree.domain().center()))
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        if let Some(id) = self.pending.take() {
            let stat = self.tree.stat_mut(id);
            stat.base.update(reward);
            stat.b = stosoo_bvalue(&stat.base, self.cfg.budget, self.cfg.delta)?;
            self.evals += 1;
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
    fn bvalue_golden() {
        assert_eq!(
            stosoo_bvalue(&MeanStats::default(), 1000, 0.1).unwrap(),
            f64::INFINITY
        );
        let stat = MeanStats::from_parts(4, 0.5, 0.0);
        let b = stosoo_bvalue(&stat, 1000, 1.0 / 1000f64.sqrt()).unwrap();
        // 0.5 + sqrt(ln(1000^2.5) / 8)
        assert!((b - 1.969_243).abs() < 1e-5, "{b}");
        assert!(stosoo_bvalue(&stat, 1000, 0.0).is_err());
        assert!(stosoo_bvalue(&stat, 1000, -1.0).is_err());
    }

    #[test]
    fn bvalue_decreases_with_count() {
        let b = |t| stosoo_bvalue(&MeanStats::from_parts(t, 0.2, 0.0), 500, 0.05).unwrap();
        for t in 1..100 {
            assert!(b(t + 1) < b(t));
        }
    }

    #[test]
    fn default_constants() {
        let cfg = StoSooConfig::for_budget(1000).unwrap();
        // ln(1000)^3 = 329.6
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.h_max, 15);
        assert!((cfg.delta - 1.0 / 1000f64.sqrt()).abs() < 1e-15);
        let tiny = StoSooConfig::for_budget(1).unwrap();
        assert_eq!(tiny.k, 1);
    }

    #[test]
    fn samples_root_k_times_before_expanding() {
        let cfg = StoSooConfig::for_budget(1000).unwrap();
        let mut algo = StoSoo::new(Domain::unit(1), Box::new(BinaryPartition), cfg).unwrap();
        let mut points = Vec::new();
        for t in 1..=6 {
            points.push(algo.pull(t).unwrap().coords()[0]);
            algo.receive_reward(t, 0.5).unwrap();
        }
        assert_eq!(&points[..4], &[0.5; 4]);
        assert_eq!(algo.tree().layer(1).len(), 2);
        assert_eq!(points[4], 0.25);
    }

    #[test]
    fn stops_within_budget() {
        let cfg = StoSooConfig::for_budget(50).unwrap();
        let mut algo = StoSoo::new(Domain::unit(1), Box::new(BinaryPartition), cfg).unwrap();
        for t in 1..=200 {
            let x = algo.pull(t).unwrap();
            algo.receive_reward(t, -(x[0] - 0.3).abs()).unwrap();
        }
        assert!(algo.evaluations() <= 50);
    }
}
