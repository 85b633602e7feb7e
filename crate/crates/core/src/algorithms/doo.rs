//! Deterministic Optimistic Optimization (noiseless, fixed budget).

use std::collections::VecDeque;

use crate::algorithms::stats::{argmax_by_key, SmoothnessParams};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DooNodeStat {
    /// Reward observed at the cell center.
    pub value: Option<f64>,
    /// Set once the cell turned out to be too small to split.
    pub terminal: bool,
}

/// `f(center) + nu rho^h` for an evaluated node.
pub fn doo_score(value: Option<f64>, depth: usize, params: &SmoothnessParams) -> Result<f64> {
    match value {
        Some(v) => Ok(v + params.bias(depth)),
        None => Err(Error::Unevaluated { depth, index: 0 }),
    }
}

#[derive(Debug)]
pub struct Doo {
    params: SmoothnessParams,
    budget: u64,
    tree: PartitionTree<DooNodeStat>,
    queue: VecDeque<NodeId>,
    clock: RoundClock,
    pending: Option<NodeId>,
    evals: u64,
    best: Option<NodeId>,
}

impl Doo {
    pub fn new(
        domain: Domain,
        partition: Box<dyn Partition>,
        params: SmoothnessParams,
        budget: u64,
    ) -> Result<Self> {
        if budget == 0 {
            return Err(Error::BudgetTooSmall {
                budget,
                reason: "at least one evaluation is required".into(),
            });
        }
        Ok(Self {
            params,
            budget,
            tree: PartitionTree::new(domain, partition),
            queue: VecDeque::from([NodeId::ROOT]),
            clock: RoundClock::new(),
            pending: None,
            evals: 0,
            best: None,
        })
    }

    pub fn tree(&self) -> &PartitionTree<DooNodeStat> {
        &self.tree
    }

    /// Expands the best-scoring evaluated leaf; `false` once nothing is expandable.
    fn expand_best(&mut self) -> Result<bool> {
        loop {
            let tree = &self.tree;
            let candidates = tree.ids().filter_map(|id| {
                let node = tree.node(id);
                let stat = node.stat;
                (node.is_leaf() && !stat.terminal && stat.value.is_some()).then(|| {
                    (
                        id,
                        doo_score(stat.value, node.depth(), &self.params).unwrap(),
                    )
                })
            });
            let Some(id) = argmax_by_key(tree, candidates) else {
                return Ok(false);
            };
            match self.tree.make_children(id) {
                Ok(children) => {
                    self.queue.extend(children);
                    return Ok(true);
                }
                Err(Error::Unsplittable { .. }) => self.tree.stat_mut(id).terminal = true,
                Err(e) => return Err(e),
            }
        }
    }

    fn recommendation(&self) -> Option<Point> {
        self.best
            .map(|id| self.tree.node(id).representative().clone())
    }
}

impl Algorithm for Doo {
    fn name(&self) -> &'static str {
        "doo"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        if self.evals < self.budget && (!self.queue.is_empty() || self.expand_best()?) {
            let id = self.queue.pop_front().expect("queue refilled");
            self.pending = Some(id);
            return Ok(self.tree.node(id).representative().clone());
        }
        self.pending = None;
        Ok(self
            .recommendation()
            .expect("root evaluated before budget runs out"))
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        if let Some(id) = self.pending.take() {
            self.tree.stat_mut(id).value = Some(reward);
            self.evals += 1;
            let better = match self.best {
                None => true,
                Some(b) => {
                    let bv = self.tree.stat(b).value.expect("best is evaluated");
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
