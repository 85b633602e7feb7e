//! Hierarchical Optimistic Optimization.

use crate::algorithms::stats::{backup_bvalue, select_path, MeanStats, SmoothnessParams};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HooNodeStat {
    pub base: MeanStats,
    pub u: f64,
    pub b: f64,
}

impl Default for HooNodeStat {
    fn default() -> Self {
        Self {
            base: MeanStats::default(),
            u: f64::INFINITY,
            b: f64::INFINITY,
        }
    }
}

/// `mu + sqrt(2 ln n / T) + nu rho^h`, `+inf` for an unvisited node.
pub fn hoo_uvalue(
    stat: &MeanStats,
    depth: usize,
    n: u64,
    params: &SmoothnessParams,
) -> Result<f64> {
    let count = stat.count();
    if n < count {
        return Err(Error::config(format!(
            "round count {n} is smaller than the node visit count {count}"
        )));
    }
    if count == 0 {
        return Ok(f64::INFINITY);
    }
    let width = (2.0 * (n as f64).ln() / count as f64).sqrt();
    Ok(stat.mean() + width + params.bias(depth))
}

#[derive(Debug)]
pub struct Hoo {
    params: SmoothnessParams,
    tree: PartitionTree<HooNodeStat>,
    clock: RoundClock,
    pending: Option<NodeId>,
    last: Option<Point>,
}

impl Hoo {
    pub fn new(domain: Domain, partition: Box<dyn Partition>, params: SmoothnessParams) -> Self {
        Self {
            params,
            tree: PartitionTree::new(domain, partition),
            clock: RoundClock::new(),
            pending: None,
            last: None,
        }
    }

    pub fn tree(&self) -> &PartitionTree<HooNodeStat> {
        &self.tree
    }

    /// Recomputes every U-value with `n` rounds and backs up B-values bottom-up.
    fn refresh(&mut self, n: u64) -> Result<()> {
        for id in self.tree.ids().rev() {
            let node = self.tree.node(id);
            let u = hoo_uvalue(&node.stat.base, node.depth(), n, &self.params)?;
            let b = backup_bvalue(u, node.children().iter().map(|&c| self.tree.stat(c).b));
            let stat = self.tree.stat_mut(id);
            stat.u = u;
            stat.b = b;
        }
        Ok(())
    }
}

impl Algorithm for Hoo {
    fn name(&self) -> &'static str {
        "hoo"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        self.refresh(t)?;
        let path = select_path(&self.tree, |s| s.b, |_| false);
        let leaf = *path.last().expect("path contains the root");
        let point = self.tree.node(leaf).representative().clone();
        self.pending = Some(leaf);
        self.last = Some(point.clone());
        Ok(point)
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        let leaf = self.pending.take().expect("pending pull");
        for id in self.tree.path_to(leaf) {
            self.tree.stat_mut(id).base.update(reward);
        }
        if self.tree.node(leaf).is_leaf() {
            match self.tree.make_children(leaf) {
                Ok(_) | Err(Error::Unsplittable { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        self.clock.finish_reward();
        Ok(())
    }

    fn get_last_point(&self) -> Result<Point> {
        if self.clock.completed() == 0 {
            return Err(Error::NoRecommendation);
        }
        self.last.clone().ok_or(Error::NoRecommendation)
    }

    fn evaluations(&self) -> u64 {
        self.clock.completed()
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
    fn uvalue_golden() {
        let p = SmoothnessParams::default();
        assert_eq!(
            hoo_uvalue(&MeanStats::default(), 3, 10, &p).unwrap(),
            f64::INFINITY
        );
        let stat = MeanStats::from_parts(4, 0.5, 0.0);
        let u = hoo_uvalue(&stat, 1, 16, &p).unwrap();
        assert!((u - 2.17741).abs() < 1e-5, "{u}");
        assert!(hoo_uvalue(&stat, 1, 3, &p).is_err());
    }

    #[test]
    fn uvalue_decreases_in_count_and_increases_in_rounds() {
        let p = SmoothnessParams::default();
        let u = |t: u64, n: u64| hoo_uvalue(&MeanStats::from_parts(t, 0.3, 0.0), 2, n, &p).unwrap();
        for t in 1..50 {
            assert!(u(t + 1, 100) < u(t, 100));
            assert!(u(t, 101) > u(t, 100));
        }
    }

    #[test]
    fn first_pulls_follow_root_then_left_child() {
        let mut hoo = Hoo::new(
            Domain::unit(1),
            Box::new(BinaryPartition),
            SmoothnessParams::default(),
        );
        assert_eq!(hoo.pull(1).unwrap().coords(), &[0.5]);
        hoo.receive_reward(1, 0.4).unwrap();
        assert_eq!(hoo.pull(2).unwrap().coords(), &[0.25]);
        hoo.receive_reward(2, 0.1).unwrap();
        assert_eq!(hoo.pull(3).unwrap().coords(), &[0.75]);
        hoo.receive_reward(3, 0.9).unwrap();
        let root = hoo.tree().stat(hoo.tree().root());
        assert_eq!(root.base.count(), 3);
        assert_eq!(hoo.get_last_point().unwrap().coords(), &[0.75]);
    }

    #[test]
    fn nan_reward_leaves_state_untouched() {
        let mut hoo = Hoo::new(
            Domain::unit(1),
            Box::new(BinaryPartition),
            SmoothnessParams::default(),
        );
        hoo.pull(1).unwrap();
        assert!(hoo.receive_reward(1, f64::NAN).is_err());
        assert_eq!(hoo.tree().len(), 1);
        assert_eq!(hoo.tree().stat(hoo.tree().root()).base.count(), 0);
        hoo.receive_reward(1, 0.2).unwrap();
        assert!(hoo.pull(2).is_ok());
    }
}
