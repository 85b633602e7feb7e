//! High Confidence Tree and its variance-adaptive variant VHCT.
//!
//! Both descend the tree by B-value while the current node has been sampled
//! at least `tau_h(t)` times, pull the node where the descent stops, and
//! expand a leaf once it reaches its threshold. Confidence terms depend on
//! `t` only through `t+ = 2^(floor(log2 t) + 1)`, so U-values are recomputed
//! over the whole tree only when `t` is a power of two and along the pulled
//! path otherwise.

use crate::algorithms::stats::{backup_bvalue, select_path, MeanStats, SmoothnessParams};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::{NodeId, Partition, PartitionTree};
use crate::protocol::{Algorithm, RoundClock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HctConfig {
    pub params: SmoothnessParams,
    pub c: f64,
    pub c1: f64,
    pub delta: f64,
}

impl HctConfig {
    /// Defaults `c = 0.1`, `delta = 0.01`, `c1 = (rho / (3 nu))^(1/8)`.
    pub fn new(params: SmoothnessParams) -> Self {
        Self {
            params,
            c: 0.1,
            c1: (params.rho() / (3.0 * params.nu())).powf(0.125),
            delta: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("c1", self.c1), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// `ln(1 / delta~(t))` with `delta~(t) = min(1, c1 delta / t+)`.
    pub fn log_inv_delta(&self, t: u64) -> f64 {
        let t_plus = t_plus(t) as f64;
        let delta_tilde = (self.c1 * self.delta / t_plus).min(1.0);
        -delta_tilde.ln()
    }
}

impl Default for HctConfig {
    fn default() -> Self {
        Self::new(SmoothnessParams::default())
    }
}

/// `2^(floor(log2 t) + 1)`.
pub fn t_plus(t: u64) -> u64 {
    let t = t.max(1);
    1u64 << (63 - t.leading_zeros() + 1).min(63)
}

/// Sampling threshold `ceil(c^2 L / (nu^2 rho^(2h)))` for a given `L = ln(1/delta~)`.
pub fn hct_tau_from_log(depth: usize, log_inv_delta: f64, cfg: &HctConfig) -> u64 {
    let p = &cfg.params;
    let scale = p.nu() * p.nu() * p.rho().powi(2 * depth as i32);
    let tau = (cfg.c * cfg.c * log_inv_delta / scale).ceil();
    // `as` saturates for huge thresholds at deep levels
    (tau as u64).max(1)
}

pub fn hct_tau(depth: usize, t: u64, cfg: &HctConfig) -> u64 {
    hct_tau_from_log(depth, cfg.log_inv_delta(t), cfg)
}

/// `mu + nu rho^h + sqrt(c^2 L / T)`.
pub fn hct_uvalue(stat: &MeanStats, depth: usize, log_inv_delta: f64, cfg: &HctConfig) -> f64 {
    if stat.count() == 0 {
        return f64::INFINITY;
    }
    let t = stat.count() as f64;
    stat.mean() + cfg.params.bias(depth) + (cfg.c * cfg.c * log_inv_delta / t).sqrt()
}

/// `mu + nu rho^h + sqrt(2 V L / T) + 3 b L / T`.
pub fn vhct_uvalue(
    stat: &MeanStats,
    depth: usize,
    log_inv_delta: f64,
    cfg: &HctConfig,
    reward_range: f64,
) -> f64 {
    if stat.count() == 0 {
        return f64::INFINITY;
    }
    let t = stat.count() as f64;
    stat.mean()
        + cfg.params.bias(depth)
        + (2.0 * stat.variance() * log_inv_delta / t).sqrt()
        + 3.0 * reward_range * log_inv_delta / t
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Variant {
    Hct,
    Vhct { reward_range: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HctNodeStat {
    pub base: MeanStats,
    pub u: f64,
    pub b: f64,
}

impl Default for HctNodeStat {
    fn default() -> Self {
        Self {
            base: MeanStats::default(),
            u: f64::INFINITY,
            b: f64::INFINITY,
        }
    }
}

#[derive(Debug)]
pub struct Hct {
    variant: Variant,
    cfg: HctConfig,
    tree: PartitionTree<HctNodeStat>,
    clock: RoundClock,
    log_inv_delta: f64,
    tau_cache: Vec<u64>,
    pending_path: Vec<NodeId>,
    last: Option<Point>,
}

impl Hct {
    pub fn new(domain: Domain, partition: Box<dyn Partition>, cfg: HctConfig) -> Result<Self> {
        Self::with_variant(domain, partition, cfg, Variant::Hct)
    }

    /// VHCT with rewards assumed to lie in a range of width `reward_range`.
    pub fn vhct(
        domain: Domain,
        partition: Box<dyn Partition>,
        cfg: HctConfig,
        reward_range: f64,
    ) -> Result<Self> {
        if !(reward_range > 0.0 && reward_range.is_finite()) {
            return Err(Error::config(format!(
                "b = {reward_range} must be positive"
            )));
        }
        Self::with_variant(domain, partition, cfg, Variant::Vhct { reward_range })
    }

    fn with_variant(
        domain: Domain,
        partition: Box<dyn Partition>,
        cfg: HctConfig,
        variant: Variant,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut tree = PartitionTree::new(domain, partition);
        tree.make_children(NodeId::ROOT)?;
        Ok(Self {
            variant,
            cfg,
            tree,
            clock: RoundClock::new(),
            log_inv_delta: cfg.log_inv_delta(1),
            tau_cache: Vec::new(),
            pending_path: Vec::new(),
            last: None,
        })
    }

    pub fn tree(&self) -> &PartitionTree<HctNodeStat> {
        &self.tree
    }

    pub fn config(&self) -> &HctConfig {
        &self.cfg
    }

    fn uvalue(&self, id: NodeId) -> f64 {
        let node = self.tree.node(id);
        match self.variant {
            Variant::Hct => {
                hct_uvalue(&node.stat.base, node.depth(), self.log_inv_delta, &self.cfg)
            }
            Variant::Vhct { reward_range } => vhct_uvalue(
                &node.stat.base,
                node.depth(),
                self.log_inv_delta,
                &self.cfg,
                reward_range,
            ),
        }
    }

    fn tau(&mut self, depth: usize) -> u64 {
        while self.tau_cache.len() <= depth {
            let h = self.tau_cache.len();
            self.tau_cache
                .push(hct_tau_from_log(h, self.log_inv_delta, &self.cfg));
        }
        self.tau_cache[depth]
    }

    fn update_node(&mut self, id: NodeId) {
        let u = self.uvalue(id);
        let node = self.tree.node(id);
        let b = backup_bvalue(u, node.children().iter().map(|&c| self.tree.stat(c).b));
        let stat = self.tree.stat_mut(id);
        stat.u = u;
        stat.b = b;
    }

    /// Full-tree U/B recomputation when `t` enters a new `t+` epoch.
    ///
    /// Returns whether a refresh happened.
    pub fn refresh(&mut self, t: u64) -> bool {
        if !t.is_power_of_two() {
            return false;
        }
        self.log_inv_delta = self.cfg.log_inv_delta(t);
        self.tau_cache.clear();
        for id in self.tree.ids().rev() {
            self.update_node(id);
        }
        true
    }
}

impl Algorithm for Hct {
    fn name(&self) -> &'static str {
        match self.variant {
            Variant::Hct => "hct",
            Variant::Vhct { .. } => "vhct",
        }
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        self.refresh(t);
        let max_depth = self.tree.max_depth();
        let taus: Vec<u64> = (0..=max_depth).map(|h| self.tau(h)).collect();
        let tree = &self.tree;
        let path = select_path(
            tree,
            |s| s.b,
            |id| {
                let node = tree.node(id);
                node.stat.base.count() < taus[node.depth()]
            },
        );
        let target = *path.last().expect("path contains the root");
        let point = self.tree.node(target).representative().clone();
        self.pending_path = path;
        self.last = Some(point.clone());
        Ok(point)
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        let path = std::mem::take(&mut self.pending_path);
        for &id in &path {
            self.tree.stat_mut(id).base.update(reward);
        }
        let target = *path.last().expect("pending path");
        let depth = self.tree.node(target).depth();
        if self.tree.node(target).is_leaf()
            && self.tree.stat(target).base.count() >= self.tau(depth)
        {
            match self.tree.make_children(target) {
                Ok(_) | Err(Error::Unsplittable { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        for &id in path.iter().rev() {
            self.update_node(id);
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

    fn hct() -> Hct {
        Hct::new(
            Domain::unit(1),
            Box::new(BinaryPartition),
            HctConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn tau_golden() {
        let cfg = HctConfig::default();
        let log = 1000f64.ln();
        assert_eq!(hct_tau_from_log(0, log, &cfg), 1);
        assert_eq!(hct_tau_from_log(2, log, &cfg), 2);
        for h in 0..20 {
            assert!(hct_tau(h + 1, 37, &cfg) >= hct_tau(h, 37, &cfg));
        }
    }

    #[test]
    fn t_plus_epochs() {
        assert_eq!(t_plus(1), 2);
        assert_eq!(t_plus(7), 8);
        assert_eq!(t_plus(8), 16);
        assert_eq!(t_plus(15), 16);
        assert_eq!(t_plus(16), 32);
    }

    #[test]
    fn default_c1() {
        let cfg = HctConfig::default();
        assert!((cfg.c1 - (1.0f64 / 6.0).powf(0.125)).abs() < 1e-15);
    }

    #[test]
    fn refresh_only_on_epoch_change() {
        let mut h = hct();
        assert!(h.refresh(8));
        assert!(!h.refresh(10));
        assert!(h.refresh(16));
    }

    #[test]
    fn vhct_width_examples() {
        let cfg = HctConfig::new(SmoothnessParams::new(1.0, 0.5).unwrap());
        // T = 100 constant rewards: only the range term remains.
        let flat = MeanStats::from_parts(100, 0.0, 0.0);
        let w = vhct_uvalue(&flat, 0, 7.0, &cfg, 1.0) - cfg.params.bias(0);
        assert!((w - 0.21).abs() < 1e-12);
        // variance 0.25 at T = 4: m2 = 1
        let noisy = MeanStats::from_parts(4, 0.0, 1.0);
        let w = vhct_uvalue(&noisy, 3, 7.0, &cfg, 1.0) - cfg.params.bias(3);
        assert!((w - (0.9354 + 5.25)).abs() < 1e-4);
    }

    #[test]
    fn vhct_tighter_than_hct_for_constant_rewards() {
        let cfg = HctConfig::default();
        for t in [10_000u64, 50_000, 1_000_000] {
            let s = MeanStats::from_parts(t, 0.5, 0.0);
            assert!(vhct_uvalue(&s, 2, 7.0, &cfg, 1.0) < hct_uvalue(&s, 2, 7.0, &cfg));
        }
    }

    #[test]
    fn first_pull_depth_at_most_one() {
        let mut h = hct();
        let p = h.pull(1).unwrap();
        let depth = h.tree().node(*h.pending_path.last().unwrap()).depth();
        assert!(depth <= 1);
        assert!(Domain::unit(1).contains(&p));
        h.receive_reward(1, 0.3).unwrap();
        assert_eq!(h.get_last_point().unwrap(), p);
    }

    #[test]
    fn backup_holds_after_refresh() {
        let mut h = hct();
        for t in 1..=64 {
            let x = h.pull(t).unwrap();
            h.receive_reward(t, 1.0 - (x[0] - 0.3).abs()).unwrap();
        }
        h.refresh(64);
        for id in h.tree().ids() {
            let node = h.tree().node(id);
            let expect = backup_bvalue(
                node.stat.u,
                node.children().iter().map(|&c| h.tree().stat(c).b),
            );
            assert_eq!(node.stat.b, expect);
            let child_sum: u64 = node
                .children()
                .iter()
                .map(|&c| h.tree().stat(c).base.count())
                .sum();
            assert!(node.stat.base.count() >= child_sum);
        }
    }
}
