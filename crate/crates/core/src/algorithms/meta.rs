//! Meta-algorithms that run a grid of subroutine instances with different
//! smoothness parameters: POO (round-robin HOO instances) and GPO/PCT
//! (sequential instances followed by cross-validation of their recommendations).

use crate::algorithms::hct::{Hct, HctConfig};
use crate::algorithms::hoo::Hoo;
use crate::algorithms::stats::{MeanStats, SmoothnessParams};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::partition::PartitionKind;
use crate::protocol::{Algorithm, RoundClock};

/// Number of grid instances `max(1, ceil(ln(n / ln n) / 2))`.
pub fn grid_size(budget: u64) -> usize {
    if budget < 3 {
        return 1;
    }
    let n = budget as f64;
    let inner = n / n.ln();
    ((0.5 * inner.ln()).ceil() as usize).max(1)
}

/// Instances `rho_i = rho_max^(2N / (2i + 1))`, `nu_i = nu_max` for `N = grid_size(n)`.
pub fn poo_grid(budget: u64, rho_max: f64, nu_max: f64) -> Result<Vec<SmoothnessParams>> {
    poo_grid_with_size(grid_size(budget), rho_max, nu_max)
}

pub fn poo_grid_with_size(size: usize, rho_max: f64, nu_max: f64) -> Result<Vec<SmoothnessParams>> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::config(format!(
            "rho_max = {rho_max} must lie in (0, 1)"
        )));
    }
    let n = size as f64;
    (0..size)
        .map(|i| SmoothnessParams::new(nu_max, rho_max.powf(2.0 * n / (2.0 * i as f64 + 1.0))))
        .collect()
}

/// Algorithm family run inside a meta-algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subroutine {
    Hoo,
    /// HCT with the given `c` and `delta`; `c1` follows each instance's `(nu, rho)`.
    Hct {
        c: f64,
        delta: f64,
    },
}

impl Subroutine {
    fn build(
        self,
        domain: &Domain,
        partition: PartitionKind,
        seed: u64,
        params: SmoothnessParams,
    ) -> Result<Box<dyn Algorithm>> {
        let scheme = partition.build(seed);
        Ok(match self {
            Subroutine::Hoo => Box::new(Hoo::new(domain.clone(), scheme, params)),
            Subroutine::Hct { c, delta } => {
                let cfg = HctConfig {
                    c,
                    delta,
                    ..HctConfig::new(params)
                };
                Box::new(Hct::new(domain.clone(), scheme, cfg)?)
            }
        })
    }
}

fn instance_seed(seed: u64, i: usize) -> u64 {
    crate::derive_seed(seed, 0x100 + i as u64)
}

struct Instance {
    params: SmoothnessParams,
    algo: Box<dyn Algorithm>,
    rounds: u64,
    rewards: MeanStats,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("params", &self.params)
            .field("algo", &self.algo.name())
            .field("rounds", &self.rounds)
            .finish()
    }
}

fn build_instances(
    sub: Subroutine,
    grid: Vec<SmoothnessParams>,
    domain: &Domain,
    partition: PartitionKind,
    seed: u64,
) -> Result<Vec<Instance>> {
    grid.into_iter()
        .enumerate()
        .map(|(i, params)| {
            Ok(Instance {
                params,
                algo: sub.build(domain, partition, instance_seed(seed, i), params)?,
                rounds: 0,
                rewards: MeanStats::default(),
            })
        })
        .collect()
}

/// Index of the highest mean among entries with at least one sample; lowest index wins ties.
fn best_mean<'a>(stats: impl IntoIterator<Item = &'a MeanStats>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in stats.into_iter().enumerate() {
        if s.count() == 0 {
            continue;
        }
        if best.is_none_or(|(_, m)| s.mean() > m) {
            best = Some((i, s.mean()));
        }
    }
    best.map(|(i, _)| i)
}

/// Parallel Optimistic Optimization over HOO instances.
#[derive(Debug)]
pub struct Poo {
    budget: u64,
    instances: Vec<Instance>,
    clock: RoundClock,
    pending: Option<usize>,
    evals: u64,
}

impl Poo {
    pub fn new(
        domain: Domain,
        partition: PartitionKind,
        seed: u64,
        budget: u64,
        rho_max: f64,
        nu_max: f64,
    ) -> Result<Self> {
        let grid = poo_grid(budget, rho_max, nu_max)?;
        Ok(Self {
            budget,
            instances: build_instances(Subroutine::Hoo, grid, &domain, partition, seed)?,
            clock: RoundClock::new(),
            pending: None,
            evals: 0,
        })
    }

    pub fn grid(&self) -> Vec<SmoothnessParams> {
        self.instances.iter().map(|i| i.params).collect()
    }

    fn best_instance(&self) -> Option<usize> {
        best_mean(self.instances.iter().map(|i| &i.rewards))
    }
}

impl Algorithm for Poo {
    fn name(&self) -> &'static str {
        "poo"
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        if self.evals < self.budget {
            let i = (self.evals % self.instances.len() as u64) as usize;
            let inst = &mut self.instances[i];
            let point = inst.algo.pull(inst.rounds + 1)?;
            self.pending = Some(i);
            return Ok(point);
        }
        self.pending = None;
        self.get_last_point()
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        if let Some(i) = self.pending.take() {
            let inst = &mut self.instances[i];
            inst.algo.receive_reward(inst.rounds + 1, reward)?;
            inst.rounds += 1;
            inst.rewards.update(reward);
            self.evals += 1;
        }
        self.clock.finish_reward();
        Ok(())
    }

    fn get_last_point(&self) -> Result<Point> {
        let i = self.best_instance().ok_or(Error::NoRecommendation)?;
        self.instances[i].algo.get_last_point()
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }

    fn dump_tree(&self) -> String {
        let i = self.best_instance().unwrap_or(0);
        self.instances[i].algo.dump_tree()
    }
}

/// General Parallel Optimization: each instance runs `n / (2N)` rounds, then
/// each instance's recommendation is re-evaluated `n / (2N)` times and the
/// best average wins. With an HCT subroutine this is PCT.
#[derive(Debug)]
pub struct Gpo {
    name: &'static str,
    per_phase: u64,
    instances: Vec<Instance>,
    candidates: Vec<Point>,
    validation: Vec<MeanStats>,
    clock: RoundClock,
    pending: Option<Step>,
    evals: u64,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Explore(usize),
    Validate(usize),
}

impl Gpo {
    pub fn new(
        domain: Domain,
        partition: PartitionKind,
        seed: u64,
        budget: u64,
        rho_max: f64,
        nu_max: f64,
        sub: Subroutine,
    ) -> Result<Self> {
        let grid = poo_grid(budget, rho_max, nu_max)?;
        let size = grid.len() as u64;
        if budget < 2 * size {
            return Err(Error::BudgetTooSmall {
                budget,
                reason: format!(
                    "needs at least {} evaluations for {size} instances",
                    2 * size
                ),
            });
        }
        Ok(Self {
            name: match sub {
                Subroutine::Hoo => "gpo",
                Subroutine::Hct { .. } => "pct",
            },
            per_phase: budget / (2 * size),
            instances: build_instances(sub, grid, &domain, partition, seed)?,
            candidates: Vec::new(),
            validation: Vec::new(),
            clock: RoundClock::new(),
            pending: None,
            evals: 0,
        })
    }

    pub fn grid(&self) -> Vec<SmoothnessParams> {
        self.instances.iter().map(|i| i.params).collect()
    }

    fn budget(&self) -> u64 {
        2 * self.per_phase * self.instances.len() as u64
    }

    fn explore_len(&self) -> u64 {
        self.per_phase * self.instances.len() as u64
    }

    /// Cross-validated recommendation once the whole budget is spent.
    pub fn final_choice(&self) -> Option<(Point, f64)> {
        if self.evals < self.budget() {
            return None;
        }
        best_mean(&self.validation).map(|i| (self.candidates[i].clone(), self.validation[i].mean()))
    }
}

impl Algorithm for Gpo {
    fn name(&self) -> &'static str {
        self.name
    }

    fn pull(&mut self, t: u64) -> Result<Point> {
        self.clock.begin_pull(t)?;
        let e = self.evals;
        if e < self.explore_len() {
            let i = (e / self.per_phase) as usize;
            let inst = &mut self.instances[i];
            let point = inst.algo.pull(inst.rounds + 1)?;
            self.pending = Some(Step::Explore(i));
            return Ok(point);
        }
        if e < self.budget() {
            if self.candidates.is_empty() {
                self.candidates = self
                    .instances
                    .iter()
                    .map(|i| i.algo.get_last_point())
                    .collect::<Result<_>>()?;
                self.validation = vec![MeanStats::default(); self.candidates.len()];
            }
            let j = ((e - self.explore_len()) / self.per_phase) as usize;
            self.pending = Some(Step::Validate(j));
            return Ok(self.candidates[j].clone());
        }
        self.pending = None;
        self.get_last_point()
    }

    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()> {
        self.clock.check_reward(t, reward)?;
        match self.pending.take() {
            Some(Step::Explore(i)) => {
                let inst = &mut self.instances[i];
                inst.algo.receive_reward(inst.rounds + 1, reward)?;
                inst.rounds += 1;
                inst.rewards.update(reward);
                self.evals += 1;
            }
            Some(Step::Validate(j)) => {
                self.validation[j].update(reward);
                self.evals += 1;
            }
            None => {}
        }
        self.clock.finish_reward();
        Ok(())
    }

    fn get_last_point(&self) -> Result<Point> {
        if let Some(j) = best_mean(&self.validation) {
            return Ok(self.candidates[j].clone());
        }
        // still exploring: the instance that ran most recently
        let active = self
            .instances
            .iter()
            .rposition(|i| i.rounds > 0)
            .ok_or(Error::NoRecommendation)?;
        self.instances[active].algo.get_last_point()
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }

    fn dump_tree(&self) -> String {
        let i = best_mean(&self.validation)
            .or_else(|| best_mean(self.instances.iter().map(|i| &i.rewards)))
            .unwrap_or(0);
        self.instances[i].algo.dump_tree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_golden() {
        assert_eq!(grid_size(50), 2);
        let g = poo_grid(50, 0.9, 1.0).unwrap();
        assert!((g[0].rho() - 0.65610).abs() < 1e-5);
        assert!((g[1].rho() - 0.868_940).abs() < 1e-5);
        let single = poo_grid_with_size(1, 0.9, 1.0).unwrap();
        assert!((single[0].rho() - 0.81).abs() < 1e-12);
    }

    #[test]
    fn grid_rhos_increase_below_rho_max() {
        for n in [10u64, 100, 1000, 100_000] {
            let g = poo_grid(n, 0.9, 2.0).unwrap();
            assert!(g.iter().all(|p| p.rho() < 0.9 && p.nu() == 2.0));
            assert!(g.windows(2).all(|w| w[0].rho() < w[1].rho()));
        }
    }

    #[test]
    fn gpo_rejects_tiny_budget() {
        let r = Gpo::new(
            Domain::unit(1),
            PartitionKind::Binary,
            0,
            1,
            0.9,
            1.0,
            Subroutine::Hoo,
        );
        assert!(matches!(r, Err(Error::BudgetTooSmall { .. })));
    }

    #[test]
    fn gpo_on_constant_objective() {
        let mut g = Gpo::new(
            Domain::unit(1),
            PartitionKind::Binary,
            0,
            20,
            0.9,
            1.0,
            Subroutine::Hoo,
        )
        .unwrap();
        assert_eq!(g.grid().len(), 1);
        for t in 1..=20 {
            g.pull(t).unwrap();
            g.receive_reward(t, 0.25).unwrap();
        }
        assert_eq!(g.evaluations(), 20);
        let (_, avg) = g.final_choice().unwrap();
        assert_eq!(avg, 0.25);
    }

    #[test]
    fn poo_round_robin_respects_budget() {
        let mut p = Poo::new(Domain::unit(1), PartitionKind::Binary, 3, 100, 0.9, 1.0).unwrap();
        let n = p.instances.len() as u64;
        for t in 1..=150 {
            let x = p.pull(t).unwrap();
            p.receive_reward(t, 1.0 - x[0]).unwrap();
        }
        assert_eq!(p.evaluations(), 100);
        for inst in &p.instances {
            assert!(inst.rounds == 100 / n || inst.rounds == 100 / n + 1);
        }
    }
}
