//! The round-based learning loop every algorithm implements.
//!
//! A learner alternates `pull(t)` and `receive_reward(t, r)` for
//! `t = 1, 2, ...`. The caller supplies the round index; each algorithm
//! validates it through a [`RoundClock`].

use crate::domain::Point;
use crate::error::{Error, Result};

/// Uniform interface of all X-armed bandit algorithms.
pub trait Algorithm: Send {
    /// Canonical registry name.
    fn name(&self) -> &'static str;

    /// Returns the point to evaluate at round `t`.
    fn pull(&mut self, t: u64) -> Result<Point>;

    /// Feeds back the (possibly noisy) evaluation of the point pulled at round `t`.
    fn receive_reward(&mut self, t: u64, reward: f64) -> Result<()>;

    /// Current recommendation.
    ///
    /// Cumulative-regret algorithms return the most recently pulled point;
    /// fixed-budget algorithms return their best candidate so far.
    fn get_last_point(&self) -> Result<Point>;

    /// Number of rewards the algorithm has consumed for its own search.
    ///
    /// Fixed-budget algorithms stop counting once their budget is spent and
    /// keep proposing their recommendation afterwards.
    fn evaluations(&self) -> u64;

    /// Text dump of the partition tree, see [`crate::partition::PartitionTree::dump`].
    fn dump_tree(&self) -> String;
}

/// Validates the `(pull, receive_reward)*` alternation and round numbering.
#[derive(Debug, Clone, Default)]
pub struct RoundClock {
    completed: u64,
    pending: Option<u64>,
}

impl RoundClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of fully completed rounds.
    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn pending(&self) -> Option<u64> {
        self.pending
    }

    pub fn begin_pull(&mut self, t: u64) -> Result<()> {
        if let Some(pending) = self.pending {
            return Err(Error::MissingReward { t, pending });
        }
        if t != self.completed + 1 {
            return Err(Error::OutOfOrder {
                expected: self.completed + 1,
                got: t,
            });
        }
        self.pending = Some(t);
        Ok(())
    }

    /// Checks a reward without consuming the pending round.
    pub fn check_reward(&self, t: u64, reward: f64) -> Result<()> {
        if self.pending != Some(t) {
            return Err(Error::UnmatchedReward { t });
        }
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward(reward));
        }
        Ok(())
    }

    pub fn finish_reward(&mut self) {
        debug_assert!(self.pending.is_some());
        self.pending = None;
        self.completed += 1;
    }
}
