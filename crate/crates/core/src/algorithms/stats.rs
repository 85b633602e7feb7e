use crate::error::{Error, Result};
use crate::partition::{NodeId, PartitionTree};

/// Smoothness pair `(nu, rho)`: a depth-`h` cell loses at most `nu * rho^h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    nu: f64,
    rho: f64,
}

impl Default for SmoothnessParams {
    fn default() -> Self {
        Self { nu: 1.0, rho: 0.5 }
    }
}

impl SmoothnessParams {
    pub fn new(nu: f64, rho: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::config(format!("nu = {nu} must be positive")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::config(format!("rho = {rho} must lie in (0, 1)")));
        }
        Ok(Self { nu, rho })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `nu * rho^h`.
    pub fn bias(&self, depth: usize) -> f64 {
        self.nu * self.rho.powi(depth as i32)
    }
}

/// Running count, mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanStats {
    pub fn update(&mut self, reward: f64) {
        self.count += 1;
        let delta = reward - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (reward - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance `m2 / T`; zero when unvisited.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    #[cfg(test)]
    pub(crate) fn from_parts(count: u64, mean: f64, m2: f64) -> Self {
        Self { count, mean, m2 }
    }
}

/// Index of the maximal score; ties go to the earliest candidate.
///
/// Callers pass candidates ordered by `(depth, index)` so ties resolve to the
/// lowest key. `+inf` compares equal to `+inf`.
pub(crate) fn argmax<I>(candidates: I) -> Option<NodeId>
where
    I: IntoIterator<Item = (NodeId, f64)>,
{
    let mut best: Option<(NodeId, f64)> = None;
    for (id, score) in candidates {
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((id, score));
        }
    }
    best.map(|(id, _)| id)
}

/// Like [`argmax`] but breaks ties explicitly on the node's `(depth, index)`.
pub(crate) fn argmax_by_key<S, I>(tree: &PartitionTree<S>, candidates: I) -> Option<NodeId>
where
    I: IntoIterator<Item = (NodeId, f64)>,
{
    let mut best: Option<(NodeId, f64)> = None;
    for (id, score) in candidates {
        best = match best {
            None => Some((id, score)),
            Some((bid, b)) => {
                if score > b || (score == b && tree.node(id).key() < tree.node(bid).key()) {
                    Some((id, score))
                } else {
                    Some((bid, b))
                }
            }
        };
    }
    best.map(|(id, _)| id)
}

/// Optimistic descent from the root.
///
/// At each internal node moves to the child with the larger B-value (left on
/// ties) and stops at a leaf or wherever `stop` holds. Returns the root path.
pub fn select_path<S>(
    tree: &PartitionTree<S>,
    bvalue: impl Fn(&S) -> f64,
    stop: impl Fn(NodeId) -> bool,
) -> Vec<NodeId> {
    let mut path = vec![tree.root()];
    let mut cur = tree.root();
    loop {
        let node = tree.node(cur);
        if node.is_leaf() || stop(cur) {
            return path;
        }
        cur = argmax(node.children().iter().map(|&c| (c, bvalue(tree.stat(c)))))
            .expect("internal node has children");
        path.push(cur);
    }
}

/// `B = U` at leaves, `B = min(U, max_children B)` elsewhere.
pub fn backup_bvalue(u: f64, children_b: impl IntoIterator<Item = f64>) -> f64 {
    let mut best: Option<f64> = None;
    for b in children_b {
        best = Some(best.map_or(b, |m: f64| m.max(b)));
    }
    match best {
        None => u,
        Some(m) => u.min(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_two_rewards() {
        let mut s = MeanStats::default();
        s.update(1.0);
        s.update(0.0);
        assert_eq!(s.count(), 2);
        assert_eq!(s.mean(), 0.5);
        assert_eq!(s.variance(), 0.25);
    }

    #[test]
    fn smoothness_validation() {
        assert!(SmoothnessParams::new(0.0, 0.5).is_err());
        assert!(SmoothnessParams::new(1.0, 1.0).is_err());
        assert!(SmoothnessParams::new(1.0, 0.0).is_err());
        let p = SmoothnessParams::new(2.0, 0.5).unwrap();
        assert_eq!(p.bias(0), 2.0);
        assert_eq!(p.bias(2), 0.5);
    }

    #[test]
    fn backup_examples() {
        assert_eq!(backup_bvalue(0.7, []), 0.7);
        assert_eq!(backup_bvalue(2.0, [1.2, 0.8]), 1.2);
        assert_eq!(backup_bvalue(2.0, [f64::INFINITY, 0.8]), 2.0);
    }
}
