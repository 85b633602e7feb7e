//! Shared helpers: naive reference implementations written without the
//! partition tree, and small drivers.
#![allow(dead_code)]

use xarmed::Algorithm;

/// Plays `rounds` rounds against a noiseless 1-D target and returns the
/// abscissae of the pulls that counted as evaluations.
pub fn replay(algo: &mut dyn Algorithm, rounds: u64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut xs = Vec::new();
    for t in 1..=rounds {
        let before = algo.evaluations();
        let x = algo.pull(t).unwrap();
        algo.receive_reward(t, f(x[0])).unwrap();
        if algo.evaluations() > before {
            xs.push(x[0]);
        }
    }
    xs
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    lo: f64,
    hi: f64,
    depth: usize,
    index: u128,
    value: f64,
}

impl Cell {
    fn children(&self) -> [Cell; 2] {
        let mid = 0.5 * (self.lo + self.hi);
        let child = |lo, hi, index| Cell {
            lo,
            hi,
            depth: self.depth + 1,
            index,
            value: f64::NAN,
        };
        [
            child(self.lo, mid, 2 * self.index - 1),
            child(mid, self.hi, 2 * self.index),
        ]
    }

    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// DOO on `[0, 1]` with midpoint splits: every step rescans all leaves.
pub fn naive_doo(budget: usize, nu: f64, rho: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let root = Cell {
        lo: 0.0,
        hi: 1.0,
        depth: 0,
        index: 1,
        value: f(0.5),
    };
    let mut leaves = vec![root];
    let mut xs = vec![0.5];
    while xs.len() < budget {
        let mut best = 0;
        for (k, c) in leaves.iter().enumerate() {
            let score = |c: &Cell| c.value + nu * rho.powi(c.depth as i32);
            let b = &leaves[best];
            if score(c) > score(b)
                || (score(c) == score(b) && (c.depth, c.index) < (b.depth, b.index))
            {
                best = k;
            }
        }
        let parent = leaves.remove(best);
        for mut child in parent.children() {
            if xs.len() == budget {
                break;
            }
            child.value = f(child.center());
            xs.push(child.center());
            leaves.push(child);
        }
    }
    xs
}

/// SequOOL on `[0, 1]`: open the root, then the `floor(h_max / h)` best cells of each depth.
pub fn naive_sequool(budget: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let harmonic: f64 = (1..=budget).map(|k| 1.0 / k as f64).sum();
    let h_max = (budget as f64 / harmonic).floor() as usize;
    let mut cells = vec![Cell {
        lo: 0.0,
        hi: 1.0,
        depth: 0,
        index: 1,
        value: f(0.5),
    }];
    let mut xs = vec![0.5];
    let open = |cells: &mut Vec<Cell>, xs: &mut Vec<f64>, parent: Cell| {
        for mut child in parent.children() {
            if xs.len() == budget {
                return;
            }
            child.value = f(child.center());
            xs.push(child.center());
            cells.push(child);
        }
    };
    let root = cells[0];
    open(&mut cells, &mut xs, root);
    for h in 1..=h_max {
        let mut layer: Vec<Cell> = cells.iter().copied().filter(|c| c.depth == h).collect();
        layer.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
        for c in layer.into_iter().take(h_max / h) {
            open(&mut cells, &mut xs, c);
        }
    }
    xs
}

pub const GRID_1D: usize = 1_000_000;
pub const GRID_2D: usize = 2000;

pub fn grid_max_1d(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=GRID_1D {
        let x = k as f64 / GRID_1D as f64;
        let v = f(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

pub fn ternary_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    f(0.5 * (lo + hi))
}

/// Newton's method on `x^2 + y - 11 = 0`, `x + y^2 - 7 = 0`.
pub fn himmelblau_root(mut x: f64, mut y: f64) -> (f64, f64) {
    for _ in 0..50 {
        let (g1, g2) = (x * x + y - 11.0, x + y * y - 7.0);
        let (a, b, c, d) = (2.0 * x, 1.0, 1.0, 2.0 * y);
        let det = a * d - b * c;
        x -= (d * g1 - b * g2) / det;
        y -= (a * g2 - c * g1) / det;
    }
    (x, y)
}
