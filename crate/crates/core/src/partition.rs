//! Hierarchical partitions of a box domain.
//!
//! A [`PartitionTree`] is an arena of [`PNode`]s rooted at the full domain.
//! Node `(h, i)` is split by a [`Partition`] scheme into children
//! `(h + 1, 2i - 1)` and `(h + 1, 2i)`. Each algorithm attaches its own
//! per-node statistics through the `S` parameter.
//!
//! Cells use a half-open membership convention: a point on a split boundary
//! belongs to the upper child, and the upper face of the domain itself is
//! closed.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Point};
use crate::error::{Error, Result};

/// Depth cap; keeps binary `(h, i)` indices inside `u128`.
pub const MAX_DEPTH: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn get(self) -> usize {
        self.0
    }
}

/// Splitting scheme: picks the dimension and coordinate at which a cell is cut in two.
pub trait Partition: Send + fmt::Debug {
    fn name(&self) -> &'static str;

    fn split_point(&mut self, cell: &Domain) -> (usize, f64);
}

/// Midpoint split of the widest dimension.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryPartition;

impl Partition for BinaryPartition {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn split_point(&mut self, cell: &Domain) -> (usize, f64) {
        let d = cell.widest_dim();
        (d, cell.interval(d).center())
    }
}

/// Split of the widest dimension at a uniform draw from the middle 80% of its interval.
#[derive(Debug, Clone)]
pub struct RandomBinaryPartition {
    rng: ChaCha8Rng,
}

impl RandomBinaryPartition {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Partition for RandomBinaryPartition {
    fn name(&self) -> &'static str {
        "random-binary"
    }

    fn split_point(&mut self, cell: &Domain) -> (usize, f64) {
        let d = cell.widest_dim();
        let iv = cell.interval(d);
        let u: f64 = self.rng.random();
        (d, iv.low + iv.width() * (0.1 + 0.8 * u))
    }
}

/// Registry entry for partition schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Binary,
    RandomBinary,
}

impl PartitionKind {
    pub const NAMES: [&'static str; 2] = ["binary", "random-binary"];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "binary" => Ok(Self::Binary),
            "random-binary" | "randombinary" | "random_binary" => Ok(Self::RandomBinary),
            _ => Err(Error::UnknownName {
                kind: "partition",
                name: name.to_string(),
                valid: Self::NAMES.to_vec(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Binary => "binary",
            Self::RandomBinary => "random-binary",
        }
    }

    /// Instantiates the scheme; `seed` only matters for random partitions.
    pub fn build(self, seed: u64) -> Box<dyn Partition> {
        match self {
            Self::Binary => Box::new(BinaryPartition),
            Self::RandomBinary => Box::new(RandomBinaryPartition::new(seed)),
        }
    }
}

/// One cell of the partition.
#[derive(Debug, Clone)]
pub struct PNode<S> {
    depth: usize,
    index: u128,
    cell: Domain,
    representative: Point,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    split: Option<(usize, f64)>,
    pub stat: S,
}

impl<S> PNode<S> {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn index(&self) -> u128 {
        self.index
    }

    /// `(depth, index)` key used for deterministic tie-breaking.
    pub fn key(&self) -> (usize, u128) {
        (self.depth, self.index)
    }

    pub fn cell(&self) -> &Domain {
        &self.cell
    }

    /// Center of the cell.
    pub fn representative(&self) -> &Point {
        &self.representative
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

pub struct PartitionTree<S> {
    domain: Domain,
    scheme: Box<dyn Partition>,
    nodes: Vec<PNode<S>>,
    layers: Vec<Vec<NodeId>>,
}

impl<S: fmt::Debug> fmt::Debug for PartitionTree<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartitionTree")
            .field("domain", &self.domain)
            .field("scheme", &self.scheme.name())
            .field("nodes", &self.nodes.len())
            .field("max_depth", &self.max_depth())
            .finish()
    }
}

impl<S: Default> PartitionTree<S> {
    pub fn new(domain: Domain, scheme: Box<dyn Partition>) -> Self {
        let root = PNode {
            depth: 0,
            index: 1,
            representative: domain.center(),
            cell: domain.clone(),
            parent: None,
            children: Vec::new(),
            split: None,
            stat: S::default(),
        };
        Self {
            domain,
            scheme,
            nodes: vec![root],
            layers: vec![vec![NodeId::ROOT]],
        }
    }

    /// Splits a leaf into two children and returns their ids in index order.
    pub fn make_children(&mut self, id: NodeId) -> Result<[NodeId; 2]> {
        let parent = &self.nodes[id.0];
        let (depth, index) = parent.key();
        if !parent.children.is_empty() {
            return Err(Error::AlreadySplit { depth, index });
        }
        if depth + 1 > MAX_DEPTH {
            return Err(Error::Unsplittable { depth, index });
        }
        let (d, at) = self.scheme.split_point(&parent.cell);
        let (lower, upper) = parent
            .cell
            .split(d, at)
            .map_err(|_| Error::Unsplittable { depth, index })?;

        let first = NodeId(self.nodes.len());
        let ids = [first, NodeId(first.0 + 1)];
        for (k, cell) in [lower, upper].into_iter().enumerate() {
            self.nodes.push(PNode {
                depth: depth + 1,
                index: 2 * index - 1 + k as u128,
                representative: cell.center(),
                cell,
                parent: Some(id),
                children: Vec::new(),
                split: None,
                stat: S::default(),
            });
        }
        let parent = &mut self.nodes[id.0];
        parent.children = ids.to_vec();
        parent.split = Some((d, at));

        if self.layers.len() == depth + 1 {
            self.layers.push(Vec::new());
        }
        let layer = &mut self.layers[depth + 1];
        let nodes = &self.nodes;
        let pos = layer.partition_point(|n| nodes[n.0].index < 2 * index - 1);
        layer.splice(pos..pos, ids);
        Ok(ids)
    }

    /// Splits every node at the current maximum depth.
    ///
    /// Cells too small to split are skipped.
    pub fn deepen(&mut self) {
        let deepest = self.layers[self.max_depth()].clone();
        for id in deepest {
            match self.make_children(id) {
                Ok(_) | Err(Error::Unsplittable { .. }) => {}
                Err(e) => unreachable!("deepest layer node already split: {e}"),
            }
        }
    }
}

impl<S> PartitionTree<S> {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn scheme_name(&self) -> &'static str {
        self.scheme.name()
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn node(&self, id: NodeId) -> &PNode<S> {
        &self.nodes[id.0]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut PNode<S> {
        &mut self.nodes[id.0]
    }

    pub fn stat(&self, id: NodeId) -> &S {
        &self.nodes[id.0].stat
    }

    pub fn stat_mut(&mut self, id: NodeId) -> &mut S {
        &mut self.nodes[id.0].stat
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All node ids in creation order; parents always precede their children.
    pub fn ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn max_depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Nodes grouped by depth, each layer in index order.
    pub fn get_node_list(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn layer(&self, depth: usize) -> &[NodeId] {
        self.layers.get(depth).map_or(&[], Vec::as_slice)
    }

    /// Ids from the root down to `id`, inclusive.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur.0].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Half-open cell membership; the domain's own upper faces are closed.
    pub fn cell_contains(&self, id: NodeId, x: &[f64]) -> bool {
        let cell = &self.nodes[id.0].cell;
        x.len() == cell.dim()
            && cell
                .intervals()
                .iter()
                .zip(self.domain.intervals())
                .zip(x)
                .all(|((c, dom), &v)| {
                    c.low <= v && (v < c.high || (v == c.high && c.high == dom.high))
                })
    }

    /// The depth-`depth` node whose cell contains `x`, if that depth exists along its path.
    pub fn locate(&self, x: &[f64], depth: usize) -> Option<NodeId> {
        if !self.domain.contains(x) {
            return None;
        }
        let mut cur = NodeId::ROOT;
        while self.nodes[cur.0].depth < depth {
            let node = &self.nodes[cur.0];
            let (d, at) = node.split?;
            cur = if x[d] < at {
                node.children[0]
            } else {
                node.children[1]
            };
        }
        Some(cur)
    }

    /// One line per node, `h,i,low_1,high_1,...,low_d,high_d`, depth-major.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            for id in layer {
                let node = &self.nodes[id.0];
                let _ = write!(out, "{},{}", node.depth, node.index);
                for iv in node.cell.intervals() {
                    let _ = write!(out, ",{},{}", iv.low, iv.high);
                }
                out.push('\n');
            }
        }
        out
    }
}
