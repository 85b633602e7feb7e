//! X-armed bandit algorithms over hierarchical partitions of box domains.
//!
//! Every algorithm implements [`Algorithm`]: a caller alternates
//! [`Algorithm::pull`] and [`Algorithm::receive_reward`] for rounds
//! `t = 1, 2, ...`:
//!
//! ```
//! use xarmed::{Algorithm, Domain, Garland, Hct, HctConfig, Objective, BinaryPartition};
//!
//! let target = Garland;
//! let mut algo = Hct::new(Domain::unit(1), Box::new(BinaryPartition), HctConfig::default()).unwrap();
//! for t in 1..=1000 {
//!     let point = algo.pull(t).unwrap();
//!     let reward = target.f(&point).unwrap();
//!     algo.receive_reward(t, reward).unwrap();
//! }
//! ```

pub mod algorithms;
pub mod bench;
pub mod cli;
pub mod domain;
pub mod error;
pub mod objectives;
pub mod partition;
pub mod protocol;

pub use algorithms::{
    build_algorithm, BuildContext, Doo, Gpo, Hct, HctConfig, Hoo, Poo, SequOol, SmoothnessParams,
    StoSoo, StroquOol, ALGORITHM_NAMES,
};
pub use domain::{Domain, Interval, Point};
pub use error::{Error, Result};
pub use objectives::{
    objective_from_name, DoubleSine, Garland, Himmelblau, Noise, NoiseWrapper, Objective,
    GARLAND_FMAX, OBJECTIVE_NAMES,
};
pub use partition::{
    BinaryPartition, NodeId, PNode, Partition, PartitionKind, PartitionTree, RandomBinaryPartition,
};
pub use protocol::{Algorithm, RoundClock};

/// Independent 64-bit stream seed derived from a run seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
