//! The ten X-armed bandit algorithms and their name registry.
//!
//! | name        | objective  | noise      |
//! |-------------|------------|------------|
//! | `hoo`       | cumulative | stochastic |
//! | `doo`       | simple     | noiseless  |
//! | `stosoo`    | simple     | stochastic |
//! | `hct`       | cumulative | stochastic |
//! | `poo`       | simple     | stochastic |
//! | `gpo`       | simple     | stochastic |
//! | `pct`       | simple     | stochastic |
//! | `sequool`   | simple     | noiseless  |
//! | `stroquool` | simple     | stochastic |
//! | `vhct`      | cumulative | stochastic |
//!
//! Noiseless algorithms accept noisy rewards but lose their guarantees.

pub mod doo;
pub mod hct;
pub mod hoo;
pub mod meta;
pub mod sequool;
pub mod stats;
pub mod stosoo;
pub mod stroquool;

use std::collections::BTreeMap;

pub use doo::{doo_score, Doo};
pub use hct::{hct_tau, hct_tau_from_log, hct_uvalue, vhct_uvalue, Hct, HctConfig};
pub use hoo::{hoo_uvalue, Hoo};
pub use meta::{grid_size, poo_grid, poo_grid_with_size, Gpo, Poo, Subroutine};
pub use sequool::{harmonic, sequool_schedule, SequOol};
pub use stats::{backup_bvalue, select_path, MeanStats, SmoothnessParams};
pub use stosoo::{stosoo_bvalue, StoSoo, StoSooConfig};
pub use stroquool::{stroquool_schedule, StroquOol, StroquoolPlan};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::partition::PartitionKind;
use crate::protocol::Algorithm;

pub const ALGORITHM_NAMES: [&str; 10] = [
    "hoo",
    "doo",
    "stosoo",
    "hct",
    "poo",
    "gpo",
    "pct",
    "sequool",
    "stroquool",
    "vhct",
];

/// Algorithms that plan against a known budget `n`.
pub const FIXED_BUDGET: [&str; 7] = ["doo", "stosoo", "poo", "gpo", "pct", "sequool", "stroquool"];

/// Hyperparameter keys accepted by each algorithm.
pub fn parameter_keys(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "hoo" => &["nu", "rho"],
        "doo" => &["nu", "rho", "n"],
        "stosoo" => &["n", "k", "h_max", "delta"],
        "hct" => &["nu", "rho", "c", "c1", "delta"],
        "vhct" => &["nu", "rho", "c", "c1", "delta", "b"],
        "poo" | "gpo" => &["n", "rho_max", "nu_max"],
        "pct" => &["n", "rho_max", "nu_max", "c", "delta"],
        "sequool" | "stroquool" => &["n"],
        _ => return Err(unknown_algorithm(name)),
    })
}

fn unknown_algorithm(name: &str) -> Error {
    Error::UnknownName {
        kind: "algorithm",
        name: name.to_string(),
        valid: ALGORITHM_NAMES.to_vec(),
    }
}

/// Everything an algorithm needs besides its hyperparameters.
#[derive(Debug, Clone)]
pub struct BuildContext {
    pub domain: Domain,
    pub partition: PartitionKind,
    /// Default budget `n` for fixed-budget algorithms.
    pub budget: u64,
    /// Seed for random partitions.
    pub seed: u64,
}

/// Hyperparameter overrides, consumed key by key so leftovers can be reported.
struct Overrides<'a> {
    name: &'a str,
    values: &'a BTreeMap<String, f64>,
}

impl Overrides<'_> {
    fn real(&self, key: &str, default: f64) -> f64 {
        self.values.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: u64) -> Result<u64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
            Some(&v) => Err(Error::config(format!(
                "{}: `{key}` must be a non-negative integer, got {v}",
                self.name
            ))),
        }
    }
}

/// Validates override keys against [`parameter_keys`].
pub fn check_overrides(name: &str, overrides: &BTreeMap<String, f64>) -> Result<()> {
    let keys = parameter_keys(name)?;
    for key in overrides.keys() {
        if !keys.contains(&key.as_str()) {
            return Err(Error::config(format!(
                "unknown parameter `{key}` for {name}; accepted: {}",
                keys.join(", ")
            )));
        }
    }
    Ok(())
}

/// Builds an algorithm by registry name, applying overrides over the defaults.
pub fn build_algorithm(
    name: &str,
    overrides: &BTreeMap<String, f64>,
    ctx: &BuildContext,
) -> Result<Box<dyn Algorithm>> {
    check_overrides(name, overrides)?;
    let o = Overrides {
        name,
        values: overrides,
    };
    let domain = ctx.domain.clone();
    let scheme = || ctx.partition.build(ctx.seed);
    let smoothness = || SmoothnessParams::new(o.real("nu", 1.0), o.real("rho", 0.5));
    let hct_config = || -> Result<HctConfig> {
        let base = HctConfig::new(smoothness()?);
        Ok(HctConfig {
            c: o.real("c", base.c),
            c1: o.real("c1", base.c1),
            delta: o.real("delta", base.delta),
            ..base
        })
    };
    let budget = o.count("n", ctx.budget)?;

    Ok(match name {
        "hoo" => Box::new(Hoo::new(domain, scheme(), smoothness()?)),
        "doo" => Box::new(Doo::new(domain, scheme(), smoothness()?, budget)?),
        "stosoo" => {
            let defaults = StoSooConfig::for_budget(budget)?;
            let cfg = StoSooConfig {
                budget,
                k: o.count("k", defaults.k)?,
                h_max: o.count("h_max", defaults.h_max as u64)? as usize,
                delta: o.real("delta", defaults.delta),
            };
            Box::new(StoSoo::new(domain, scheme(), cfg)?)
        }
        "hct" => Box::new(Hct::new(domain, scheme(), hct_config()?)?),
        "vhct" => Box::new(Hct::vhct(
            domain,
            scheme(),
            hct_config()?,
            o.real("b", 1.0),
        )?),
        "poo" => Box::new(Poo::new(
            domain,
            ctx.partition,
            ctx.seed,
            budget,
            o.real("rho_max", 0.9),
            o.real("nu_max", 1.0),
        )?),
        "gpo" | "pct" => {
            let sub = if name == "gpo" {
                Subroutine::Hoo
            } else {
                let base = HctConfig::default();
                Subroutine::Hct {
                    c: o.real("c", base.c),
                    delta: o.real("delta", base.delta),
                }
            };
            Box::new(Gpo::new(
                domain,
                ctx.partition,
                ctx.seed,
                budget,
                o.real("rho_max", 0.9),
                o.real("nu_max", 1.0),
                sub,
            )?)
        }
        "sequool" => Box::new(SequOol::new(domain, scheme(), budget)?),
        "stroquool" => Box::new(StroquOol::new(domain, scheme(), budget)?),
        _ => return Err(unknown_algorithm(name)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> BuildContext {
        BuildContext {
            domain: Domain::unit(1),
            partition: PartitionKind::Binary,
            budget: 200,
            seed: 0,
        }
    }

    #[test]
    fn every_name_builds() {
        for name in ALGORITHM_NAMES {
            let algo = build_algorithm(name, &BTreeMap::new(), &ctx()).unwrap();
            assert_eq!(algo.name(), name);
        }
    }

    #[test]
    fn unknown_name_lists_registry() {
        let err = build_algorithm("soo", &BTreeMap::new(), &ctx())
            .err()
            .unwrap()
            .to_string();
        for name in ALGORITHM_NAMES {
            assert!(err.contains(name), "{err}");
        }
    }

    #[test]
    fn unknown_or_malformed_overrides_fail() {
        let bad_key = BTreeMap::from([("gamma".to_string(), 1.0)]);
        assert!(build_algorithm("hoo", &bad_key, &ctx()).is_err());
        let bad_n = BTreeMap::from([("n".to_string(), 10.5)]);
        assert!(build_algorithm("doo", &bad_n, &ctx()).is_err());
        let bad_rho = BTreeMap::from([("rho".to_string(), 1.5)]);
        assert!(build_algorithm("hct", &bad_rho, &ctx()).is_err());
    }
}
