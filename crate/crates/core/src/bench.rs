//! Experiment runner and regret accounting.
//!
//! A run repeats `pull -> evaluate -> receive_reward` for `T` rounds and
//! records the noiseless value of every pulled point. Regret is always
//! computed from noiseless values, so noise only affects what the algorithm
//! observes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::algorithms::{build_algorithm, BuildContext};
use crate::derive_seed;
use crate::domain::Point;
use crate::error::{Error, Result};
use crate::objectives::{objective_from_name, Noise, NoiseWrapper};
use crate::partition::PartitionKind;
use crate::protocol::Algorithm;

const PARTITION_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: String,
    pub overrides: BTreeMap<String, f64>,
    pub objective: String,
    pub partition: PartitionKind,
    pub rounds: u64,
    pub noise: Noise,
}

impl ExperimentConfig {
    pub fn new(algorithm: &str, objective: &str, partition: PartitionKind, rounds: u64) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            overrides: BTreeMap::new(),
            objective: objective.to_string(),
            partition,
            rounds,
            noise: Noise::none(),
        }
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.overrides.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub point: Point,
    /// Noiseless objective value at `point`.
    pub value: f64,
    /// Reward handed to the algorithm.
    pub reward: f64,
    /// Noiseless value of the algorithm's recommendation after this round.
    pub recommended_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub algorithm: String,
    pub objective: String,
    pub partition: String,
    pub seed: u64,
    pub fmax: f64,
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries {
    pub cumulative: Vec<f64>,
    pub simple: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub mean_cumulative: Vec<f64>,
    pub std_cumulative: Vec<f64>,
    pub mean_simple: Vec<f64>,
    pub std_simple: Vec<f64>,
}

impl AggregateSeries {
    pub fn len(&self) -> usize {
        self.mean_cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_cumulative.is_empty()
    }
}

/// Outcome of one seeded run, with the algorithm kept for inspection.
pub struct Run {
    pub trajectory: Trajectory,
    pub algorithm: Box<dyn Algorithm>,
}

/// Runs one seeded experiment and keeps the algorithm state.
pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<Run> {
    if cfg.rounds == 0 {
        return Err(Error::config("the number of rounds T must be at least 1"));
    }
    let objective = objective_from_name(&cfg.objective)?;
    let ctx = BuildContext {
        domain: objective.domain(),
        partition: cfg.partition,
        budget: cfg.rounds,
        seed: derive_seed(seed, PARTITION_STREAM),
    };
    let mut algo = build_algorithm(&cfg.algorithm, &cfg.overrides, &ctx)?;
    let fmax = objective.fmax();
    let mut target = NoiseWrapper::new(objective, cfg.noise, derive_seed(seed, NOISE_STREAM))?;

    let mut rounds = Vec::with_capacity(cfg.rounds as usize);
    for t in 1..=cfg.rounds {
        let point = algo.pull(t)?;
        let (value, reward) = target.evaluate(&point)?;
        algo.receive_reward(t, reward)?;
        let recommended = algo.get_last_point()?;
        let recommended_value = target.inner().f(&recommended)?;
        rounds.push(RoundRecord {
            t,
            point,
            value,
            reward,
            recommended_value,
        });
    }
    Ok(Run {
        trajectory: Trajectory {
            algorithm: cfg.algorithm.clone(),
            objective: cfg.objective.clone(),
            partition: cfg.partition.name().to_string(),
            seed,
            fmax,
            rounds,
        },
        algorithm: algo,
    })
}

/// Executes exactly `T` rounds; identical inputs and seed give identical trajectories.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<Trajectory> {
    run(cfg, seed).map(|r| r.trajectory)
}

/// Runs all seeds, in parallel when `jobs > 1`; results stay in seed order.
pub fn run_seeds(cfg: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<Vec<Trajectory>> {
    if jobs <= 1 {
        return seeds.iter().map(|&s| run_experiment(cfg, s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| seeds.par_iter().map(|&s| run_experiment(cfg, s)).collect())
}

/// `R_t = sum_{s <= t} (fmax - f(x_s))` and `s_t = fmax - f(recommendation_t)`.
pub fn cumulative_regret(traj: &Trajectory, fmax: f64) -> RegretSeries {
    let mut total = 0.0;
    let cumulative = traj
        .rounds
        .iter()
        .map(|r| {
            total += fmax - r.value;
            total
        })
        .collect();
    let simple = traj
        .rounds
        .iter()
        .map(|r| fmax - r.recommended_value)
        .collect();
    RegretSeries { cumulative, simple }
}

fn mean_std(columns: &[&[f64]], t: usize) -> (f64, f64) {
    let n = columns.len() as f64;
    let mean = columns.iter().map(|c| c[t]).sum::<f64>() / n;
    let var = columns.iter().map(|c| (c[t] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Pointwise mean and population standard deviation across runs.
pub fn aggregate(runs: &[RegretSeries]) -> Result<AggregateSeries> {
    let first = runs
        .first()
        .ok_or_else(|| Error::config("no runs to aggregate"))?;
    let len = first.cumulative.len();
    if runs
        .iter()
        .any(|r| r.cumulative.len() != len || r.simple.len() != len)
    {
        return Err(Error::config("runs to aggregate have different lengths"));
    }
    let cum: Vec<&[f64]> = runs.iter().map(|r| r.cumulative.as_slice()).collect();
    let simple: Vec<&[f64]> = runs.iter().map(|r| r.simple.as_slice()).collect();
    let mut out = AggregateSeries {
        mean_cumulative: Vec::with_capacity(len),
        std_cumulative: Vec::with_capacity(len),
        mean_simple: Vec::with_capacity(len),
        std_simple: Vec::with_capacity(len),
    };
    for t in 0..len {
        let (m, s) = mean_std(&cum, t);
        out.mean_cumulative.push(m);
        out.std_cumulative.push(s);
        let (m, s) = mean_std(&simple, t);
        out.mean_simple.push(m);
        out.std_simple.push(s);
    }
    Ok(out)
}

pub const AGGREGATE_HEADER: &str =
    "t,mean_cum_regret,std_cum_regret,mean_simple_regret,std_simple_regret";

/// Aggregate CSV; numbers use the shortest representation that round-trips.
pub fn aggregate_csv(series: &AggregateSeries) -> String {
    let mut out = String::with_capacity(64 * (series.len() + 1));
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for t in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t + 1,
            series.mean_cumulative[t],
            series.std_cumulative[t],
            series.mean_simple[t],
            series.std_simple[t]
        );
    }
    out
}

/// Raw per-round CSV `seed,t,point_0,...,point_{d-1},reward,cum_regret`.
pub fn trajectories_csv(trajectories: &[Trajectory]) -> String {
    let dim = trajectories
        .iter()
        .flat_map(|tr| tr.rounds.first())
        .map(|r| r.point.len())
        .next()
        .unwrap_or(0);
    let mut out = String::from("seed,t");
    for d in 0..dim {
        let _ = write!(out, ",point_{d}");
    }
    out.push_str(",reward,cum_regret\n");
    for tr in trajectories {
        let regret = cumulative_regret(tr, tr.fmax);
        for (r, cum) in tr.rounds.iter().zip(&regret.cumulative) {
            let _ = write!(out, "{},{}", tr.seed, r.t);
            for x in r.point.iter() {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{},{}", r.reward, cum);
        }
    }
    out
}

/// Writes `contents` through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_csv(series: &AggregateSeries, path: &Path) -> Result<()> {
    write_atomic(path, &aggregate_csv(series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Garland;

    fn traj(values: &[f64]) -> Trajectory {
        Trajectory {
            algorithm: "doo".into(),
            objective: "garland".into(),
            partition: "binary".into(),
            seed: 0,
            fmax: 1.0,
            rounds: values
                .iter()
                .enumerate()
                .map(|(k, &v)| RoundRecord {
                    t: k as u64 + 1,
                    point: Point::new(vec![0.5]),
                    value: v,
                    reward: v,
                    recommended_value: v,
                })
                .collect(),
        }
    }

    #[test]
    fn regret_examples() {
        let r = cumulative_regret(&traj(&[1.0, 1.0, 1.0]), 1.0);
        assert_eq!(r.cumulative, vec![0.0; 3]);
        let r = cumulative_regret(&traj(&[0.5, 0.75]), 1.0);
        assert_eq!(r.cumulative, vec![0.5, 0.75]);
        assert_eq!(r.cumulative[1] / 2.0, 0.375);
    }

    #[test]
    fn aggregate_examples() {
        let a = RegretSeries {
            cumulative: vec![0.5, 1.0],
            simple: vec![0.5, 0.5],
        };
        let b = RegretSeries {
            cumulative: vec![0.5, 3.0],
            simple: vec![0.5, 0.1],
        };
        let single = aggregate(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.mean_cumulative, a.cumulative);
        assert_eq!(single.std_cumulative, vec![0.0, 0.0]);
        let both = aggregate(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(both.mean_cumulative[1], 2.0);
        assert_eq!(both.std_cumulative[1], 1.0);
        assert_eq!(both, aggregate(&[b, a.clone()]).unwrap());
        let short = RegretSeries {
            cumulative: vec![0.0],
            simple: vec![0.0],
        };
        assert!(aggregate(&[a, short]).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn single_round_doo() {
        let cfg = ExperimentConfig::new("doo", "garland", PartitionKind::Binary, 1);
        let tr = run_experiment(&cfg, 0).unwrap();
        assert_eq!(tr.rounds.len(), 1);
        let r = &tr.rounds[0];
        assert_eq!((r.t, r.point.coords()), (1, &[0.5][..]));
        assert_eq!(r.value, Garland::value(0.5));
        assert_eq!(r.reward, r.value);
    }

    #[test]
    fn zero_rounds_and_unknown_names_fail() {
        assert!(run_experiment(
            &ExperimentConfig::new("doo", "garland", PartitionKind::Binary, 0),
            0
        )
        .is_err());
        let err = run_experiment(
            &ExperimentConfig::new("nope", "garland", PartitionKind::Binary, 5),
            0,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("stroquool"));
        assert!(run_experiment(
            &ExperimentConfig::new("hoo", "nope", PartitionKind::Binary, 5),
            0
        )
        .is_err());
    }

    #[test]
    fn csv_layout() {
        let agg = aggregate(&[cumulative_regret(&traj(&[0.5, 0.75]), 1.0)]).unwrap();
        let csv = aggregate_csv(&agg);
        assert_eq!(
            csv,
            format!("{AGGREGATE_HEADER}\n1,0.5,0,0.5,0\n2,0.75,0,0.25,0\n")
        );
        let raw = trajectories_csv(&[traj(&[0.5, 0.75])]);
        assert_eq!(
            raw,
            "seed,t,point_0,reward,cum_regret\n0,1,0.5,0.5,0.5\n0,2,0.5,0.75,0.75\n"
        );
    }

    #[test]
    fn atomic_write_is_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let agg = aggregate(&[cumulative_regret(&traj(&[0.5, 0.75]), 1.0)]).unwrap();
        write_csv(&agg, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        write_csv(&agg, &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        assert_eq!(String::from_utf8(first).unwrap().lines().count(), 3);
        let missing = dir.path().join("no/such/dir/r.csv");
        let err = write_csv(&agg, &missing).unwrap_err().to_string();
        assert!(err.contains("no/such/dir"), "{err}");
    }

    #[test]
    fn noise_does_not_enter_regret() {
        let base = ExperimentConfig::new("hoo", "garland", PartitionKind::Binary, 50);
        let noisy = base.clone().with_noise(Noise::Gaussian { sigma: 0.3 });
        let a = run_experiment(&noisy, 4).unwrap();
        for r in &a.rounds {
            assert_eq!(r.value, Garland::value(r.point[0]));
        }
        assert!(a.rounds.iter().any(|r| r.reward != r.value));
        let reg = cumulative_regret(&a, a.fmax);
        assert!(reg.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = ExperimentConfig::new("stosoo", "doublesine", PartitionKind::RandomBinary, 80)
            .with_noise(Noise::Gaussian { sigma: 0.1 });
        let seeds = [0, 1, 2, 3];
        assert_eq!(
            run_seeds(&cfg, &seeds, 1).unwrap(),
            run_seeds(&cfg, &seeds, 3).unwrap()
        );
    }
}
