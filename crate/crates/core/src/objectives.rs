//! Synthetic targets used to benchmark the algorithms, plus additive noise.
//!
//! All objectives are maximized and carry their known optimum `fmax`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::Domain;
use crate::error::{Error, Result};

pub trait Objective: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Natural domain of the target.
    fn domain(&self) -> Domain;

    /// Known optimum value over [`Objective::domain`].
    fn fmax(&self) -> f64;

    /// Noiseless evaluation.
    fn f(&self, x: &[f64]) -> Result<f64>;
}

pub const OBJECTIVE_NAMES: [&str; 3] = ["garland", "doublesine", "himmelblau"];

pub fn objective_from_name(name: &str) -> Result<Box<dyn Objective>> {
    match name {
        "garland" => Ok(Box::new(Garland)),
        "doublesine" => Ok(Box::new(DoubleSine::default())),
        "himmelblau" => Ok(Box::new(Himmelblau)),
        _ => Err(Error::UnknownName {
            kind: "objective",
            name: name.to_string(),
            valid: OBJECTIVE_NAMES.to_vec(),
        }),
    }
}

/// Maximum of [`Garland`] on `[0, 1]`.
///
/// Located by a 10^6-point grid scan followed by ternary search around the
/// best grid point. The maximizer is the cusp at `x = pi/6`, where
/// `sin(60x) = 0`, so the value is `4 (pi/6) (1 - pi/6)`.
pub const GARLAND_FMAX: f64 = 0.997_772_391_161_044_5;

/// `4x(1-x) * (0.75 + 0.25 (1 - sqrt|sin 60x|))` on `[0, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Garland;

impl Garland {
    pub fn value(x: f64) -> f64 {
        4.0 * x * (1.0 - x) * (0.75 + 0.25 * (1.0 - (60.0 * x).sin().abs().sqrt()))
    }
}

impl Objective for Garland {
    fn name(&self) -> &'static str {
        "garland"
    }

    fn domain(&self) -> Domain {
        Domain::unit(1)
    }

    fn fmax(&self) -> f64 {
        GARLAND_FMAX
    }

    fn f(&self, x: &[f64]) -> Result<f64> {
        self.domain().check(x)?;
        Ok(Self::value(x[0]))
    }
}

/// Double-sine target with maximum `0` at `tmax`.
///
/// With `u = 2|x - tmax|` and `e_k = -log2(rho_k)` the value is
/// `m (u^e2 - u^e1) - u^e2` where `m = (sin(pi log2 u) + 1) / 2`, and `0` at `u = 0`.
#[derive(Debug, Clone, Copy)]
pub struct DoubleSine {
    rho1: f64,
    rho2: f64,
    tmax: f64,
}

impl Default for DoubleSine {
    fn default() -> Self {
        Self {
            rho1: 0.3,
            rho2: 0.8,
            tmax: 0.5,
        }
    }
}

impl DoubleSine {
    pub fn new(rho1: f64, rho2: f64, tmax: f64) -> Result<Self> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("tmax", tmax)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(format!(
                    "doublesine {name} = {v} must lie in (0, 1)"
                )));
            }
        }
        Ok(Self { rho1, rho2, tmax })
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = 2.0 * (x - self.tmax).abs();
        if u == 0.0 {
            return 0.0;
        }
        let e1 = -self.rho1.log2();
        let e2 = -self.rho2.log2();
        let m = ((PI * u.log2()).sin() + 1.0) / 2.0;
        m * (u.powf(e2) - u.powf(e1)) - u.powf(e2)
    }
}

impl Objective for DoubleSine {
    fn name(&self) -> &'static str {
        "doublesine"
    }

    fn domain(&self) -> Domain {
        Domain::unit(1)
    }

    fn fmax(&self) -> f64 {
        0.0
    }

    fn f(&self, x: &[f64]) -> Result<f64> {
        self.domain().check(x)?;
        Ok(self.value(x[0]))
    }
}

/// Negated Himmelblau function on `[-5, 5]^2`; four global maxima of value `0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Himmelblau;

impl Himmelblau {
    pub fn value(x: f64, y: f64) -> f64 {
        let a = x * x + y - 11.0;
        let b = x + y * y - 7.0;
        -(a * a + b * b)
    }
}

impl Objective for Himmelblau {
    fn name(&self) -> &'static str {
        "himmelblau"
    }

    fn domain(&self) -> Domain {
        Domain::from_bounds(&[[-5.0, 5.0], [-5.0, 5.0]]).expect("static bounds")
    }

    fn fmax(&self) -> f64 {
        0.0
    }

    fn f(&self, x: &[f64]) -> Result<f64> {
        self.domain().check(x)?;
        Ok(Self::value(x[0], x[1]))
    }
}

/// Zero-mean additive noise family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Gaussian with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
}

impl Noise {
    pub fn none() -> Self {
        Noise::Gaussian { sigma: 0.0 }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Noise::Gaussian { sigma } => sigma,
            Noise::Uniform { half_width } => half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = self.scale();
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::config(format!(
                "noise scale {s} must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

/// Objective with additive zero-mean noise drawn from a seeded stream.
#[derive(Debug)]
pub struct NoiseWrapper {
    inner: Box<dyn Objective>,
    noise: Noise,
    rng: ChaCha8Rng,
}

impl NoiseWrapper {
    pub fn new(inner: Box<dyn Objective>, noise: Noise, seed: u64) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            inner,
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn inner(&self) -> &dyn Objective {
        self.inner.as_ref()
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    fn draw(&mut self) -> f64 {
        match self.noise {
            Noise::Gaussian { sigma } if sigma > 0.0 => Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(&mut self.rng),
            Noise::Uniform { half_width } if half_width > 0.0 => {
                self.rng.random_range(-half_width..=half_width)
            }
            _ => 0.0,
        }
    }

    /// Noisy evaluation `f(x) + eps`.
    pub fn noisy_f(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluate(x).map(|(_, noisy)| noisy)
    }

    /// Returns `(f(x), f(x) + eps)`.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<(f64, f64)> {
        let clean = self.inner.f(x)?;
        Ok((clean, clean + self.draw()))
    }
}
