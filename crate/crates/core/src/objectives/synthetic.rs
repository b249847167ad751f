//! Closed-form test functions with optional inert dimensions.
//!
//! Each function is minimized in its native box; the objective reports
//! `shift - value` so that higher is better and the ideal score is
//! `shift - minimum`. Configuration coordinates are read in normalized form
//! and mapped affinely into the native box, so any real-valued space with at
//! least as many dimensions works. Dimensions past the active ones are
//! ignored.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

use crate::driver::Objective;
use crate::error::{Error, ObjectiveError, Result};
use crate::rng::{mix64, seeded};
use crate::space::{Configuration, HyperparameterDef, SearchSpace, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticFunction {
    /// Mean of `(x_i - 0.3)^2` over `[0, 1]^dims`.
    QuadraticBowl { dims: usize },
    Branin,
    Hartmann6,
    Rastrigin { dims: usize },
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
const HARTMANN_ARGMIN: [f64; 6] = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];
const HARTMANN_MIN: f64 = -3.322_368_011_415_51;
const BRANIN_MIN: f64 = 0.397_887_357_729_738_16;

impl SyntheticFunction {
    pub fn parse(name: &str, dims: Option<usize>) -> Result<Self> {
        let need_dims = |d: Option<usize>| {
            d.filter(|&d| d >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs dims >= 1")))
        };
        match name {
            "quadratic-bowl" => Ok(Self::QuadraticBowl { dims: need_dims(dims)? }),
            "rastrigin" => Ok(Self::Rastrigin { dims: need_dims(dims)? }),
            "branin" | "hartmann-6d" if dims.is_some_and(|d| d != self_dims(name)) => Err(
                Error::InvalidArgument(format!("`{name}` has exactly {} dimensions", self_dims(name))),
            ),
            "branin" => Ok(Self::Branin),
            "hartmann-6d" => Ok(Self::Hartmann6),
            other => Err(Error::InvalidArgument(format!("unknown synthetic function `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::QuadraticBowl { .. } => "quadratic-bowl",
            Self::Branin => "branin",
            Self::Hartmann6 => "hartmann-6d",
            Self::Rastrigin { .. } => "rastrigin",
        }
    }

    pub fn dims(&self) -> usize {
        match *self {
            Self::QuadraticBowl { dims } | Self::Rastrigin { dims } => dims,
            Self::Branin => 2,
            Self::Hartmann6 => 6,
        }
    }

    /// Native box per active dimension.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match *self {
            Self::QuadraticBowl { dims } => vec![(0.0, 1.0); dims],
            Self::Branin => vec![(-5.0, 10.0), (0.0, 15.0)],
            Self::Hartmann6 => vec![(0.0, 1.0); 6],
            Self::Rastrigin { dims } => vec![(-5.12, 5.12); dims],
        }
    }

    /// The function itself, to be minimized, at native coordinates.
    pub fn raw_value(&self, x: &[f64]) -> f64 {
        match self {
            Self::QuadraticBowl { .. } => {
                x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>() / x.len() as f64
            }
            Self::Branin => {
                let (a, b, c) = (1.0, 5.1 / (4.0 * PI * PI), 5.0 / PI);
                let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * PI));
                a * (x[1] - b * x[0] * x[0] + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s
            }
            Self::Hartmann6 => -(0..4)
                .map(|i| {
                    let inner: f64 = (0..6)
                        .map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2))
                        .sum();
                    HARTMANN_ALPHA[i] * (-inner).exp()
                })
                .sum::<f64>(),
            Self::Rastrigin { dims } => {
                10.0 * *dims as f64
                    + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
        }
    }

    pub fn raw_minimum(&self) -> f64 {
        match self {
            Self::QuadraticBowl { .. } | Self::Rastrigin { .. } => 0.0,
            Self::Branin => BRANIN_MIN,
            Self::Hartmann6 => HARTMANN_MIN,
        }
    }

    /// One global minimizer in native coordinates.
    pub fn argmin(&self) -> Vec<f64> {
        match *self {
            Self::QuadraticBowl { dims } => vec![0.3; dims],
            Self::Branin => vec![PI, 2.275],
            Self::Hartmann6 => HARTMANN_ARGMIN.to_vec(),
            Self::Rastrigin { dims } => vec![0.0; dims],
        }
    }

    /// Constant added to the negated value; exceeds the function's maximum
    /// on its box so scores stay positive.
    pub fn score_shift(&self) -> f64 {
        match *self {
            Self::QuadraticBowl { .. } | Self::Hartmann6 => 1.0,
            Self::Branin => 310.0,
            Self::Rastrigin { dims } => 1.0 + 41.0 * dims as f64,
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.score_shift() - self.raw_value(x)
    }

    pub fn f_ideal(&self) -> f64 {
        self.score_shift() - self.raw_minimum()
    }
}

fn self_dims(name: &str) -> usize {
    if name == "branin" {
        2
    } else {
        6
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticObjective {
    function: SyntheticFunction,
    space: SearchSpace,
    noise_sd: f64,
    noise_seed: u64,
}

impl SyntheticObjective {
    /// Builds the default space: one real `[0, 1]` coordinate per active
    /// dimension (`x0`, `x1`, ...) followed by `dummy0`, `dummy1`, ...
    pub fn new(function: SyntheticFunction, dummy_dims: usize) -> Self {
        let params = (0..function.dims())
            .map(|i| format!("x{i}"))
            .chain((0..dummy_dims).map(|i| format!("dummy{i}")))
            .map(|name| HyperparameterDef::real(name, 0.0, 1.0).expect("unit interval"))
            .collect();
        Self {
            function,
            space: SearchSpace::new(params).expect("names are unique"),
            noise_sd: 0.0,
            noise_seed: 0,
        }
    }

    /// Uses a caller-provided space; its first `function.dims()` parameters
    /// are the active coordinates.
    pub fn with_space(function: SyntheticFunction, space: SearchSpace) -> Result<Self> {
        if space.dim() < function.dims() {
            return Err(Error::DimensionMismatch {
                expected: function.dims(),
                found: space.dim(),
            });
        }
        Ok(Self {
            function,
            space,
            noise_sd: 0.0,
            noise_seed: 0,
        })
    }

    /// Adds Gaussian noise that is a deterministic function of the
    /// configuration and `seed`.
    pub fn with_noise(self, sd: f64, seed: u64) -> Result<Self> {
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise sd {sd} must be >= 0")));
        }
        Ok(Self {
            noise_sd: sd,
            noise_seed: seed,
            ..self
        })
    }

    pub fn function(&self) -> SyntheticFunction {
        self.function
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn f_ideal(&self) -> f64 {
        self.function.f_ideal()
    }

    /// Native coordinates of the active dimensions.
    pub fn native_point(&self, cfg: &Configuration) -> Result<Vec<f64>> {
        let u = self.space.normalize(cfg)?.into_inner();
        Ok(self
            .function
            .bounds()
            .iter()
            .zip(&u)
            .map(|((lo, hi), u)| lo + u * (hi - lo))
            .collect())
    }

    /// Configuration of the default space sitting at the function's
    /// minimizer, with dummies at 0.
    pub fn optimal_config(&self) -> Result<Configuration> {
        let mut coords: Vec<f64> = self
            .function
            .bounds()
            .iter()
            .zip(self.function.argmin())
            .map(|((lo, hi), x)| (x - lo) / (hi - lo))
            .collect();
        coords.resize(self.space.dim(), 0.0);
        self.space.denormalize(&coords)
    }

    fn noise(&self, cfg: &Configuration) -> f64 {
        if self.noise_sd == 0.0 {
            return 0.0;
        }
        let key = cfg.values().iter().fold(mix64(self.noise_seed), |h, v| {
            let bits = match *v {
                Value::Int(i) => i as u64,
                Value::Real(x) => x.to_bits(),
                Value::Category(k) => k as u64,
            };
            mix64(h ^ bits)
        });
        let z: f64 = StandardNormal.sample(&mut seeded(key));
        self.noise_sd * z
    }
}

impl Objective for SyntheticObjective {
    fn evaluate(&self, cfg: &Configuration) -> std::result::Result<f64, ObjectiveError> {
        let x = self.native_point(cfg)?;
        Ok(self.function.score(&x) + self.noise(cfg))
    }
}
