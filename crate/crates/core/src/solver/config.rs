use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::SubcarrierAssignment;

/// Designer parameters. [`SolverConfig::new`] fills in the reference setup:
/// step sizes 0.05, 5 collision rounds per iteration, step-size review every
/// 20 iterations at rate 0.05, radius step 1e-4, and termination after 10⁴
/// iterations or 500 iterations without improvement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub assignment: SubcarrierAssignment,
    /// Number of sequences `N`.
    pub count: usize,
    /// Largest admissible PAPR; `f64::INFINITY` (or anything `>= L`) disables
    /// the constraint.
    #[serde(serialize_with = "ser_threshold", deserialize_with = "de_threshold")]
    pub papr_threshold: f64,
    /// Sequence-collision rounds per outer iteration (`K`).
    pub collision_rounds: usize,
    /// Step sizes are reviewed every this many iterations (`K1`).
    pub review_period: usize,
    /// Radius increment/decrement (`γ`).
    pub radius_step: f64,
    /// Step-size adaptation rate (`ρ`).
    pub adaptation_rate: f64,
    pub tau_seq: f64,
    pub tau_papr: f64,
    pub max_iterations: usize,
    /// Consecutive iterations without a new best before stopping.
    pub stall_limit: usize,
    /// Upper bound on PAPR-resolution rounds within one iteration.
    pub papr_inner_cap: usize,
    pub seed: u64,
}

pub const DEFAULT_TAU: f64 = 0.05;
pub const DEFAULT_COLLISION_ROUNDS: usize = 5;
pub const DEFAULT_REVIEW_PERIOD: usize = 20;
pub const DEFAULT_ADAPTATION_RATE: f64 = 0.05;
pub const DEFAULT_RADIUS_STEP: f64 = 1e-4;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
pub const DEFAULT_STALL_LIMIT: usize = 500;
pub const DEFAULT_PAPR_INNER_CAP: usize = 1000;

impl SolverConfig {
    pub fn new(assignment: SubcarrierAssignment, count: usize) -> Self {
        Self {
            assignment,
            count,
            papr_threshold: f64::INFINITY,
            collision_rounds: DEFAULT_COLLISION_ROUNDS,
            review_period: DEFAULT_REVIEW_PERIOD,
            radius_step: DEFAULT_RADIUS_STEP,
            adaptation_rate: DEFAULT_ADAPTATION_RATE,
            tau_seq: DEFAULT_TAU,
            tau_papr: DEFAULT_TAU,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            stall_limit: DEFAULT_STALL_LIMIT,
            papr_inner_cap: DEFAULT_PAPR_INNER_CAP,
            seed: 1,
        }
    }

    pub fn with_papr_threshold(mut self, threshold: f64) -> Self {
        self.papr_threshold = threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sequence length `L`.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// True when no unit-norm sequence can exceed the threshold.
    pub fn papr_is_vacuous(&self) -> bool {
        self.papr_threshold >= self.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be positive and finite, got {v}")))
            }
        };
        let at_least_one = |field: &'static str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::validation(field, "must be at least 1"))
            }
        };
        if self.len() < 2 {
            return Err(Error::validation("L", format!("must be at least 2, got {}", self.len())));
        }
        if self.count < 2 {
            return Err(Error::validation("N", format!("must be at least 2, got {}", self.count)));
        }
        if self.papr_threshold.is_nan() || self.papr_threshold < 1.0 {
            return Err(Error::validation(
                "papr_threshold",
                format!("must be at least 1, got {}", self.papr_threshold),
            ));
        }
        at_least_one("collision_rounds", self.collision_rounds)?;
        at_least_one("review_period", self.review_period)?;
        at_least_one("max_iterations", self.max_iterations)?;
        at_least_one("stall_limit", self.stall_limit)?;
        at_least_one("papr_inner_cap", self.papr_inner_cap)?;
        positive("radius_step", self.radius_step)?;
        positive("tau_seq", self.tau_seq)?;
        positive("tau_papr", self.tau_papr)?;
        if !(self.adaptation_rate > 0.0 && self.adaptation_rate < 1.0) {
            return Err(Error::validation(
                "adaptation_rate",
                format!("must lie in (0, 1), got {}", self.adaptation_rate),
            ));
        }
        Ok(())
    }
}

fn ser_threshold<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_threshold<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
    }
}
