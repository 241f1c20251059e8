//! Running time-averages `f*` of observables, Cesàro convergence
//! diagnostics and the escape predicate that labels unbounded orbits.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A continuous function on the augmented state `(m, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// `sin 2m_1`, i.e. `sin 2δ` for the swing model.
    #[serde(rename = "sin_2delta")]
    Sin2Delta,
    /// `cos m_1`.
    CosDelta,
    /// `m_1²` (first coordinate of a two-dimensional `M`).
    M1Squared,
    /// `m²` (first coordinate of a one-dimensional `M`).
    MSquared,
    /// `a_0 + Σ_k (a_k cos kx + b_k sin kx)` of one state coordinate `x`.
    TrigPolynomial {
        id: String,
        coordinate: usize,
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl Observable {
    pub fn id(&self) -> &str {
        match self {
            Observable::Sin2Delta => "sin_2delta",
            Observable::CosDelta => "cos_delta",
            Observable::M1Squared => "m1_squared",
            Observable::MSquared => "m_squared",
            Observable::TrigPolynomial { id, .. } => id,
        }
    }

    fn coordinate(&self) -> usize {
        match self {
            Observable::TrigPolynomial { coordinate, .. } => *coordinate,
            _ => 0,
        }
    }

    /// Checks the observable against a state vector of length `state_len`.
    pub fn validate(&self, state_len: usize) -> Result<()> {
        if self.coordinate() >= state_len {
            return Err(Error::Config(format!(
                "observable `{}` reads coordinate {} of a {}-dimensional state",
                self.id(),
                self.coordinate(),
                state_len
            )));
        }
        if let Observable::TrigPolynomial {
            id,
            constant,
            cos,
            sin,
            ..
        } = self
        {
            let id_ok = !id.is_empty()
                && id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !id_ok {
                return Err(Error::Config(format!(
                    "observable id `{id}` must be non-empty ASCII [A-Za-z0-9_-]"
                )));
            }
            if !constant.is_finite() || cos.iter().chain(sin).any(|c| !c.is_finite()) {
                return Err(Error::Config(format!(
                    "observable `{id}` has non-finite coefficients"
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, state: &[f64]) -> f64 {
        match self {
            Observable::Sin2Delta => (2.0 * state[0]).sin(),
            Observable::CosDelta => state[0].cos(),
            Observable::M1Squared | Observable::MSquared => state[0] * state[0],
            Observable::TrigPolynomial {
                coordinate,
                constant,
                cos,
                sin,
                ..
            } => {
                let x = state[*coordinate];
                let mut v = *constant;
                for (k, a) in cos.iter().enumerate() {
                    v += a * ((k + 1) as f64 * x).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    v += b * ((k + 1) as f64 * x).sin();
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeCause {
    Threshold,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageStatus {
    Converging,
    Escaped { cause: EscapeCause, time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time: f64,
    pub average: f64,
}

/// Trapezoidal running integral of one observable on a fixed step grid.
#[derive(Debug, Clone)]
pub struct AverageAccumulator {
    step: f64,
    /// Trapezoidal integral divided by the step.
    running_sum: f64,
    last_value: f64,
    steps: u64,
    stride: u64,
    checkpoints: Vec<Checkpoint>,
    status: AverageStatus,
}

impl AverageAccumulator {
    /// Starts an accumulator at `t = 0` with the observable's initial value.
    pub fn new(initial_value: f64, step: f64, checkpoint_stride: u64) -> Self {
        let status = if initial_value.is_finite() {
            AverageStatus::Converging
        } else {
            AverageStatus::Escaped {
                cause: EscapeCause::NonFinite,
                time: 0.0,
            }
        };
        Self {
            step,
            running_sum: 0.0,
            last_value: initial_value,
            steps: 0,
            stride: checkpoint_stride.max(1),
            checkpoints: Vec::new(),
            status,
        }
    }

    /// Folds in the observable's value one step later. A non-finite value
    /// marks the accumulator escaped; further values are ignored.
    pub fn accumulate(&mut self, value: f64) -> AverageStatus {
        if self.status != AverageStatus::Converging {
            return self.status;
        }
        if !value.is_finite() {
            self.status = AverageStatus::Escaped {
                cause: EscapeCause::NonFinite,
                time: self.elapsed() + self.step,
            };
            return self.status;
        }
        self.running_sum += 0.5 * (self.last_value + value);
        self.last_value = value;
        self.steps += 1;
        if self.steps % self.stride == 0 {
            self.checkpoints.push(Checkpoint {
                time: self.elapsed(),
                average: self.average(),
            });
        }
        self.status
    }

    pub fn mark_escaped(&mut self, cause: EscapeCause, time: f64) {
        if self.status == AverageStatus::Converging {
            self.status = AverageStatus::Escaped { cause, time };
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.steps as f64 * self.step
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Partial average `∫_0^t f / t` at the current time; the initial value
    /// before any step has been taken.
    pub fn average(&self) -> f64 {
        if self.steps == 0 {
            self.last_value
        } else {
            self.running_sum / self.steps as f64
        }
    }

    pub fn status(&self) -> AverageStatus {
        self.status
    }

    pub fn is_converging(&self) -> bool {
        self.status == AverageStatus::Converging
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    /// Largest deviation of the checkpointed partial averages in the last
    /// quarter of the run from the final partial average.
    pub fn convergence_gap(&self) -> Result<f64> {
        if !self.is_converging() {
            return Err(Error::NotConverging);
        }
        let n = self.checkpoints.len();
        if n < 2 {
            return Err(Error::InsufficientCheckpoints { needed: 2, have: n });
        }
        let last = self.average();
        let start = (3 * n) / 4;
        Ok(self.checkpoints[start..]
            .iter()
            .map(|c| (c.average - last).abs())
            .fold(0.0, f64::max))
    }
}

/// `|x_coordinate| > threshold` for `consecutive_steps` successive samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapePredicate {
    pub coordinate: usize,
    pub threshold: f64,
    pub consecutive_steps: u32,
}

impl EscapePredicate {
    /// `|ω| > 0.5` for 10 steps, well outside the unforced separatrix
    /// (`max |ω| ≈ 0.205` at `p_m = 0.95`, `b = 1`).
    pub const SWING_DEFAULT: EscapePredicate = EscapePredicate {
        coordinate: 1,
        threshold: 0.5,
        consecutive_steps: 10,
    };

    pub fn validate(&self, state_len: usize) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::Config(format!(
                "escape threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.consecutive_steps < 1 {
            return Err(Error::Config("escape dwell count must be at least 1".into()));
        }
        if self.coordinate >= state_len {
            return Err(Error::Config(format!(
                "escape coordinate {} outside a {}-dimensional state",
                self.coordinate, state_len
            )));
        }
        Ok(())
    }

    pub fn monitor(self) -> EscapeMonitor {
        EscapeMonitor {
            predicate: self,
            run: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeCheck {
    Ok,
    Escaped,
}

/// Dwell counter for an [`EscapePredicate`] along one trajectory.
#[derive(Debug, Clone)]
pub struct EscapeMonitor {
    predicate: EscapePredicate,
    run: u32,
}

impl EscapeMonitor {
    pub fn check(&mut self, state: &[f64]) -> EscapeCheck {
        if state[self.predicate.coordinate].abs() > self.predicate.threshold {
            self.run += 1;
        } else {
            self.run = 0;
        }
        if self.run >= self.predicate.consecutive_steps {
            EscapeCheck::Escaped
        } else {
            EscapeCheck::Ok
        }
    }
}
