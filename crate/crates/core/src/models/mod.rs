//! Built-in quasiperiodically forced systems and the interface the
//! integrators consume.
//!
//! Every model is written on the augmented state space `M × T^N`: the
//! state vector is `(m_1, …, m_d, θ_1, …, θ_N)` and the phases advance as
//! `dθ_i/dt = Ω_i`. Hamiltonian models order `m` as `(q, p)`.

mod dissipative;
mod forcing;
mod harmonic;
mod swing;

pub use dissipative::DissipativeSystem;
pub use forcing::{QuasiperiodicForcing, Resonance, K_CHECK, EPS_RESONANCE};
pub use harmonic::HarmonicOscillator;
pub use swing::{mode_frequency, mode_shape, SwingModel, SwingParameters};

use std::f64::consts::TAU;

/// Guard applied to closed-form denominators such as `1 − Ω_i²`.
pub const EPS_DENOMINATOR: f64 = 1e-12;

/// Topology of one coordinate of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Line,
    /// Circle of circumference 2π.
    Circle,
}

/// Kinetic/potential decomposition `H(q, p, θ) = T(p) + V(q, θ)`.
///
/// Time enters only through the forcing phases `θ`, so the potential is
/// differentiated with respect to `q` and to each phase separately.
pub trait HamiltonianSplitting: Send + Sync {
    fn degrees_of_freedom(&self) -> usize;
    fn kinetic(&self, p: &[f64]) -> f64;
    /// Writes `∂T/∂p` into `dq`.
    fn kinetic_gradient(&self, p: &[f64], dq: &mut [f64]);
    fn potential(&self, q: &[f64], theta: &[f64]) -> f64;
    /// Writes `∂V/∂q` into `dq` and `∂V/∂θ_j` into `dtheta`.
    fn potential_gradient(&self, q: &[f64], theta: &[f64], dq: &mut [f64], dtheta: &mut [f64]);
}

pub trait SystemModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Per-coordinate topology of `M`; its length is `dim M`.
    fn topology(&self) -> &[Topology];

    fn forcing(&self) -> &QuasiperiodicForcing;

    /// `dm/dt` at `(m, θ)`.
    fn vector_field(&self, m: &[f64], theta: &[f64], dm: &mut [f64]);

    fn hamiltonian(&self, _m: &[f64], _theta: &[f64]) -> Option<f64> {
        None
    }

    fn splitting(&self) -> Option<&dyn HamiltonianSplitting> {
        None
    }

    fn dim_m(&self) -> usize {
        self.topology().len()
    }

    fn state_len(&self) -> usize {
        self.dim_m() + self.forcing().len()
    }
}

/// Right-hand side of the augmented autonomous system.
pub fn augmented_rhs(model: &dyn SystemModel, state: &[f64], out: &mut [f64]) {
    let d = model.dim_m();
    let (m, theta) = state.split_at(d);
    let (dm, dtheta) = out.split_at_mut(d);
    model.vector_field(m, theta, dm);
    dtheta.copy_from_slice(&model.forcing().frequencies);
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Any of the built-in models, as selected by a run configuration.
#[derive(Debug, Clone)]
pub enum BuiltinModel {
    Harmonic(HarmonicOscillator),
    Dissipative(DissipativeSystem),
    Swing(SwingModel),
}

impl BuiltinModel {
    fn inner(&self) -> &dyn SystemModel {
        match self {
            BuiltinModel::Harmonic(m) => m,
            BuiltinModel::Dissipative(m) => m,
            BuiltinModel::Swing(m) => m,
        }
    }

    /// Same model with the forcing's initial phases replaced.
    pub fn with_phases(&self, phases: &[f64]) -> crate::Result<Self> {
        Ok(match self {
            BuiltinModel::Harmonic(m) => {
                BuiltinModel::Harmonic(HarmonicOscillator::new(m.forcing().with_phases(phases)?))
            }
            BuiltinModel::Dissipative(m) => BuiltinModel::Dissipative(DissipativeSystem::new(
                m.lambda(),
                m.forcing().with_phases(phases)?,
            )?),
            BuiltinModel::Swing(m) => BuiltinModel::Swing(m.with_phases(phases)?),
        })
    }
}

impl SystemModel for BuiltinModel {
    fn name(&self) -> &'static str {
        self.inner().name()
    }
    fn topology(&self) -> &[Topology] {
        self.inner().topology()
    }
    fn forcing(&self) -> &QuasiperiodicForcing {
        self.inner().forcing()
    }
    fn vector_field(&self, m: &[f64], theta: &[f64], dm: &mut [f64]) {
        self.inner().vector_field(m, theta, dm)
    }
    fn hamiltonian(&self, m: &[f64], theta: &[f64]) -> Option<f64> {
        self.inner().hamiltonian(m, theta)
    }
    fn splitting(&self) -> Option<&dyn HamiltonianSplitting> {
        self.inner().splitting()
    }
}
