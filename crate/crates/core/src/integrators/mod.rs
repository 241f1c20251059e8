//! Fixed-step integration: RK4 for general models, and a fourth-order
//! symplectic composition on the time-augmented Hamiltonian for models
//! that expose a kinetic/potential splitting. [`integrate`] drives either
//! scheme and feeds the averaging accumulators.

mod rk4;
mod symplectic;

pub use rk4::{rk4_step, Rk4};
pub use symplectic::{
    augment_hamiltonian, symplectic4_step, AugmentedHamiltonianSystem, AugmentedState,
    Symplectic4, W0, W1,
};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::averaging::{AverageAccumulator, EscapeCause, EscapeCheck, EscapePredicate, Observable};
use crate::models::{wrap_angle, SystemModel, Topology};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    Symplectic4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub step: f64,
    pub horizon: f64,
    /// Steps between running-average checkpoints.
    pub checkpoint_stride: u64,
    /// Record the conservation of `H̄` along symplectic trajectories.
    #[serde(default)]
    pub monitor_invariant: bool,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, step: f64, horizon: f64, checkpoint_stride: u64) -> Result<Self> {
        let c = Self {
            scheme,
            step,
            horizon,
            checkpoint_stride,
            monitor_invariant: false,
        };
        c.validate()?;
        Ok(c)
    }

    /// Step `2π/(Ω_1 N)` and horizon `periods · 2π/Ω_1`, with the default
    /// checkpoint stride of one period of the slowest forcing frequency.
    pub fn per_forcing_period(
        scheme: Scheme,
        model: &dyn SystemModel,
        steps_per_period: u32,
        periods: f64,
    ) -> Result<Self> {
        if steps_per_period == 0 {
            return Err(Error::invalid("steps per period must be positive"));
        }
        let period = model.forcing().base_period();
        let step = period / f64::from(steps_per_period);
        let stride = default_checkpoint_stride(model, step);
        Self::new(scheme, step, period * periods, stride)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.step) {
            return Err(Error::invalid(format!(
                "horizon {} shorter than one step {}",
                self.horizon, self.step
            )));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::invalid("checkpoint stride must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        ((self.horizon / self.step).round() as u64).max(1)
    }

    /// Rejects schemes the model cannot support.
    pub fn check_model(&self, model: &dyn SystemModel) -> Result<()> {
        self.validate()?;
        if self.scheme == Scheme::Symplectic4 && model.splitting().is_none() {
            return Err(Error::MissingSplitting(model.name().to_string()));
        }
        Ok(())
    }
}

/// Steps per period of the slowest forcing frequency.
pub fn default_checkpoint_stride(model: &dyn SystemModel, step: f64) -> u64 {
    let slowest = model
        .forcing()
        .frequencies
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    ((TAU / slowest / step).round() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    Escaped {
        cause: EscapeCause,
        time: f64,
        step: u64,
    },
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    /// Terminal augmented state; circular coordinates and phases in `[0, 2π)`.
    pub state: Vec<f64>,
    /// Full turns removed from each coordinate of `M` (zero on lines).
    pub turns: Vec<i64>,
    pub time: f64,
    pub steps: u64,
    pub status: TrajectoryStatus,
    pub accumulators: Vec<AverageAccumulator>,
    /// Conservation of `H̄` when requested for a symplectic run.
    pub invariant_drift: Option<InvariantDrift>,
}

/// Deviation of `H̄` from its initial value 0 along a symplectic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    /// `max_t |H̄(t)|`, bounded oscillation included.
    pub max_abs: f64,
    /// `|⟨H̄⟩_last − ⟨H̄⟩_first|` over the first and last tenth of the steps.
    pub secular: f64,
}

#[derive(Debug)]
struct DriftTracker {
    window: u64,
    total: u64,
    first: f64,
    last: f64,
    max_abs: f64,
}

impl DriftTracker {
    fn new(total: u64) -> Self {
        Self {
            window: (total / 10).max(1),
            total,
            first: 0.0,
            last: 0.0,
            max_abs: 0.0,
        }
    }

    fn record(&mut self, k: u64, value: f64) {
        self.max_abs = self.max_abs.max(value.abs());
        if k <= self.window {
            self.first += value;
        }
        if k + self.window > self.total {
            self.last += value;
        }
    }

    fn finish(&self) -> InvariantDrift {
        InvariantDrift {
            max_abs: self.max_abs,
            secular: ((self.last - self.first) / self.window as f64).abs(),
        }
    }
}

impl TrajectoryResult {
    pub fn escaped(&self) -> bool {
        matches!(self.status, TrajectoryStatus::Escaped { .. })
    }
}

enum Engine<'m, 's> {
    Rk4(Rk4<'m>),
    Symplectic {
        system: &'s AugmentedHamiltonianSystem<'m>,
        stepper: Symplectic4<'s, 'm>,
        state: AugmentedState,
    },
}

/// Integrates from `ic = (m, θ)` over the configured horizon, averaging
/// every observable along the way. Stops early when `escape` fires or the
/// state becomes non-finite; both end up in the result's status.
pub fn integrate(
    model: &dyn SystemModel,
    ic: &[f64],
    config: &IntegratorConfig,
    observables: &[Observable],
    escape: Option<&EscapePredicate>,
) -> Result<TrajectoryResult> {
    config.check_model(model)?;
    let n = model.state_len();
    if ic.len() != n {
        return Err(Error::invalid(format!(
            "initial condition has {} components, model state has {n}",
            ic.len()
        )));
    }
    for o in observables {
        o.validate(n)?;
    }
    if let Some(p) = escape {
        p.validate(n)?;
    }

    let d = model.dim_m();
    let h = config.step;
    let total = config.steps();
    let augmented;
    let mut engine = match config.scheme {
        Scheme::Rk4 => Engine::Rk4(Rk4::new(model)),
        Scheme::Symplectic4 => {
            augmented = augment_hamiltonian(model, &ic[d..])?;
            let dof = augmented.degrees_of_freedom();
            let state = augmented.initial_state(&ic[..dof], &ic[dof..2 * dof]);
            Engine::Symplectic {
                stepper: augmented.stepper(),
                system: &augmented,
                state,
            }
        }
    };

    let mut x = ic.to_vec();
    let mut accumulators: Vec<AverageAccumulator> = observables
        .iter()
        .map(|o| AverageAccumulator::new(o.evaluate(&x), h, config.checkpoint_stride))
        .collect();
    let mut monitor = escape.map(|p| p.monitor());
    let track = config.monitor_invariant && config.scheme == Scheme::Symplectic4;
    let mut drift = DriftTracker::new(total);
    let mut status = TrajectoryStatus::Completed;
    let mut taken = 0;

    for k in 1..=total {
        let finite = match &mut engine {
            Engine::Rk4(rk) => rk.step(&mut x, h),
            Engine::Symplectic {
                system,
                stepper,
                state,
            } => {
                let ok = stepper.step(state, h);
                // q_0 follows dq_0/dt = 1 exactly
                state.q0 = k as f64 * h;
                symplectic::to_model_state(system, state, &mut x);
                if track {
                    drift.record(k, system.hamiltonian(state));
                }
                ok
            }
        };
        taken = k;
        let t = k as f64 * h;
        if !finite {
            status = escaped(&mut accumulators, EscapeCause::NonFinite, t, k);
            break;
        }
        for (acc, o) in accumulators.iter_mut().zip(observables) {
            acc.accumulate(o.evaluate(&x));
        }
        if accumulators.iter().any(|a| !a.is_converging()) {
            status = escaped(&mut accumulators, EscapeCause::NonFinite, t, k);
            break;
        }
        if let Some(m) = monitor.as_mut() {
            if m.check(&x) == EscapeCheck::Escaped {
                status = escaped(&mut accumulators, EscapeCause::Threshold, t, k);
                break;
            }
        }
    }

    let mut turns = vec![0i64; d];
    for (i, topo) in model.topology().iter().enumerate() {
        if *topo == Topology::Circle && x[i].is_finite() {
            turns[i] = (x[i] / TAU).floor() as i64;
            x[i] = wrap_angle(x[i]);
        }
    }
    for th in &mut x[d..] {
        if th.is_finite() {
            *th = wrap_angle(*th);
        }
    }

    Ok(TrajectoryResult {
        state: x,
        turns,
        time: taken as f64 * h,
        steps: taken,
        status,
        accumulators,
        invariant_drift: track.then(|| drift.finish()),
    })
}

fn escaped(accs: &mut [AverageAccumulator], cause: EscapeCause, time: f64, step: u64) -> TrajectoryStatus {
    for a in accs.iter_mut() {
        a.mark_escaped(cause, time);
    }
    TrajectoryStatus::Escaped { cause, time, step }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DissipativeSystem, HarmonicOscillator, QuasiperiodicForcing, SwingModel, SwingParameters};
    use std::f64::consts::{PI, SQRT_2};

    fn swing(modes: Vec<usize>, c: f64) -> SwingModel {
        SwingModel::at_zero_phase(
            SwingParameters::with_rms_amplitude(0.95, 1.0, 100.0, 20, modes, c).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(Scheme::Rk4, 0.0, 1.0, 1).is_err());
        assert!(IntegratorConfig::new(Scheme::Rk4, 0.1, 0.05, 1).is_err());
        assert!(IntegratorConfig::new(Scheme::Rk4, 0.1, 1.0, 0).is_err());
        assert_eq!(IntegratorConfig::new(Scheme::Rk4, 0.1, 1.0, 1).unwrap().steps(), 10);
        let m = HarmonicOscillator::new(QuasiperiodicForcing::at_zero_phase(vec![0.5], vec![0.1]).unwrap());
        let c = IntegratorConfig::new(Scheme::Symplectic4, 0.1, 1.0, 1).unwrap();
        assert!(matches!(
            integrate(&m, &[0.0, 0.0, 0.0], &c, &[], None),
            Err(Error::MissingSplitting(_))
        ));
    }

    #[test]
    fn single_step_horizon() {
        let m = HarmonicOscillator::new(QuasiperiodicForcing::at_zero_phase(vec![0.5], vec![0.1]).unwrap());
        let c = IntegratorConfig::new(Scheme::Rk4, 0.1, 0.1, 1).unwrap();
        let r = integrate(&m, &[1.0, 0.0, 0.0], &c, &[Observable::M1Squared], None).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.status, TrajectoryStatus::Completed);
    }

    #[test]
    fn dissipative_never_escapes() {
        let m = DissipativeSystem::new(1.0, QuasiperiodicForcing::at_zero_phase(vec![SQRT_2], vec![1.0]).unwrap()).unwrap();
        let c = IntegratorConfig::per_forcing_period(Scheme::Rk4, &m, 32, 50.0).unwrap();
        let esc = EscapePredicate { coordinate: 0, threshold: 50.0, consecutive_steps: 1 };
        let r = integrate(&m, &[20.0, 1.0], &c, &[Observable::MSquared], Some(&esc)).unwrap();
        assert_eq!(r.status, TrajectoryStatus::Completed);
        assert_eq!(r.steps, c.steps());
    }

    #[test]
    fn swing_outside_separatrix_escapes() {
        let m = swing(vec![1], 1.5);
        let c = IntegratorConfig::per_forcing_period(Scheme::Symplectic4, &m, 16, 200.0).unwrap();
        let r = integrate(&m, &[1.5, 0.5, 0.0], &c, &[Observable::Sin2Delta], Some(&EscapePredicate::SWING_DEFAULT)).unwrap();
        assert!(matches!(r.status, TrajectoryStatus::Escaped { cause: EscapeCause::Threshold, .. }));
        assert!(r.steps < c.steps());
        assert!(!r.accumulators[0].is_converging());
    }

    #[test]
    fn swing_inside_separatrix_stays() {
        let m = swing(vec![1], 0.0);
        let c = IntegratorConfig::per_forcing_period(Scheme::Symplectic4, &m, 16, 2000.0).unwrap();
        let r = integrate(&m, &[0.95f64.asin(), 0.1, 0.0], &c, &[], Some(&EscapePredicate::SWING_DEFAULT)).unwrap();
        assert_eq!(r.status, TrajectoryStatus::Completed);
        assert!((0.0..TAU).contains(&r.state[0]));
        assert_eq!(r.turns, vec![0, 0]);
    }

    #[test]
    fn time_surrogate_is_exact() {
        let m = swing(vec![1], 1.5);
        let mut c = IntegratorConfig::per_forcing_period(Scheme::Symplectic4, &m, 16, 3.0).unwrap();
        c.horizon = 37.0 * c.step;
        let r = integrate(&m, &[1.2, 0.0, 0.0], &c, &[], None).unwrap();
        let expected = wrap_angle(m.forcing().frequencies[0] * (37.0 * c.step));
        assert_eq!(r.time, 37.0 * c.step);
        assert!((r.state[2] - expected).abs() < 1e-12);
    }

    #[test]
    fn forced_swing_invariant_has_no_secular_drift() {
        // 2000 forcing periods at 16 steps per period
        let m = swing(vec![1], 1.5);
        let mut c = IntegratorConfig::per_forcing_period(Scheme::Symplectic4, &m, 16, 2000.0).unwrap();
        c.monitor_invariant = true;
        let r = integrate(&m, &[1.3, 0.0, 0.0], &c, &[], Some(&EscapePredicate::SWING_DEFAULT)).unwrap();
        assert_eq!(r.status, TrajectoryStatus::Completed);
        let d = r.invariant_drift.unwrap();
        assert!(d.secular < 1e-8, "{d:?}");
        // bounded O(h⁴) oscillation
        assert!(d.max_abs < 1e-4, "{d:?}");
    }

    #[test]
    fn symplectic_matches_rk4_on_swing() {
        let m = swing(vec![1, 2], 1.5);
        let c4 = IntegratorConfig::new(Scheme::Symplectic4, 0.01, 20.0, 100).unwrap();
        let cr = IntegratorConfig { scheme: Scheme::Rk4, ..c4 };
        let ic = [1.3, 0.05, 0.4, 2.0];
        let a = integrate(&m, &ic, &c4, &[], None).unwrap();
        let b = integrate(&m, &ic, &cr, &[], None).unwrap();
        for i in 0..2 {
            assert!((a.state[i] - b.state[i]).abs() < 1e-8, "{:?} vs {:?}", a.state, b.state);
        }
    }

    #[test]
    fn rk4_tracks_harmonic_closed_form() {
        // 10 forcing periods at h = 1e-3
        let m = HarmonicOscillator::new(QuasiperiodicForcing::at_zero_phase(vec![PI / 3.0, 1.1], vec![0.2, 0.2]).unwrap());
        let ic = [0.5, -1.0, 0.3, 1.2];
        let c = IntegratorConfig::new(Scheme::Rk4, 1e-3, 10.0 * m.forcing().base_period(), 1000).unwrap();
        let r = integrate(&m, &ic, &c, &[], None).unwrap();
        let exact = m.exact_solution(&ic, r.time).unwrap();
        assert!((r.state[0] - exact[0]).abs() < 1e-6);
        assert!((r.state[1] - exact[1]).abs() < 1e-6);
    }
}
