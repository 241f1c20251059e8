use crate::models::{wrap_angle, HamiltonianSplitting, SystemModel};
use crate::{Error, Result};

/// Triple-jump outer weight `1 / (2 − 2^{1/3})`.
pub const W1: f64 = 1.351_207_191_959_657_8;
/// Triple-jump inner weight `−2^{1/3} / (2 − 2^{1/3})`.
pub const W0: f64 = -1.702_414_383_919_315_3;

/// Time-dependent Hamiltonian `H(q, p, t)` lifted to the autonomous
/// `H̄(q_0, p_0, q, p) = p_0 + H(q, p, q_0)`, with time carried by `q_0`
/// and the phases `θ_j = θ_j0 + Ω_j q_0`.
pub struct AugmentedHamiltonianSystem<'a> {
    splitting: &'a dyn HamiltonianSplitting,
    frequencies: &'a [f64],
    phases0: Vec<f64>,
    dof: usize,
}

/// Phase-space point of the augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Time surrogate.
    pub q0: f64,
    /// Conjugate of `q_0`; absorbs `−∂H/∂t`.
    pub p0: f64,
}

/// Builds the augmented system for `model` with initial forcing phases
/// `phases0`.
pub fn augment_hamiltonian<'a>(
    model: &'a dyn SystemModel,
    phases0: &[f64],
) -> Result<AugmentedHamiltonianSystem<'a>> {
    let splitting = model
        .splitting()
        .ok_or_else(|| Error::MissingSplitting(model.name().to_string()))?;
    AugmentedHamiltonianSystem::new(splitting, &model.forcing().frequencies, phases0)
}

impl<'a> AugmentedHamiltonianSystem<'a> {
    pub fn new(
        splitting: &'a dyn HamiltonianSplitting,
        frequencies: &'a [f64],
        phases0: &[f64],
    ) -> Result<Self> {
        if phases0.len() != frequencies.len() {
            return Err(Error::invalid(format!(
                "{} initial phases for {} frequencies",
                phases0.len(),
                frequencies.len()
            )));
        }
        Ok(Self {
            splitting,
            frequencies,
            phases0: phases0.to_vec(),
            dof: splitting.degrees_of_freedom(),
        })
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.dof
    }

    /// Phases `θ_j0 + Ω_j q_0`, unreduced.
    pub fn phases_at(&self, q0: f64, out: &mut [f64]) {
        for ((o, th), w) in out.iter_mut().zip(&self.phases0).zip(self.frequencies) {
            *o = th + w * q0;
        }
    }

    /// Original `H(q, p, q_0)`.
    pub fn base_hamiltonian(&self, q: &[f64], p: &[f64], q0: f64) -> f64 {
        let mut theta = vec![0.0; self.frequencies.len()];
        self.phases_at(q0, &mut theta);
        self.splitting.kinetic(p) + self.splitting.potential(q, &theta)
    }

    /// `H̄ = p_0 + H(q, p, q_0)`.
    pub fn hamiltonian(&self, s: &AugmentedState) -> f64 {
        s.p0 + self.base_hamiltonian(&s.q, &s.p, s.q0)
    }

    /// Initial augmented state at `q_0 = 0` with `p_0 = −H(q, p, 0)`, so
    /// that `H̄ ≡ 0` along the exact flow.
    pub fn initial_state(&self, q: &[f64], p: &[f64]) -> AugmentedState {
        let p0 = -self.base_hamiltonian(q, p, 0.0);
        AugmentedState {
            q: q.to_vec(),
            p: p.to_vec(),
            q0: 0.0,
            p0,
        }
    }

    pub fn stepper(&self) -> Symplectic4<'_, 'a> {
        let n = self.frequencies.len();
        Symplectic4 {
            system: self,
            theta: vec![0.0; n],
            dtheta: vec![0.0; n],
            grad: vec![0.0; self.dof],
        }
    }
}

/// Fourth-order triple-jump composition of kick–drift–kick leapfrogs on
/// `T̄ = T(p) + p_0`, `V̄ = V(q, q_0)`.
pub struct Symplectic4<'s, 'a> {
    system: &'s AugmentedHamiltonianSystem<'a>,
    theta: Vec<f64>,
    dtheta: Vec<f64>,
    grad: Vec<f64>,
}

impl Symplectic4<'_, '_> {
    fn kick(&mut self, s: &mut AugmentedState, tau: f64) {
        let sys = self.system;
        sys.phases_at(s.q0, &mut self.theta);
        sys.splitting
            .potential_gradient(&s.q, &self.theta, &mut self.grad, &mut self.dtheta);
        for (p, g) in s.p.iter_mut().zip(&self.grad) {
            *p -= tau * g;
        }
        let dv_dq0: f64 = self
            .dtheta
            .iter()
            .zip(sys.frequencies)
            .map(|(d, w)| d * w)
            .sum();
        s.p0 -= tau * dv_dq0;
    }

    fn drift(&mut self, s: &mut AugmentedState, tau: f64) {
        self.system
            .splitting
            .kinetic_gradient(&s.p, &mut self.grad);
        for (q, v) in s.q.iter_mut().zip(&self.grad) {
            *q += tau * v;
        }
        s.q0 += tau;
    }

    /// One composition step of size `h` (negative `h` steps backwards).
    /// Returns `false` if the state became non-finite.
    pub fn step(&mut self, s: &mut AugmentedState, h: f64) -> bool {
        let a = W1 * h;
        let b = W0 * h;
        // K(a/2) D(a) K((a+b)/2) D(b) K((b+a)/2) D(a) K(a/2)
        self.kick(s, 0.5 * a);
        self.drift(s, a);
        self.kick(s, 0.5 * (a + b));
        self.drift(s, b);
        self.kick(s, 0.5 * (a + b));
        self.drift(s, a);
        self.kick(s, 0.5 * a);
        s.q.iter().chain(&s.p).all(|x| x.is_finite()) && s.p0.is_finite()
    }
}

/// One symplectic4 step, returning the new augmented state.
pub fn symplectic4_step(
    system: &AugmentedHamiltonianSystem<'_>,
    state: &AugmentedState,
    h: f64,
) -> Result<AugmentedState> {
    let mut next = state.clone();
    if system.stepper().step(&mut next, h) {
        Ok(next)
    } else {
        Err(Error::NonFinite { step: 1 })
    }
}

/// Writes the model-space state `(q, p, θ mod 2π)` of an augmented point.
pub(crate) fn to_model_state(sys: &AugmentedHamiltonianSystem<'_>, s: &AugmentedState, out: &mut [f64]) {
    let n = sys.dof;
    out[..n].copy_from_slice(&s.q);
    out[n..2 * n].copy_from_slice(&s.p);
    sys.phases_at(s.q0, &mut out[2 * n..]);
    for th in &mut out[2 * n..] {
        *th = wrap_angle(*th);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HarmonicOscillator, QuasiperiodicForcing, SwingModel, SwingParameters};

    struct FreeParticle;

    impl HamiltonianSplitting for FreeParticle {
        fn degrees_of_freedom(&self) -> usize {
            1
        }
        fn kinetic(&self, p: &[f64]) -> f64 {
            0.5 * p[0] * p[0]
        }
        fn kinetic_gradient(&self, p: &[f64], dq: &mut [f64]) {
            dq[0] = p[0];
        }
        fn potential(&self, _q: &[f64], _theta: &[f64]) -> f64 {
            0.0
        }
        fn potential_gradient(&self, _q: &[f64], _theta: &[f64], dq: &mut [f64], dtheta: &mut [f64]) {
            dq[0] = 0.0;
            dtheta.fill(0.0);
        }
    }

    fn swing(amplitudes: Vec<f64>) -> SwingModel {
        let modes = (1..=amplitudes.len()).collect();
        SwingModel::at_zero_phase(SwingParameters {
            p_m: 0.95,
            b: 1.0,
            b_int: 100.0,
            n_g: 20,
            modes,
            amplitudes,
        })
        .unwrap()
    }

    #[test]
    fn coefficients_satisfy_order_conditions() {
        let c = 2f64.cbrt();
        assert!((W1 - 1.0 / (2.0 - c)).abs() < 1e-15);
        assert!((W0 + c / (2.0 - c)).abs() < 1e-15);
        assert!((W0 + 2.0 * W1 - 1.0).abs() < 1e-15);
        assert!((W0.powi(3) + 2.0 * W1.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn free_particle_is_exact() {
        let freq = [1.0];
        let sys = AugmentedHamiltonianSystem::new(&FreeParticle, &freq, &[0.0]).unwrap();
        for &h in &[0.01, 0.7, 5.0] {
            let s0 = sys.initial_state(&[0.3], &[1.25]);
            let s = symplectic4_step(&sys, &s0, h).unwrap();
            assert!((s.q[0] - (0.3 + 1.25 * h)).abs() < 1e-14 * (1.0 + h));
            assert_eq!(s.p[0], 1.25);
            assert_eq!(s.p0, s0.p0);
        }
    }

    #[test]
    fn missing_splitting_is_an_error() {
        let m = HarmonicOscillator::new(
            QuasiperiodicForcing::at_zero_phase(vec![0.5], vec![0.1]).unwrap(),
        );
        assert!(matches!(augment_hamiltonian(&m, &[0.0]), Err(Error::MissingSplitting(_))));
    }

    #[test]
    fn augmented_hamiltonian_commutes_with_evaluation() {
        let m = swing(vec![1.0, 0.8]);
        let sys = augment_hamiltonian(&m, &[0.4, 1.9]).unwrap();
        for k in 0..20 {
            let s = AugmentedState {
                q: vec![0.3 * k as f64 - 2.0],
                p: vec![0.05 * k as f64 - 0.4],
                q0: 0.77 * k as f64,
                p0: 1.3 - 0.1 * k as f64,
            };
            let mut theta = [0.0; 2];
            sys.phases_at(s.q0, &mut theta);
            let h = crate::models::SystemModel::hamiltonian(&m, &[s.q[0], s.p[0]], &theta).unwrap();
            assert_eq!(sys.base_hamiltonian(&s.q, &s.p, s.q0), h);
            let hbar = sys.hamiltonian(&s);
            assert_eq!(hbar, s.p0 + h);
            assert!((hbar - s.p0 - h).abs() <= 4.0 * f64::EPSILON * s.p0.abs().max(h.abs()));
        }
    }

    #[test]
    fn time_independent_case_keeps_p0() {
        let m = swing(vec![0.0]);
        let sys = augment_hamiltonian(&m, &[0.0]).unwrap();
        let mut s = sys.initial_state(&[1.2], &[0.05]);
        let p0 = s.p0;
        let mut st = sys.stepper();
        for _ in 0..500 {
            st.step(&mut s, 0.05);
        }
        assert_eq!(s.p0, p0);
    }

    #[test]
    fn time_reversible() {
        let m = swing(vec![0.0]);
        let sys = augment_hamiltonian(&m, &[0.0]).unwrap();
        let s0 = sys.initial_state(&[1.1], &[0.08]);
        let mut s = s0.clone();
        let mut st = sys.stepper();
        for _ in 0..1000 {
            st.step(&mut s, 0.01);
        }
        for _ in 0..1000 {
            st.step(&mut s, -0.01);
        }
        assert!((s.q[0] - s0.q[0]).abs() < 1e-10);
        assert!((s.p[0] - s0.p[0]).abs() < 1e-10);
        assert!(s.q0.abs() < 1e-10);
    }

    #[test]
    fn unforced_energy_has_no_secular_drift() {
        // Inside the separatrix; 1e6 steps of h = 0.05.
        let m = swing(vec![0.0]);
        let sys = augment_hamiltonian(&m, &[0.0]).unwrap();
        let mut s = sys.initial_state(&[0.95f64.asin()], &[0.1]);
        let mut st = sys.stepper();
        let block = 100_000;
        let mut maxima = Vec::new();
        for _ in 0..10 {
            let mut worst: f64 = 0.0;
            for _ in 0..block {
                st.step(&mut s, 0.05);
                worst = worst.max(sys.hamiltonian(&s).abs());
            }
            maxima.push(worst);
        }
        let first = maxima[0];
        assert!(first < 1e-7, "{maxima:?}");
        assert!(maxima.iter().all(|&m| m < 1.5 * first + 1e-12), "{maxima:?}");
    }
}
