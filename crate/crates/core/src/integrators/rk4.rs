use crate::models::{augmented_rhs, SystemModel};
use crate::{Error, Result};

/// Classical fourth-order Runge–Kutta on the augmented state, with
/// preallocated stage buffers.
pub struct Rk4<'a> {
    model: &'a dyn SystemModel,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Rk4<'a> {
    pub fn new(model: &'a dyn SystemModel) -> Self {
        let n = model.state_len();
        Self {
            model,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `state` in place by `h`. Returns `false` if any component
    /// became non-finite.
    pub fn step(&mut self, state: &mut [f64], h: f64) -> bool {
        let half = 0.5 * h;
        augmented_rhs(self.model, state, &mut self.k1);
        for ((t, s), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k1) {
            *t = s + half * k;
        }
        augmented_rhs(self.model, &self.tmp, &mut self.k2);
        for ((t, s), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k2) {
            *t = s + half * k;
        }
        augmented_rhs(self.model, &self.tmp, &mut self.k3);
        for ((t, s), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k3) {
            *t = s + h * k;
        }
        augmented_rhs(self.model, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        let mut finite = true;
        for (i, s) in state.iter_mut().enumerate() {
            *s += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
            finite &= s.is_finite();
        }
        finite
    }
}

/// One RK4 step from `state`, returning the new state.
pub fn rk4_step(model: &dyn SystemModel, state: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let mut next = state.to_vec();
    if Rk4::new(model).step(&mut next, h) {
        Ok(next)
    } else {
        Err(Error::NonFinite { step: 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DissipativeSystem, HarmonicOscillator, QuasiperiodicForcing};
    use std::f64::consts::PI;

    #[test]
    fn frozen_field_leaves_state_unchanged() {
        // λ·0 with zero forcing amplitude and m = 0: dm/dt = 0
        let m = DissipativeSystem::new(
            1.0,
            QuasiperiodicForcing::at_zero_phase(vec![1.0], vec![0.0]).unwrap(),
        )
        .unwrap();
        let s = rk4_step(&m, &[0.0, 0.3], 0.1).unwrap();
        assert_eq!(s[0], 0.0);
    }

    #[test]
    fn exponential_decay_tableau() {
        // dm/dt = −m (λ = 1, unforced); RK4 gives 1 − h + h²/2 − h³/6 + h⁴/24
        let m = DissipativeSystem::new(
            1.0,
            QuasiperiodicForcing::at_zero_phase(vec![1.0], vec![0.0]).unwrap(),
        )
        .unwrap();
        let s = rk4_step(&m, &[1.0, 0.0], 0.1).unwrap();
        assert!((s[0] - 0.9048375).abs() < 1e-15);
        assert!((s[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let m = HarmonicOscillator::new(
            QuasiperiodicForcing::at_zero_phase(vec![PI / 3.0], vec![0.2]).unwrap(),
        );
        assert!(rk4_step(&m, &[0.0, 0.0, 0.0], 0.0).is_err());
    }

    fn global_error(h: f64) -> f64 {
        let m = HarmonicOscillator::new(
            QuasiperiodicForcing::at_zero_phase(vec![PI / 3.0, 1.1], vec![0.2, 0.2]).unwrap(),
        );
        let ic = [1.0, -0.5, 0.2, 0.9];
        let t_end = 20.0;
        let n = (t_end / h).round() as usize;
        let mut s = ic.to_vec();
        let mut rk = Rk4::new(&m);
        for _ in 0..n {
            rk.step(&mut s, h);
        }
        let exact = m.exact_solution(&ic, t_end).unwrap();
        (s[0] - exact[0]).abs().max((s[1] - exact[1]).abs())
    }

    #[test]
    fn fourth_order_convergence() {
        let ratio = global_error(0.1) / global_error(0.05);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }
}
