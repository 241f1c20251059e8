use super::{QuasiperiodicForcing, SystemModel, Topology, EPS_DENOMINATOR};
use crate::{Error, Result};

/// Scalar relaxation `m' = −λ m + Σ F_i sin θ_i` with `λ > 0`.
#[derive(Debug, Clone)]
pub struct DissipativeSystem {
    lambda: f64,
    forcing: QuasiperiodicForcing,
}

impl DissipativeSystem {
    pub fn new(lambda: f64, forcing: QuasiperiodicForcing) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "decay rate must be positive, got {lambda}"
            )));
        }
        Ok(Self { lambda, forcing })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn denominators(&self) -> Result<Vec<f64>> {
        let l2 = self.lambda * self.lambda;
        self.forcing
            .frequencies
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let d = l2 + w * w;
                if d < EPS_DENOMINATOR {
                    Err(Error::Resonant {
                        index: i,
                        denominator: d,
                        tolerance: EPS_DENOMINATOR,
                    })
                } else {
                    Ok(d)
                }
            })
            .collect()
    }

    /// Closed-form state at time `t` from `(m_0, θ_1, …, θ_N)`.
    pub fn exact_solution(&self, ic: &[f64], t: f64) -> Result<Vec<f64>> {
        let den = self.denominators()?;
        let l = self.lambda;
        let f = &self.forcing;
        let response = |phase: f64, w: f64, amp: f64, d: f64| {
            amp / d * (l * phase.sin() - w * phase.cos())
        };
        let mut c = ic[0];
        let mut m = 0.0;
        let mut out = vec![0.0; ic.len()];
        for i in 0..f.len() {
            let (w, amp, d) = (f.frequencies[i], f.amplitudes[i], den[i]);
            c -= response(ic[1 + i], w, amp, d);
            let phase = w * t + ic[1 + i];
            m += response(phase, w, amp, d);
            out[1 + i] = phase;
        }
        out[0] = c * (-l * t).exp() + m;
        Ok(out)
    }

    /// Time-average of `m²`: `½ Σ F_i² / (λ² + Ω_i²)`, the same for every
    /// initial condition.
    pub fn exact_average(&self) -> Result<f64> {
        let den = self.denominators()?;
        Ok(0.5
            * self
                .forcing
                .amplitudes
                .iter()
                .zip(den)
                .map(|(a, d)| a * a / d)
                .sum::<f64>())
    }
}

impl SystemModel for DissipativeSystem {
    fn name(&self) -> &'static str {
        "dissipative"
    }

    fn topology(&self) -> &[Topology] {
        &[Topology::Line]
    }

    fn forcing(&self) -> &QuasiperiodicForcing {
        &self.forcing
    }

    fn vector_field(&self, m: &[f64], theta: &[f64], dm: &mut [f64]) {
        let drive: f64 = self
            .forcing
            .amplitudes
            .iter()
            .zip(theta)
            .map(|(f, th)| f * th.sin())
            .sum();
        dm[0] = -self.lambda * m[0] + drive;
    }
}
