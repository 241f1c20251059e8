use super::{QuasiperiodicForcing, SystemModel, Topology, EPS_DENOMINATOR};
use crate::{Error, Result};

/// Linear oscillator `m1'' = −m1 + Σ F_i sin θ_i`.
#[derive(Debug, Clone)]
pub struct HarmonicOscillator {
    forcing: QuasiperiodicForcing,
}

impl HarmonicOscillator {
    pub fn new(forcing: QuasiperiodicForcing) -> Self {
        Self { forcing }
    }

    /// `F_i / (1 − Ω_i²)` for every mode, rejecting resonant frequencies.
    fn response_gains(&self) -> Result<Vec<f64>> {
        self.forcing
            .frequencies
            .iter()
            .zip(&self.forcing.amplitudes)
            .enumerate()
            .map(|(i, (w, f))| {
                let denominator = 1.0 - w * w;
                if denominator.abs() < EPS_DENOMINATOR {
                    Err(Error::Resonant {
                        index: i,
                        denominator,
                        tolerance: EPS_DENOMINATOR,
                    })
                } else {
                    Ok(f / denominator)
                }
            })
            .collect()
    }

    /// Free-oscillation constants `(C_1, C_2)` fixed by the initial condition:
    /// `C_1 = m_10 − Σ g_i sin θ_i0`, `C_2 = m_20 − Σ g_i Ω_i cos θ_i0`
    /// with `g_i = F_i / (1 − Ω_i²)`.
    pub fn free_constants(&self, ic: &[f64]) -> Result<(f64, f64)> {
        let gains = self.response_gains()?;
        let theta = &ic[2..];
        let mut c1 = ic[0];
        let mut c2 = ic[1];
        for ((g, w), th) in gains.iter().zip(&self.forcing.frequencies).zip(theta) {
            let (s, c) = th.sin_cos();
            c1 -= g * s;
            c2 -= g * w * c;
        }
        Ok((c1, c2))
    }

    /// Closed-form state at time `t` from the augmented initial condition
    /// `(m1, m2, θ_1, …, θ_N)`:
    /// `m1(t) = C_1 cos t + C_2 sin t + Σ g_i sin(Ω_i t + θ_i0)`.
    /// Phases are returned unwrapped.
    pub fn exact_solution(&self, ic: &[f64], t: f64) -> Result<Vec<f64>> {
        let (c1, c2) = self.free_constants(ic)?;
        let gains = self.response_gains()?;
        let (s, c) = t.sin_cos();
        let mut m1 = c1 * c + c2 * s;
        let mut m2 = -c1 * s + c2 * c;
        let mut out = vec![0.0; ic.len()];
        for (i, (g, w)) in gains.iter().zip(&self.forcing.frequencies).enumerate() {
            let phase = w * t + ic[2 + i];
            let (ps, pc) = phase.sin_cos();
            m1 += g * ps;
            m2 += g * w * pc;
            out[2 + i] = phase;
        }
        out[0] = m1;
        out[1] = m2;
        Ok(out)
    }

    /// Time-average of `m1²`: `½ (C_1² + C_2² + Σ F_i² / (1 − Ω_i²)²)`.
    pub fn exact_average(&self, ic: &[f64]) -> Result<f64> {
        let (c1, c2) = self.free_constants(ic)?;
        let forced: f64 = self.response_gains()?.iter().map(|g| g * g).sum();
        Ok(0.5 * (c1 * c1 + c2 * c2 + forced))
    }

    /// Center `(Σ g_i sin θ_i0, Σ g_i Ω_i cos θ_i0)` of the circular level
    /// sets of the `m1²` average in the `(m1, m2)` plane; the average is
    /// smallest there.
    pub fn level_set_center(&self, phases: &[f64]) -> Result<(f64, f64)> {
        let gains = self.response_gains()?;
        let mut x = 0.0;
        let mut y = 0.0;
        for ((g, w), th) in gains.iter().zip(&self.forcing.frequencies).zip(phases) {
            let (s, c) = th.sin_cos();
            x += g * s;
            y += g * w * c;
        }
        Ok((x, y))
    }
}

impl SystemModel for HarmonicOscillator {
    fn name(&self) -> &'static str {
        "harmonic"
    }

    fn topology(&self) -> &[Topology] {
        &[Topology::Line, Topology::Line]
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
        dm[0] = m[1];
        dm[1] = -m[0] + drive;
    }
}
