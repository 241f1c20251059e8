use std::f64::consts::{FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{wrap_angle, HamiltonianSplitting, QuasiperiodicForcing, SystemModel, Topology};
use crate::{Error, Result};

/// Parameters of the spatially averaged swing dynamics of a loop grid of
/// `n_g` identical generators tied to an infinite bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingParameters {
    /// Mechanical input power per generator.
    pub p_m: f64,
    /// Maximum transmission power to the infinite bus.
    pub b: f64,
    /// Maximum transmission power between neighbouring generators.
    pub b_int: f64,
    pub n_g: usize,
    /// Excited loop modes `J`, each in `1..n_g`.
    pub modes: Vec<usize>,
    /// Modal amplitudes `c_j`, one per entry of `modes`.
    pub amplitudes: Vec<f64>,
}

impl SwingParameters {
    /// Equal split `c_j = rms / √|J|` so that `√(Σ c_j²) = rms`.
    pub fn with_rms_amplitude(
        p_m: f64,
        b: f64,
        b_int: f64,
        n_g: usize,
        modes: Vec<usize>,
        rms: f64,
    ) -> Result<Self> {
        let c = if modes.is_empty() {
            0.0
        } else {
            rms / (modes.len() as f64).sqrt()
        };
        let amplitudes = vec![c; modes.len()];
        let p = Self {
            p_m,
            b,
            b_int,
            n_g,
            modes,
            amplitudes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_g < 1 {
            return Err(Error::invalid("generator count must be at least 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::invalid("mode set must not be empty"));
        }
        if self.amplitudes.len() != self.modes.len() {
            return Err(Error::invalid(format!(
                "{} amplitudes for {} modes",
                self.amplitudes.len(),
                self.modes.len()
            )));
        }
        for &j in &self.modes {
            check_mode(j, self.n_g)?;
        }
        let mut sorted = self.modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.modes.len() {
            return Err(Error::invalid("mode set contains duplicates"));
        }
        if [self.p_m, self.b, self.b_int]
            .iter()
            .chain(&self.amplitudes)
            .any(|x| !x.is_finite())
        {
            return Err(Error::invalid("swing parameters must be finite"));
        }
        if self.b_int == 0.0 {
            return Err(Error::invalid("b_int = 0 gives zero mode frequencies"));
        }
        Ok(())
    }
}

fn check_mode(j: usize, n_g: usize) -> Result<()> {
    if j < 1 || j >= n_g {
        return Err(Error::invalid(format!(
            "mode index {j} outside 1..={} (N_G = {n_g})",
            n_g.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Modal angular frequency `Ω_j = 2 √|b_int| |sin(π j / N_G)|`.
pub fn mode_frequency(j: usize, n_g: usize, b_int: f64) -> Result<f64> {
    check_mode(j, n_g)?;
    Ok(2.0 * b_int.abs().sqrt() * (PI * j as f64 / n_g as f64).sin().abs())
}

/// Modal shape `e_ij = √(2/N_G) cos(2π i j / N_G + π/4)`.
pub fn mode_shape(i: usize, j: usize, n_g: usize) -> Result<f64> {
    if i < 1 || i > n_g {
        return Err(Error::invalid(format!(
            "generator index {i} outside 1..={n_g}"
        )));
    }
    check_mode(j, n_g)?;
    let n = n_g as f64;
    // reduce i·j mod N_G first so the angle stays small and exact
    let arg = TAU * ((i * j) % n_g) as f64 / n + FRAC_PI_4;
    Ok((2.0 / n).sqrt() * arg.cos())
}

/// Reduced swing model on `T¹ × R` driven by the excited loop modes.
///
/// State `m = (δ, ω)`; phases `θ_j` advance at `Ω_j`.
#[derive(Debug, Clone)]
pub struct SwingModel {
    params: SwingParameters,
    forcing: QuasiperiodicForcing,
    /// Row-major `N_G × |J|` table of `e_ij c_j`.
    coupling: Vec<f64>,
}

const STACK_MODES: usize = 32;

impl SwingModel {
    pub fn new(params: SwingParameters, phases: Vec<f64>) -> Result<Self> {
        params.validate()?;
        let frequencies = params
            .modes
            .iter()
            .map(|&j| mode_frequency(j, params.n_g, params.b_int))
            .collect::<Result<Vec<_>>>()?;
        let forcing = QuasiperiodicForcing::new(frequencies, params.amplitudes.clone(), phases)?;
        let mut coupling = Vec::with_capacity(params.n_g * params.modes.len());
        for i in 1..=params.n_g {
            for (&j, &c) in params.modes.iter().zip(&params.amplitudes) {
                coupling.push(mode_shape(i, j, params.n_g)? * c);
            }
        }
        Ok(Self {
            params,
            forcing,
            coupling,
        })
    }

    pub fn at_zero_phase(params: SwingParameters) -> Result<Self> {
        let n = params.modes.len();
        Self::new(params, vec![0.0; n])
    }

    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        Self::new(self.params.clone(), phases.to_vec())
    }

    pub fn params(&self) -> &SwingParameters {
        &self.params
    }

    fn modes(&self) -> usize {
        self.params.modes.len()
    }

    fn with_trig<R>(&self, theta: &[f64], f: impl FnOnce(&[f64], &[f64]) -> R) -> R {
        let n = self.modes();
        if n <= STACK_MODES {
            let mut c = [0.0; STACK_MODES];
            let mut s = [0.0; STACK_MODES];
            for (k, th) in theta.iter().enumerate() {
                (s[k], c[k]) = th.sin_cos();
            }
            f(&c[..n], &s[..n])
        } else {
            let (s, c): (Vec<f64>, Vec<f64>) = theta.iter().map(|th| th.sin_cos()).unzip();
            f(&c, &s)
        }
    }

    /// `Σ_j e_ij c_j cos θ_j` for generator row `i` (0-based).
    #[inline]
    fn modal_offset(&self, row: &[f64], cos_theta: &[f64]) -> f64 {
        row.iter().zip(cos_theta).map(|(e, c)| e * c).sum()
    }

    /// `(1/N_G) Σ_i sin(φ_i + δ)`, the averaged electrical torque per unit `b`.
    fn mean_sin(&self, delta: f64, cos_theta: &[f64]) -> f64 {
        let n = self.modes();
        let sum: f64 = self
            .coupling
            .chunks_exact(n)
            .map(|row| (self.modal_offset(row, cos_theta) + delta).sin())
            .sum();
        sum / self.params.n_g as f64
    }

    fn mean_cos(&self, delta: f64, cos_theta: &[f64]) -> f64 {
        let n = self.modes();
        let sum: f64 = self
            .coupling
            .chunks_exact(n)
            .map(|row| (self.modal_offset(row, cos_theta) + delta).cos())
            .sum();
        sum / self.params.n_g as f64
    }
}

impl SystemModel for SwingModel {
    fn name(&self) -> &'static str {
        "swing"
    }

    fn topology(&self) -> &[Topology] {
        &[Topology::Circle, Topology::Line]
    }

    fn forcing(&self) -> &QuasiperiodicForcing {
        &self.forcing
    }

    fn vector_field(&self, m: &[f64], theta: &[f64], dm: &mut [f64]) {
        let delta = wrap_angle(m[0]);
        let torque = self.with_trig(theta, |c, _| self.mean_sin(delta, c));
        dm[0] = m[1];
        dm[1] = self.params.p_m - self.params.b * torque;
    }

    /// `½ω² − p_m δ − (b/N_G) Σ cos(φ_i + δ)` with `δ` taken unwrapped.
    fn hamiltonian(&self, m: &[f64], theta: &[f64]) -> Option<f64> {
        Some(self.kinetic(&m[1..2]) + self.potential(&m[..1], theta))
    }

    fn splitting(&self) -> Option<&dyn HamiltonianSplitting> {
        Some(self)
    }
}

impl HamiltonianSplitting for SwingModel {
    fn degrees_of_freedom(&self) -> usize {
        1
    }

    fn kinetic(&self, p: &[f64]) -> f64 {
        0.5 * p[0] * p[0]
    }

    fn kinetic_gradient(&self, p: &[f64], dq: &mut [f64]) {
        dq[0] = p[0];
    }

    fn potential(&self, q: &[f64], theta: &[f64]) -> f64 {
        let delta = q[0];
        let mean_cos = self.with_trig(theta, |c, _| self.mean_cos(wrap_angle(delta), c));
        -self.params.p_m * delta - self.params.b * mean_cos
    }

    fn potential_gradient(&self, q: &[f64], theta: &[f64], dq: &mut [f64], dtheta: &mut [f64]) {
        let delta = wrap_angle(q[0]);
        let n = self.modes();
        let scale = self.params.b / self.params.n_g as f64;
        self.with_trig(theta, |cos_theta, sin_theta| {
            dtheta[..n].fill(0.0);
            let mut torque = 0.0;
            for row in self.coupling.chunks_exact(n) {
                let s = (self.modal_offset(row, cos_theta) + delta).sin();
                torque += s;
                for ((d, e), st) in dtheta.iter_mut().zip(row).zip(sin_theta) {
                    *d -= s * e * st;
                }
            }
            dq[0] = -self.params.p_m + scale * torque;
            for d in dtheta[..n].iter_mut() {
                *d *= scale;
            }
        });
    }
}
