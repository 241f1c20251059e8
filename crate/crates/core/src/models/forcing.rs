use serde::{Deserialize, Serialize};

use super::wrap_angle;
use crate::{Error, Result};

/// Largest integer coefficient scanned by [`QuasiperiodicForcing::near_resonances`].
pub const K_CHECK: i32 = 5;
/// Residual below which `Σ k_i Ω_i` counts as a resonance.
pub const EPS_RESONANCE: f64 = 1e-9;

/// The torus drive: `N` frequencies, amplitudes and initial phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiperiodicForcing {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

/// An integer relation `Σ k_i Ω_i ≈ 0` found by the resonance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub coefficients: Vec<i32>,
    pub residual: f64,
}

impl std::fmt::Display for Resonance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "near-resonant frequencies: k = {:?}, |Σ k_i Ω_i| = {:e}",
            self.coefficients, self.residual
        )
    }
}

impl QuasiperiodicForcing {
    /// Validates the lists and reduces phases to `[0, 2π)`.
    pub fn new(frequencies: Vec<f64>, amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let n = frequencies.len();
        if n == 0 {
            return Err(Error::invalid("forcing needs at least one frequency"));
        }
        if amplitudes.len() != n || phases.len() != n {
            return Err(Error::invalid(format!(
                "forcing lists differ in length: {} frequencies, {} amplitudes, {} phases",
                n,
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some((i, w)) = frequencies
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::invalid(format!(
                "frequency {i} must be finite and positive, got {w}"
            )));
        }
        if amplitudes.iter().chain(&phases).any(|x| !x.is_finite()) {
            return Err(Error::invalid("forcing amplitudes and phases must be finite"));
        }
        let phases = phases.into_iter().map(wrap_angle).collect();
        Ok(Self {
            frequencies,
            amplitudes,
            phases,
        })
    }

    /// Forcing with all phases zero.
    pub fn at_zero_phase(frequencies: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        let n = frequencies.len();
        Self::new(frequencies, amplitudes, vec![0.0; n])
    }

    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        Self::new(
            self.frequencies.clone(),
            self.amplitudes.clone(),
            phases.to_vec(),
        )
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Period `2π/Ω_1` of the first forcing frequency.
    pub fn base_period(&self) -> f64 {
        std::f64::consts::TAU / self.frequencies[0]
    }

    /// Scans integer vectors with `0 < max|k_i| ≤ k_max` and reports those
    /// with `|Σ k_i Ω_i| < eps`. Each relation is reported once (first
    /// nonzero coefficient positive).
    pub fn near_resonances(&self, k_max: i32, eps: f64) -> Vec<Resonance> {
        let n = self.len();
        let mut found = Vec::new();
        let mut k = vec![-k_max; n];
        loop {
            if let Some(first) = k.iter().find(|&&c| c != 0) {
                if *first > 0 {
                    let residual: f64 = k
                        .iter()
                        .zip(&self.frequencies)
                        .map(|(&c, w)| f64::from(c) * w)
                        .sum::<f64>()
                        .abs();
                    if residual < eps {
                        found.push(Resonance {
                            coefficients: k.clone(),
                            residual,
                        });
                    }
                }
            }
            // odometer increment
            let mut pos = 0;
            loop {
                if pos == n {
                    return found;
                }
                if k[pos] < k_max {
                    k[pos] += 1;
                    break;
                }
                k[pos] = -k_max;
                pos += 1;
            }
        }
    }

    /// Resonance scan with the default `K_CHECK` and `EPS_RESONANCE`.
    pub fn resonance_warnings(&self) -> Vec<Resonance> {
        self.near_resonances(K_CHECK, EPS_RESONANCE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_lists() {
        assert!(QuasiperiodicForcing::new(vec![], vec![], vec![]).is_err());
        assert!(QuasiperiodicForcing::new(vec![1.0, 2.0], vec![0.1], vec![0.0, 0.0]).is_err());
        assert!(QuasiperiodicForcing::at_zero_phase(vec![-1.0], vec![0.1]).is_err());
        assert!(QuasiperiodicForcing::at_zero_phase(vec![0.0], vec![0.1]).is_err());
        assert!(QuasiperiodicForcing::at_zero_phase(vec![f64::NAN], vec![0.1]).is_err());
    }

    #[test]
    fn phases_are_wrapped() {
        let f = QuasiperiodicForcing::new(vec![1.0], vec![0.0], vec![-PI / 2.0]).unwrap();
        assert!((f.phases[0] - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn resonance_scan() {
        let f = QuasiperiodicForcing::at_zero_phase(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let r = f.resonance_warnings();
        assert!(r.iter().any(|r| r.coefficients == vec![2, -1]));

        let reference = QuasiperiodicForcing::at_zero_phase(vec![PI / 3.0, 1.1], vec![0.2, 0.2]).unwrap();
        assert!(reference.resonance_warnings().is_empty());

        let single = QuasiperiodicForcing::at_zero_phase(vec![0.3], vec![1.0]).unwrap();
        assert!(single.resonance_warnings().is_empty());
    }
}
