//! Built-in oracle and integrator checks.

use std::f64::consts::{PI, SQRT_2};

use qpergodic::averaging::{EscapePredicate, Observable};
use qpergodic::integrators::{integrate, IntegratorConfig, Scheme, TrajectoryResult};
use qpergodic::models::{
    DissipativeSystem, HarmonicOscillator, QuasiperiodicForcing, SwingModel, SwingParameters,
    SystemModel,
};
use qpergodic::Result;

pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
}

pub enum Bound {
    Below(f64),
    Within(f64, f64),
}

impl Check {
    fn below(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: Bound::Below(tol),
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below(t) => self.measured < t,
            Bound::Within(lo, hi) => (lo..=hi).contains(&self.measured),
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::Below(t) => format!("< {t:e}"),
            Bound::Within(lo, hi) => format!("in [{lo}, {hi}]"),
        };
        format!("{verdict} {}: measured {:e}, required {bound}", self.name, self.measured)
    }
}

/// Evenly spread test points in `[lo, hi]²`, deterministic.
fn points(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    // golden-ratio lattice
    let g = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let v = (i as f64 * g).fract();
            (lo + (hi - lo) * u, lo + (hi - lo) * v)
        })
        .collect()
}

fn average(r: &TrajectoryResult) -> f64 {
    r.accumulators[0].average()
}

pub fn dissipative() -> Result<Vec<Check>> {
    let m = DissipativeSystem::new(
        1.0,
        QuasiperiodicForcing::at_zero_phase(vec![SQRT_2], vec![1.0])?,
    )?;
    let exact = m.exact_average()?;
    let c = IntegratorConfig::per_forcing_period(Scheme::Rk4, &m, 32, 10_000.0)?;
    let mut values = Vec::new();
    for (m0, u) in points(20, -10.0, 10.0) {
        let theta = (u + 10.0) / 20.0 * 2.0 * PI;
        let r = integrate(&m, &[m0, theta], &c, &[Observable::MSquared], None)?;
        values.push(average(&r));
    }
    let worst = values.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::below("dissipative |<m^2> - 1/6| (worst of 20 ic)", worst, 2e-3),
        Check::below("dissipative std-dev over ic", std_dev(&values), 1e-3),
    ])
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn fig1_harmonic() -> Result<HarmonicOscillator> {
    Ok(HarmonicOscillator::new(QuasiperiodicForcing::at_zero_phase(
        vec![PI / 3.0, 1.1],
        vec![0.2, 0.2],
    )?))
}

pub fn harmonic() -> Result<Vec<Check>> {
    let m = fig1_harmonic()?;
    let horizon = 2000.0 * 2.0 * PI;
    // RK4 damps oscillation amplitude by about h^6/144 per step
    let step = m.forcing().base_period() / 128.0;
    let c = IntegratorConfig::new(Scheme::Rk4, step, horizon, 32)?;
    let mut worst = 0.0f64;
    for (i, (x, y)) in points(10, -5.0, 5.0).into_iter().enumerate() {
        let th = 0.3 * i as f64;
        let ic = [x, y, th, 2.0 * th];
        let exact = m.exact_average(&ic)?;
        let r = integrate(&m, &ic, &c, &[Observable::M1Squared], None)?;
        worst = worst.max(((average(&r) - exact) / exact).abs());
    }
    Ok(vec![Check::below(
        "harmonic relative error of <m1^2> (worst of 10 ic)",
        worst,
        1e-2,
    )])
}

fn swing(amplitude: f64) -> Result<SwingModel> {
    SwingModel::at_zero_phase(SwingParameters::with_rms_amplitude(
        0.95,
        1.0,
        100.0,
        20,
        vec![1],
        amplitude,
    )?)
}

/// Max-norm error of `(m_1, m_2)` against `reference` after `horizon`.
fn final_state(model: &dyn SystemModel, ic: &[f64], scheme: Scheme, h: f64, horizon: f64) -> Result<Vec<f64>> {
    let c = IntegratorConfig::new(scheme, h, horizon, 1_000_000)?;
    let r = integrate(model, ic, &c, &[], None)?;
    let tau = 2.0 * PI;
    Ok(vec![r.state[0] + tau * r.turns[0] as f64, r.state[1]])
}

fn error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Error ratio for `h` versus `h/2`; a fourth-order scheme gives about 16.
pub fn rk4_order_ratio() -> Result<f64> {
    let m = fig1_harmonic()?;
    let ic = [1.0, -0.5, 0.2, 0.9];
    let t = 20.0;
    let e = |h: f64| -> Result<f64> {
        let s = final_state(&m, &ic, Scheme::Rk4, h, t)?;
        Ok(error(&s, &m.exact_solution(&ic, t)?[..2]))
    };
    Ok(e(0.1)? / e(0.05)?)
}

pub fn symplectic_order_ratio() -> Result<f64> {
    let m = swing(0.0)?;
    let ic = [1.3, 0.0, 0.0];
    let period = m.forcing().base_period();
    let h = period / 16.0;
    let t = 20.0 * period;
    let reference = final_state(&m, &ic, Scheme::Symplectic4, h / 64.0, t)?;
    let e1 = error(&final_state(&m, &ic, Scheme::Symplectic4, h, t)?, &reference);
    let e2 = error(&final_state(&m, &ic, Scheme::Symplectic4, h / 2.0, t)?, &reference);
    Ok(e1 / e2)
}

/// `(max |H̄|` on the unforced system, secular `H̄` drift on the forced
/// one`)` over 200 forcing periods at 16 steps per period.
pub fn hamiltonian_drift() -> Result<(f64, f64)> {
    let run = |amplitude: f64| -> Result<TrajectoryResult> {
        let m = swing(amplitude)?;
        let mut c = IntegratorConfig::per_forcing_period(Scheme::Symplectic4, &m, 16, 200.0)?;
        c.monitor_invariant = true;
        integrate(&m, &[1.3, 0.0, 0.0], &c, &[], Some(&EscapePredicate::SWING_DEFAULT))
    };
    let unforced = run(0.0)?.invariant_drift.map_or(f64::INFINITY, |d| d.max_abs);
    let forced = run(1.5)?.invariant_drift.map_or(f64::INFINITY, |d| d.secular);
    Ok((unforced, forced))
}

pub fn integrator() -> Result<Vec<Check>> {
    let (unforced, forced) = hamiltonian_drift()?;
    Ok(vec![
        Check {
            name: "rk4 error ratio h/(h/2) on harmonic closed form".into(),
            measured: rk4_order_ratio()?,
            bound: Bound::Within(14.0, 18.0),
        },
        Check {
            name: "symplectic4 error ratio h/(h/2) on unforced swing".into(),
            measured: symplectic_order_ratio()?,
            bound: Bound::Within(14.0, 18.0),
        },
        Check::below("symplectic4 max |H_bar| unforced swing, 200 periods", unforced, 1e-8),
        Check::below("symplectic4 secular H_bar drift forced swing, 200 periods", forced, 1e-8),
    ])
}
