//! Run configuration documents (JSON) and their validation into the
//! objects the integrators and the partition module consume.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::averaging::{EscapePredicate, Observable};
use crate::integrators::{default_checkpoint_stride, IntegratorConfig, Scheme};
use crate::models::{
    BuiltinModel, DissipativeSystem, HarmonicOscillator, QuasiperiodicForcing, SwingModel,
    SwingParameters, SystemModel,
};
use crate::partition::{stroboscopic_phases, Axis, Binning, ScanDomain, TimeAverageField, DEFAULT_BINS};
use crate::{Error, Result};

pub const DEFAULT_STEPS_PER_PERIOD: u32 = 16;

/// One sweep: model, integrator, initial-condition slice, observables,
/// escape rule and output naming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfiguration {
    /// Run name; prefixes every output file.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub domain: DomainSpec,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub escape: EscapeSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `m̈_1 + m_1 = Σ F_i sin θ_i`.
    Harmonic {
        frequencies: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    /// `ṁ = −λ m + Σ F_i sin θ_i`.
    Dissipative {
        lambda: f64,
        frequencies: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    /// Averaged swing dynamics; give either `amplitudes` (one per mode) or
    /// `rms_amplitude` split equally over the modes.
    Swing {
        p_m: f64,
        b: f64,
        b_int: f64,
        n_g: usize,
        modes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rms_amplitude: Option<f64>,
    },
}

impl ModelSpec {
    /// The model at zero forcing phase; initial phases live in the domain.
    pub fn build(&self) -> Result<BuiltinModel> {
        Ok(match self {
            ModelSpec::Harmonic {
                frequencies,
                amplitudes,
            } => BuiltinModel::Harmonic(HarmonicOscillator::new(
                QuasiperiodicForcing::at_zero_phase(frequencies.clone(), amplitudes.clone())?,
            )),
            ModelSpec::Dissipative {
                lambda,
                frequencies,
                amplitudes,
            } => BuiltinModel::Dissipative(DissipativeSystem::new(
                *lambda,
                QuasiperiodicForcing::at_zero_phase(frequencies.clone(), amplitudes.clone())?,
            )?),
            ModelSpec::Swing {
                p_m,
                b,
                b_int,
                n_g,
                modes,
                amplitudes,
                rms_amplitude,
            } => {
                let params = match (amplitudes, rms_amplitude) {
                    (Some(a), None) => {
                        let p = SwingParameters {
                            p_m: *p_m,
                            b: *b,
                            b_int: *b_int,
                            n_g: *n_g,
                            modes: modes.clone(),
                            amplitudes: a.clone(),
                        };
                        p.validate()?;
                        p
                    }
                    (None, Some(rms)) => SwingParameters::with_rms_amplitude(
                        *p_m,
                        *b,
                        *b_int,
                        *n_g,
                        modes.clone(),
                        *rms,
                    )?,
                    _ => {
                        return Err(Error::Config(
                            "swing model needs exactly one of `amplitudes`, `rms_amplitude`".into(),
                        ))
                    }
                };
                BuiltinModel::Swing(SwingModel::at_zero_phase(params)?)
            }
        })
    }
}

/// Step and horizon. Defaults: the model's natural scheme, 16 steps per
/// period of `Ω_1`, checkpoints once per period of the slowest frequency.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_period: Option<u32>,
    /// Absolute step; excludes `steps_per_period`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Horizon `T_ex` in periods `2π/Ω_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    /// Absolute horizon; excludes `periods`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_stride: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub monitor_invariant: bool,
}

impl IntegratorSpec {
    pub fn resolve(&self, model: &dyn SystemModel) -> Result<IntegratorConfig> {
        let scheme = self.scheme.unwrap_or(if model.splitting().is_some() {
            Scheme::Symplectic4
        } else {
            Scheme::Rk4
        });
        let period = model.forcing().base_period();
        let step = match (self.step, self.steps_per_period) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "integrator: give `step` or `steps_per_period`, not both".into(),
                ))
            }
            (Some(h), None) => h,
            (None, n) => {
                let n = n.unwrap_or(DEFAULT_STEPS_PER_PERIOD);
                if n == 0 {
                    return Err(Error::Config("integrator: steps_per_period must be positive".into()));
                }
                period / f64::from(n)
            }
        };
        let horizon = match (self.horizon, self.periods) {
            (Some(t), None) => t,
            (None, Some(p)) => {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Config(format!("integrator: periods must be positive, got {p}")));
                }
                p * period
            }
            _ => {
                return Err(Error::Config(
                    "integrator: give exactly one of `periods`, `horizon`".into(),
                ))
            }
        };
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Config(format!("integrator: step must be positive, got {step}")));
        }
        let stride = self
            .checkpoint_stride
            .unwrap_or_else(|| default_checkpoint_stride(model, step));
        let mut c = IntegratorConfig::new(scheme, step, horizon, stride)
            .map_err(|e| Error::Config(format!("integrator: {e}")))?;
        c.monitor_invariant = self.monitor_invariant;
        c.check_model(model)?;
        Ok(c)
    }
}

/// Initial-condition slice. `phases` defaults to zero; `k` shifts them
/// by `k` periods of the last forcing frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub axes: [Axis; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

impl DomainSpec {
    pub fn resolve(&self, model: &dyn SystemModel) -> Result<ScanDomain> {
        let n = model.forcing().len();
        let base = self.base.clone().unwrap_or_else(|| vec![0.0; model.dim_m()]);
        let phases = self.phases.clone().unwrap_or_else(|| vec![0.0; n]);
        if phases.len() != n {
            return Err(Error::Config(format!(
                "domain has {} initial phases, model has {n} forcing frequencies",
                phases.len()
            )));
        }
        let phases = match self.k {
            Some(k) => stroboscopic_phases(model.forcing(), &phases, k),
            None => phases,
        };
        ScanDomain::new(self.axes.clone(), base, phases).resolve(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EscapeSpec {
    /// The model's own rule: `|ω| > 0.5` for 10 steps for the swing model,
    /// none otherwise.
    #[default]
    Default,
    None,
    Custom(EscapePredicate),
}

impl EscapeSpec {
    pub fn resolve(&self, model: &dyn SystemModel) -> Result<Option<EscapePredicate>> {
        let p = match self {
            EscapeSpec::Default => (model.name() == "swing").then_some(EscapePredicate::SWING_DEFAULT),
            EscapeSpec::None => None,
            EscapeSpec::Custom(p) => Some(*p),
        };
        if let Some(p) = &p {
            p.validate(model.state_len())?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory, relative to the working directory.
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_colormap")]
    pub colormap: String,
    /// Also write one raster per field.
    #[serde(default)]
    pub render: bool,
}

fn default_directory() -> PathBuf {
    PathBuf::from(".")
}

fn default_colormap() -> String {
    crate::render::COLORMAP_NAME.to_string()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            colormap: default_colormap(),
            render: false,
        }
    }
}

/// Everything a sweep needs, validated.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub model: BuiltinModel,
    pub integrator: IntegratorConfig,
    pub domain: ScanDomain,
    pub observables: Vec<Observable>,
    pub escape: Option<EscapePredicate>,
}

impl RunConfiguration {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Same run with the domain's stroboscopic shift set to `k`.
    pub fn with_k(&self, k: u32) -> Self {
        let mut c = self.clone();
        c.domain.k = Some(k);
        c
    }

    /// Validates every block; nothing is computed before this succeeds.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let name_ok = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
        if !name_ok {
            return Err(Error::Config(format!(
                "run name `{}` must be non-empty ASCII [A-Za-z0-9_.-]",
                self.name
            )));
        }
        if self.output.colormap != crate::render::COLORMAP_NAME {
            return Err(Error::Config(format!(
                "unknown colormap `{}`; available: {}",
                self.output.colormap,
                crate::render::COLORMAP_NAME
            )));
        }
        let model = self.model.build()?;
        let integrator = self.integrator.resolve(&model)?;
        let domain = self.domain.resolve(&model)?;
        if self.observables.is_empty() {
            return Err(Error::Config("at least one observable is required".into()));
        }
        for (i, o) in self.observables.iter().enumerate() {
            o.validate(model.state_len())?;
            if self.observables[..i].iter().any(|p| p.id() == o.id()) {
                return Err(Error::Config(format!("observable `{}` listed twice", o.id())));
            }
        }
        let escape = self.escape.resolve(&model)?;
        let model = model.with_phases(&domain.phases)?;
        Ok(ResolvedRun {
            model,
            integrator,
            domain,
            observables: self.observables.clone(),
            escape,
        })
    }
}

/// Bin-width selection for the joint partition: `auto` (range/32 per
/// field), `bins:N` (range/N per field) or a comma list of widths, one per
/// field or a single width for all.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsSpec {
    Bins(u32),
    Widths(Vec<f64>),
}

impl std::str::FromStr for EpsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(EpsSpec::Bins(DEFAULT_BINS));
        }
        if let Some(n) = s.strip_prefix("bins:") {
            let n: u32 = n
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad bin count in `{s}`")))?;
            if n == 0 {
                return Err(Error::Config("bin count must be positive".into()));
            }
            return Ok(EpsSpec::Bins(n));
        }
        let widths = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad bin width `{w}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Config(format!("bin width must be positive, got {w}")));
        }
        Ok(EpsSpec::Widths(widths))
    }
}

impl EpsSpec {
    /// One binning per field, origins at each field's minimum.
    pub fn binnings(&self, fields: &[TimeAverageField]) -> Result<Vec<Binning>> {
        match self {
            EpsSpec::Bins(n) => fields.iter().map(|f| Binning::spanning(f, *n)).collect(),
            EpsSpec::Widths(w) => {
                if w.len() != 1 && w.len() != fields.len() {
                    return Err(Error::Config(format!(
                        "{} bin widths given for {} fields",
                        w.len(),
                        fields.len()
                    )));
                }
                fields
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let origin = f.range().map_or(0.0, |r| r.0);
                        Binning::new(w[i.min(w.len() - 1)], origin)
                    })
                    .collect()
            }
        }
    }
}
