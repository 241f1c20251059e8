use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScanDomain;
use crate::averaging::{EscapePredicate, Observable};
use crate::integrators::{integrate, IntegratorConfig};
use crate::models::SystemModel;
use crate::{Error, Result};

/// Relative gap tolerance: a cell whose convergence gap exceeds this
/// fraction of its field's range is flagged non-convergent.
pub const NONCONVERGENCE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValue {
    Value(f64),
    /// Value kept, but the Cesàro gap exceeded tolerance.
    NonConvergent(f64),
    Escaped,
}

impl CellValue {
    pub fn value(&self) -> Option<f64> {
        match *self {
            CellValue::Value(v) | CellValue::NonConvergent(v) => Some(v),
            CellValue::Escaped => None,
        }
    }

    pub fn is_escaped(&self) -> bool {
        matches!(self, CellValue::Escaped)
    }
}

/// Reproduction metadata recorded alongside a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub model: String,
    pub integrator: IntegratorConfig,
    pub escape: Option<EscapePredicate>,
    /// Absolute gap tolerance used for the non-convergent flag.
    pub gap_tolerance: f64,
    /// Largest convergence gap among non-escaped cells.
    pub max_gap: f64,
}

/// Grid of time-averages of one observable over a [`ScanDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAverageField {
    pub domain: ScanDomain,
    pub observable: String,
    pub cells: Vec<CellValue>,
    pub metadata: FieldMetadata,
}

impl TimeAverageField {
    /// `(min, max)` over cells carrying a value; `None` if all escaped.
    pub fn range(&self) -> Option<(f64, f64)> {
        value_range(self.cells.iter().filter_map(CellValue::value))
    }

    pub fn escaped_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_escaped()).count()
    }

    pub fn get(&self, col: usize, row: usize) -> CellValue {
        self.cells[self.domain.index(col, row)]
    }
}

pub(crate) fn value_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

struct CellOutcome {
    averages: Vec<Option<f64>>,
    gaps: Vec<f64>,
}

/// Integrates every grid vertex of `domain` and returns one field per
/// observable. Rows run in parallel; results are assembled in index order,
/// so the output does not depend on scheduling. `progress` is called with
/// the number of finished rows.
pub fn sweep(
    model: &dyn SystemModel,
    domain: &ScanDomain,
    observables: &[Observable],
    config: &IntegratorConfig,
    escape: Option<&EscapePredicate>,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<Vec<TimeAverageField>> {
    if observables.is_empty() {
        return Err(Error::Config("sweep needs at least one observable".into()));
    }
    let domain = domain.clone().resolve(model)?;
    config.check_model(model)?;
    let n = model.state_len();
    for o in observables {
        o.validate(n)?;
    }
    if let Some(p) = escape {
        p.validate(n)?;
    }

    let (n0, n1) = domain.dims();
    let done = AtomicUsize::new(0);
    let rows: Vec<Vec<CellOutcome>> = (0..n1)
        .into_par_iter()
        .map(|row| {
            let cells = (0..n0)
                .map(|col| {
                    let ic = domain.initial_condition(col, row);
                    let r = integrate(model, &ic, config, observables, escape)?;
                    let escaped = r.escaped();
                    Ok(CellOutcome {
                        averages: r
                            .accumulators
                            .iter()
                            .map(|a| (!escaped).then(|| a.average()))
                            .collect(),
                        gaps: r
                            .accumulators
                            .iter()
                            .map(|a| a.convergence_gap().unwrap_or(0.0))
                            .collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(p) = progress {
                p(finished, n1);
            }
            Ok(cells)
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<CellOutcome> = rows.into_iter().flatten().collect();

    Ok(observables
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let range = value_range(outcomes.iter().filter_map(|c| c.averages[k]));
            let tolerance = range.map_or(0.0, |(lo, hi)| NONCONVERGENCE_FRACTION * (hi - lo));
            let mut max_gap: f64 = 0.0;
            let cells = outcomes
                .iter()
                .map(|c| match c.averages[k] {
                    None => CellValue::Escaped,
                    Some(v) => {
                        max_gap = max_gap.max(c.gaps[k]);
                        if c.gaps[k] > tolerance {
                            CellValue::NonConvergent(v)
                        } else {
                            CellValue::Value(v)
                        }
                    }
                })
                .collect();
            TimeAverageField {
                domain: domain.clone(),
                observable: o.id().to_string(),
                cells,
                metadata: FieldMetadata {
                    model: model.name().to_string(),
                    integrator: *config,
                    escape: escape.copied(),
                    gap_tolerance: tolerance,
                    max_gap,
                },
            }
        })
        .collect())
}
