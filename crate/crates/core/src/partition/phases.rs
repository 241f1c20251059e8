use serde::{Deserialize, Serialize};

use super::{boundedness_report, joint_level_sets_default, sweep, ScanDomain, Verdict};
use crate::averaging::{EscapePredicate, Observable};
use crate::integrators::IntegratorConfig;
use crate::models::{wrap_angle, QuasiperiodicForcing, SystemModel};
use crate::{Error, Result};

/// Initial phases reached from `base` after `k` periods of the last forcing
/// frequency: `θ_i = base_i + 2πk Ω_i / Ω_N`, the last phase unchanged.
/// For two frequencies this is `(θ_10 + 2πk Ω_1/Ω_2, θ_20)`.
pub fn stroboscopic_phases(forcing: &QuasiperiodicForcing, base: &[f64], k: u32) -> Vec<f64> {
    let n = forcing.len();
    let last = forcing.frequencies[n - 1];
    base.iter()
        .zip(&forcing.frequencies)
        .enumerate()
        .map(|(i, (b, w))| {
            if i + 1 == n {
                *b
            } else {
                wrap_angle(b + std::f64::consts::TAU * f64::from(k) * w / last)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub phases: Vec<f64>,
    /// Fraction of cells whose trajectory did not escape.
    pub bounded_fraction: f64,
    /// Fraction of cells in labels with a bounded-slice verdict.
    pub certified_fraction: f64,
    pub escaped_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub observable: String,
    pub rows: Vec<PhaseRow>,
    /// Jaccard overlap `|A ∩ B| / |A ∪ B|` of the non-escaped masks.
    pub overlap: Vec<Vec<f64>>,
}

impl PhaseSummary {
    /// `(max − min) / max` of the bounded fractions.
    pub fn bounded_fraction_spread(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .map(|r| r.bounded_fraction)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi > 0.0 {
            (hi - lo) / hi
        } else {
            0.0
        }
    }
}

/// Sweeps `domain` at each initial phase vector and compares the
/// non-escaped regions.
pub fn phase_shift_comparison(
    model: &dyn SystemModel,
    domain: &ScanDomain,
    observable: &Observable,
    config: &IntegratorConfig,
    escape: Option<&EscapePredicate>,
    phases: &[Vec<f64>],
) -> Result<PhaseSummary> {
    if phases.is_empty() {
        return Err(Error::Config("phase comparison needs at least one phase".into()));
    }
    // validate every phase vector before integrating anything
    let domains = phases
        .iter()
        .map(|p| domain.with_phases(p.clone()).resolve(model))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(phases.len());
    let mut masks: Vec<Vec<bool>> = Vec::with_capacity(phases.len());
    for (d, p) in domains.iter().zip(phases) {
        let fields = sweep(model, d, std::slice::from_ref(observable), config, escape, None)?;
        let field = &fields[0];
        let report = boundedness_report(&joint_level_sets_default(&fields)?);
        let total = field.cells.len() as f64;
        let escaped = field.escaped_count();
        rows.push(PhaseRow {
            phases: p.clone(),
            bounded_fraction: (field.cells.len() - escaped) as f64 / total,
            certified_fraction: report.cells_with(Verdict::BoundedSlice) as f64 / total,
            escaped_cells: escaped,
        });
        masks.push(field.cells.iter().map(|c| !c.is_escaped()).collect());
    }
    let overlap = masks
        .iter()
        .map(|a| masks.iter().map(|b| jaccard(a, b)).collect())
        .collect();
    Ok(PhaseSummary {
        observable: observable.id().to_string(),
        rows,
        overlap,
    })
}

fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

impl PhaseSummary {
    /// Tab-separated table: one row per phase, then the overlap matrix.
    pub fn to_table(&self, labels: &[String]) -> String {
        let mut s = String::from("# phase\ttheta0\tbounded_fraction\tcertified_fraction\tescaped_cells\n");
        for (row, label) in self.rows.iter().zip(labels) {
            let th: Vec<String> = row.phases.iter().map(|p| format!("{p:.9}")).collect();
            s.push_str(&format!(
                "{label}\t{}\t{:.6}\t{:.6}\t{}\n",
                th.join(","),
                row.bounded_fraction,
                row.certified_fraction,
                row.escaped_cells
            ));
        }
        s.push_str("# overlap");
        for l in labels {
            s.push('\t');
            s.push_str(l);
        }
        s.push('\n');
        for (row, label) in self.overlap.iter().zip(labels) {
            s.push_str(label);
            for v in row {
                s.push_str(&format!("\t{v:.6}"));
            }
            s.push('\n');
        }
        s
    }
}
