use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ScanDomain, TimeAverageField};
use crate::{Error, Result};

/// Default number of bins spanning a field's range.
pub const DEFAULT_BINS: u32 = 32;

/// `bin(v) = floor((v − origin) / width)`, clamped to `max_bin` when set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub width: f64,
    pub origin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bin: Option<i64>,
}

impl Binning {
    pub fn new(width: f64, origin: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid(format!("bin width must be positive, got {width}")));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("bin origin must be finite"));
        }
        Ok(Self {
            width,
            origin,
            max_bin: None,
        })
    }

    /// `bins` equal bins over the field's range, origin at its minimum. The
    /// maximum lands in the top bin. A constant (or fully escaped) field
    /// gets a single bin.
    pub fn spanning(field: &TimeAverageField, bins: u32) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bin count must be positive"));
        }
        let (lo, hi) = field.range().unwrap_or((0.0, 0.0));
        let span = hi - lo;
        let width = if span > 0.0 { span / f64::from(bins) } else { 1.0 };
        Ok(Self {
            width,
            origin: lo,
            max_bin: Some(i64::from(bins) - 1),
        })
    }

    pub fn bin(&self, v: f64) -> i64 {
        let b = ((v - self.origin) / self.width).floor() as i64;
        match self.max_bin {
            Some(m) => b.min(m),
            None => b,
        }
    }
}

/// A joint level set: the tuple of per-field bins, or the escaped label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKey {
    Escaped,
    Bins(Vec<i64>),
}

impl std::fmt::Display for LabelKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelKey::Escaped => write!(f, "escaped"),
            LabelKey::Bins(b) => {
                write!(f, "(")?;
                for (i, x) in b.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Joint level-set labels over a scan domain. `cells[i]` indexes `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionField {
    pub domain: ScanDomain,
    pub observables: Vec<String>,
    pub binnings: Vec<Binning>,
    /// Sorted, distinct labels present in the grid.
    pub labels: Vec<LabelKey>,
    pub cells: Vec<u32>,
}

impl PartitionField {
    pub fn label_of(&self, index: usize) -> &LabelKey {
        &self.labels[self.cells[index] as usize]
    }

    /// Number of distinct non-escaped labels.
    pub fn value_label_count(&self) -> usize {
        self.labels.iter().filter(|l| **l != LabelKey::Escaped).count()
    }
}

/// Bins every field and labels each cell with the tuple of its bins; a cell
/// escaped in any field gets the escaped label. No spatial connectivity is
/// imposed.
pub fn joint_level_sets(fields: &[TimeAverageField], binnings: &[Binning]) -> Result<PartitionField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::invalid("joint_level_sets needs at least one field"))?;
    if binnings.len() != fields.len() {
        return Err(Error::invalid(format!(
            "{} bin specifications for {} fields",
            binnings.len(),
            fields.len()
        )));
    }
    for b in binnings {
        Binning::new(b.width, b.origin)?;
    }
    for f in &fields[1..] {
        if f.domain != first.domain {
            return Err(Error::DomainMismatch(format!(
                "`{}` and `{}` were sampled on different grids or phases",
                first.observable, f.observable
            )));
        }
    }
    let n = first.cells.len();
    let keys: Vec<LabelKey> = (0..n)
        .map(|i| {
            let mut bins = Vec::with_capacity(fields.len());
            for (f, b) in fields.iter().zip(binnings) {
                match f.cells[i].value() {
                    Some(v) => bins.push(b.bin(v)),
                    None => return LabelKey::Escaped,
                }
            }
            LabelKey::Bins(bins)
        })
        .collect();

    let mut table: BTreeMap<&LabelKey, u32> = keys.iter().map(|k| (k, 0)).collect();
    for (i, v) in table.values_mut().enumerate() {
        *v = i as u32;
    }
    let cells = keys.iter().map(|k| table[k]).collect();
    let labels = table.keys().map(|k| (*k).clone()).collect();
    Ok(PartitionField {
        domain: first.domain.clone(),
        observables: fields.iter().map(|f| f.observable.clone()).collect(),
        binnings: binnings.to_vec(),
        labels,
        cells,
    })
}

/// Joint level sets with [`DEFAULT_BINS`] bins spanning each field.
pub fn joint_level_sets_default(fields: &[TimeAverageField]) -> Result<PartitionField> {
    let binnings = fields
        .iter()
        .map(|f| Binning::spanning(f, DEFAULT_BINS))
        .collect::<Result<Vec<_>>>()?;
    joint_level_sets(fields, &binnings)
}
