//! Grid sweeps over initial-condition slices, joint level sets of the
//! averaged fields (a finite-resolution ergodic partition), and
//! boundedness verdicts for the resulting labels.

mod domain;
mod levels;
mod phases;
mod report;
mod sweep;

pub use domain::{Axis, ScanDomain};
pub use levels::{joint_level_sets, joint_level_sets_default, Binning, LabelKey, PartitionField, DEFAULT_BINS};
pub use phases::{phase_shift_comparison, stroboscopic_phases, PhaseRow, PhaseSummary};
pub use report::{
    boundedness_report, escaped_components, BoundednessReport, EscapedComponent, GridBox,
    LabelReport, Verdict, UNIFORM_BOUND_STATEMENT,
};
pub use sweep::{sweep, CellValue, FieldMetadata, TimeAverageField, NONCONVERGENCE_FRACTION};
