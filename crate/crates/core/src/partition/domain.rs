use serde::{Deserialize, Serialize};

use crate::models::{SystemModel, Topology};
use crate::{Error, Result};

/// One sampled coordinate of the augmented state `(m, θ)`, vertex-sampled
/// at `points` values including both endpoints. Coordinates at or past
/// `dim M` select a forcing phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub coordinate: usize,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Circle axes never count as escaping boundaries. Defaults to the
    /// model's topology for the coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

impl Axis {
    pub fn new(coordinate: usize, lo: f64, hi: f64, points: usize) -> Self {
        Self {
            coordinate,
            lo,
            hi,
            points,
            topology: None,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            // exact right endpoint
            return self.hi;
        }
        self.lo + i as f64 * (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Some(Topology::Circle)
    }
}

/// A 2-D slice of initial conditions at a fixed initial phase `θ_0`.
///
/// Cells are stored row-major: row `r` runs along `axes[1]`, column `c`
/// along `axes[0]`, index `r · n_0 + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDomain {
    pub axes: [Axis; 2],
    /// Values of every coordinate of `M`; scanned ones are overwritten.
    pub base: Vec<f64>,
    /// Initial forcing phases; scanned ones are overwritten.
    pub phases: Vec<f64>,
}

impl ScanDomain {
    pub fn new(axes: [Axis; 2], base: Vec<f64>, phases: Vec<f64>) -> Self {
        Self { axes, base, phases }
    }

    /// Validates against `model` and fills unspecified axis topologies.
    pub fn resolve(mut self, model: &dyn SystemModel) -> Result<Self> {
        let d = model.dim_m();
        if self.base.len() != d {
            return Err(Error::Config(format!(
                "domain base state has {} coordinates, model has {d}",
                self.base.len()
            )));
        }
        if self.phases.len() != model.forcing().len() {
            return Err(Error::Config(format!(
                "domain has {} initial phases, model has {} forcing frequencies",
                self.phases.len(),
                model.forcing().len()
            )));
        }
        if self.base.iter().chain(&self.phases).any(|x| !x.is_finite()) {
            return Err(Error::Config("domain base state and phases must be finite".into()));
        }
        if self.axes[0].coordinate == self.axes[1].coordinate {
            return Err(Error::Config("scan axes must be distinct coordinates".into()));
        }
        for axis in &mut self.axes {
            let len = d + self.phases.len();
            if axis.coordinate >= len {
                return Err(Error::Config(format!(
                    "axis coordinate {} outside a {len}-dimensional augmented state",
                    axis.coordinate
                )));
            }
            if axis.points < 2 {
                return Err(Error::Config(format!(
                    "axis needs at least 2 points, got {}",
                    axis.points
                )));
            }
            if !(axis.lo.is_finite() && axis.hi.is_finite() && axis.lo < axis.hi) {
                return Err(Error::Config(format!(
                    "axis range [{}, {}] is empty or non-finite",
                    axis.lo, axis.hi
                )));
            }
            if axis.topology.is_none() {
                axis.topology = Some(if axis.coordinate < d {
                    model.topology()[axis.coordinate]
                } else {
                    Topology::Circle
                });
            }
        }
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.axes[0].points, self.axes[1].points)
    }

    pub fn cell_count(&self) -> usize {
        self.axes[0].points * self.axes[1].points
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.axes[0].points + col
    }

    pub fn position(&self, index: usize) -> (usize, usize) {
        let n0 = self.axes[0].points;
        (index % n0, index / n0)
    }

    /// Augmented initial condition `(m, θ_0)` of cell `(col, row)`.
    pub fn initial_condition(&self, col: usize, row: usize) -> Vec<f64> {
        let mut ic = self.base.clone();
        ic.extend_from_slice(&self.phases);
        ic[self.axes[0].coordinate] = self.axes[0].value(col);
        ic[self.axes[1].coordinate] = self.axes[1].value(row);
        ic
    }

    /// True when the cell lies on an edge of a non-periodic axis.
    pub fn on_open_boundary(&self, index: usize) -> bool {
        let (col, row) = self.position(index);
        let edge = |axis: &Axis, i: usize| !axis.is_periodic() && (i == 0 || i + 1 == axis.points);
        edge(&self.axes[0], col) || edge(&self.axes[1], row)
    }

    pub fn with_phases(&self, phases: Vec<f64>) -> Self {
        Self {
            phases,
            ..self.clone()
        }
    }
}
