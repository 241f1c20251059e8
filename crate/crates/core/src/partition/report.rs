use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{LabelKey, PartitionField, ScanDomain};

/// Statement attached to every bounded-slice verdict.
pub const UNIFORM_BOUND_STATEMENT: &str = "subset certified bounded in M at theta_0 => \
corresponding invariant subset uniformly bounded in M x T^N";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedSlice,
    Unbounded,
    InconclusiveTouchesBoundary,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::BoundedSlice => "bounded-slice",
            Verdict::Unbounded => "unbounded",
            Verdict::InconclusiveTouchesBoundary => "inconclusive-touches-boundary",
        })
    }
}

/// Inclusive grid-index bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub col_min: usize,
    pub col_max: usize,
    pub row_min: usize,
    pub row_max: usize,
}

impl GridBox {
    fn point(col: usize, row: usize) -> Self {
        Self {
            col_min: col,
            col_max: col,
            row_min: row,
            row_max: row,
        }
    }

    fn include(&mut self, col: usize, row: usize) {
        self.col_min = self.col_min.min(col);
        self.col_max = self.col_max.max(col);
        self.row_min = self.row_min.min(row);
        self.row_max = self.row_max.max(row);
    }

    /// `other` lies strictly inside `self` on every side.
    pub fn strictly_contains(&self, other: &GridBox) -> bool {
        self.col_min < other.col_min
            && self.col_max > other.col_max
            && self.row_min < other.row_min
            && self.row_max > other.row_max
    }

    /// Coordinate ranges `([lo_0, hi_0], [lo_1, hi_1])` of the box.
    pub fn extent(&self, domain: &ScanDomain) -> ([f64; 2], [f64; 2]) {
        let [a0, a1] = &domain.axes;
        (
            [a0.value(self.col_min), a0.value(self.col_max)],
            [a1.value(self.row_min), a1.value(self.row_max)],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub label: LabelKey,
    pub cells: usize,
    pub bbox: GridBox,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub observables: Vec<String>,
    pub labels: Vec<LabelReport>,
    pub notes: Vec<String>,
}

/// Per-label verdicts: escaped labels are unbounded; a label touching an
/// edge of a non-periodic axis is inconclusive; everything else is a
/// bounded slice.
pub fn boundedness_report(part: &PartitionField) -> BoundednessReport {
    let mut acc: Vec<Option<(usize, GridBox, bool)>> = vec![None; part.labels.len()];
    for (i, &l) in part.cells.iter().enumerate() {
        let (col, row) = part.domain.position(i);
        let edge = part.domain.on_open_boundary(i);
        match &mut acc[l as usize] {
            Some((n, bbox, touches)) => {
                *n += 1;
                bbox.include(col, row);
                *touches |= edge;
            }
            slot @ None => *slot = Some((1, GridBox::point(col, row), edge)),
        }
    }
    let labels = part
        .labels
        .iter()
        .zip(acc)
        .filter_map(|(label, a)| {
            let (cells, bbox, touches) = a?;
            let verdict = if *label == LabelKey::Escaped {
                Verdict::Unbounded
            } else if touches {
                Verdict::InconclusiveTouchesBoundary
            } else {
                Verdict::BoundedSlice
            };
            Some(LabelReport {
                label: label.clone(),
                cells,
                bbox,
                verdict,
                certificate: (verdict == Verdict::BoundedSlice)
                    .then(|| UNIFORM_BOUND_STATEMENT.to_string()),
            })
        })
        .collect::<Vec<_>>();

    let mut notes = Vec::new();
    let open_axes: Vec<usize> = part
        .domain
        .axes
        .iter()
        .filter(|a| !a.is_periodic())
        .map(|a| a.coordinate)
        .collect();
    if !open_axes.is_empty() {
        notes.push(format!(
            "labels touching the edges of open axes {open_axes:?} are not certified; \
             the window may cut through their invariant sets"
        ));
    }
    if labels.iter().any(|l| l.verdict == Verdict::Unbounded) {
        notes.push(
            "escaped cells follow the configured escape predicate at the finite horizon".into(),
        );
    }
    BoundednessReport {
        observables: part.observables.clone(),
        labels,
        notes,
    }
}

impl BoundednessReport {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.labels.iter().filter(|l| l.verdict == verdict).count()
    }

    pub fn cells_with(&self, verdict: Verdict) -> usize {
        self.labels
            .iter()
            .filter(|l| l.verdict == verdict)
            .map(|l| l.cells)
            .sum()
    }

    /// Length of the longest sequence of bounded-slice labels whose
    /// bounding boxes are strictly nested, i.e. the number of concentric
    /// bands around a common core.
    pub fn nested_band_depth(&self) -> usize {
        let mut boxes: Vec<GridBox> = self
            .labels
            .iter()
            .filter(|l| l.verdict == Verdict::BoundedSlice)
            .map(|l| l.bbox)
            .collect();
        boxes.sort_by_key(|b| (b.col_max - b.col_min) + (b.row_max - b.row_min));
        // longest chain in the strict containment order
        let mut depth = vec![1usize; boxes.len()];
        for i in 0..boxes.len() {
            for j in 0..i {
                if boxes[i].strictly_contains(&boxes[j]) {
                    depth[i] = depth[i].max(depth[j] + 1);
                }
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Human-readable report, one line per label.
    pub fn to_text(&self, domain: &ScanDomain) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# boundedness report");
        let _ = writeln!(s, "observables: {}", self.observables.join(", "));
        let _ = writeln!(
            s,
            "labels: {} ({} bounded-slice, {} unbounded, {} inconclusive)",
            self.labels.len(),
            self.count(Verdict::BoundedSlice),
            self.count(Verdict::Unbounded),
            self.count(Verdict::InconclusiveTouchesBoundary)
        );
        for l in &self.labels {
            let (x, y) = l.bbox.extent(domain);
            let _ = writeln!(
                s,
                "label {} cells={} box=[{:.6},{:.6}]x[{:.6},{:.6}] verdict={}",
                l.label, l.cells, x[0], x[1], y[0], y[1], l.verdict
            );
            if let Some(c) = &l.certificate {
                let _ = writeln!(s, "  certified: {c}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// A 4-connected component of escaped cells.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapedComponent {
    pub cells: usize,
    /// Touches `[axis0 lo, axis0 hi, axis1 lo, axis1 hi]` edges.
    pub touches: [bool; 4],
}

/// 4-connected components of the escaped label, largest first.
pub fn escaped_components(part: &PartitionField) -> Vec<EscapedComponent> {
    let (n0, n1) = part.domain.dims();
    let escaped: Vec<bool> = (0..part.cells.len())
        .map(|i| *part.label_of(i) == LabelKey::Escaped)
        .collect();
    let mut seen = vec![false; escaped.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..escaped.len() {
        if !escaped[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = EscapedComponent {
            cells: 0,
            touches: [false; 4],
        };
        while let Some(i) = stack.pop() {
            comp.cells += 1;
            let (c, r) = (i % n0, i / n0);
            comp.touches[0] |= c == 0;
            comp.touches[1] |= c + 1 == n0;
            comp.touches[2] |= r == 0;
            comp.touches[3] |= r + 1 == n1;
            let mut visit = |j: usize| {
                if escaped[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < n0 {
                visit(i + 1);
            }
            if r > 0 {
                visit(i - n0);
            }
            if r + 1 < n1 {
                visit(i + n0);
            }
        }
        out.push(comp);
    }
    out.sort_by(|a, b| b.cells.cmp(&a.cells));
    out
}
