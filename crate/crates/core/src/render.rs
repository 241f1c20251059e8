//! Binary PPM (P6) rasters of fields and partitions, one pixel per cell,
//! with a text legend beside each image.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use crate::fieldfile::write_atomic;
use crate::partition::{CellValue, LabelKey, PartitionField, ScanDomain, TimeAverageField};
use crate::{Error, Result};

pub const COLORMAP_NAME: &str = "viridis";
const COLORMAP_DATA: &str = include_str!("../data/viridis.txt");
/// CRC-32 of the shipped colormap file.
pub const COLORMAP_CRC32: u32 = 933_234_399;
/// Reserved color for escaped cells; not an entry of the colormap.
pub const ESCAPED_COLOR: [u8; 3] = [0, 68, 27];

pub fn colormap() -> &'static [[u8; 3]; 256] {
    static TABLE: OnceLock<[[u8; 3]; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0u8; 3]; 256];
        let mut rows = COLORMAP_DATA
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        for entry in t.iter_mut() {
            let line = rows.next().expect("colormap has 256 entries");
            let rgb: Vec<u8> = line
                .split_whitespace()
                .map(|x| x.parse().expect("colormap entry is u8"))
                .collect();
            *entry = [rgb[0], rgb[1], rgb[2]];
        }
        assert!(rows.next().is_none(), "colormap has 256 entries");
        t
    })
}

/// Colormap index of `v` on `[lo, hi]`; a degenerate range maps to 0.
pub fn color_index(v: f64, lo: f64, hi: f64) -> usize {
    if hi > lo {
        (((v - lo) / (hi - lo)) * 256.0).floor().clamp(0.0, 255.0) as usize
    } else {
        0
    }
}

/// An RGB image, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Raster {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Image of a scan domain: column `c` is `x = c`, row `r` (axis 1 index)
/// is drawn at `y = n_1 − 1 − r` so the top row is the largest axis value.
fn raster(domain: &ScanDomain, color: impl Fn(usize) -> [u8; 3]) -> Raster {
    let (n0, n1) = domain.dims();
    let mut pixels = Vec::with_capacity(n0 * n1);
    for y in 0..n1 {
        let row = n1 - 1 - y;
        for col in 0..n0 {
            pixels.push(color(domain.index(col, row)));
        }
    }
    Raster {
        width: n0,
        height: n1,
        pixels,
    }
}

fn axis_lines(domain: &ScanDomain) -> String {
    let a = &domain.axes;
    format!(
        "x axis: coordinate {} on [{}, {}], {} points, left to right\n\
         y axis: coordinate {} on [{}, {}], {} points, bottom to top\n\
         phases: {:?}\n",
        a[0].coordinate, a[0].lo, a[0].hi, a[0].points, a[1].coordinate, a[1].lo, a[1].hi,
        a[1].points, domain.phases
    )
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Field image through the colormap over `[min, max]` of its values.
pub fn render_field(field: &TimeAverageField) -> (Raster, String) {
    let (lo, hi) = field.range().unwrap_or((0.0, 0.0));
    let map = colormap();
    let img = raster(&field.domain, |i| match field.cells[i] {
        CellValue::Escaped => ESCAPED_COLOR,
        c => map[color_index(c.value().unwrap(), lo, hi)],
    });
    let nonconv = field
        .cells
        .iter()
        .filter(|c| matches!(c, CellValue::NonConvergent(_)))
        .count();
    let legend = format!(
        "observable: {}\ncolormap: {COLORMAP_NAME} (256 entries, crc32 {COLORMAP_CRC32:08x})\n\
         min: {lo:e}\nmax: {hi:e}\nescaped: {} ({} cells)\nnon_convergent cells: {nonconv}\n{}",
        field.observable,
        hex(ESCAPED_COLOR),
        field.escaped_count(),
        axis_lines(&field.domain),
    );
    (img, legend)
}

/// Colors for non-escaped labels spread evenly over the colormap, in the
/// labels' sort order.
pub fn label_colors(part: &PartitionField) -> Vec<[u8; 3]> {
    let map = colormap();
    let k = part.value_label_count();
    let mut next = 0usize;
    part.labels
        .iter()
        .map(|l| match l {
            LabelKey::Escaped => ESCAPED_COLOR,
            LabelKey::Bins(_) => {
                let idx = if k > 1 { next * 255 / (k - 1) } else { 0 };
                next += 1;
                map[idx]
            }
        })
        .collect()
}

pub fn render_partition(part: &PartitionField) -> (Raster, String) {
    let colors = label_colors(part);
    let img = raster(&part.domain, |i| colors[part.cells[i] as usize]);
    let mut legend = format!(
        "partition of: {}\ncolormap: {COLORMAP_NAME} (256 entries, crc32 {COLORMAP_CRC32:08x})\n{}labels:\n",
        part.observables.join(", "),
        axis_lines(&part.domain)
    );
    for (l, c) in part.labels.iter().zip(&colors) {
        legend.push_str(&format!("  {} {l}\n", hex(*c)));
    }
    (img, legend)
}

/// `<out>.legend.txt`.
pub fn legend_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".legend.txt");
    PathBuf::from(s)
}

/// Writes the image and its legend atomically.
pub fn write_ppm(out: &Path, img: &Raster, legend: &str) -> Result<()> {
    if img.width == 0 || img.height == 0 {
        return Err(Error::invalid("empty raster"));
    }
    write_atomic(out, &img.to_ppm())?;
    write_atomic(&legend_path(out), legend.as_bytes())
}
