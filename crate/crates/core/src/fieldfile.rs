//! Binary field and partition files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes   "QPFIELD\0" or "QPPART\0\0"
//! version    u32
//! header_len u32
//! header     header_len bytes of UTF-8 JSON (includes `body_crc32`)
//! body       field: per cell, row-major, 1 state byte + f64 value
//!            partition: per cell, row-major, u32 label index
//! ```
//!
//! State bytes: 0 = value, 1 = non-convergent value, 2 = escaped (value
//! bytes zero).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfiguration;
use crate::partition::{
    Binning, CellValue, FieldMetadata, LabelKey, PartitionField, ScanDomain, TimeAverageField,
};
use crate::{Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"QPFIELD\0";
pub const PARTITION_MAGIC: &[u8; 8] = b"QPPART\0\0";
pub const FORMAT_VERSION: u32 = 1;

const STATE_VALUE: u8 = 0;
const STATE_NONCONVERGENT: u8 = 1;
const STATE_ESCAPED: u8 = 2;
const FIELD_RECORD: usize = 9;

fn legend() -> BTreeMap<u8, String> {
    BTreeMap::from([
        (STATE_VALUE, "value".to_string()),
        (STATE_NONCONVERGENT, "non_convergent".to_string()),
        (STATE_ESCAPED, "escaped".to_string()),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldHeader {
    configuration: Option<RunConfiguration>,
    observable: String,
    dims: [usize; 2],
    domain: ScanDomain,
    legend: BTreeMap<u8, String>,
    metadata: FieldMetadata,
    body_crc32: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionHeader {
    configuration: Option<RunConfiguration>,
    observables: Vec<String>,
    dims: [usize; 2],
    domain: ScanDomain,
    binnings: Vec<Binning>,
    labels: Vec<LabelKey>,
    body_crc32: u32,
}

/// A time-average field with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub configuration: Option<RunConfiguration>,
    pub field: TimeAverageField,
}

/// A joint partition with the configuration of its source fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFile {
    pub configuration: Option<RunConfiguration>,
    pub partition: PartitionField,
}

fn assemble(magic: &[u8; 8], header: &[u8], body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + header.len() + body.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header);
    out.extend_from_slice(body);
    out
}

/// Splits a file into header JSON and body after checking magic and version.
fn split<'a>(bytes: &'a [u8], magic: &[u8; 8], path: &Path) -> Result<(&'a [u8], &'a [u8])> {
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(Error::format(path, "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if bytes.len() < 16 + len {
        return Err(Error::format(path, "truncated header"));
    }
    Ok((&bytes[16..16 + len], &bytes[16 + len..]))
}

fn check_body(path: &Path, body: &[u8], expected_len: usize, crc: u32) -> Result<()> {
    if body.len() != expected_len {
        return Err(Error::format(
            path,
            format!("body has {} bytes, expected {expected_len}", body.len()),
        ));
    }
    if crc32fast::hash(body) != crc {
        return Err(Error::format(path, "body checksum mismatch"));
    }
    Ok(())
}

fn check_dims(path: &Path, dims: [usize; 2], domain: &ScanDomain) -> Result<usize> {
    let (n0, n1) = domain.dims();
    if dims != [n0, n1] {
        return Err(Error::format(path, "header dims disagree with domain"));
    }
    n0.checked_mul(n1)
        .ok_or_else(|| Error::format(path, "grid too large"))
}

impl FieldFile {
    pub fn new(configuration: Option<RunConfiguration>, field: TimeAverageField) -> Self {
        Self {
            configuration,
            field,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(self.field.cells.len() * FIELD_RECORD);
        for c in &self.field.cells {
            let (state, v) = match *c {
                CellValue::Value(v) => (STATE_VALUE, v),
                CellValue::NonConvergent(v) => (STATE_NONCONVERGENT, v),
                CellValue::Escaped => (STATE_ESCAPED, 0.0),
            };
            body.push(state);
            body.extend_from_slice(&v.to_le_bytes());
        }
        let (n0, n1) = self.field.domain.dims();
        let header = FieldHeader {
            configuration: self.configuration.clone(),
            observable: self.field.observable.clone(),
            dims: [n0, n1],
            domain: self.field.domain.clone(),
            legend: legend(),
            metadata: self.field.metadata.clone(),
            body_crc32: crc32fast::hash(&body),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        assemble(FIELD_MAGIC, &header, &body)
    }

    /// `path` is only used in error messages.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let (header, body) = split(bytes, FIELD_MAGIC, path)?;
        let header: FieldHeader = serde_json::from_slice(header)
            .map_err(|e| Error::format(path, format!("header: {e}")))?;
        if header.legend != legend() {
            return Err(Error::format(path, "unknown cell-state legend"));
        }
        let n = check_dims(path, header.dims, &header.domain)?;
        check_body(path, body, n * FIELD_RECORD, header.body_crc32)?;
        let cells = body
            .chunks_exact(FIELD_RECORD)
            .map(|r| {
                let v = f64::from_le_bytes(r[1..].try_into().unwrap());
                match r[0] {
                    STATE_VALUE => Ok(CellValue::Value(v)),
                    STATE_NONCONVERGENT => Ok(CellValue::NonConvergent(v)),
                    STATE_ESCAPED if v.to_bits() == 0 => Ok(CellValue::Escaped),
                    s => Err(Error::format(path, format!("bad cell record (state {s})"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            configuration: header.configuration,
            field: TimeAverageField {
                domain: header.domain,
                observable: header.observable,
                cells,
                metadata: header.metadata,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

impl PartitionFile {
    pub fn new(configuration: Option<RunConfiguration>, partition: PartitionField) -> Self {
        Self {
            configuration,
            partition,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.partition;
        let body: Vec<u8> = p.cells.iter().flat_map(|l| l.to_le_bytes()).collect();
        let (n0, n1) = p.domain.dims();
        let header = PartitionHeader {
            configuration: self.configuration.clone(),
            observables: p.observables.clone(),
            dims: [n0, n1],
            domain: p.domain.clone(),
            binnings: p.binnings.clone(),
            labels: p.labels.clone(),
            body_crc32: crc32fast::hash(&body),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        assemble(PARTITION_MAGIC, &header, &body)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let (header, body) = split(bytes, PARTITION_MAGIC, path)?;
        let header: PartitionHeader = serde_json::from_slice(header)
            .map_err(|e| Error::format(path, format!("header: {e}")))?;
        let n = check_dims(path, header.dims, &header.domain)?;
        check_body(path, body, n * 4, header.body_crc32)?;
        let cells: Vec<u32> = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if cells.iter().any(|&l| l as usize >= header.labels.len()) {
            return Err(Error::format(path, "label index out of range"));
        }
        if header.binnings.len() != header.observables.len() {
            return Err(Error::format(path, "one binning per observable expected"));
        }
        Ok(Self {
            configuration: header.configuration,
            partition: PartitionField {
                domain: header.domain,
                observables: header.observables,
                binnings: header.binnings,
                labels: header.labels,
                cells,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

/// True when the file starts with the partition magic.
pub fn is_partition_file(bytes: &[u8]) -> bool {
    bytes.starts_with(PARTITION_MAGIC)
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::integrators::{IntegratorConfig, Scheme};
    use crate::partition::{joint_level_sets_default, Axis};

    fn sample_field(values: &[Option<f64>], n0: usize) -> TimeAverageField {
        let n1 = values.len() / n0;
        let domain = ScanDomain::new(
            [Axis::new(0, 1.0, 2.0, n0), Axis::new(1, -0.15, 0.15, n1)],
            vec![0.0, 0.0],
            vec![0.25],
        );
        let cells = values
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                None => CellValue::Escaped,
                Some(x) if i % 3 == 1 => CellValue::NonConvergent(*x),
                Some(x) => CellValue::Value(*x),
            })
            .collect();
        TimeAverageField {
            domain,
            observable: "sin_2delta".into(),
            cells,
            metadata: FieldMetadata {
                model: "swing".into(),
                integrator: IntegratorConfig::new(Scheme::Symplectic4, 0.1, 10.0, 5).unwrap(),
                escape: None,
                gap_tolerance: 0.01,
                max_gap: 0.003,
            },
        }
    }

    #[test]
    fn field_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.qpf");
        let f = FieldFile::new(
            None,
            sample_field(&[Some(0.1), None, Some(-0.3), Some(1.0 / 3.0), Some(2.5e-300), None], 3),
        );
        f.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let g = FieldFile::load(&path).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_bytes(), bytes);
        assert_eq!(&bytes[..8], FIELD_MAGIC);
        // no temporary left behind
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn corruption_is_detected() {
        let f = FieldFile::new(None, sample_field(&[Some(0.1), Some(0.2), Some(0.3), Some(0.4)], 2));
        let bytes = f.to_bytes();
        let p = Path::new("x");
        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 1;
        assert!(matches!(FieldFile::from_bytes(&flipped, p), Err(Error::Format { .. })));
        assert!(FieldFile::from_bytes(&bytes[..bytes.len() - 1], p).is_err());
        assert!(FieldFile::from_bytes(&bytes[..10], p).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(FieldFile::from_bytes(&magic, p).is_err());
        let mut version = bytes.clone();
        version[8] = 9;
        assert!(FieldFile::from_bytes(&version, p).is_err());
        assert!(PartitionFile::from_bytes(&bytes, p).is_err());
    }

    #[test]
    fn partition_round_trip_is_byte_identical() {
        let f = sample_field(&[Some(0.1), None, Some(-0.3), Some(0.2), Some(0.9), None], 3);
        let p = PartitionFile::new(None, joint_level_sets_default(&[f]).unwrap());
        let bytes = p.to_bytes();
        assert!(is_partition_file(&bytes));
        let q = PartitionFile::from_bytes(&bytes, Path::new("p")).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.to_bytes(), bytes);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let f = FieldFile::new(None, sample_field(&[Some(0.0), Some(1.0)], 2));
        let e = f.save(Path::new("/nonexistent-dir/x.qpf")).unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
        assert!(matches!(FieldFile::load(Path::new("/nonexistent-dir/x.qpf")), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn arbitrary_fields_round_trip(
            values in prop::collection::vec(prop::option::weighted(0.8, prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL), 1..40),
            n0 in 1usize..5,
        ) {
            let n0 = n0.min(values.len()).max(1);
            let n = values.len() / n0 * n0;
            prop_assume!(n / n0 >= 2 && n0 >= 2);
            let f = FieldFile::new(None, sample_field(&values[..n], n0));
            let bytes = f.to_bytes();
            let g = FieldFile::from_bytes(&bytes, Path::new("p")).unwrap();
            prop_assert_eq!(g.to_bytes(), bytes);
        }
    }
}
