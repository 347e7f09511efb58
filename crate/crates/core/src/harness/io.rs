//! Feature files.
//!
//! CSV: a `label,f0,f1,...` header, then one sample per row.
//!
//! Binary (little-endian): `EVMF`, a version byte, `u32` dimension, `u64`
//! count, then per record a `u32` byte length, the UTF-8 label and
//! `dimension` `f32` values.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{common_dim, FeatureVector, Label, LabeledSample};

pub const FEATURE_MAGIC: &[u8; 4] = b"EVMF";
pub const FEATURE_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureFormat {
    Csv,
    Binary,
}

impl FeatureFormat {
    /// `.csv` is CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => FeatureFormat::Csv,
            _ => FeatureFormat::Binary,
        }
    }
}

impl std::str::FromStr for FeatureFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "binary" | "bin" => Ok(Self::Binary),
            other => Err(Error::InvalidConfig(format!("unknown feature format {other:?}"))),
        }
    }
}

pub fn load_features(path: impl AsRef<Path>, format: FeatureFormat) -> Result<Vec<LabeledSample>> {
    let bytes = std::fs::read(path)?;
    match format {
        FeatureFormat::Csv => read_csv(&bytes[..]),
        FeatureFormat::Binary => read_binary(&bytes),
    }
}

pub fn save_features(path: impl AsRef<Path>, samples: &[LabeledSample], format: FeatureFormat) -> Result<()> {
    let mut out = Vec::new();
    match format {
        FeatureFormat::Csv => write_csv(&mut out, samples)?,
        FeatureFormat::Binary => write_binary(&mut out, samples)?,
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<LabeledSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::Format("CSV file is empty; expected a header".into())),
    };
    if header.get(0) != Some("label") || header.len() < 2 {
        return Err(Error::Format("CSV header must start with `label` followed by feature columns".into()));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(Error::Format(format!("CSV header column {} is {name:?}, expected \"f{i}\"", i + 1)));
        }
    }
    let dim = header.len() - 1;
    let mut samples = Vec::new();
    for (row, record) in records.enumerate() {
        let row = row + 1;
        let record = record?;
        if record.len() != dim + 1 {
            return Err(Error::Format(format!(
                "CSV row {row}: expected {} fields, found {}",
                dim + 1,
                record.len()
            )));
        }
        let label = Label::new(&record[0]).map_err(|e| Error::Format(format!("CSV row {row}: {e}")))?;
        let values = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("CSV row {row}: {e}")))?;
        let features = FeatureVector::new(values).map_err(|e| Error::Format(format!("CSV row {row}: {e}")))?;
        samples.push(LabeledSample::new(features, label));
    }
    Ok(samples)
}

pub fn write_csv(out: impl Write, samples: &[LabeledSample]) -> Result<()> {
    let dim = common_dim(samples, None)?.unwrap_or(0);
    let mut writer = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("label".to_string())
        .chain((0..dim).map(|i| format!("f{i}")))
        .collect();
    writer.write_record(&header)?;
    for s in samples {
        let row: Vec<String> = std::iter::once(s.label.to_string())
            .chain(s.features.iter().map(|v| v.to_string()))
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_binary(bytes: &[u8]) -> Result<Vec<LabeledSample>> {
    let mut cur = Cursor::new(bytes);
    let truncated = |cur: &Cursor<&[u8]>| Error::Format(format!("binary feature file truncated at offset {}", cur.position()));
    let mut magic = [0u8; 4];
    cur.read_exact(&mut magic).map_err(|_| truncated(&cur))?;
    if &magic != FEATURE_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?} at offset 0, expected \"EVMF\"")));
    }
    let version = cur.read_u8().map_err(|_| truncated(&cur))?;
    if version != FEATURE_VERSION {
        return Err(Error::Format(format!("unsupported feature file version {version} at offset 4")));
    }
    let dim = cur.read_u32::<LittleEndian>().map_err(|_| truncated(&cur))? as usize;
    let count = cur.read_u64::<LittleEndian>().map_err(|_| truncated(&cur))?;
    if dim == 0 {
        return Err(Error::Format("dimension 0 at offset 5".into()));
    }
    let mut samples = Vec::new();
    for record in 0..count {
        let offset = cur.position();
        let len = cur.read_u32::<LittleEndian>().map_err(|_| truncated(&cur))? as usize;
        let mut raw = vec![0u8; len];
        cur.read_exact(&mut raw).map_err(|_| truncated(&cur))?;
        let name = String::from_utf8(raw)
            .map_err(|_| Error::Format(format!("record {record} at offset {offset}: label is not UTF-8")))?;
        let label = Label::new(name).map_err(|e| Error::Format(format!("record {record} at offset {offset}: {e}")))?;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            values.push(f64::from(cur.read_f32::<LittleEndian>().map_err(|_| truncated(&cur))?));
        }
        let features =
            FeatureVector::new(values).map_err(|e| Error::Format(format!("record {record} at offset {offset}: {e}")))?;
        samples.push(LabeledSample::new(features, label));
    }
    if (cur.position() as usize) != bytes.len() {
        return Err(Error::Format(format!("trailing bytes after offset {}", cur.position())));
    }
    Ok(samples)
}

pub fn write_binary(mut out: impl Write, samples: &[LabeledSample]) -> Result<()> {
    let dim = common_dim(samples, None)?.unwrap_or(0);
    if dim > u32::MAX as usize {
        return Err(Error::Format(format!("dimension {dim} does not fit the binary format")));
    }
    out.write_all(FEATURE_MAGIC)?;
    out.write_u8(FEATURE_VERSION)?;
    out.write_u32::<LittleEndian>(dim as u32)?;
    out.write_u64::<LittleEndian>(samples.len() as u64)?;
    for s in samples {
        let name = s.label.as_str().as_bytes();
        out.write_u32::<LittleEndian>(name.len() as u32)?;
        out.write_all(name)?;
        for &v in s.features.iter() {
            out.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    Ok(())
}
