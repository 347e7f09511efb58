//! Binary model files.
//!
//! Layout (little-endian): `IEVM`, a version byte, the payload, and a SHA-256
//! digest of everything before it. All reals are stored as `f64`.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use crate::distance::DistanceMetric;
use crate::error::{Error, Result};
use crate::fitting::{ClassModel, EvmConfig, EvmModel, ExtremeVector};
use crate::reduction::CoverageCache;
use crate::sample::{FeatureVector, Label};
use crate::weibull::WeibullParams;

pub const MODEL_MAGIC: &[u8; 4] = b"IEVM";
pub const MODEL_VERSION: u8 = 1;
const DIGEST_LEN: usize = 32;

type Le = LittleEndian;

pub fn save_model(model: &EvmModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_bytes(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EvmModel> {
    model_from_bytes(&std::fs::read(path)?)
}

fn write_f64s(out: &mut Vec<u8>, values: &[f64]) -> Result<()> {
    out.write_u64::<Le>(values.len() as u64)?;
    for &v in values {
        out.write_f64::<Le>(v)?;
    }
    Ok(())
}

fn write_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    out.write_u32::<Le>(s.len() as u32)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn model_to_bytes(model: &EvmModel) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.write_all(MODEL_MAGIC)?;
    out.write_u8(MODEL_VERSION)?;

    let c = &model.config;
    out.write_u64::<Le>(c.tail_size as u64)?;
    out.write_f64::<Le>(c.distance_multiplier)?;
    out.write_u8(match c.metric {
        DistanceMetric::Euclidean => 0,
        DistanceMetric::CosineDistance => 1,
    })?;
    out.write_u64::<Le>(c.budget.map_or(0, |k| k as u64))?;
    out.write_f64::<Le>(c.rejection_threshold)?;
    out.write_f64::<Le>(c.coverage_threshold)?;
    out.write_f64::<Le>(c.bisection_tolerance)?;
    out.write_u64::<Le>(model.epoch)?;
    out.write_u64::<Le>(model.dim.map_or(0, |d| d as u64))?;

    out.write_u64::<Le>(model.classes.len() as u64)?;
    for (label, class) in &model.classes {
        write_str(&mut out, label.as_str())?;
        out.write_u64::<Le>(class.evs.len() as u64)?;
        for ev in &class.evs {
            write_f64s(&mut out, &ev.anchor)?;
            out.write_f64::<Le>(ev.params.shape)?;
            out.write_f64::<Le>(ev.params.scale)?;
            out.write_f64::<Le>(ev.params.max_tail_distance)?;
            write_f64s(&mut out, &ev.tail)?;
        }
        write_f64s(&mut out, &class.coverage.sums)?;
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    Ok(out)
}

struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
}

impl Reader<'_> {
    fn fail(&self, what: &str) -> Error {
        Error::Corrupt(format!("{what} at offset {}", self.cur.position()))
    }

    fn u8(&mut self) -> Result<u8> {
        self.cur.read_u8().map_err(|_| self.fail("truncated"))
    }

    fn u64(&mut self) -> Result<u64> {
        self.cur.read_u64::<Le>().map_err(|_| self.fail("truncated"))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| self.fail("length overflow"))
    }

    fn f64(&mut self) -> Result<f64> {
        self.cur.read_f64::<Le>().map_err(|_| self.fail("truncated"))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        let remaining = self.cur.get_ref().len() as u64 - self.cur.position();
        if n as u64 > remaining / 8 {
            return Err(self.fail("length exceeds file"));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> Result<String> {
        let n = self.cur.read_u32::<Le>().map_err(|_| self.fail("truncated"))? as usize;
        let mut raw = vec![0u8; n];
        self.cur.read_exact(&mut raw).map_err(|_| self.fail("truncated"))?;
        String::from_utf8(raw).map_err(|_| self.fail("label is not UTF-8"))
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<EvmModel> {
    if bytes.len() < MODEL_MAGIC.len() + 1 + DIGEST_LEN {
        return Err(Error::Corrupt("file too short".into()));
    }
    if &bytes[..4] != MODEL_MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    if bytes[4] != MODEL_VERSION {
        return Err(Error::VersionMismatch(bytes[4]));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body)[..] != digest[..] {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }

    let mut r = Reader { cur: Cursor::new(body) };
    r.cur.set_position(5);
    let tail_size = r.usize()?;
    let distance_multiplier = r.f64()?;
    let metric = match r.u8()? {
        0 => DistanceMetric::Euclidean,
        1 => DistanceMetric::CosineDistance,
        _ => return Err(r.fail("unknown metric tag")),
    };
    let budget = match r.usize()? {
        0 => None,
        k => Some(k),
    };
    let config = EvmConfig {
        tail_size,
        distance_multiplier,
        metric,
        budget,
        rejection_threshold: r.f64()?,
        coverage_threshold: r.f64()?,
        bisection_tolerance: r.f64()?,
    };
    config.validate()?;
    let epoch = r.u64()?;
    let dim = match r.usize()? {
        0 => None,
        d => Some(d),
    };

    let n_classes = r.usize()?;
    let mut classes = BTreeMap::new();
    for _ in 0..n_classes {
        let label = Label::new(r.string()?)?;
        let n_evs = r.usize()?;
        let mut evs = Vec::new();
        for _ in 0..n_evs {
            let anchor = FeatureVector::new(r.f64s()?)?;
            if dim.is_some_and(|d| d != anchor.dim()) {
                return Err(r.fail("anchor dimension disagrees with model"));
            }
            let params = WeibullParams::new(r.f64()?, r.f64()?, r.f64()?)?;
            let tail = r.f64s()?;
            evs.push(ExtremeVector {
                anchor,
                label: label.clone(),
                params,
                tail,
            });
        }
        let sums = r.f64s()?;
        if sums.len() != evs.len() {
            return Err(r.fail("coverage cache length disagrees with extreme vectors"));
        }
        if classes
            .insert(label, ClassModel { evs, coverage: CoverageCache { sums } })
            .is_some()
        {
            return Err(r.fail("duplicate class"));
        }
    }
    if r.cur.position() as usize != body.len() {
        return Err(r.fail("trailing bytes"));
    }
    Ok(EvmModel {
        classes,
        config,
        epoch,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::batch_fit;
    use crate::harness::synth::synth_blobs;

    fn model() -> EvmModel {
        let data = synth_blobs(3, 12, 3, 1.0, 5).unwrap();
        batch_fit(
            &data,
            &EvmConfig {
                tail_size: 6,
                budget: Some(4),
                ..EvmConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let back = model_from_bytes(&model_to_bytes(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_damage() {
        let bytes = model_to_bytes(&model()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(model_from_bytes(&bad), Err(Error::Corrupt(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(model_from_bytes(&bad), Err(Error::VersionMismatch(9))));
        let mut bad = bytes.clone();
        bad[40] ^= 1;
        assert!(matches!(model_from_bytes(&bad), Err(Error::Corrupt(_))));
        assert!(model_from_bytes(&bytes[..10]).is_err());
    }
}
