//! Pulse-train persistence and 17-significant-digit JSON output.
//!
//! NDJSON: a `{"type":"meta",...}` line followed by one `{"index","value"}`
//! record per pulse.
//!
//! Binary (`PSTN`): a 64-byte little-endian header
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic `PSTN`                       |
//! | 4      | 4    | format version (u32)               |
//! | 8      | 8    | pulse count (u64)                  |
//! | 16     | 8    | master seed (u64)                  |
//! | 24     | 32   | SHA-256 of the spec, zero if none  |
//! | 56     | 8    | meta trailer length in bytes (u64) |
//!
//! then `pulse count` f64 values and the JSON meta trailer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::fmt17;
use crate::sampler::{PulseTrain, TrainMeta};

pub const MAGIC: &[u8; 4] = b"PSTN";
pub const BINARY_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainFormat {
    Ndjson,
    Binary,
    /// `index,value` rows; values only, no provenance.
    Csv,
}

impl TrainFormat {
    /// `.pstn`/`.bin` → binary, `.csv` → CSV, anything else NDJSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pstn" | "bin") => TrainFormat::Binary,
            Some("csv") => TrainFormat::Csv,
            _ => TrainFormat::Ndjson,
        }
    }
}

/// serde_json formatter printing floats with 17 significant digits and
/// non-finite floats as `null`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Compact JSON with [`Digits17`] floats, no trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(format!("json: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn spec_digest(meta: &TrainMeta) -> [u8; 32] {
    meta.spec
        .as_deref()
        .map(|s| Sha256::digest(s.as_bytes()).into())
        .unwrap_or([0; 32])
}

pub fn write_ndjson<W: Write>(train: &PulseTrain, mut w: W) -> Result<()> {
    let mut meta = serde_json::to_value(&train.meta).map_err(|e| Error::Format(e.to_string()))?;
    meta.as_object_mut()
        .expect("meta is an object")
        .insert("type".into(), "meta".into());
    writeln!(w, "{}", to_json(&meta)?)?;
    for (i, v) in train.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Format(format!("value {i} is not finite")));
        }
        writeln!(w, "{{\"index\":{i},\"value\":{}}}", fmt17(*v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ndjson<R: BufRead>(r: R) -> Result<PulseTrain> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Record {
        index: u64,
        value: f64,
    }
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Format("empty NDJSON train".into()))??;
    let mut head: serde_json::Value =
        serde_json::from_str(&head).map_err(|e| Error::Format(format!("meta line: {e}")))?;
    if head.get("type").and_then(|t| t.as_str()) != Some("meta") {
        return Err(Error::Format(
            "first NDJSON line must be the meta record".into(),
        ));
    }
    head.as_object_mut().unwrap().remove("type");
    let meta: TrainMeta =
        serde_json::from_value(head).map_err(|e| Error::Format(format!("meta line: {e}")))?;
    let mut values = Vec::with_capacity(meta.pulse_count.min(1 << 28) as usize);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(&line).map_err(|e| Error::Format(format!("record {i}: {e}")))?;
        if rec.index != i as u64 {
            return Err(Error::Format(format!(
                "record {i} carries index {}",
                rec.index
            )));
        }
        values.push(rec.value);
    }
    check_count(&meta, values.len())?;
    Ok(PulseTrain { values, meta })
}

fn check_count(meta: &TrainMeta, n: usize) -> Result<()> {
    if meta.pulse_count != n as u64 {
        return Err(Error::Format(format!(
            "meta announces {} pulses, found {n}",
            meta.pulse_count
        )));
    }
    Ok(())
}

pub fn write_binary<W: Write>(train: &PulseTrain, mut w: W) -> Result<()> {
    let trailer = serde_json::to_vec(&train.meta).map_err(|e| Error::Format(e.to_string()))?;
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&BINARY_VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&(train.values.len() as u64).to_le_bytes());
    header[16..24].copy_from_slice(&train.meta.master_seed.to_le_bytes());
    header[24..56].copy_from_slice(&spec_digest(&train.meta));
    header[56..64].copy_from_slice(&(trailer.len() as u64).to_le_bytes());
    w.write_all(&header)?;
    for v in &train.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&trailer)?;
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<PulseTrain> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("file shorter than the 64-byte PSTN header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format(
            "bad magic: not a PSTN pulse-train file".into(),
        ));
    }
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported PSTN version {version}")));
    }
    let count = u64_at(8);
    let seed = u64_at(16);
    let trailer_len = u64_at(56);
    if count > (1 << 34) || trailer_len > (1 << 30) {
        return Err(Error::Format("implausible header sizes".into()));
    }
    let mut raw = vec![0u8; count as usize * 8];
    r.read_exact(&mut raw)
        .map_err(|_| Error::Format(format!("truncated data: expected {count} values")))?;
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let mut trailer = vec![0u8; trailer_len as usize];
    r.read_exact(&mut trailer)
        .map_err(|_| Error::Format("truncated meta trailer".into()))?;
    let meta: TrainMeta = serde_json::from_slice(&trailer)
        .map_err(|e| Error::Format(format!("meta trailer: {e}")))?;
    check_count(&meta, values.len())?;
    if meta.master_seed != seed || spec_digest(&meta)[..] != header[24..56] {
        return Err(Error::Format(
            "header disagrees with meta trailer (seed or spec digest)".into(),
        ));
    }
    Ok(PulseTrain { values, meta })
}

pub fn write_csv<W: Write>(train: &PulseTrain, mut w: W) -> Result<()> {
    writeln!(w, "index,value")?;
    for (i, v) in train.values.iter().enumerate() {
        writeln!(w, "{i},{}", fmt17(*v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<PulseTrain> {
    let mut values = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Format(format!("CSV line {}: expected index,value", i + 1)))?;
        values.push(v);
    }
    Ok(PulseTrain::from_values(values))
}

pub fn save(train: &PulseTrain, path: &Path, format: TrainFormat) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    match format {
        TrainFormat::Ndjson => write_ndjson(train, w),
        TrainFormat::Binary => write_binary(train, w),
        TrainFormat::Csv => write_csv(train, w),
    }
}

/// Reads any of the formats; PSTN files are recognized by their magic.
pub fn load(path: &Path) -> Result<PulseTrain> {
    let mut r = BufReader::new(File::open(path)?);
    let head = r.fill_buf()?;
    if head.starts_with(MAGIC) {
        return read_binary(r);
    }
    if TrainFormat::from_path(path) == TrainFormat::Binary {
        return Err(Error::Format(
            "bad magic: not a PSTN pulse-train file".into(),
        ));
    }
    if head.starts_with(b"index,") {
        return read_csv(r);
    }
    read_ndjson(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{apply_loss, sample};
    use crate::spec::DistributionSpec;

    fn train() -> PulseTrain {
        let t = sample(
            &DistributionSpec::superbunched(1.0 / 3.0).with_modes(2),
            1000,
            5,
        )
        .unwrap();
        apply_loss(&t, 0.43).unwrap()
    }

    #[test]
    fn ndjson_round_trip() {
        let t = train();
        let mut buf = Vec::new();
        write_ndjson(&t, &mut buf).unwrap();
        assert_eq!(read_ndjson(&buf[..]).unwrap(), t);
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let t = train();
        let mut buf = Vec::new();
        write_binary(&t, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PSTN");
        assert_eq!(read_binary(&buf[..]).unwrap(), t);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_binary(&bad[..]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[30] ^= 1;
        assert!(matches!(read_binary(&bad[..]), Err(Error::Format(_))));
        assert!(matches!(read_binary(&buf[..100]), Err(Error::Format(_))));
    }

    #[test]
    fn json_digits() {
        let s = to_json(&[0.1, f64::NAN, 1e300]).unwrap();
        assert_eq!(s, "[0.10000000000000001,null,1.0000000000000001e300]");
    }
}
