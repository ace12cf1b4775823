//! ERF container format: one JSON header line plus a raw float32 payload.
//!
//! Layout of a recording file:
//!
//! ```text
//! {"fs":100.0,"channels":["C3","C4"],"n_samples":4,"markers":[[1,0]],"meta":{}}\n
//! <n_samples * n_channels little-endian f32, sample-major>
//! ```
//!
//! An epoch-set file is analogous with `"n_trials"`, `"time_axis_ms"` and
//! `"labels"` in the header and a trial-major payload
//! (`[trial][timepoint][channel]`). The format is trivially parseable from
//! any language and bit-exact: writing and re-reading a file reproduces the
//! payload bytes identically.
//!
//! In-memory values are `f64`; the payload quantizes to `f32` on write and
//! widens losslessly on read, so values that are representable in `f32`
//! (including everything this crate itself writes) round-trip exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::data::{EpochSet, Marker, Recording};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct RecordingHeader {
    fs: f64,
    channels: Vec<String>,
    n_samples: usize,
    markers: Vec<(usize, i32)>,
    meta: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct EpochSetHeader {
    fs: f64,
    channels: Vec<String>,
    n_trials: usize,
    time_axis_ms: Vec<f64>,
    labels: Vec<u8>,
    meta: serde_json::Value,
}

/// Reads a continuous recording from an ERF file.
///
/// # Errors
///
/// [`Error::Format`] for a malformed header (naming the offending field where
/// the parser can tell), [`Error::Truncated`] when the payload holds fewer
/// values than `n_samples * n_channels`, and [`Error::Validation`] when the
/// decoded recording violates an invariant.
pub fn read_recording(path: &Path) -> Result<Recording> {
    let mut reader = BufReader::new(File::open(path)?);
    let header: RecordingHeader = read_header_line(&mut reader)?;
    let n_values = header
        .n_samples
        .checked_mul(header.channels.len())
        .ok_or_else(|| Error::Format("n_samples * n_channels overflows".into()))?;
    let values = read_f32_payload(&mut reader, n_values)?;
    let samples = Array2::from_shape_vec((header.n_samples, header.channels.len()), values)
        .expect("length checked by read_f32_payload");
    Recording::new(
        header.fs,
        header.channels,
        samples,
        header.markers.iter().map(|&(sample, label)| Marker { sample, label }).collect(),
        header.meta,
    )
}

/// Writes a recording to an ERF file; the result reads back bit-identically.
pub fn write_recording(rec: &Recording, path: &Path) -> Result<()> {
    rec.validate()?;
    let header = RecordingHeader {
        fs: rec.fs,
        channels: rec.channels.clone(),
        n_samples: rec.n_samples(),
        markers: rec.markers.iter().map(|m| (m.sample, m.label)).collect(),
        meta: rec.meta.clone(),
    };
    let mut writer = BufWriter::new(File::create(path)?);
    write_header_line(&mut writer, &header)?;
    write_f32_payload(&mut writer, rec.samples.iter().copied())?;
    writer.flush()?;
    Ok(())
}

/// Reads an epoch set from an ERF file.
pub fn read_epochs(path: &Path) -> Result<EpochSet> {
    let mut reader = BufReader::new(File::open(path)?);
    let header: EpochSetHeader = read_header_line(&mut reader)?;
    let n_time = header.time_axis_ms.len();
    let n_chan = header.channels.len();
    let n_values = header
        .n_trials
        .checked_mul(n_time)
        .and_then(|v| v.checked_mul(n_chan))
        .ok_or_else(|| Error::Format("n_trials * n_timepoints * n_channels overflows".into()))?;
    let values = read_f32_payload(&mut reader, n_values)?;
    let epochs = Array3::from_shape_vec((header.n_trials, n_time, n_chan), values)
        .expect("length checked by read_f32_payload");
    EpochSet::new(header.fs, header.channels, epochs, header.time_axis_ms, header.labels, header.meta)
}

/// Writes an epoch set to an ERF file; the result reads back bit-identically.
pub fn write_epochs(ep: &EpochSet, path: &Path) -> Result<()> {
    ep.validate()?;
    let header = EpochSetHeader {
        fs: ep.fs,
        channels: ep.channels.clone(),
        n_trials: ep.n_trials(),
        time_axis_ms: ep.time_ms.clone(),
        labels: ep.labels.clone(),
        meta: ep.meta.clone(),
    };
    let mut writer = BufWriter::new(File::create(path)?);
    write_header_line(&mut writer, &header)?;
    write_f32_payload(&mut writer, ep.epochs.iter().copied())?;
    writer.flush()?;
    Ok(())
}

/// Reads the newline-terminated JSON header at the start of an ERF file.
pub(crate) fn read_header_line<T: serde::de::DeserializeOwned>(reader: &mut impl Read) -> Result<T> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match reader.read(&mut byte)? {
            0 => return Err(Error::Format("missing newline-terminated header line".into())),
            _ => {
                if byte[0] == b'\n' {
                    break;
                }
                line.push(byte[0]);
                if line.len() > 64 * 1024 * 1024 {
                    return Err(Error::Format("header line exceeds 64 MiB".into()));
                }
            }
        }
    }
    let text = std::str::from_utf8(&line)
        .map_err(|_| Error::Format("header line is not valid UTF-8".into()))?;
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Error::Format(format!("header field '{}': {}", e.path(), e.inner()))
    })
}

pub(crate) fn write_header_line<T: Serialize>(writer: &mut impl Write, header: &T) -> Result<()> {
    let mut text = serde_json::to_string(header)?;
    text.push('\n');
    writer.write_all(text.as_bytes())?;
    Ok(())
}

/// Reads exactly `n_values` little-endian f32 values, widened to f64.
///
/// Fails with [`Error::Truncated`] when the file ends early and with
/// [`Error::Format`] when bytes remain after the declared payload.
pub(crate) fn read_f32_payload(reader: &mut impl Read, n_values: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let expected_bytes = n_values * 4;
    if bytes.len() < expected_bytes {
        return Err(Error::Truncated { expected: n_values, found: bytes.len() / 4 });
    }
    if bytes.len() > expected_bytes {
        return Err(Error::Format(format!(
            "{} trailing bytes after a payload of {} values",
            bytes.len() - expected_bytes,
            n_values
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect())
}

pub(crate) fn write_f32_payload(writer: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut buf = Vec::with_capacity(4096);
    for v in values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
        if buf.len() >= 4096 {
            writer.write_all(&buf)?;
            buf.clear();
        }
    }
    writer.write_all(&buf)?;
    Ok(())
}

/// Reads exactly `n_values` little-endian f64 values (model payloads).
pub(crate) fn read_f64_payload(reader: &mut impl Read, n_values: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let expected_bytes = n_values * 8;
    if bytes.len() < expected_bytes {
        return Err(Error::Truncated { expected: n_values, found: bytes.len() / 8 });
    }
    if bytes.len() > expected_bytes {
        return Err(Error::Format(format!(
            "{} trailing bytes after a payload of {} values",
            bytes.len() - expected_bytes,
            n_values
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
        .collect())
}

pub(crate) fn write_f64_payload(writer: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut buf = Vec::with_capacity(4096);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
        if buf.len() >= 4096 {
            writer.write_all(&buf)?;
            buf.clear();
        }
    }
    writer.write_all(&buf)?;
    Ok(())
}
