use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use super::packed_file::{meta_path, StreamMetadata};
use super::{AnnealSample, BitstreamError};
use crate::fsutil::atomic_write;

/// Streaming reader for spin CSV files.
///
/// The header is `anneal_index,q<id0>,q<id1>,...` with strictly ascending
/// qubit ids; each body row holds one anneal cycle. Cells accept `+1`, `1`
/// and `-1`. Samples are numbered by row ordinal; a jump in the file's own
/// `anneal_index` column marks the start of a new acquisition epoch.
pub struct SpinCsvReader<R: Read> {
    reader: csv::Reader<R>,
    record: csv::ByteRecord,
    qubit_ids: Vec<u32>,
    ordinal: u64,
    last_declared: Option<u64>,
    epoch: u32,
    failed: bool,
}

/// Opens `path` for streaming ingestion.
pub fn ingest_spin_csv(path: &Path) -> Result<SpinCsvReader<BufReader<File>>, BitstreamError> {
    SpinCsvReader::new(BufReader::new(File::open(path)?))
}

impl<R: Read> SpinCsvReader<R> {
    pub fn new(input: R) -> Result<Self, BitstreamError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut header = csv::ByteRecord::new();
        let got = reader.read_byte_record(&mut header).map_err(|e| csv_error(e, 1))?;
        if !got {
            return Err(parse_err(1, 1, "missing header row"));
        }
        let qubit_ids = parse_header(&header)?;
        Ok(Self {
            reader,
            record: csv::ByteRecord::new(),
            qubit_ids,
            ordinal: 0,
            last_declared: None,
            epoch: 0,
            failed: false,
        })
    }

    /// Qubit ids named by the header, ascending.
    pub fn qubit_ids(&self) -> &[u32] {
        &self.qubit_ids
    }

    fn next_sample(&mut self) -> Result<Option<AnnealSample>, BitstreamError> {
        let line_guess = self.ordinal + 2;
        let got = self
            .reader
            .read_byte_record(&mut self.record)
            .map_err(|e| csv_error(e, line_guess))?;
        if !got {
            return Ok(None);
        }
        let row = self.record.position().map_or(line_guess, |p| p.line());
        let expected = self.qubit_ids.len() + 1;
        if self.record.len() != expected {
            return Err(parse_err(
                row,
                self.record.len().min(expected) + 1,
                &format!("ragged row: expected {expected} cells, found {}", self.record.len()),
            ));
        }
        let declared = std::str::from_utf8(&self.record[0])
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .ok_or_else(|| parse_err(row, 1, "anneal_index must be a non-negative integer"))?;
        let mut spins = Vec::with_capacity(self.qubit_ids.len());
        for (col, cell) in self.record.iter().enumerate().skip(1) {
            let spin = match cell.trim_ascii() {
                b"+1" | b"1" => 1,
                b"-1" => -1,
                other => {
                    return Err(parse_err(
                        row,
                        col + 1,
                        &format!("invalid spin {:?}", String::from_utf8_lossy(other)),
                    ))
                }
            };
            spins.push(spin);
        }
        let epoch_tag = match self.last_declared {
            Some(prev) if prev.checked_add(1) != Some(declared) => {
                self.epoch += 1;
                Some(self.epoch)
            }
            _ => None,
        };
        self.last_declared = Some(declared);
        let sample = AnnealSample {
            spins,
            anneal_index: self.ordinal,
            epoch_tag,
        };
        self.ordinal += 1;
        Ok(Some(sample))
    }
}

impl<R: Read> Iterator for SpinCsvReader<R> {
    type Item = Result<AnnealSample, BitstreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_sample() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Converts a spin CSV into a `.bits` file and its sidecar without holding
/// the stream in memory. Epoch starts are recorded as bit offsets. On error
/// neither output file is created.
pub fn convert_spin_csv(csv_path: &Path, out: &Path) -> Result<StreamMetadata, BitstreamError> {
    let mut reader = ingest_spin_csv(csv_path)?;
    let width = reader.qubit_ids().len() as u64;
    let mut failure = None;
    let mut bit_count = 0u64;
    let mut epoch_starts = Vec::new();
    let written = atomic_write(out, |w| {
        let mut acc = 0u8;
        for item in &mut reader {
            let sample = match item {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e);
                    return Err(io::Error::other("spin CSV rejected"));
                }
            };
            if sample.epoch_tag.is_some() {
                epoch_starts.push(bit_count);
            }
            for &spin in &sample.spins {
                acc = (acc << 1) | u8::from(spin == 1);
                bit_count += 1;
                if bit_count % 8 == 0 {
                    w.write_all(&[acc])?;
                    acc = 0;
                }
            }
        }
        let tail = (bit_count % 8) as u32;
        if tail != 0 {
            w.write_all(&[acc << (8 - tail)])?;
        }
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e);
    }
    written?;
    let meta = StreamMetadata {
        bit_count,
        source_descriptor: format!("spin-csv:{} qubits={width}", csv_path.display()),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config_digest: String::new(),
        epoch_starts,
    };
    let text = meta.to_toml();
    atomic_write(&meta_path(out), |w| w.write_all(text.as_bytes()))?;
    Ok(meta)
}

fn parse_header(header: &csv::ByteRecord) -> Result<Vec<u32>, BitstreamError> {
    match header.get(0).map(|c| c.trim_ascii()) {
        Some(b"anneal_index") => {}
        _ => return Err(parse_err(1, 1, "header must start with anneal_index")),
    }
    let mut ids: Vec<u32> = Vec::with_capacity(header.len().saturating_sub(1));
    for (col, cell) in header.iter().enumerate().skip(1) {
        let id = cell
            .trim_ascii()
            .strip_prefix(b"q")
            .and_then(|d| std::str::from_utf8(d).ok())
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| parse_err(1, col + 1, "qubit column must be named q<id>"))?;
        if ids.last().is_some_and(|&prev| prev >= id) {
            return Err(parse_err(1, col + 1, "qubit ids must be strictly ascending"));
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(parse_err(1, 2, "header names no qubits"));
    }
    Ok(ids)
}

fn parse_err(row: u64, column: usize, message: &str) -> BitstreamError {
    BitstreamError::Parse {
        row,
        column,
        message: message.to_string(),
    }
}

fn csv_error(e: csv::Error, row: u64) -> BitstreamError {
    let row = e.position().map_or(row, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BitstreamError::Io(io),
        other => parse_err(row, 1, &format!("{other:?}")),
    }
}
