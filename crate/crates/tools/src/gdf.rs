//! Restricted GDF v2.x reader.
//!
//! Covers exactly what the BCI Competition IV 2a recordings need: a v2.x
//! fixed header, int16 or float32 sample encodings, a uniform sampling rate
//! across channels, and event tables in mode 1 or 3. Anything else fails
//! loudly with the byte offset — silent truncation or misdecoding would
//! poison every downstream covariance.
//!
//! Layout facts used here (offsets into the 256-byte fixed header and the
//! per-field blocks of the 256·NS variable header):
//!   version tag `GDF x.yy` at 0, header length in 256-byte blocks (u16) at
//!   184, record count (i64, -1 = unknown) at 236, record duration as a
//!   u32 rational at 244, channel count (u16) at 252; per channel: label
//!   16 B, physical min/max and digital min/max as f64 blocks at 104·NS,
//!   112·NS, 120·NS, 128·NS, samples-per-record (u32) at 216·NS and sample
//!   type (u32) at 220·NS. Event positions are 1-based.

use std::fs;
use std::path::Path;

use sphera_core::epochs::{ContinuousRecording, EpochError};
use thiserror::Error;

pub const GDFTYP_INT16: u32 = 3;
pub const GDFTYP_FLOAT32: u32 = 16;

#[derive(Debug, Error)]
pub enum GdfError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a GDF file (magic {magic:?} at byte 0)")]
    BadMagic { magic: String },
    #[error("unsupported GDF version {version:?} (only 2.x is supported)")]
    UnsupportedVersion { version: String },
    #[error("file truncated: need {expected} bytes at byte {offset}, file has {available}")]
    Truncated {
        offset: u64,
        expected: usize,
        available: usize,
    },
    #[error("unsupported sample encoding {gdftyp} on channel {channel} (header byte {offset}); only int16 (3) and float32 (16) are supported")]
    UnsupportedEncoding {
        gdftyp: u32,
        channel: usize,
        offset: u64,
    },
    #[error("channels disagree on sampling rate: channel {channel} has {got} samples per record, channel 0 has {expected}")]
    MixedSamplingRates {
        channel: usize,
        expected: u32,
        got: u32,
    },
    #[error("degenerate calibration on channel {channel}: digital min equals max")]
    DegenerateCalibration { channel: usize },
    #[error("invalid record duration {num}/{den}")]
    BadDuration { num: u32, den: u32 },
    #[error("unsupported event table mode {mode} at byte {offset}; only modes 1 and 3 are supported")]
    UnsupportedEventMode { mode: u8, offset: u64 },
    #[error("event {index} at sample {sample} lies outside the {n_samples}-sample signal")]
    EventOutOfRange {
        index: usize,
        sample: u32,
        n_samples: usize,
    },
    #[error("{0}")]
    Epoch(#[from] EpochError),
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn slice(&self, offset: usize, len: usize) -> Result<&'a [u8], GdfError> {
        self.bytes
            .get(offset..offset + len)
            .ok_or(GdfError::Truncated {
                offset: offset as u64,
                expected: len,
                available: self.bytes.len(),
            })
    }

    fn u16_le(&self, offset: usize) -> Result<u16, GdfError> {
        Ok(u16::from_le_bytes(self.slice(offset, 2)?.try_into().unwrap()))
    }

    fn u32_le(&self, offset: usize) -> Result<u32, GdfError> {
        Ok(u32::from_le_bytes(self.slice(offset, 4)?.try_into().unwrap()))
    }

    fn i64_le(&self, offset: usize) -> Result<i64, GdfError> {
        Ok(i64::from_le_bytes(self.slice(offset, 8)?.try_into().unwrap()))
    }

    fn f64_le(&self, offset: usize) -> Result<f64, GdfError> {
        Ok(f64::from_le_bytes(self.slice(offset, 8)?.try_into().unwrap()))
    }
}

/// Parse a restricted GDF v2.x file from disk.
pub fn read_gdf_restricted(path: &Path) -> Result<ContinuousRecording, GdfError> {
    let bytes = fs::read(path).map_err(|source| GdfError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gdf(&bytes)
}

/// Parse a restricted GDF v2.x file from memory.
pub fn parse_gdf(bytes: &[u8]) -> Result<ContinuousRecording, GdfError> {
    let cur = Cursor { bytes };

    let magic = cur.slice(0, 8)?;
    let tag = String::from_utf8_lossy(magic).into_owned();
    if &magic[..4] != b"GDF " {
        return Err(GdfError::BadMagic { magic: tag });
    }
    let version: f64 = tag[4..].trim().parse().unwrap_or(0.0);
    if !(2.0..3.0).contains(&version) {
        return Err(GdfError::UnsupportedVersion { version: tag });
    }

    let header_len = cur.u16_le(184)? as usize * 256;
    let n_records_raw = cur.i64_le(236)?;
    let dur_num = cur.u32_le(244)?;
    let dur_den = cur.u32_le(248)?;
    if dur_num == 0 || dur_den == 0 {
        return Err(GdfError::BadDuration {
            num: dur_num,
            den: dur_den,
        });
    }
    let n_channels = cur.u16_le(252)? as usize;

    // variable header: NS blocks of per-field arrays
    let var = 256usize;
    cur.slice(var, 256 * n_channels)?;
    let mut channel_names = Vec::with_capacity(n_channels);
    let mut phys_min = Vec::with_capacity(n_channels);
    let mut phys_max = Vec::with_capacity(n_channels);
    let mut dig_min = Vec::with_capacity(n_channels);
    let mut dig_max = Vec::with_capacity(n_channels);
    let mut spr = Vec::with_capacity(n_channels);
    let mut gdftyp = Vec::with_capacity(n_channels);
    for ch in 0..n_channels {
        let label = cur.slice(var + 16 * ch, 16)?;
        channel_names.push(String::from_utf8_lossy(label).trim_end_matches(['\0', ' ']).to_string());
        phys_min.push(cur.f64_le(var + 104 * n_channels + 8 * ch)?);
        phys_max.push(cur.f64_le(var + 112 * n_channels + 8 * ch)?);
        dig_min.push(cur.f64_le(var + 120 * n_channels + 8 * ch)?);
        dig_max.push(cur.f64_le(var + 128 * n_channels + 8 * ch)?);
        spr.push(cur.u32_le(var + 216 * n_channels + 4 * ch)?);
        let typ = cur.u32_le(var + 220 * n_channels + 4 * ch)?;
        if typ != GDFTYP_INT16 && typ != GDFTYP_FLOAT32 {
            return Err(GdfError::UnsupportedEncoding {
                gdftyp: typ,
                channel: ch,
                offset: (var + 220 * n_channels + 4 * ch) as u64,
            });
        }
        gdftyp.push(typ);
    }
    for (ch, &s) in spr.iter().enumerate() {
        if s != spr[0] {
            return Err(GdfError::MixedSamplingRates {
                channel: ch,
                expected: spr[0],
                got: s,
            });
        }
    }
    let samples_per_record = spr[0] as usize;
    let fs = samples_per_record as f64 * dur_den as f64 / dur_num as f64;

    let sample_bytes: Vec<usize> = gdftyp
        .iter()
        .map(|&t| if t == GDFTYP_INT16 { 2 } else { 4 })
        .collect();
    let record_size: usize = sample_bytes.iter().map(|b| b * samples_per_record).sum();

    let n_records = if n_records_raw < 0 {
        // unknown count: infer from the bytes after the header
        if record_size == 0 {
            0
        } else {
            (bytes.len() - header_len.min(bytes.len())) / record_size
        }
    } else {
        n_records_raw as usize
    };

    // physical = (digital - digmin) * scale + physmin
    let mut scale = Vec::with_capacity(n_channels);
    for ch in 0..n_channels {
        let span = dig_max[ch] - dig_min[ch];
        if span == 0.0 {
            return Err(GdfError::DegenerateCalibration { channel: ch });
        }
        scale.push((phys_max[ch] - phys_min[ch]) / span);
    }

    let n_samples = n_records * samples_per_record;
    let mut signal = vec![0.0f64; n_channels * n_samples];
    let mut offset = header_len;
    for record in 0..n_records {
        for ch in 0..n_channels {
            let width = sample_bytes[ch];
            let raw = cur.slice(offset, width * samples_per_record)?;
            let base = ch * n_samples + record * samples_per_record;
            for s in 0..samples_per_record {
                let digital = match gdftyp[ch] {
                    GDFTYP_INT16 => {
                        i16::from_le_bytes(raw[2 * s..2 * s + 2].try_into().unwrap()) as f64
                    }
                    _ => f32::from_le_bytes(raw[4 * s..4 * s + 4].try_into().unwrap()) as f64,
                };
                signal[base + s] = (digital - dig_min[ch]) * scale[ch] + phys_min[ch];
            }
            offset += width * samples_per_record;
        }
    }

    // event table follows the data records, when present
    let mut events: Vec<(usize, u16)> = Vec::new();
    if n_records_raw >= 0 && offset + 8 <= bytes.len() {
        let table = cur.slice(offset, 8)?;
        let mode = table[0];
        if mode != 1 && mode != 3 {
            return Err(GdfError::UnsupportedEventMode {
                mode,
                offset: offset as u64,
            });
        }
        let n_events = u32::from_le_bytes([table[1], table[2], table[3], 0]) as usize;
        // bytes 4..8 hold the event sample rate; positions are already in samples
        let pos_off = offset + 8;
        let typ_off = pos_off + 4 * n_events;
        let mut expected = 8 + 6 * n_events;
        if mode == 3 {
            expected += 6 * n_events; // channel (u16) and duration (u32) arrays
        }
        cur.slice(offset, expected)?;
        for i in 0..n_events {
            let pos = cur.u32_le(pos_off + 4 * i)?;
            let code = cur.u16_le(typ_off + 2 * i)?;
            if pos == 0 || pos as usize > n_samples {
                return Err(GdfError::EventOutOfRange {
                    index: i,
                    sample: pos,
                    n_samples,
                });
            }
            events.push((pos as usize - 1, code)); // stored 1-based
        }
        events.sort_by_key(|&(sample, code)| (sample, code));
    }

    Ok(ContinuousRecording::new(
        fs,
        n_channels,
        n_samples,
        signal,
        events,
        channel_names,
    )?)
}
