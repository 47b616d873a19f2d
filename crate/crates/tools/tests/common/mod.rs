//! Test-side GDF v2.x encoder: builds fixture files from the same layout
//! facts the reader uses, so reader tests exercise real byte streams
//! rather than mocks.

#![allow(dead_code)]

pub struct FixtureChannel {
    pub label: String,
    /// 3 = int16, 16 = float32.
    pub gdftyp: u32,
    pub phys_min: f64,
    pub phys_max: f64,
    pub dig_min: f64,
    pub dig_max: f64,
    /// Physical-unit samples, length = n_records × spr.
    pub data: Vec<f64>,
}

impl FixtureChannel {
    /// int16 channel whose digital values equal the physical values.
    pub fn identity_i16(label: &str, data: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            gdftyp: 3,
            phys_min: -32768.0,
            phys_max: 32767.0,
            dig_min: -32768.0,
            dig_max: 32767.0,
            data,
        }
    }

    pub fn float32(label: &str, data: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            gdftyp: 16,
            phys_min: -1000.0,
            phys_max: 1000.0,
            dig_min: -1000.0,
            dig_max: 1000.0,
            data,
        }
    }
}

pub struct GdfFixture {
    pub version: String,
    pub channels: Vec<FixtureChannel>,
    /// Samples per record (all channels).
    pub spr: usize,
    /// Value written into the record-count field; -1 means "unknown".
    pub n_records_field: i64,
    pub dur_num: u32,
    pub dur_den: u32,
    /// (0-based sample, code); written 1-based per the format.
    pub events: Vec<(usize, u16)>,
    pub event_mode: u8,
    pub with_event_table: bool,
}

impl GdfFixture {
    pub fn new(channels: Vec<FixtureChannel>, spr: usize, fs: u32) -> Self {
        Self {
            channels,
            spr,
            n_records_field: 0, // filled by encode() from the data length
            dur_num: spr as u32,
            dur_den: fs * 1, // duration = spr/fs seconds -> fs = spr * den / num
            events: Vec::new(),
            event_mode: 1,
            with_event_table: true,
            version: "GDF 2.20".into(),
        }
    }

    pub fn n_records(&self) -> usize {
        self.channels[0].data.len() / self.spr
    }
}

pub fn encode_gdf(fx: &GdfFixture) -> Vec<u8> {
    let ns = fx.channels.len();
    let header_blocks = 1 + ns;
    let mut out = vec![0u8; 256 * header_blocks];

    // fixed header
    let version = fx.version.as_bytes();
    out[..version.len().min(8)].copy_from_slice(&version[..version.len().min(8)]);
    out[184..186].copy_from_slice(&(header_blocks as u16).to_le_bytes());
    let n_records_field = if fx.n_records_field == 0 {
        fx.n_records() as i64
    } else {
        fx.n_records_field
    };
    out[236..244].copy_from_slice(&n_records_field.to_le_bytes());
    out[244..248].copy_from_slice(&fx.dur_num.to_le_bytes());
    out[248..252].copy_from_slice(&fx.dur_den.to_le_bytes());
    out[252..254].copy_from_slice(&(ns as u16).to_le_bytes());

    // variable header, field-blocked
    let var = 256;
    for (ch, spec) in fx.channels.iter().enumerate() {
        let label = spec.label.as_bytes();
        let n = label.len().min(16);
        out[var + 16 * ch..var + 16 * ch + n].copy_from_slice(&label[..n]);
        out[var + 104 * ns + 8 * ch..var + 104 * ns + 8 * ch + 8]
            .copy_from_slice(&spec.phys_min.to_le_bytes());
        out[var + 112 * ns + 8 * ch..var + 112 * ns + 8 * ch + 8]
            .copy_from_slice(&spec.phys_max.to_le_bytes());
        out[var + 120 * ns + 8 * ch..var + 120 * ns + 8 * ch + 8]
            .copy_from_slice(&spec.dig_min.to_le_bytes());
        out[var + 128 * ns + 8 * ch..var + 128 * ns + 8 * ch + 8]
            .copy_from_slice(&spec.dig_max.to_le_bytes());
        out[var + 216 * ns + 4 * ch..var + 216 * ns + 4 * ch + 4]
            .copy_from_slice(&(fx.spr as u32).to_le_bytes());
        out[var + 220 * ns + 4 * ch..var + 220 * ns + 4 * ch + 4]
            .copy_from_slice(&spec.gdftyp.to_le_bytes());
    }

    // data records, channel-blocked within each record
    for record in 0..fx.n_records() {
        for spec in &fx.channels {
            let scale = (spec.phys_max - spec.phys_min) / (spec.dig_max - spec.dig_min);
            for s in 0..fx.spr {
                let phys = spec.data[record * fx.spr + s];
                let digital = (phys - spec.phys_min) / scale + spec.dig_min;
                match spec.gdftyp {
                    3 => out.extend_from_slice(&(digital.round() as i16).to_le_bytes()),
                    16 => out.extend_from_slice(&(digital as f32).to_le_bytes()),
                    other => panic!("fixture encoder does not know gdftyp {other}"),
                }
            }
        }
    }

    if fx.with_event_table {
        out.push(fx.event_mode);
        let nev = fx.events.len() as u32;
        out.extend_from_slice(&nev.to_le_bytes()[..3]);
        let fs = fx.spr as f32 * fx.dur_den as f32 / fx.dur_num as f32;
        out.extend_from_slice(&fs.to_le_bytes());
        for &(sample, _) in &fx.events {
            out.extend_from_slice(&((sample as u32) + 1).to_le_bytes());
        }
        for &(_, code) in &fx.events {
            out.extend_from_slice(&code.to_le_bytes());
        }
        if fx.event_mode == 3 {
            for _ in &fx.events {
                out.extend_from_slice(&0u16.to_le_bytes()); // channel
            }
            for _ in &fx.events {
                out.extend_from_slice(&0u32.to_le_bytes()); // duration
            }
        }
    }

    out
}
