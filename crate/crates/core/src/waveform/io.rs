//! Plain-text tabular files for measured transfer functions and time-domain frames.
//!
//! Both formats start with `#`-prefixed `key=value` header lines followed by a
//! comma-separated table with a column header:
//!
//! ```text
//! # mint-frequency-response v1
//! # delta_f_hz=1000000
//! # start_freq_hz=3100000000
//! # position_index=12
//! # bs_id=0
//! k,re,im
//! 0,0.125,-0.5
//! ```
//!
//! Frames use `# mint-signal-frame v1` with keys `sample_interval_s`,
//! `start_delay_s`, `position_index`, `bs_id`, `noise_psd` and the columns
//! `n,delay_s,re,im`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{FrequencyResponse, SignalFrame};
use crate::error::{MintError, Result};

const FR_MAGIC: &str = "mint-frequency-response v1";
const FRAME_MAGIC: &str = "mint-signal-frame v1";

struct Table {
    header: HashMap<String, String>,
    columns: Vec<String>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_table(text: &str, origin: &str, magic: &str) -> Result<Table> {
    let err = |line: usize, message: String| MintError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut header = HashMap::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    let mut saw_magic = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest == magic {
                saw_magic = true;
            } else if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if columns.is_empty() {
            columns = line.split(',').map(|c| c.trim().to_string()).collect();
            continue;
        }
        let values = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| err(i + 1, format!("not a number: `{}`", v.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != columns.len() {
            return Err(err(
                i + 1,
                format!("expected {} columns, got {}", columns.len(), values.len()),
            ));
        }
        rows.push((i + 1, values));
    }
    if !saw_magic {
        return Err(err(1, format!("missing `# {magic}` header")));
    }
    Ok(Table {
        header,
        columns,
        rows,
    })
}

fn header_f64(t: &Table, key: &str, origin: &str) -> Result<f64> {
    t.header
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| MintError::Parse {
            path: origin.to_string(),
            line: 0,
            message: format!("missing or invalid header `{key}`"),
        })
}

fn header_usize(t: &Table, key: &str) -> usize {
    t.header.get(key).and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn expect_columns(t: &Table, expected: &[&str], origin: &str) -> Result<()> {
    if t.columns != expected {
        return Err(MintError::Parse {
            path: origin.to_string(),
            line: 0,
            message: format!("expected columns {expected:?}, got {:?}", t.columns),
        });
    }
    Ok(())
}

pub fn frequency_response_to_string(h: &FrequencyResponse) -> String {
    let mut s = format!(
        "# {FR_MAGIC}\n# delta_f_hz={}\n# start_freq_hz={}\n# position_index={}\n# bs_id={}\nk,re,im\n",
        h.freq_spacing, h.start_freq, h.position_index, h.bs_id
    );
    for (k, v) in h.values.iter().enumerate() {
        let _ = writeln!(s, "{k},{},{}", v.re, v.im);
    }
    s
}

pub fn parse_frequency_response(text: &str, origin: &str) -> Result<FrequencyResponse> {
    let t = parse_table(text, origin, FR_MAGIC)?;
    expect_columns(&t, &["k", "re", "im"], origin)?;
    let freq_spacing = header_f64(&t, "delta_f_hz", origin)?;
    let start_freq = header_f64(&t, "start_freq_hz", origin)?;
    let mut values = vec![Complex64::new(0.0, 0.0); t.rows.len()];
    let mut seen = vec![false; t.rows.len()];
    for (line, row) in &t.rows {
        let k = row[0];
        if k < 0.0 || k.fract() != 0.0 || k as usize >= values.len() || seen[k as usize] {
            return Err(MintError::Parse {
                path: origin.to_string(),
                line: *line,
                message: format!("bin index {k} out of range or repeated"),
            });
        }
        seen[k as usize] = true;
        values[k as usize] = Complex64::new(row[1], row[2]);
    }
    Ok(FrequencyResponse {
        values,
        freq_spacing,
        start_freq,
        position_index: header_usize(&t, "position_index"),
        bs_id: header_usize(&t, "bs_id"),
    })
}

pub fn frame_to_string(f: &SignalFrame) -> String {
    let mut s = format!(
        "# {FRAME_MAGIC}\n# sample_interval_s={}\n# start_delay_s={}\n# position_index={}\n# bs_id={}\n# noise_psd={}\nn,delay_s,re,im\n",
        f.sample_interval, f.start_delay, f.position_index, f.bs_id, f.noise_psd
    );
    for (n, v) in f.samples.iter().enumerate() {
        let _ = writeln!(s, "{n},{},{},{}", f.delay_of(n), v.re, v.im);
    }
    s
}

pub fn parse_frame(text: &str, origin: &str) -> Result<SignalFrame> {
    let t = parse_table(text, origin, FRAME_MAGIC)?;
    expect_columns(&t, &["n", "delay_s", "re", "im"], origin)?;
    let samples = t
        .rows
        .iter()
        .map(|(_, r)| Complex64::new(r[2], r[3]))
        .collect::<Vec<_>>();
    if samples.is_empty() {
        return Err(MintError::Empty("signal frame"));
    }
    Ok(SignalFrame {
        samples,
        sample_interval: header_f64(&t, "sample_interval_s", origin)?,
        start_delay: header_f64(&t, "start_delay_s", origin)?,
        position_index: header_usize(&t, "position_index"),
        bs_id: header_usize(&t, "bs_id"),
        noise_psd: header_f64(&t, "noise_psd", origin).unwrap_or(0.0),
    })
}

pub fn read_frequency_response(path: impl AsRef<Path>) -> Result<FrequencyResponse> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MintError::io(path, e))?;
    parse_frequency_response(&text, &path.display().to_string())
}

pub fn write_frequency_response(path: impl AsRef<Path>, h: &FrequencyResponse) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, frequency_response_to_string(h)).map_err(|e| MintError::io(path, e))
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<SignalFrame> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MintError::io(path, e))?;
    parse_frame(&text, &path.display().to_string())
}

pub fn write_frame(path: impl AsRef<Path>, frame: &SignalFrame) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, frame_to_string(frame)).map_err(|e| MintError::io(path, e))
}
