//! Text file formats.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! representation, so every writer/reader pair here is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::Array2;
use thiserror::Error;

use crate::beamforming::{CodingMatrix, Pattern};
use crate::geometry::{AngularLocation, ArrayGeometry};
use crate::localization::{LocalizationResult, Spectrum};
use crate::wavefield::Hologram;

pub const HOLOGRAM_MAGIC: &str = "# holoris-hologram v1";
pub const CODING_MAGIC: &str = "# holoris-coding v1";
pub const SPECTRUM_MAGIC: &str = "# holoris-spectrum v1";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based; 0 when the problem is not tied to a line (e.g. truncation).
    pub line: usize,
    pub message: String,
}

impl FormatError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

/// Splits `# key=value` header lines from the body.
struct Header<'a> {
    fields: BTreeMap<&'a str, (usize, &'a str)>,
    body: Vec<(usize, &'a str)>,
}

impl<'a> Header<'a> {
    fn parse(text: &'a str, magic: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim_end() == magic => {}
            Some((n, _)) => return Err(FormatError::new(n, format!("expected `{magic}`"))),
            None => return Err(FormatError::new(0, "empty file")),
        }
        let mut fields = BTreeMap::new();
        let mut body = Vec::new();
        for (n, line) in lines {
            if let Some(rest) = line.strip_prefix('#') {
                if !body.is_empty() {
                    return Err(FormatError::new(n, "header line after data"));
                }
                let (k, v) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| FormatError::new(n, "header line is not `# key=value`"))?;
                fields.insert(k.trim(), (n, v.trim()));
            } else if !line.trim().is_empty() {
                body.push((n, line));
            }
        }
        Ok(Self { fields, body })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, FormatError> {
        let (n, v) = self.fields.get(key).ok_or_else(|| FormatError::new(0, format!("missing header `{key}`")))?;
        v.parse().map_err(|_| FormatError::new(*n, format!("bad value for `{key}`: {v}")))
    }
}

fn parse_f64_row(n: usize, line: &str, expect: usize) -> Result<Vec<f64>, FormatError> {
    let row: Vec<f64> = line
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| FormatError::new(n, format!("not a number: `{}`", t.trim()))))
        .collect::<Result<_, _>>()?;
    if row.len() != expect {
        return Err(FormatError::new(n, format!("expected {expect} values, found {}", row.len())));
    }
    Ok(row)
}

fn write_grid(out: &mut String, values: &Array2<f64>) {
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
}

fn read_grid(body: &[(usize, &str)], nz: usize, nx: usize) -> Result<Array2<f64>, FormatError> {
    if body.len() != nz {
        let line = body.get(nz).map(|b| b.0).unwrap_or(0);
        return Err(FormatError::new(line, format!("expected {nz} data rows, found {}", body.len())));
    }
    let mut values = Array2::zeros((nz, nx));
    for (i, (n, line)) in body.iter().enumerate() {
        for (j, v) in parse_f64_row(*n, line, nx)?.into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    Ok(values)
}

pub fn write_hologram(h: &Hologram) -> String {
    let g = h.geometry();
    let mut out = String::new();
    writeln!(out, "{HOLOGRAM_MAGIC}").unwrap();
    writeln!(out, "# f_c_hz={}", g.f_c_hz()).unwrap();
    writeln!(out, "# d_x_m={}", g.d_x()).unwrap();
    writeln!(out, "# d_z_m={}", g.d_z()).unwrap();
    writeln!(out, "# n_x={}", g.n_x()).unwrap();
    writeln!(out, "# n_z={}", g.n_z()).unwrap();
    writeln!(out, "# frequency_tag={}", h.frequency_tag()).unwrap();
    write_grid(&mut out, h.values());
    out
}

pub fn parse_hologram(text: &str) -> Result<Hologram, FormatError> {
    let hdr = Header::parse(text, HOLOGRAM_MAGIC)?;
    let geom = ArrayGeometry::new(
        hdr.get("n_z")?,
        hdr.get("n_x")?,
        hdr.get("d_z_m")?,
        hdr.get("d_x_m")?,
        hdr.get("f_c_hz")?,
    )
    .map_err(|e| FormatError::new(0, e.to_string()))?;
    let tag: u32 = hdr.get("frequency_tag")?;
    let values = read_grid(&hdr.body, geom.n_z(), geom.n_x())?;
    Hologram::new(values, geom, tag).map_err(|e| match e {
        crate::wavefield::WavefieldError::BadIntensity { m, .. } => FormatError::new(hdr.body[m - 1].0, e.to_string()),
        other => FormatError::new(0, other.to_string()),
    })
}

pub fn write_coding(c: &CodingMatrix) -> String {
    let (nz, nx) = c.dim();
    let mut out = format!("{CODING_MAGIC}\n# n_x={nx}\n# n_z={nz}\n");
    for row in c.states().rows() {
        out.extend(row.iter().map(|&s| if s == 1 { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

pub fn parse_coding(text: &str) -> Result<CodingMatrix, FormatError> {
    let hdr = Header::parse(text, CODING_MAGIC)?;
    let (nz, nx): (usize, usize) = (hdr.get("n_z")?, hdr.get("n_x")?);
    if hdr.body.len() != nz {
        return Err(FormatError::new(0, format!("expected {nz} rows, found {}", hdr.body.len())));
    }
    let mut states = Array2::zeros((nz, nx));
    for (i, (n, line)) in hdr.body.iter().enumerate() {
        let line = line.trim_end();
        if line.len() != nx {
            return Err(FormatError::new(*n, format!("expected {nx} states, found {}", line.len())));
        }
        for (j, ch) in line.chars().enumerate() {
            states[[i, j]] = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(FormatError::new(*n, format!("invalid state `{ch}`"))),
            };
        }
    }
    CodingMatrix::new(states).map_err(|e| FormatError::new(0, e.to_string()))
}

/// Spectrum magnitudes, unshifted: row `k`, column `ℓ`.
pub fn write_spectrum(s: &Spectrum) -> String {
    let (nz, nx) = s.dim();
    let mut out = format!("{SPECTRUM_MAGIC}\n# n_x={nx}\n# n_z={nz}\n# zero_pad_factor={}\n", s.zero_pad_factor);
    write_grid(&mut out, &s.magnitudes());
    out
}

pub fn parse_spectrum_magnitudes(text: &str) -> Result<Array2<f64>, FormatError> {
    let hdr = Header::parse(text, SPECTRUM_MAGIC)?;
    read_grid(&hdr.body, hdr.get("n_z")?, hdr.get("n_x")?)
}

/// A plain CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|s| s.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| FormatError::new(0, "empty table"))?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(FormatError::new(i + 1, format!("expected {} columns, found {}", header.len(), row.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    /// Column parsed as `f64`.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>, FormatError> {
        let c = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FormatError::new(1, format!("no column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[c].parse().map_err(|_| FormatError::new(i + 2, format!("not a number: `{}`", r[c]))))
            .collect()
    }
}

pub fn pattern_table(p: &Pattern) -> Table {
    let mut t = Table::new(&["theta_deg", "phi_deg", "power_db"]);
    for ((i, j), v) in p.power.indexed_iter() {
        t.push([p.grid.thetas[i], p.grid.phis[j], 10.0 * v.log10()]);
    }
    t
}

fn opt_angle(v: Option<AngularLocation>, f: fn(&AngularLocation) -> f64) -> String {
    v.map(|a| f(&a).to_string()).unwrap_or_else(|| "none".to_string())
}

/// Flat `key=value` localization report.
pub fn write_report(r: &LocalizationResult) -> String {
    let th = |a: &AngularLocation| a.theta_deg;
    let ph = |a: &AngularLocation| a.phi_deg;
    let mut out = String::new();
    for (k, v) in [
        ("candidate_1_theta_deg", opt_angle(r.candidate_1, th)),
        ("candidate_1_phi_deg", opt_angle(r.candidate_1, ph)),
        ("candidate_2_theta_deg", opt_angle(r.candidate_2, th)),
        ("candidate_2_phi_deg", opt_angle(r.candidate_2, ph)),
        ("chosen_theta_deg", opt_angle(r.chosen, th)),
        ("chosen_phi_deg", opt_angle(r.chosen, ph)),
        ("peak_bin_z", r.peak_bin.0.to_string()),
        ("peak_bin_x", r.peak_bin.1.to_string()),
        ("peak_to_median_ratio", r.peak_to_median_ratio.to_string()),
    ] {
        writeln!(out, "{k}={v}").unwrap();
    }
    out
}

pub fn parse_report(text: &str) -> Result<LocalizationResult, FormatError> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| FormatError::new(i + 1, "expected key=value"))?;
        kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |k: &str| kv.get(k).ok_or_else(|| FormatError::new(0, format!("missing `{k}`")));
    let num = |k: &str| -> Result<Option<f64>, FormatError> {
        let (n, v) = get(k)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| FormatError::new(*n, format!("bad value for `{k}`")))
    };
    let angle = |prefix: &str| -> Result<Option<AngularLocation>, FormatError> {
        match (num(&format!("{prefix}_theta_deg"))?, num(&format!("{prefix}_phi_deg"))?) {
            (Some(theta_deg), Some(phi_deg)) => Ok(Some(AngularLocation { theta_deg, phi_deg })),
            (None, None) => Ok(None),
            _ => Err(FormatError::new(0, format!("`{prefix}` has only one angle"))),
        }
    };
    let bin = |k: &str| -> Result<usize, FormatError> {
        let (n, v) = get(k)?;
        v.parse().map_err(|_| FormatError::new(*n, format!("bad value for `{k}`")))
    };
    Ok(LocalizationResult {
        candidate_1: angle("candidate_1")?,
        candidate_2: angle("candidate_2")?,
        chosen: angle("chosen")?,
        peak_bin: (bin("peak_bin_z")?, bin("peak_bin_x")?),
        peak_to_median_ratio: num("peak_to_median_ratio")?.unwrap_or(f64::NAN),
    })
}
