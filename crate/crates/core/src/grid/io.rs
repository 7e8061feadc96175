//! Field files and CSV tables.
//!
//! A field file is a TOML header terminated by a line `END_HEADER`, followed
//! by the raw arrays: little-endian `f64` for velocity and pressure fields
//! (component after component, `x` fastest), one byte per flag for masks
//! (cells first, then the faces of each component).

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Boundary, FluidMask, MacGrid, PressureField, VelocityField};
use crate::config::write_atomic;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

const FORMAT: &str = "porous-homog-field/1";
const END: &str = "END_HEADER";

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Velocity(VelocityField),
    Pressure(PressureField),
    Mask(FluidMask),
}

impl FieldData {
    fn layout(&self) -> &'static str {
        match self {
            FieldData::Velocity(_) => "velocity",
            FieldData::Pressure(_) => "pressure",
            FieldData::Mask(_) => "mask",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    layout: String,
    dim: usize,
    cells: Vec<usize>,
    offset: Vec<i64>,
    n: usize,
    m: usize,
    spacing: f64,
    epsilon: f64,
    boundary: Boundary,
    components: usize,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct FieldFile {
    pub grid: MacGrid,
    pub data: FieldData,
    pub meta: BTreeMap<String, String>,
}

pub fn encode_field(
    grid: &MacGrid,
    data: &FieldData,
    meta: &BTreeMap<String, String>,
) -> Result<Vec<u8>> {
    let components = match data {
        FieldData::Velocity(v) => {
            v.check(grid)?;
            grid.dim
        }
        FieldData::Pressure(p) => {
            p.check(grid)?;
            1
        }
        FieldData::Mask(m) => {
            m.check(grid)?;
            1 + grid.dim
        }
    };
    let header = Header {
        format: FORMAT.into(),
        layout: data.layout().into(),
        dim: grid.dim,
        cells: grid.cells[..grid.dim].to_vec(),
        offset: grid.offset[..grid.dim].to_vec(),
        n: grid.n,
        m: grid.m,
        spacing: grid.h,
        epsilon: grid.epsilon(),
        boundary: grid.boundary,
        components,
        meta: meta.clone(),
    };
    let mut out = toml::to_string(&header)
        .map_err(|e| Error::FieldFormat(e.to_string()))?
        .into_bytes();
    out.extend_from_slice(END.as_bytes());
    out.push(b'\n');
    let mut put = |vals: &[f64]| {
        for v in vals {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    match data {
        FieldData::Velocity(v) => v.comps.iter().for_each(|c| put(c)),
        FieldData::Pressure(p) => put(&p.values),
        FieldData::Mask(m) => {
            out.extend(m.cells.iter().map(|b| *b as u8));
            for f in &m.faces {
                out.extend(f.iter().map(|b| *b as u8));
            }
        }
    }
    Ok(out)
}

pub fn write_field(
    path: &Path,
    grid: &MacGrid,
    data: &FieldData,
    meta: &BTreeMap<String, String>,
) -> Result<()> {
    write_atomic(path, &encode_field(grid, data, meta)?)
}

pub fn decode_field<R: Read>(reader: R) -> Result<FieldFile> {
    let mut r = BufReader::new(reader);
    let mut header_text = String::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::FieldFormat("missing END_HEADER line".into()));
        }
        if line.trim_end() == END {
            break;
        }
        header_text.push_str(&line);
    }
    let h: Header = toml::from_str(&header_text).map_err(|e| Error::FieldFormat(e.to_string()))?;
    if h.format != FORMAT {
        return Err(Error::FieldFormat(format!(
            "unknown format tag '{}'",
            h.format
        )));
    }
    if h.cells.len() != h.dim || h.offset.len() != h.dim {
        return Err(Error::FieldFormat("cells/offset do not match dim".into()));
    }
    let hh = 1.0 / (h.n * h.m) as f64;
    let origin: Vec<f64> = h.offset.iter().map(|o| *o as f64 * hh).collect();
    let lengths: Vec<f64> = h.cells.iter().map(|c| *c as f64 * hh).collect();
    let domain = DomainSpec::new(h.dim, &origin, &lengths, 0.0)?;
    let grid = MacGrid::new(h.n, h.m, domain, h.boundary)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let floats = |bytes: &[u8]| -> Vec<f64> {
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    let data = match h.layout.as_str() {
        "velocity" => {
            let sizes: Vec<usize> = (0..grid.dim).map(|a| grid.face_count(a)).collect();
            if body.len() != 8 * sizes.iter().sum::<usize>() || h.components != grid.dim {
                return Err(Error::FieldFormat(
                    "velocity payload has the wrong size".into(),
                ));
            }
            let mut comps = Vec::new();
            let mut at = 0;
            for s in sizes {
                comps.push(floats(&body[at..at + 8 * s]));
                at += 8 * s;
            }
            FieldData::Velocity(VelocityField { comps })
        }
        "pressure" => {
            if body.len() != 8 * grid.cell_count() {
                return Err(Error::FieldFormat(
                    "pressure payload has the wrong size".into(),
                ));
            }
            FieldData::Pressure(PressureField {
                values: floats(&body),
            })
        }
        "mask" => {
            let total =
                grid.cell_count() + (0..grid.dim).map(|a| grid.face_count(a)).sum::<usize>();
            if body.len() != total {
                return Err(Error::FieldFormat("mask payload has the wrong size".into()));
            }
            let cells: Vec<bool> = body[..grid.cell_count()].iter().map(|b| *b != 0).collect();
            let mut at = grid.cell_count();
            let mut faces = Vec::new();
            for a in 0..grid.dim {
                let s = grid.face_count(a);
                faces.push(body[at..at + s].iter().map(|b| *b != 0).collect());
                at += s;
            }
            FieldData::Mask(FluidMask { cells, faces })
        }
        other => return Err(Error::FieldFormat(format!("unknown layout '{other}'"))),
    };
    Ok(FieldFile {
        grid,
        data,
        meta: h.meta,
    })
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    decode_field(std::fs::File::open(path)?)
}

/// Render a table as CSV bytes.
pub fn csv_bytes(headers: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn write_csv(path: &Path, headers: &[String], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, &csv_bytes(headers, rows)?)
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((headers, rows))
}

/// Format a float so that it round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_round_trip() {
        let g = MacGrid::truncated(2, 4, 1).unwrap();
        let v = VelocityField::from_fn(&g, |x| [x[0].sin(), x[0] * x[1], 0.0]);
        let mut meta = BTreeMap::new();
        meta.insert("j".to_string(), "1".to_string());
        let bytes = encode_field(&g, &FieldData::Velocity(v.clone()), &meta).unwrap();
        let back = decode_field(&bytes[..]).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.data, FieldData::Velocity(v));
        assert_eq!(back.meta, meta);
    }

    #[test]
    fn mask_round_trip_and_truncation_detected() {
        let g = MacGrid::periodic_cell(3, 4).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let bytes = encode_field(&g, &FieldData::Mask(m.clone()), &BTreeMap::new()).unwrap();
        assert_eq!(decode_field(&bytes[..]).unwrap().data, FieldData::Mask(m));
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let h = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![fmt_f64(0.1), fmt_f64(1e-300)]];
        write_csv(&p, &h, &rows).unwrap();
        let (hh, rr) = read_csv(&p).unwrap();
        assert_eq!(hh, h);
        assert_eq!(rr[0][0].parse::<f64>().unwrap(), 0.1);
    }
}
