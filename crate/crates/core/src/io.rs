//! HSF1 binary fields, d = 1 CSV triples, and cube-sequence CSV.
//!
//! HSF1 layout: magic `HSF1`; little-endian i32 `d, n_space, m_scale, n_scales`;
//! f64 `side, s_min, s_max`; flag byte (0 real, 1 complex); then f64 samples,
//! scale-major and row-major in space. Complex samples are stored as (re, im) pairs.
//! A boundary field is written with `n_scales = 0`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::cube::{CubeSequence, DyadicCube};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{BoundaryField, HalfSpaceField, Samples};
use crate::scalar::Real;

const MAGIC: &[u8; 4] = b"HSF1";

struct Header {
    d: usize,
    n_space: usize,
    m_scale: usize,
    n_scales: usize,
    side: f64,
    s_min: f64,
    s_max: f64,
    complex: bool,
}

fn write_header<W: Write>(w: &mut W, dom: &Domain, n_scales: usize, complex: bool) -> Result<()> {
    w.write_all(MAGIC)?;
    for v in [dom.d(), dom.n_space(), dom.m_scale(), n_scales] {
        let v = i32::try_from(v).map_err(|_| Error::Format(format!("header value {v} exceeds i32")))?;
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [dom.side(), dom.s_min(), dom.s_max()] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[complex as u8])?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing HSF1 magic".into()));
    }
    let mut ints = [0usize; 4];
    for v in ints.iter_mut() {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        let x = i32::from_le_bytes(b);
        *v = usize::try_from(x).map_err(|_| Error::Format(format!("negative header value {x}")))?;
    }
    let mut floats = [0f64; 3];
    for v in floats.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let complex = match flag[0] {
        0 => false,
        1 => true,
        f => return Err(Error::Format(format!("unknown sample flag {f}"))),
    };
    let [d, n_space, m_scale, n_scales] = ints;
    let [side, s_min, s_max] = floats;
    Ok(Header { d, n_space, m_scale, n_scales, side, s_min, s_max, complex })
}

fn write_samples<T: Real, W: Write>(w: &mut W, s: &Samples<T>) -> Result<()> {
    match s {
        Samples::Real(v) => {
            for x in v {
                w.write_all(&x.to_f64_lossy().to_le_bytes())?;
            }
        }
        Samples::Complex(v) => {
            for z in v {
                w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
                w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_samples<T: Real, R: Read>(r: &mut R, n: usize, complex: bool) -> Result<Samples<T>> {
    let width = if complex { 2 } else { 1 };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * width * n {
        return Err(Error::Format(format!(
            "expected {} sample bytes, found {}",
            8 * width * n,
            bytes.len()
        )));
    }
    let vals: Vec<T> = bytes
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    Ok(if complex {
        Samples::Complex(vals.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect())
    } else {
        Samples::Real(vals)
    })
}

pub fn write_hsf1<T: Real, W: Write>(field: &HalfSpaceField<T>, mut w: W) -> Result<()> {
    let dom = field.domain();
    write_header(&mut w, dom, dom.n_scales(), field.samples().is_complex())?;
    write_samples(&mut w, field.samples())?;
    w.flush()?;
    Ok(())
}

pub fn read_hsf1<T: Real, R: Read>(mut r: R) -> Result<HalfSpaceField<T>> {
    let h = read_header(&mut r)?;
    if h.n_scales == 0 {
        return Err(Error::Format("file holds a boundary field (n_scales = 0)".into()));
    }
    let dom = Domain::from_parts(h.d, h.side, h.n_space, h.s_min, h.s_max, h.m_scale, h.n_scales)?;
    let samples = read_samples(&mut r, dom.n_scales() * dom.cells(), h.complex)?;
    HalfSpaceField::from_samples(&dom, samples)
}

pub fn write_boundary_hsf1<T: Real, W: Write>(field: &BoundaryField<T>, mut w: W) -> Result<()> {
    write_header(&mut w, field.domain(), 0, field.samples().is_complex())?;
    write_samples(&mut w, field.samples())?;
    w.flush()?;
    Ok(())
}

/// Reads a boundary file; the stored scale range (if any) is kept on the domain.
pub fn read_boundary_hsf1<T: Real, R: Read>(mut r: R) -> Result<BoundaryField<T>> {
    let h = read_header(&mut r)?;
    if h.n_scales != 0 {
        return Err(Error::Format(format!("file holds a half-space field with {} scales", h.n_scales)));
    }
    let dom = Domain::new(h.d, h.side, h.n_space, h.s_min, h.s_max, h.m_scale)?;
    let samples = read_samples(&mut r, dom.cells(), h.complex)?;
    BoundaryField::from_samples(&dom, samples)
}

pub fn save_hsf1<T: Real>(field: &HalfSpaceField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_hsf1(field, BufWriter::new(File::create(path)?))
}

pub fn load_hsf1<T: Real>(path: impl AsRef<Path>) -> Result<HalfSpaceField<T>> {
    read_hsf1(BufReader::new(File::open(path)?))
}

pub fn save_boundary_hsf1<T: Real>(field: &BoundaryField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_boundary_hsf1(field, BufWriter::new(File::create(path)?))
}

pub fn load_boundary_hsf1<T: Real>(path: impl AsRef<Path>) -> Result<BoundaryField<T>> {
    read_boundary_hsf1(BufReader::new(File::open(path)?))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Reads `(j, x, value)` rows for a d = 1 domain; unlisted samples are zero. A non-numeric
/// first row is taken as a header.
pub fn read_csv_d1<T: Real, R: Read>(r: R, domain: &Domain) -> Result<HalfSpaceField<T>> {
    if domain.d() != 1 {
        return Err(Error::Format(format!("CSV triples need d = 1, domain has d = {}", domain.d())));
    }
    let n = domain.n_space();
    let mut vals = vec![T::zero(); domain.n_scales() * n];
    let mut seen = vec![false; vals.len()];
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(Error::Format(format!("row {}: expected 3 columns, got {}", line + 1, rec.len())));
        }
        let j = rec[0].parse::<usize>();
        if line == 0 && j.is_err() {
            continue;
        }
        let bad = |what: &str| Error::Format(format!("row {}: bad {what}", line + 1));
        let j = j.map_err(|_| bad("scale index"))?;
        let x: usize = rec[1].parse().map_err(|_| bad("spatial index"))?;
        let v: f64 = rec[2].parse().map_err(|_| bad("value"))?;
        if j >= domain.n_scales() || x >= n {
            return Err(Error::Range(format!("row {}: ({j}, {x}) outside the grid", line + 1)));
        }
        let i = j * n + x;
        if seen[i] {
            return Err(Error::Format(format!("row {}: duplicate sample ({j}, {x})", line + 1)));
        }
        seen[i] = true;
        vals[i] = T::lit(v);
    }
    HalfSpaceField::from_real(domain, vals)
}

/// Writes `j,x,value` rows for a real d = 1 field.
pub fn write_csv_d1<T: Real, W: Write>(field: &HalfSpaceField<T>, w: W) -> Result<()> {
    let dom = field.domain();
    if dom.d() != 1 || field.samples().is_complex() {
        return Err(Error::Format("CSV triples hold real d = 1 fields only".into()));
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["j", "x", "value"]).map_err(csv_err)?;
    let n = dom.n_space();
    for i in 0..field.samples().len() {
        let v = field.samples().get(i).re.to_f64_lossy();
        wtr.write_record([(i / n).to_string(), (i % n).to_string(), v.to_string()]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `k,o0,..,o{d-1},value` rows in cube order.
pub fn write_cube_sequence<T: Real, W: Write>(seq: &CubeSequence<T>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["k".to_string()];
    head.extend((0..seq.d()).map(|a| format!("o{a}")));
    head.push("value".into());
    wtr.write_record(&head).map_err(csv_err)?;
    for (q, v) in seq.iter() {
        let mut row = vec![q.k.to_string()];
        row.extend(q.offset.iter().map(|o| o.to_string()));
        row.push(v.to_f64_lossy().to_string());
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_cube_sequence<T: Real, R: Read>(r: R) -> Result<CubeSequence<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let cols = rdr.headers().map_err(csv_err)?.len();
    if cols < 3 {
        return Err(Error::Format("cube sequence needs columns k, offsets, value".into()));
    }
    let d = cols - 2;
    let mut seq = CubeSequence::new(d);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = || Error::Format(format!("row {}: malformed cube entry", line + 2));
        let k: i32 = rec[0].parse().map_err(|_| bad())?;
        let offset = (1..=d)
            .map(|a| rec[a].parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let v: f64 = rec[d + 1].parse().map_err(|_| bad())?;
        seq.insert(DyadicCube::new(k, offset), T::lit(v))?;
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> Domain {
        Domain::aligned(2, 2, 8, -2, 2, 2).unwrap()
    }

    #[test]
    fn hsf1_round_trip_real_and_complex() {
        let dom = dom();
        let f = HalfSpaceField::<f64>::from_fn(&dom, |s, y| s * y[0] - y[1]).unwrap();
        let mut buf = Vec::new();
        write_hsf1(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"HSF1");
        assert_eq!(buf.len(), 4 + 16 + 24 + 1 + 8 * dom.n_scales() * dom.cells());
        let g: HalfSpaceField<f64> = read_hsf1(&buf[..]).unwrap();
        assert_eq!(g.samples(), f.samples());
        assert_eq!(g.domain(), f.domain());

        let c = HalfSpaceField::<f64>::from_fn_complex(&dom, |s, y| (s, y[0])).unwrap();
        let mut buf = Vec::new();
        write_hsf1(&c, &mut buf).unwrap();
        let back: HalfSpaceField<f64> = read_hsf1(&buf[..]).unwrap();
        assert_eq!(back.samples(), c.samples());
    }

    #[test]
    fn hsf1_rejects_truncation_and_bad_magic() {
        let dom = dom();
        let f = HalfSpaceField::<f64>::zeros(&dom);
        let mut buf = Vec::new();
        write_hsf1(&f, &mut buf).unwrap();
        assert!(read_hsf1::<f64, _>(&buf[..buf.len() - 3]).is_err());
        buf[0] = b'X';
        assert!(matches!(read_hsf1::<f64, _>(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn boundary_round_trip() {
        let dom = dom();
        let b = BoundaryField::<f64>::from_fn(&dom, |y| y[0] - 2.0 * y[1]).unwrap();
        let mut buf = Vec::new();
        write_boundary_hsf1(&b, &mut buf).unwrap();
        let back: BoundaryField<f64> = read_boundary_hsf1(&buf[..]).unwrap();
        assert_eq!(back.samples(), b.samples());
        assert!(read_hsf1::<f64, _>(&buf[..]).is_err());
    }

    #[test]
    fn csv_triples() {
        let dom = Domain::aligned(1, 0, 4, -2, 1, 2).unwrap();
        let text = "j,x,value\n0,1,2.5\n1,3,-1\n";
        let f: HalfSpaceField<f64> = read_csv_d1(text.as_bytes(), &dom).unwrap();
        assert_eq!(f.sample(0, &[1]).unwrap().re, 2.5);
        assert_eq!(f.sample(1, &[3]).unwrap().re, -1.0);
        assert_eq!(f.sample(1, &[0]).unwrap().re, 0.0);
        let mut out = Vec::new();
        write_csv_d1(&f, &mut out).unwrap();
        let g: HalfSpaceField<f64> = read_csv_d1(&out[..], &dom).unwrap();
        assert_eq!(g.samples(), f.samples());
        assert!(read_csv_d1::<f64, _>("5,0,1\n".as_bytes(), &dom).is_err());
        assert!(read_csv_d1::<f64, _>("0,0,1\n0,0,2\n".as_bytes(), &dom).is_err());
    }

    #[test]
    fn cube_sequence_csv() {
        let seq = CubeSequence::from_entries(
            2,
            [(DyadicCube::new(-1, vec![0, 1]), 0.5), (DyadicCube::new(0, vec![1, 1]), 2.0)],
        )
        .unwrap();
        let mut out = Vec::new();
        write_cube_sequence(&seq, &mut out).unwrap();
        assert!(String::from_utf8_lossy(&out).starts_with("k,o0,o1,value"));
        let back: CubeSequence<f64> = read_cube_sequence(&out[..]).unwrap();
        assert_eq!(back, seq);
    }
}
