//! Binary container shared by signals, fields and masks.
//!
//! Layout (all little-endian): magic `STFL1`, `u64` kind (0 signal, 1 field,
//! 2 mask), `u64` rank, rank x `u64` sample counts, rank x `f64` axis lengths,
//! then the payload. Signals and fields store interleaved `re, im` pairs of
//! `f64`; masks store a `u64` run count followed by run lengths that alternate
//! starting with an excluded run.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::{Grid1D, TFGrid};
use crate::signal::Signal;

pub const MAGIC: &[u8; 5] = b"STFL1";

const KIND_SIGNAL: u64 = 0;
const KIND_FIELD: u64 = 1;
const KIND_MASK: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Container {
    Signal(Signal),
    Field(TFField),
    Mask { grid: TFGrid, inside: Vec<bool> },
}

impl Container {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Container::Signal(_) => "signal",
            Container::Field(_) => "field",
            Container::Mask { .. } => "mask",
        }
    }
}

fn put_u64(out: &mut impl Write, v: u64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64(out: &mut impl Write, v: f64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn header(out: &mut impl Write, kind: u64, axes: &[Grid1D]) -> Result<()> {
    out.write_all(MAGIC)?;
    put_u64(out, kind)?;
    put_u64(out, axes.len() as u64)?;
    for a in axes {
        put_u64(out, a.count() as u64)?;
    }
    for a in axes {
        put_f64(out, a.length())?;
    }
    Ok(())
}

fn put_complex(out: &mut impl Write, values: &[Complex64]) -> Result<()> {
    for v in values {
        put_f64(out, v.re)?;
        put_f64(out, v.im)?;
    }
    Ok(())
}

pub fn write_signal(out: &mut impl Write, s: &Signal) -> Result<()> {
    header(out, KIND_SIGNAL, &[*s.grid()])?;
    put_complex(out, s.values())
}

pub fn write_field(out: &mut impl Write, f: &TFField) -> Result<()> {
    let g = f.grid();
    header(out, KIND_FIELD, &[g.x, g.omega])?;
    put_complex(out, f.values())
}

pub fn write_mask(out: &mut impl Write, grid: &TFGrid, inside: &[bool]) -> Result<()> {
    if inside.len() != grid.len() {
        return Err(Error::Format(format!("mask has {} cells, grid has {}", inside.len(), grid.len())));
    }
    header(out, KIND_MASK, &[grid.x, grid.omega])?;
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u64;
    for &b in inside {
        if b == current {
            len += 1;
        } else {
            runs.push(len);
            current = b;
            len = 1;
        }
    }
    runs.push(len);
    put_u64(out, runs.len() as u64)?;
    for r in runs {
        put_u64(out, r)?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated container: {e}")))?;
        Ok(u64::from_le_bytes(b))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn complex(&mut self, n: usize) -> Result<Vec<Complex64>> {
        (0..n).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }
}

pub fn read(input: impl Read) -> Result<Container> {
    let mut r = Reader { inner: input };
    let mut magic = [0u8; 5];
    r.inner.read_exact(&mut magic).map_err(|_| Error::Format("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not an STFL1 container".into()));
    }
    let kind = r.u64()?;
    let rank = r.u64()? as usize;
    if rank == 0 || rank > 2 {
        return Err(Error::Format(format!("unsupported rank {rank}")));
    }
    let counts: Vec<usize> = (0..rank).map(|_| r.u64().map(|c| c as usize)).collect::<Result<_>>()?;
    let lengths: Vec<f64> = (0..rank).map(|_| r.f64()).collect::<Result<_>>()?;
    let axes: Vec<Grid1D> = counts.iter().zip(&lengths).map(|(&n, &l)| Grid1D::new(l, n)).collect::<Result<_>>()?;
    let container = match (kind, rank) {
        (KIND_SIGNAL, 1) => Container::Signal(Signal::new(axes[0], r.complex(counts[0])?)?),
        (KIND_FIELD, 2) => {
            let grid = TFGrid::new(axes[0], axes[1]);
            Container::Field(TFField::new(grid, r.complex(grid.len())?)?)
        }
        (KIND_MASK, 2) => {
            let grid = TFGrid::new(axes[0], axes[1]);
            let nruns = r.u64()? as usize;
            let mut inside = Vec::with_capacity(grid.len());
            let mut current = false;
            for _ in 0..nruns {
                let len = r.u64()? as usize;
                if inside.len() + len > grid.len() {
                    return Err(Error::Format("mask runs overflow the grid".into()));
                }
                inside.extend(std::iter::repeat_n(current, len));
                current = !current;
            }
            if inside.len() != grid.len() {
                return Err(Error::Format(format!("mask runs cover {} of {} cells", inside.len(), grid.len())));
            }
            Container::Mask { grid, inside }
        }
        _ => return Err(Error::Format(format!("unknown kind {kind} with rank {rank}"))),
    };
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(container)
}

pub fn read_file(path: &Path) -> Result<Container> {
    let f = std::fs::File::open(path)?;
    read(std::io::BufReader::new(f))
}

pub fn write_file(path: &Path, c: &Container) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    match c {
        Container::Signal(s) => write_signal(&mut w, s)?,
        Container::Field(f) => write_field(&mut w, f)?,
        Container::Mask { grid, inside } => write_mask(&mut w, grid, inside)?,
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_round_trip() {
        let g = Grid1D::new(16.0, 128).unwrap();
        let s = Signal::hermite(g, 2).unwrap().modulate(0.5).unwrap();
        let mut buf = Vec::new();
        write_signal(&mut buf, &s).unwrap();
        assert_eq!(&buf[..5], MAGIC);
        assert_eq!(read(&buf[..]).unwrap(), Container::Signal(s));
    }

    #[test]
    fn mask_round_trip() {
        let g = TFGrid::square(4.0, 8).unwrap();
        let inside: Vec<bool> = (0..64).map(|i| i % 7 == 0 || (20..30).contains(&i)).collect();
        let mut buf = Vec::new();
        write_mask(&mut buf, &g, &inside).unwrap();
        match read(&buf[..]).unwrap() {
            Container::Mask { grid, inside: back } => {
                assert_eq!(grid, g);
                assert_eq!(back, inside);
            }
            other => panic!("wrong kind {}", other.kind_name()),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read(&b"NOPE!"[..]).is_err());
        let g = Grid1D::new(16.0, 8).unwrap();
        let mut buf = Vec::new();
        write_signal(&mut buf, &Signal::zeros(g)).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read(&buf[..]).is_err());
    }
}
