//! Plain-text hole lists and raw little-endian grid dumps.
//!
//! Raw grid format: one ASCII header line `nx ny nz cell_size`, then
//! `nx·ny·nz` little-endian `f32` values in row-major order (z fastest).

use std::io::{self, BufRead, Read, Write};

use super::{Hole, HoleRole, HoleSet};

pub fn write_hole_list<W: Write>(mut w: W, holes: &HoleSet) -> io::Result<()> {
    writeln!(w, "# center_x center_y rx ry index_override")?;
    for h in &holes.holes {
        writeln!(
            w,
            "{} {} {} {} {}",
            h.center.0,
            h.center.1,
            h.rx,
            h.ry,
            h.fill_index.unwrap_or(1.0)
        )?;
    }
    Ok(())
}

/// Reads a hole list written by [`write_hole_list`]. Roles are not stored;
/// the hole at the origin is tagged central.
pub fn read_hole_list<R: BufRead>(r: R) -> io::Result<HoleSet> {
    let mut holes = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
            })?;
        if vals.len() != 5 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: expected 5 columns, got {}", n + 1, vals.len()),
            ));
        }
        let center = (vals[0], vals[1]);
        holes.push(Hole {
            center,
            rx: vals[2],
            ry: vals[3],
            fill_index: (vals[4] != 1.0).then_some(vals[4]),
            role: if center == (0.0, 0.0) {
                HoleRole::Central
            } else {
                HoleRole::Lattice
            },
        });
    }
    Ok(HoleSet { holes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub dims: [usize; 3],
    pub cell_size: f64,
    pub data: Vec<f32>,
}

pub fn write_raw_grid<W: Write>(
    mut w: W,
    dims: [usize; 3],
    cell_size: f64,
    data: impl IntoIterator<Item = f64>,
) -> io::Result<()> {
    writeln!(w, "{} {} {} {}", dims[0], dims[1], dims[2], cell_size)?;
    let mut count = 0usize;
    let mut buf = Vec::with_capacity(4 * 4096);
    for v in data {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
        count += 1;
        if buf.len() >= 4 * 4096 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    if count != dims.iter().product::<usize>() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("grid has {count} values but header declares {dims:?}"),
        ));
    }
    Ok(())
}

pub fn read_raw_grid<R: Read>(r: R) -> io::Result<RawGrid> {
    let mut r = io::BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    if parts.len() != 4 {
        return Err(bad("raw grid header must be `nx ny nz cell_size`"));
    }
    let mut dims = [0usize; 3];
    for (d, p) in dims.iter_mut().zip(&parts) {
        *d = p.parse().map_err(|_| bad("bad dimension in raw grid header"))?;
    }
    let cell_size: f64 = parts[3].parse().map_err(|_| bad("bad cell size"))?;
    let n: usize = dims.iter().product();
    let mut bytes = vec![0u8; 4 * n];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(RawGrid {
        dims,
        cell_size,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hole_list_round_trip() {
        let mut h = Hole::circle((1.5, -2.0), 3.0);
        h.ry = 4.0;
        h.fill_index = Some(2.4);
        let set = HoleSet {
            holes: vec![Hole::circle((0.0, 0.0), 2.0), h],
        };
        let mut buf = Vec::new();
        write_hole_list(&mut buf, &set).unwrap();
        let back = read_hole_list(&buf[..]).unwrap();
        assert_eq!(back.holes.len(), 2);
        assert_eq!(back.holes[1].ry, 4.0);
        assert_eq!(back.holes[1].fill_index, Some(2.4));
        assert_eq!(back.holes[0].role, HoleRole::Central);
    }

    #[test]
    fn raw_grid_layout() {
        let mut buf = Vec::new();
        write_raw_grid(&mut buf, [1, 2, 3], 1.0, (0..6).map(|v| v as f64)).unwrap();
        let header_end = buf.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(&buf[..header_end], b"1 2 3 1");
        assert_eq!(buf.len(), header_end + 1 + 24);
        assert_eq!(&buf[header_end + 1 + 4..header_end + 1 + 8], &1f32.to_le_bytes());
        let g = read_raw_grid(&buf[..]).unwrap();
        assert_eq!(g.data, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn raw_grid_rejects_wrong_count() {
        let mut buf = Vec::new();
        assert!(write_raw_grid(&mut buf, [2, 2, 2], 1.0, [1.0, 2.0]).is_err());
    }
}
