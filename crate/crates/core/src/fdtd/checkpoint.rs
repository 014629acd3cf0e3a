//! Field dumps: one raw grid file per component plus a small text header
//! (`step` and `dt`). Values are stored as 32-bit floats, so a restore is
//! exact only to single precision. Absorber auxiliary fields are not saved.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::state::{Component, FieldState};
use super::SolverError;
use crate::geometry::{read_raw_grid, write_raw_grid};

fn err(e: impl std::fmt::Display) -> SolverError {
    SolverError::Checkpoint(e.to_string())
}

pub fn write_checkpoint(dir: &Path, state: &FieldState<f64>) -> Result<(), SolverError> {
    fs::create_dir_all(dir).map_err(err)?;
    let dims = state.layout().dims;
    for c in Component::ALL {
        let f = File::create(dir.join(format!("{}.raw", c.name()))).map_err(err)?;
        write_raw_grid(BufWriter::new(f), dims, 1.0, state.component_values(c)).map_err(err)?;
    }
    fs::write(
        dir.join("state.txt"),
        format!("step {}\ndt {:?}\n", state.step, state.dt),
    )
    .map_err(err)?;
    Ok(())
}

/// Restores fields into `state`, whose layout must match the dump.
pub fn read_checkpoint(dir: &Path, state: &mut FieldState<f64>) -> Result<(), SolverError> {
    let dims = state.layout().dims;
    for c in Component::ALL {
        let f = File::open(dir.join(format!("{}.raw", c.name()))).map_err(err)?;
        let g = read_raw_grid(BufReader::new(f)).map_err(err)?;
        if g.dims != dims {
            return Err(err(format!(
                "{} has dims {:?}, expected {:?}",
                c.name(),
                g.dims,
                dims
            )));
        }
        let vals: Vec<f64> = g.data.iter().map(|&v| v as f64).collect();
        state.set_component_values(c, &vals);
    }
    let text = fs::read_to_string(dir.join("state.txt")).map_err(err)?;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some("step"), Some(v)) => state.step = v.parse().map_err(err)?,
            (Some("dt"), Some(v)) => state.dt = v.parse().map_err(err)?,
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridLayout;

    #[test]
    fn round_trip() {
        let layout = GridLayout {
            dims: [3, 4, 5],
            origin: [1, 2, 2],
            mirror: [false; 3],
            absorber: [[0; 2]; 3],
        };
        let mut s = FieldState::<f64>::zeros(layout, 0.5);
        s.set(Component::Ey, 1, 2, 3, 0.25);
        s.set(Component::Hz, 2, 3, 4, -1.5);
        s.step = 17;
        let dir = tempfile::tempdir().unwrap();
        write_checkpoint(dir.path(), &s).unwrap();
        let mut back = FieldState::<f64>::zeros(layout, 0.1);
        read_checkpoint(dir.path(), &mut back).unwrap();
        assert_eq!(back.step, 17);
        assert_eq!(back.dt, 0.5);
        assert_eq!(back.get(Component::Ey, 1, 2, 3), 0.25);
        assert_eq!(back.get(Component::Hz, 2, 3, 4), -1.5);
    }
}
