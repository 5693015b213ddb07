//! Field snapshot CSV files.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Field, Mesh, MeshKind};
use crate::error::{Error, Result};

fn header(kind: MeshKind) -> &'static str {
    match kind {
        MeshKind::Planar => "x,y,value",
        MeshKind::Radial => "rho,value",
        MeshKind::Line => "x,value",
    }
}

/// Writes one row per cell with 17 significant digits.
pub fn write_field_csv<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let mesh = field.mesh();
    writeln!(out, "{}", header(mesh.kind()))?;
    for (c, v) in mesh.centers().iter().zip(field.values()) {
        match mesh.kind() {
            MeshKind::Planar => writeln!(out, "{:.16e},{:.16e},{:.16e}", c[0], c[1], v)?,
            _ => writeln!(out, "{:.16e},{:.16e}", c[0], v)?,
        }
    }
    Ok(())
}

pub fn save_field(field: &Field, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field_csv(field, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_field_csv`] back onto `mesh`.
///
/// Cell coordinates must match the mesh to 1e-12.
pub fn read_field_csv<R: BufRead>(mesh: Arc<Mesh>, input: R) -> Result<Field> {
    let mut lines = input.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot file".into()))??;
    if head.trim() != header(mesh.kind()) {
        return Err(Error::Parse(format!("unexpected header `{}`", head.trim())));
    }
    let coords = if mesh.kind() == MeshKind::Planar {
        2
    } else {
        1
    };
    let mut values = Vec::with_capacity(mesh.cell_count());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let nums = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
        if nums.len() != coords + 1 {
            return Err(Error::Parse(format!(
                "row {}: expected {} columns",
                row + 1,
                coords + 1
            )));
        }
        let c = mesh
            .centers()
            .get(values.len())
            .ok_or(Error::MeshMismatch)?;
        if (0..coords).any(|k| (c[k] - nums[k]).abs() > 1e-12) {
            return Err(Error::MeshMismatch);
        }
        values.push(nums[coords]);
    }
    Field::new(mesh, values)
}

pub fn load_field(mesh: Arc<Mesh>, path: &std::path::Path) -> Result<Field> {
    let file = std::fs::File::open(path)?;
    read_field_csv(mesh, std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexShape;
    use crate::mesh::{build_mesh, DomainSpec};

    #[test]
    fn planar_round_trip_is_exact() {
        let spec = DomainSpec::new(ConvexShape::unit_disk(), 0.125).unwrap();
        let mesh = build_mesh(&spec).unwrap();
        let u = Field::from_fn(mesh.clone(), |c, _| (c[0] * 3.1).sin() + c[1] / 7.0).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        let back = read_field_csv(mesh, buf.as_slice()).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn radial_header() {
        let mesh = build_mesh(&DomainSpec::radial_disk(1.0, 0.25).unwrap()).unwrap();
        let u = Field::constant(mesh, 1.0);
        let mut buf = Vec::new();
        write_field_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("rho,value"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn wrong_mesh_is_rejected() {
        let a = Mesh::line(4, 1.0).unwrap();
        let b = Mesh::line(4, 0.5).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&Field::constant(a, 2.0), &mut buf).unwrap();
        assert!(matches!(
            read_field_csv(b, buf.as_slice()),
            Err(Error::MeshMismatch)
        ));
    }
}
