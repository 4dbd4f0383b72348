//! Plain-text solid mesh exchange format.
//!
//! Layout: a header line `dim n_nodes n_elements`, then one line of
//! coordinates per node, then one line of 1-based vertex indices per
//! simplex. Coordinates are written with 17 significant digits so a
//! write/read cycle reproduces every f64 bit for bit. The writer emits the
//! reference configuration; deformation state is not part of the format.

use crate::error::FsiError;
use crate::mesh::SolidMesh;
use crate::Result;
use std::io::Write;
use std::path::Path;

pub fn write_solid_mesh<const D: usize>(
    mesh: &SolidMesh<D>,
    out: &mut impl Write,
) -> Result<()> {
    writeln!(out, "{} {} {}", D, mesh.n_nodes(), mesh.n_elements())?;
    for p in &mesh.reference {
        let line: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for e in 0..mesh.n_elements() {
        let line: Vec<String> = mesh
            .element_nodes(e)
            .iter()
            .map(|&n| (n + 1).to_string())
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_solid_mesh_file<const D: usize>(
    mesh: &SolidMesh<D>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_solid_mesh(mesh, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn parse_solid_mesh<const D: usize>(text: &str) -> Result<SolidMesh<D>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| FsiError::MeshFormat("empty mesh file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(FsiError::MeshFormat(format!(
            "header must be 'dim n_nodes n_elements', got '{header}'"
        )));
    }
    let dim: usize = head[0]
        .parse()
        .map_err(|_| FsiError::MeshFormat(format!("bad dimension '{}'", head[0])))?;
    if dim != D {
        return Err(FsiError::MeshFormat(format!(
            "mesh file is {dim}D but a {D}D mesh was requested"
        )));
    }
    let n_nodes: usize = head[1]
        .parse()
        .map_err(|_| FsiError::MeshFormat(format!("bad node count '{}'", head[1])))?;
    let n_elems: usize = head[2]
        .parse()
        .map_err(|_| FsiError::MeshFormat(format!("bad element count '{}'", head[2])))?;

    let mut coords: Vec<[f64; D]> = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let line = lines.next().ok_or_else(|| {
            FsiError::MeshFormat(format!("expected {n_nodes} coordinate lines, found {i}"))
        })?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != D {
            return Err(FsiError::MeshFormat(format!(
                "node {}: expected {D} coordinates, got {}",
                i + 1,
                parts.len()
            )));
        }
        let mut p = [0.0; D];
        for (a, s) in parts.iter().enumerate() {
            p[a] = s.parse().map_err(|_| {
                FsiError::MeshFormat(format!("node {}: bad coordinate '{s}'", i + 1))
            })?;
        }
        coords.push(p);
    }

    let mut conn: Vec<u32> = Vec::with_capacity(n_elems * (D + 1));
    for e in 0..n_elems {
        let line = lines.next().ok_or_else(|| {
            FsiError::MeshFormat(format!("expected {n_elems} element lines, found {e}"))
        })?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != D + 1 {
            return Err(FsiError::MeshFormat(format!(
                "element {}: expected {} vertex indices, got {}",
                e + 1,
                D + 1,
                parts.len()
            )));
        }
        for s in parts {
            let idx: usize = s.parse().map_err(|_| {
                FsiError::MeshFormat(format!("element {}: bad index '{s}'", e + 1))
            })?;
            // indices are 1-based in the file
            if idx == 0 || idx > n_nodes {
                return Err(FsiError::MeshFormat(format!(
                    "element {}: index {idx} outside 1..={n_nodes}",
                    e + 1
                )));
            }
            conn.push((idx - 1) as u32);
        }
    }
    if lines.next().is_some() {
        return Err(FsiError::MeshFormat(
            "trailing content after last element line".into(),
        ));
    }
    SolidMesh::from_parts(coords, conn)
}

pub fn read_solid_mesh<const D: usize>(path: impl AsRef<Path>) -> Result<SolidMesh<D>> {
    let text = std::fs::read_to_string(path)?;
    parse_solid_mesh::<D>(&text)
}
