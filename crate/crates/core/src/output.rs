//! Result serialization: the energy time series as CSV and field
//! snapshots as VTK legacy ASCII.
//!
//! The time series is the artifact's primary record, so its format is a
//! contract: a fixed 9-column header and `{:.16e}` decimals (17
//! significant digits), which round-trip f64 bit-exactly. Field output is
//! for viewers only; biquadratic cells are emitted as 4 (2D) or 8 (3D)
//! linear subcells because legacy-format support for quadratic cells is
//! spotty across viewers.

use std::path::{Path, PathBuf};

use crate::assembly::FluidOperators;
use crate::diagnostics::EnergyReport;
use crate::error::FsiError;
use crate::stepper::SimulationState;
use crate::tensor;
use crate::Result;

pub const TIMESERIES_HEADER: &str =
    "t,E_k_fluid,E_k_solid_delta,E_d,E_p,E_total,E_ratio,R_step,mass_variation";

/// Render the report series as CSV text. An absent energy ratio (zero
/// initial energy) is written as NaN so every row keeps nine columns.
pub fn format_timeseries(reports: &[EnergyReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(FsiError::Config("cannot write an empty time series".into()));
    }
    let mut s = String::with_capacity(64 + reports.len() * 220);
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in reports {
        let row = [
            r.t,
            r.e_k_fluid,
            r.e_k_solid_delta,
            r.e_d,
            r.e_p,
            r.e_total,
            r.e_ratio.unwrap_or(f64::NAN),
            r.r_step,
            r.mass_variation,
        ];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn write_timeseries(reports: &[EnergyReport], path: &Path) -> Result<()> {
    std::fs::write(path, format_timeseries(reports)?)?;
    Ok(())
}

/// Parse the CSV written by [`format_timeseries`] back into raw rows.
pub fn parse_timeseries(text: &str) -> Result<Vec<[f64; 9]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TIMESERIES_HEADER => {}
        other => {
            return Err(FsiError::Config(format!(
                "bad time series header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != 9 {
            return Err(FsiError::Config(format!(
                "row {} has {} columns, expected 9",
                k + 1,
                vals.len()
            )));
        }
        let mut row = [0.0; 9];
        for (c, v) in vals.iter().enumerate() {
            row[c] = v.parse().map_err(|_| {
                FsiError::Config(format!("bad value {v:?} in row {}", k + 1))
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn vtk_header(title: &str, points: &[[f64; 3]]) -> String {
    let mut s = format!(
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {} double\n",
        points.len()
    );
    for p in points {
        s.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    s
}

fn vtk_cells(s: &mut String, cells: &[Vec<usize>], cell_type: u8) {
    let total: usize = cells.iter().map(|c| c.len() + 1).sum();
    s.push_str(&format!("CELLS {} {}\n", cells.len(), total));
    for c in cells {
        s.push_str(&c.len().to_string());
        for i in c {
            s.push(' ');
            s.push_str(&i.to_string());
        }
        s.push('\n');
    }
    s.push_str(&format!("CELL_TYPES {}\n", cells.len()));
    for _ in cells {
        s.push_str(&format!("{cell_type}\n"));
    }
}

fn pad3<const D: usize>(p: [f64; D]) -> [f64; 3] {
    let mut q = [0.0; 3];
    q[..D].copy_from_slice(&p);
    q
}

/// Write `<prefix>_fluid.vtk` (velocity vectors and pressure on the
/// subdivided grid) and `<prefix>_solid.vtk` (current coordinates, solid
/// velocity, per-element J). Returns both paths.
pub fn write_fields<const D: usize>(
    state: &SimulationState<D>,
    ops: &FluidOperators<D>,
    prefix: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let grid = &ops.grid;
    let dofs = &ops.dofs;

    // fluid: points are the velocity nodes
    let points: Vec<[f64; 3]> = (0..dofs.n_u_nodes)
        .map(|n| pad3(grid.velocity_node_coord(n)))
        .collect();
    let mut fluid = vtk_header("fluid velocity and pressure", &points);

    // each cell splits into 2^D linear subcells on its 3^D node lattice
    let mut cells = Vec::with_capacity(grid.n_cells() << D);
    let mut pressures = Vec::with_capacity(grid.n_cells() << D);
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_velocity_nodes(cell);
        let verts = grid.cell_pressure_vertices(cell);
        let p_cell = if dofs.n_p_cells > 0 {
            state.p_cells[cell]
        } else {
            0.0
        };
        let local = |i: usize, j: usize, k: usize| -> usize {
            nodes[i + 3 * j + if D == 3 { 9 * k } else { 0 }]
        };
        let sub_count = if D == 2 { 1 } else { 2 };
        for c in 0..sub_count {
            for b in 0..2 {
                for a in 0..2 {
                    let conn = if D == 2 {
                        vec![
                            local(a, b, 0),
                            local(a + 1, b, 0),
                            local(a + 1, b + 1, 0),
                            local(a, b + 1, 0),
                        ]
                    } else {
                        vec![
                            local(a, b, c),
                            local(a + 1, b, c),
                            local(a + 1, b + 1, c),
                            local(a, b + 1, c),
                            local(a, b, c + 1),
                            local(a + 1, b, c + 1),
                            local(a + 1, b + 1, c + 1),
                            local(a, b + 1, c + 1),
                        ]
                    };
                    cells.push(conn);
                    // vertex-linear pressure at the subcell center plus the
                    // cell constant
                    let frac = [
                        0.25 + 0.5 * a as f64,
                        0.25 + 0.5 * b as f64,
                        0.25 + 0.5 * c as f64,
                    ];
                    let mut p = p_cell;
                    for (lv, &v) in verts.iter().enumerate() {
                        let mut w = 1.0;
                        let mut rem = lv;
                        for fa in frac.iter().take(D) {
                            let bit = rem % 2;
                            rem /= 2;
                            w *= if bit == 1 { *fa } else { 1.0 - *fa };
                        }
                        p += w * state.p_vertices[v];
                    }
                    pressures.push(p);
                }
            }
        }
    }
    let cell_type = if D == 2 { 9 } else { 12 };
    vtk_cells(&mut fluid, &cells, cell_type);

    fluid.push_str(&format!("POINT_DATA {}\nVECTORS velocity double\n", points.len()));
    for n in 0..dofs.n_u_nodes {
        let mut v = [0.0; 3];
        for a in 0..D {
            v[a] = state.u[n * D + a];
        }
        fluid.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
    }
    fluid.push_str(&format!(
        "CELL_DATA {}\nSCALARS pressure double 1\nLOOKUP_TABLE default\n",
        pressures.len()
    ));
    for p in &pressures {
        fluid.push_str(&format!("{p}\n"));
    }

    // solid: current placement, nodal velocity, per-element jacobian
    let spoints: Vec<[f64; 3]> = state.solid.current.iter().map(|p| pad3(*p)).collect();
    let mut solid = vtk_header("solid placement and velocity", &spoints);
    let scells: Vec<Vec<usize>> = (0..state.solid.n_elements())
        .map(|e| {
            state.solid.element_nodes(e)
                .iter()
                .map(|&n| n as usize)
                .collect()
        })
        .collect();
    vtk_cells(&mut solid, &scells, if D == 2 { 5 } else { 10 });
    solid.push_str(&format!(
        "POINT_DATA {}\nVECTORS velocity double\n",
        spoints.len()
    ));
    for v in &state.u_solid {
        let q = pad3(*v);
        solid.push_str(&format!("{} {} {}\n", q[0], q[1], q[2]));
    }
    solid.push_str(&format!(
        "CELL_DATA {}\nSCALARS jacobian double 1\nLOOKUP_TABLE default\n",
        scells.len()
    ));
    for f in &state.f {
        solid.push_str(&format!("{}\n", tensor::det(f)));
    }

    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "fields".to_string());
    let dir = prefix.parent().unwrap_or_else(|| Path::new("."));
    let fluid_path = dir.join(format!("{stem}_fluid.vtk"));
    let solid_path = dir.join(format!("{stem}_solid.vtk"));
    std::fs::write(&fluid_path, fluid)?;
    std::fs::write(&solid_path, solid)?;
    Ok((fluid_path, solid_path))
}
