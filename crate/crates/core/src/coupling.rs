//! Interpolation coupling between the solid mesh and the fluid grid.
//!
//! The coupling matrix P carries one row per solid node and one column per
//! fluid velocity node, with P[i][j] the scalar Q2 basis function j
//! evaluated at solid node i. Interpolating with P (rather than an L2
//! projection) keeps every row local to one grid cell, at most 3^D entries,
//! and makes solid nodal velocities exact point samples of the fluid field.
//! The same weights serve both directions: u_solid = P u restricts the
//! fluid velocity, and P^T scatters solid operators into the global system.
//!
//! P depends on the current solid node positions, so the time steppers
//! rebuild it whenever the configuration estimate moves.

use crate::error::FsiError;
use crate::fem::{self, ElementKind};
use crate::mesh::FluidGrid;
use crate::sparse::{Csr, Triplets};
use crate::Result;

#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    /// Scalar interpolation weights (solid nodes x fluid velocity nodes).
    pub weights: Csr,
}

impl CouplingMatrix {
    pub fn n_solid_nodes(&self) -> usize {
        self.weights.n_rows
    }

    pub fn n_fluid_nodes(&self) -> usize {
        self.weights.n_cols
    }

    /// Interpolate an interleaved fluid velocity vector (dof = node*D + c)
    /// to solid nodal velocities.
    pub fn interpolate<const D: usize>(&self, u: &[f64]) -> Vec<[f64; D]> {
        debug_assert_eq!(u.len(), self.n_fluid_nodes() * D);
        let mut out = vec![[0.0; D]; self.n_solid_nodes()];
        for i in 0..self.n_solid_nodes() {
            let (cols, vals) = self.weights.row(i);
            let mut acc = [0.0; D];
            for (&j, &w) in cols.iter().zip(vals) {
                for c in 0..D {
                    acc[c] += w * u[j as usize * D + c];
                }
            }
            out[i] = acc;
        }
        out
    }
}

/// Evaluate the Q2 velocity basis at each solid node position. Fails with
/// the offending node index if a position lies outside the grid.
pub fn build_coupling_matrix<const D: usize>(
    grid: &FluidGrid<D>,
    positions: &[[f64; D]],
) -> Result<CouplingMatrix> {
    let kind = match D {
        2 => ElementKind::Q2Quad,
        3 => ElementKind::Q2Hex,
        _ => {
            return Err(FsiError::DimensionMismatch(format!(
                "no velocity element for dimension {D}"
            )))
        }
    };
    let mut trips = Triplets::with_capacity(
        positions.len(),
        grid.n_velocity_nodes(),
        positions.len() * kind.n_nodes(),
    );
    for (i, &p) in positions.iter().enumerate() {
        let (cell, xi) = grid.locate(p).map_err(|_| FsiError::SolidNodeOutsideDomain {
            node: i,
            point: p.to_vec(),
        })?;
        let (values, _) = fem::shape_values::<D>(kind, xi);
        let cols = grid.cell_velocity_nodes(cell);
        for (local, &col) in cols.iter().enumerate() {
            let v = values[local];
            // exact zeros appear when a solid node sits on a grid node or
            // cell face; dropping them keeps rows minimal
            if v != 0.0 {
                trips.push(i, col, v);
            }
        }
    }
    Ok(CouplingMatrix {
        weights: Csr::from_triplets(&trips),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid2(cells: usize) -> FluidGrid<2> {
        FluidGrid::build([0.0, 0.0], [1.0, 1.0], [cells, cells]).unwrap()
    }

    #[test]
    fn rows_sum_to_one_and_stay_local() {
        let grid = grid2(16);
        // deterministic scatter of interior points
        let positions: Vec<[f64; 2]> = (0..200)
            .map(|k| {
                let a = (k as f64 * 0.37).fract();
                let b = (k as f64 * 0.61 + 0.11).fract();
                [0.02 + 0.96 * a, 0.02 + 0.96 * b]
            })
            .collect();
        let p = build_coupling_matrix(&grid, &positions).unwrap();
        assert_eq!(p.n_solid_nodes(), 200);
        assert_eq!(p.n_fluid_nodes(), 33 * 33);
        for i in 0..p.n_solid_nodes() {
            let (cols, vals) = p.weights.row(i);
            assert!(cols.len() <= 9, "row {i} has {} entries", cols.len());
            let sum: f64 = vals.iter().sum();
            assert!((sum - 1.0).abs() < 1e-13, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn nodal_coincidence_gives_identity_rows() {
        let grid = grid2(4);
        // solid nodes placed exactly on fluid velocity nodes
        let positions: Vec<[f64; 2]> = (0..grid.n_velocity_nodes())
            .step_by(7)
            .map(|n| grid.velocity_node_coord(n))
            .collect();
        let p = build_coupling_matrix(&grid, &positions).unwrap();
        for (i, _) in positions.iter().enumerate() {
            let (cols, vals) = p.weights.row(i);
            assert_eq!(cols.len(), 1, "row {i} not a point mass: {vals:?}");
            assert_eq!(vals[0], 1.0);
        }
    }

    #[test]
    fn reproduces_tensor_quadratics_exactly() {
        let grid = grid2(8);
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 3.0 * x * x - x * y + 0.5 * y * y
            + x * x * y + x * y * y + 0.25 * x * x * y * y;
        let mut u = vec![0.0; grid.n_velocity_nodes() * 2];
        for n in 0..grid.n_velocity_nodes() {
            let [x, y] = grid.velocity_node_coord(n);
            u[n * 2] = f(x, y);
            u[n * 2 + 1] = -2.0 * f(y, x);
        }
        let positions: Vec<[f64; 2]> = (0..150)
            .map(|k| {
                let a = (k as f64 * 0.417 + 0.05).fract();
                let b = (k as f64 * 0.713 + 0.29).fract();
                [a, b]
            })
            .collect();
        let p = build_coupling_matrix(&grid, &positions).unwrap();
        let us = p.interpolate::<2>(&u);
        for (i, &[x, y]) in positions.iter().enumerate() {
            assert!((us[i][0] - f(x, y)).abs() < 1e-12, "node {i}");
            assert!((us[i][1] + 2.0 * f(y, x)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn quadratic_reproduction_3d() {
        let grid = FluidGrid::build([0.0; 3], [0.5, 0.5, 0.3], [4, 4, 3]).unwrap();
        let f = |p: [f64; 3]| {
            1.0 + p[0] - 2.0 * p[1] + p[2] + p[0] * p[0] + p[1] * p[2] + p[2] * p[2]
        };
        let mut u = vec![0.0; grid.n_velocity_nodes() * 3];
        for n in 0..grid.n_velocity_nodes() {
            let x = grid.velocity_node_coord(n);
            u[n * 3] = f(x);
        }
        let positions: Vec<[f64; 3]> = (0..60)
            .map(|k| {
                let a = (k as f64 * 0.37).fract();
                let b = (k as f64 * 0.59 + 0.21).fract();
                let c = (k as f64 * 0.83 + 0.43).fract();
                [0.5 * a, 0.5 * b, 0.3 * c]
            })
            .collect();
        let p = build_coupling_matrix(&grid, &positions).unwrap();
        for i in 0..p.n_solid_nodes() {
            let (cols, vals) = p.weights.row(i);
            assert!(cols.len() <= 27);
            let sum: f64 = vals.iter().sum();
            assert!((sum - 1.0).abs() < 1e-13);
        }
        let us = p.interpolate::<3>(&u);
        for (i, &x) in positions.iter().enumerate() {
            assert!((us[i][0] - f(x)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn outside_point_reports_node_index() {
        let grid = grid2(4);
        let positions = vec![[0.5, 0.5], [1.5, 0.5]];
        match build_coupling_matrix(&grid, &positions) {
            Err(FsiError::SolidNodeOutsideDomain { node, point }) => {
                assert_eq!(node, 1);
                assert_eq!(point, vec![1.5, 0.5]);
            }
            other => panic!("expected outside-domain error, got {other:?}"),
        }
    }

    proptest! {
        /// Linear fields are inside the Q2 span, so interpolation at any
        /// in-domain point reproduces them up to rounding.
        #[test]
        fn prop_linear_fields_interpolate_exactly(
            cells in 1usize..6,
            pts in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..40),
            coeffs in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        ) {
            let grid = grid2(cells);
            let (a, b, c) = coeffs;
            let f = |x: f64, y: f64| a + b * x + c * y;
            let mut u = vec![0.0; grid.n_velocity_nodes() * 2];
            for n in 0..grid.n_velocity_nodes() {
                let [x, y] = grid.velocity_node_coord(n);
                u[n * 2] = f(x, y);
                u[n * 2 + 1] = f(y, x);
            }
            let positions: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let p = build_coupling_matrix(&grid, &positions).unwrap();
            let us = p.interpolate::<2>(&u);
            for (i, &[x, y]) in positions.iter().enumerate() {
                prop_assert!((us[i][0] - f(x, y)).abs() < 1e-12);
                prop_assert!((us[i][1] - f(y, x)).abs() < 1e-12);
            }
        }
    }
}
