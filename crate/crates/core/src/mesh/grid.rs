//! Structured axis-aligned fluid grid.
//!
//! Each cell carries a 9-node (2D) or 27-node (3D) biquadratic velocity
//! element and a bilinear pressure element on its corners, so the velocity
//! lattice has 2n+1 nodes per axis and the pressure vertex lattice n+1.
//! Node and cell indices are lexicographic with axis 0 fastest. The grid
//! never changes during a simulation; only the immersed solid moves.

use crate::error::FsiError;
use crate::Result;

#[derive(Debug, Clone)]
pub struct FluidGrid<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
    /// Cells per axis.
    pub cells: [usize; D],
    /// Cell size per axis.
    pub h: [f64; D],
}

impl<const D: usize> FluidGrid<D> {
    pub fn build(lo: [f64; D], hi: [f64; D], cells: [usize; D]) -> Result<Self> {
        for a in 0..D {
            if !(hi[a] > lo[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(FsiError::InvalidGrid(format!(
                    "extent on axis {a} is empty or not finite: [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if cells[a] == 0 {
                return Err(FsiError::InvalidGrid(format!("zero cells on axis {a}")));
            }
        }
        let mut h = [0.0; D];
        for a in 0..D {
            h[a] = (hi[a] - lo[a]) / cells[a] as f64;
        }
        Ok(Self { lo, hi, cells, h })
    }

    /// Velocity lattice size per axis: 2n + 1.
    pub fn velocity_lattice(&self) -> [usize; D] {
        let mut l = [0; D];
        for a in 0..D {
            l[a] = 2 * self.cells[a] + 1;
        }
        l
    }

    /// Pressure vertex lattice size per axis: n + 1.
    pub fn pressure_lattice(&self) -> [usize; D] {
        let mut l = [0; D];
        for a in 0..D {
            l[a] = self.cells[a] + 1;
        }
        l
    }

    pub fn n_velocity_nodes(&self) -> usize {
        self.velocity_lattice().iter().product()
    }

    pub fn n_pressure_vertices(&self) -> usize {
        self.pressure_lattice().iter().product()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    #[inline]
    pub fn flat_index(multi: [usize; D], lattice: [usize; D]) -> usize {
        let mut idx = 0;
        for a in (0..D).rev() {
            debug_assert!(multi[a] < lattice[a]);
            idx = idx * lattice[a] + multi[a];
        }
        idx
    }

    #[inline]
    pub fn multi_index(mut flat: usize, lattice: [usize; D]) -> [usize; D] {
        let mut multi = [0; D];
        for a in 0..D {
            multi[a] = flat % lattice[a];
            flat /= lattice[a];
        }
        multi
    }

    pub fn velocity_node_multi(&self, node: usize) -> [usize; D] {
        Self::multi_index(node, self.velocity_lattice())
    }

    pub fn velocity_node_coord(&self, node: usize) -> [f64; D] {
        let m = self.velocity_node_multi(node);
        let mut x = [0.0; D];
        for a in 0..D {
            x[a] = self.lo[a] + 0.5 * self.h[a] * m[a] as f64;
        }
        x
    }

    pub fn pressure_vertex_coord(&self, vertex: usize) -> [f64; D] {
        let m = Self::multi_index(vertex, self.pressure_lattice());
        let mut x = [0.0; D];
        for a in 0..D {
            x[a] = self.lo[a] + self.h[a] * m[a] as f64;
        }
        x
    }

    pub fn cell_multi(&self, cell: usize) -> [usize; D] {
        Self::multi_index(cell, self.cells)
    }

    /// Low corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> [f64; D] {
        let m = self.cell_multi(cell);
        let mut x = [0.0; D];
        for a in 0..D {
            x[a] = self.lo[a] + self.h[a] * m[a] as f64;
        }
        x
    }

    /// Velocity node indices of a cell, local ordering lexicographic with
    /// axis 0 fastest (matches Q2 reference ordering): 9 in 2D, 27 in 3D.
    pub fn cell_velocity_nodes(&self, cell: usize) -> Vec<usize> {
        let c = self.cell_multi(cell);
        let lattice = self.velocity_lattice();
        let n_local = 3usize.pow(D as u32);
        let mut nodes = Vec::with_capacity(n_local);
        for local in 0..n_local {
            let mut rem = local;
            let mut m = [0; D];
            for a in 0..D {
                m[a] = 2 * c[a] + rem % 3;
                rem /= 3;
            }
            nodes.push(Self::flat_index(m, lattice));
        }
        nodes
    }

    /// Pressure vertex indices of a cell: 4 in 2D, 8 in 3D, lexicographic.
    pub fn cell_pressure_vertices(&self, cell: usize) -> Vec<usize> {
        let c = self.cell_multi(cell);
        let lattice = self.pressure_lattice();
        let n_local = 2usize.pow(D as u32);
        let mut nodes = Vec::with_capacity(n_local);
        for local in 0..n_local {
            let mut rem = local;
            let mut m = [0; D];
            for a in 0..D {
                m[a] = c[a] + rem % 2;
                rem /= 2;
            }
            nodes.push(Self::flat_index(m, lattice));
        }
        nodes
    }

    /// Boundary clamp tolerance: points this close to the boundary are
    /// pulled inside; beyond it location fails.
    pub fn locate_eps(&self) -> f64 {
        let mut span: f64 = 0.0;
        for a in 0..D {
            span = span.max(self.hi[a] - self.lo[a]);
        }
        1e-12 * span
    }

    /// Locate a point: containing cell plus local coordinates in [-1, 1]^D.
    /// Floor arithmetic, O(1); the inverse map reproduces the point to
    /// round-off.
    pub fn locate(&self, p: [f64; D]) -> Result<(usize, [f64; D])> {
        let eps = self.locate_eps();
        for a in 0..D {
            if p[a] < self.lo[a] - eps || p[a] > self.hi[a] + eps {
                return Err(FsiError::PointOutsideDomain { point: p.to_vec() });
            }
        }
        let mut cell = [0usize; D];
        let mut local = [0.0; D];
        for a in 0..D {
            let t = (p[a] - self.lo[a]) / self.h[a];
            let c = (t.floor() as isize).clamp(0, self.cells[a] as isize - 1) as usize;
            cell[a] = c;
            local[a] = (2.0 * (t - c as f64) - 1.0).clamp(-1.0, 1.0);
        }
        Ok((Self::flat_index(cell, self.cells), local))
    }

    /// True when the velocity node lies on the given boundary face
    /// (side 0 = low, 1 = high).
    pub fn velocity_node_on_face(&self, node: usize, axis: usize, side: usize) -> bool {
        let m = self.velocity_node_multi(node);
        if side == 0 {
            m[axis] == 0
        } else {
            m[axis] == 2 * self.cells[axis]
        }
    }
}
