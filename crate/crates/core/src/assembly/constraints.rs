//! Boundary conditions and pressure pinning as algebraic dof constraints.
//!
//! A constraint map assigns each dof one of three states: free, fixed to a
//! value, or tied to a master dof (periodic images). Applying the map to an
//! assembled system folds tied rows and columns into their masters and
//! shifts fixed columns into the right-hand side, then re-inserts one
//! trivial row per constrained dof so the system stays square and the
//! solution vector carries the constrained values directly. On the free
//! dofs this is the congruence RᵀAR, so symmetry and positive
//! semidefiniteness survive the fold.

use crate::error::FsiError;
use crate::mesh::FluidGrid;
use crate::sparse::Triplets;
use crate::Result;

use super::{DofMap, PressureSpace};

/// Condition on one boundary face of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceBc {
    /// All velocity components fixed (zero, or a supplied boundary field).
    Wall,
    /// Normal velocity component fixed to zero, tangential free.
    Symmetry,
    /// Identified with the opposite face; must be paired.
    Periodic,
}

/// Face conditions per axis: `faces[a][0]` is the low face, `faces[a][1]`
/// the high face.
#[derive(Debug, Clone, Copy)]
pub struct BcSpec<const D: usize> {
    pub faces: [[FaceBc; 2]; D],
}

impl<const D: usize> BcSpec<D> {
    pub fn periodic() -> Self {
        Self {
            faces: [[FaceBc::Periodic; 2]; D],
        }
    }

    pub fn noslip() -> Self {
        Self {
            faces: [[FaceBc::Wall; 2]; D],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..D {
            let lo = self.faces[a][0] == FaceBc::Periodic;
            let hi = self.faces[a][1] == FaceBc::Periodic;
            if lo != hi {
                return Err(FsiError::InvalidParams(format!(
                    "periodic faces must be paired on axis {a}"
                )));
            }
        }
        Ok(())
    }

    fn is_periodic_axis(&self, a: usize) -> bool {
        self.faces[a][0] == FaceBc::Periodic
    }
}

/// State of a single dof in the constrained system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Free,
    Fixed(f64),
    Tied(u32),
}

/// Per-dof constraint table for one system size (velocity-only or
/// velocity+pressure).
#[derive(Debug, Clone)]
pub struct ConstraintMap {
    entries: Vec<Constraint>,
}

impl ConstraintMap {
    pub fn n_dofs(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, dof: usize) -> Constraint {
        self.entries[dof]
    }

    pub fn is_free(&self, dof: usize) -> bool {
        matches!(self.entries[dof], Constraint::Free)
    }

    /// Fixed wins over Tied; two different Fixed values are a conflict.
    fn set_fixed(&mut self, dof: usize, value: f64) -> Result<()> {
        match self.entries[dof] {
            Constraint::Fixed(old) if old != value => Err(FsiError::ConflictingConstraint {
                dof,
                a: old,
                b: value,
            }),
            _ => {
                self.entries[dof] = Constraint::Fixed(value);
                Ok(())
            }
        }
    }
}

/// Build the constraint map for a grid and boundary spec. Periodic axes tie
/// every high-face image directly to its canonical low-face dof (one shot,
/// no chains); walls and symmetry planes fix velocity components, with
/// values taken from `wall_values` when given. With pressure included the
/// nullspace is pinned: vertex 0 always, plus the first cell dof when the
/// enriched space is active (constants are representable in both families).
pub fn build_constraints<const D: usize>(
    grid: &FluidGrid<D>,
    dofs: &DofMap<D>,
    bc: &BcSpec<D>,
    include_pressure: bool,
    wall_values: Option<&dyn Fn([f64; D]) -> [f64; D]>,
) -> Result<ConstraintMap> {
    bc.validate()?;
    let n = if include_pressure {
        dofs.n_total()
    } else {
        dofs.n_velocity_dofs()
    };
    let mut map = ConstraintMap {
        entries: vec![Constraint::Free; n],
    };

    let any_periodic = (0..D).any(|a| bc.is_periodic_axis(a));
    if any_periodic {
        // velocity lattice: index 2n_a is the image of index 0
        let vl = grid.velocity_lattice();
        for node in 0..grid.n_velocity_nodes() {
            let m = grid.velocity_node_multi(node);
            let mut canon = m;
            for a in 0..D {
                if bc.is_periodic_axis(a) && m[a] == vl[a] - 1 {
                    canon[a] = 0;
                }
            }
            if canon != m {
                let master = FluidGrid::<D>::flat_index(canon, vl);
                for c in 0..D {
                    map.entries[dofs.u_dof(node, c)] =
                        Constraint::Tied(dofs.u_dof(master, c) as u32);
                }
            }
        }
        if include_pressure {
            let pl = grid.pressure_lattice();
            for v in 0..grid.n_pressure_vertices() {
                let m = FluidGrid::<D>::multi_index(v, pl);
                let mut canon = m;
                for a in 0..D {
                    if bc.is_periodic_axis(a) && m[a] == pl[a] - 1 {
                        canon[a] = 0;
                    }
                }
                if canon != m {
                    let master = FluidGrid::<D>::flat_index(canon, pl);
                    map.entries[dofs.p_vertex_dof(v)] =
                        Constraint::Tied(dofs.p_vertex_dof(master) as u32);
                }
            }
            // cell dofs are cell-interior; periodicity never duplicates them
        }
    }

    for node in 0..grid.n_velocity_nodes() {
        for a in 0..D {
            for side in 0..2 {
                if !grid.velocity_node_on_face(node, a, side) {
                    continue;
                }
                match bc.faces[a][side] {
                    FaceBc::Periodic => {}
                    FaceBc::Symmetry => {
                        map.set_fixed(dofs.u_dof(node, a), 0.0)?;
                    }
                    FaceBc::Wall => {
                        let vals = match wall_values {
                            Some(f) => f(grid.velocity_node_coord(node)),
                            None => [0.0; D],
                        };
                        for c in 0..D {
                            map.set_fixed(dofs.u_dof(node, c), vals[c])?;
                        }
                    }
                }
            }
        }
    }

    if include_pressure {
        map.set_fixed(dofs.p_vertex_dof(0), 0.0)?;
        if dofs.space() == PressureSpace::P1P0 {
            map.set_fixed(dofs.p_cell_dof(0), 0.0)?;
        }
    }

    // normalize: a tie whose master got fixed becomes fixed itself, so every
    // surviving Tied points at a Free master
    for d in 0..n {
        if let Constraint::Tied(m) = map.entries[d] {
            let mut root = m as usize;
            loop {
                match map.entries[root] {
                    Constraint::Tied(next) => root = next as usize,
                    _ => break,
                }
            }
            map.entries[d] = match map.entries[root] {
                Constraint::Fixed(v) => Constraint::Fixed(v),
                _ => Constraint::Tied(root as u32),
            };
        }
    }

    Ok(map)
}

/// Fold a triplet system through the constraint map. Tied rows and columns
/// are redirected to their masters (right-hand side included), fixed columns
/// shift into the right-hand side, and each constrained dof gets one trivial
/// closing row: identity with the fixed value, or (slave − master = 0).
pub fn apply_constraints(
    map: &ConstraintMap,
    trips: &Triplets,
    rhs: &[f64],
) -> (Triplets, Vec<f64>) {
    let n = map.n_dofs();
    debug_assert_eq!(trips.n_rows, n);
    debug_assert_eq!(trips.n_cols, n);
    debug_assert_eq!(rhs.len(), n);

    let mut out = Triplets::with_capacity(n, n, trips.entries.len() + 2 * n);
    let mut b = rhs.to_vec();

    // fold slave right-hand sides into masters before shifting columns
    for d in 0..n {
        match map.entries[d] {
            Constraint::Tied(m) => {
                b[m as usize] += b[d];
                b[d] = 0.0;
            }
            Constraint::Fixed(_) => b[d] = 0.0,
            Constraint::Free => {}
        }
    }

    for &(r, c, v) in &trips.entries {
        let rr = match map.entries[r as usize] {
            Constraint::Free => r as usize,
            Constraint::Tied(m) => m as usize,
            Constraint::Fixed(_) => continue,
        };
        match map.entries[c as usize] {
            Constraint::Free => out.push(rr, c as usize, v),
            Constraint::Tied(m) => out.push(rr, m as usize, v),
            Constraint::Fixed(val) => b[rr] -= v * val,
        }
    }

    for d in 0..n {
        match map.entries[d] {
            Constraint::Free => {}
            Constraint::Fixed(val) => {
                out.push(d, d, 1.0);
                b[d] = val;
            }
            Constraint::Tied(m) => {
                out.push(d, d, 1.0);
                out.push(d, m as usize, -1.0);
                b[d] = 0.0;
            }
        }
    }

    (out, b)
}
