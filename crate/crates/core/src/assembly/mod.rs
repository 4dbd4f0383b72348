//! Global system assembly.
//!
//! The global unknown vector is laid out velocity-first: fluid velocity
//! dofs interleaved per node (node*D + component), then pressure vertex
//! coefficients, then the optional per-cell constant pressure coefficients.
//! Fluid operator blocks that do not depend on the solution (mass, viscous,
//! divergence) are assembled once per grid and reused; convection and the
//! coupled solid block are rebuilt per nonlinear iteration and merged into
//! one triplet list, which boundary-condition folding turns into the final
//! solvable system.

mod constraints;
mod fluid;
mod merge;
mod solid_ops;

pub use constraints::{
    apply_constraints, build_constraints, BcSpec, Constraint, ConstraintMap, FaceBc,
};
pub use fluid::FluidOperators;
pub use merge::{assemble_global, SolidPieces};
pub use solid_ops::{
    element_velocity_gradients, scalar_mass, scalar_matvec, scalar_quadform, scalar_stiffness,
    solid_system_matrix, stress_load, volumetric_load,
};

use crate::error::FsiError;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Fluid density.
    pub rho_f: f64,
    /// Dynamic viscosity, shared by the fictitious fluid inside the solid.
    pub mu_f: f64,
    /// Solid density.
    pub rho_s: f64,
    /// Neo-Hookean modulus.
    pub c1: f64,
}

impl PhysicalParams {
    /// Density excess of the solid over the fluid it displaces.
    pub fn rho_delta(&self) -> f64 {
        self.rho_s - self.rho_f
    }

    /// Rejects unphysical values. A negative density excess only breaks
    /// the energy estimate, not the solve, so it warns instead of failing.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_f > 0.0) || !self.rho_f.is_finite() {
            return Err(FsiError::InvalidParams(format!(
                "fluid density must be positive, got {}",
                self.rho_f
            )));
        }
        if !(self.mu_f >= 0.0) || !self.mu_f.is_finite() {
            return Err(FsiError::InvalidParams(format!(
                "viscosity must be nonnegative, got {}",
                self.mu_f
            )));
        }
        if !(self.rho_s > 0.0) || !self.rho_s.is_finite() {
            return Err(FsiError::InvalidParams(format!(
                "solid density must be positive, got {}",
                self.rho_s
            )));
        }
        if !(self.c1 >= 0.0) || !self.c1.is_finite() {
            return Err(FsiError::InvalidParams(format!(
                "elastic modulus must be nonnegative, got {}",
                self.c1
            )));
        }
        if self.rho_delta() < 0.0 {
            eprintln!(
                "warning: solid lighter than fluid (density excess {}); \
                 the energy nonincrease guarantee does not apply",
                self.rho_delta()
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureSpace {
    /// Continuous vertex-linear pressure only.
    P1,
    /// Vertex-linear pressure enriched by one constant per cell.
    P1P0,
}

/// Index layout of the global unknown vector.
#[derive(Debug, Clone, Copy)]
pub struct DofMap<const D: usize> {
    pub n_u_nodes: usize,
    pub n_p_vertices: usize,
    /// Zero when the pressure space has no cell constants.
    pub n_p_cells: usize,
}

impl<const D: usize> DofMap<D> {
    pub fn build(grid: &crate::mesh::FluidGrid<D>, space: PressureSpace) -> Self {
        Self {
            n_u_nodes: grid.n_velocity_nodes(),
            n_p_vertices: grid.n_pressure_vertices(),
            n_p_cells: match space {
                PressureSpace::P1 => 0,
                PressureSpace::P1P0 => grid.n_cells(),
            },
        }
    }

    pub fn n_velocity_dofs(&self) -> usize {
        self.n_u_nodes * D
    }

    pub fn n_pressure_dofs(&self) -> usize {
        self.n_p_vertices + self.n_p_cells
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity_dofs() + self.n_pressure_dofs()
    }

    #[inline]
    pub fn u_dof(&self, node: usize, component: usize) -> usize {
        node * D + component
    }

    #[inline]
    pub fn p_vertex_dof(&self, vertex: usize) -> usize {
        self.n_velocity_dofs() + vertex
    }

    #[inline]
    pub fn p_cell_dof(&self, cell: usize) -> usize {
        debug_assert!(self.n_p_cells > 0);
        self.n_velocity_dofs() + self.n_p_vertices + cell
    }

    pub fn space(&self) -> PressureSpace {
        if self.n_p_cells == 0 {
            PressureSpace::P1
        } else {
            PressureSpace::P1P0
        }
    }
}
