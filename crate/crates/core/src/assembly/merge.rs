//! Global system assembly: fluid blocks plus the interpolated solid blocks.
//!
//! One velocity field lives on the grid; the solid contributes extra mass
//! and stiffness only through the coupling matrix P, as PᵀSP over velocity
//! dofs. The merge never forms PᵀSP as a standalone matrix: it streams
//! block contributions straight into the global triplet list, pushing each
//! off-diagonal value to both mirror positions from a single rounding of
//! (w_a·w_b)·s, so the assembled matrix is bitwise symmetric whenever the
//! solid operator is.

use crate::assembly::{DofMap, FluidOperators, PhysicalParams};
use crate::coupling::CouplingMatrix;
use crate::error::FsiError;
use crate::sparse::{Csr, Triplets};
use crate::Result;

/// Solid-side contributions for one linearized solve, in solid-node space.
pub struct SolidPieces<'a, const D: usize> {
    pub coupling: &'a CouplingMatrix,
    /// Scalar solid operator (mass + stiffness combination), applied per
    /// velocity component.
    pub matrix: &'a Csr,
    /// Solid nodal load, scattered through Pᵀ into the velocity rhs.
    pub rhs: &'a [[f64; D]],
}

/// Assemble the linear system of one solve:
///   (ρf/Δt)·M  [+ (μf/2)·K_raw + pressure coupling]  [+ ρf·C(u_advect)]
///   [+ PᵀSP],
/// with right-hand side (ρf/Δt)·M·u_mass [+ Pᵀ·solid_rhs]. Without the
/// Stokes blocks the system is velocity-only (the convection substep);
/// with them it spans velocity and pressure dofs.
pub fn assemble_global<const D: usize>(
    ops: &FluidOperators<D>,
    params: &PhysicalParams,
    dt: f64,
    u_mass: &[f64],
    u_advect: Option<&[f64]>,
    include_stokes: bool,
    solid: Option<&SolidPieces<'_, D>>,
) -> Result<(Triplets, Vec<f64>)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FsiError::InvalidParams(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let dofs: &DofMap<D> = &ops.dofs;
    debug_assert_eq!(u_mass.len(), dofs.n_velocity_dofs());
    let n = if include_stokes {
        dofs.n_total()
    } else {
        dofs.n_velocity_dofs()
    };

    let mut cap = ops.mass_scalar.nnz() * D;
    if include_stokes {
        cap += ops.visc_raw.nnz() + ops.grad_both.nnz();
    }
    let mut trips = Triplets::with_capacity(n, n, cap);

    // fluid mass, scalar matrix expanded per component
    let mass_coef = params.rho_f / dt;
    for i in 0..dofs.n_u_nodes {
        let (cols, vals) = ops.mass_scalar.row(i);
        for (&j, &m) in cols.iter().zip(vals) {
            let v = mass_coef * m;
            for c in 0..D {
                trips.push(i * D + c, j as usize * D + c, v);
            }
        }
    }

    if include_stokes {
        ops.visc_raw.extend_scaled_into(&mut trips, params.mu_f / 2.0);
        ops.grad_both.extend_scaled_into(&mut trips, 1.0);
    }

    if let Some(a) = u_advect {
        let conv = ops.convection_skew(a);
        trips.extend_scaled(&conv, params.rho_f);
    }

    let mut rhs = vec![0.0; n];
    let mu = ops.mass_matvec(u_mass);
    for (r, v) in rhs[..dofs.n_velocity_dofs()].iter_mut().zip(&mu) {
        *r = mass_coef * v;
    }

    if let Some(sp) = solid {
        let p = &sp.coupling.weights;
        let s = sp.matrix;
        debug_assert_eq!(p.n_cols, dofs.n_u_nodes);
        debug_assert_eq!(s.n_rows, p.n_rows);
        debug_assert_eq!(sp.rhs.len(), p.n_rows);

        // PᵀSP, streaming the upper triangle of S; each off-diagonal block
        // value is rounded once and pushed to both mirror positions
        for i in 0..s.n_rows {
            let (s_cols, s_vals) = s.row(i);
            let (pi_cols, pi_vals) = p.row(i);
            for (&sj, &sv) in s_cols.iter().zip(s_vals) {
                let j = sj as usize;
                if j < i {
                    continue;
                }
                let (pj_cols, pj_vals) = p.row(j);
                for (&a, &wa) in pi_cols.iter().zip(pi_vals) {
                    for (&b, &wb) in pj_cols.iter().zip(pj_vals) {
                        let val = (wa * wb) * sv;
                        let (ra, rb) = (a as usize * D, b as usize * D);
                        for c in 0..D {
                            trips.push(ra + c, rb + c, val);
                        }
                        if j != i {
                            for c in 0..D {
                                trips.push(rb + c, ra + c, val);
                            }
                        }
                    }
                }
            }
        }

        // Pᵀ · solid load into the velocity right-hand side
        for i in 0..p.n_rows {
            let (cols, vals) = p.row(i);
            for (&a, &w) in cols.iter().zip(vals) {
                for c in 0..D {
                    rhs[a as usize * D + c] += w * sp.rhs[i][c];
                }
            }
        }
    }

    Ok((trips, rhs))
}
