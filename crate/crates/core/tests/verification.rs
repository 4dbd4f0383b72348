//! Whole-pipeline verification: a manufactured Stokes solution that the
//! discrete spaces must reproduce exactly, translation equivariance of a
//! periodic step, and the change-of-variables identity for the volumetric
//! coupling term on a deformed mesh.

use unifield::assembly::{
    apply_constraints, build_constraints, element_velocity_gradients, volumetric_load, BcSpec,
    FluidOperators, PhysicalParams, PressureSpace, assemble_global,
};
use unifield::mesh::{FluidGrid, SolidMesh, SolidShape};
use unifield::solver::{solve_constrained, split_and_demean};
use unifield::sparse::Triplets;
use unifield::stepper::stream_velocity;
use unifield::tensor;

/// u* = (y^2, x^2) and p* = x + y - 1 lie inside the Q2 x Q1 spaces, so a
/// Stokes solve with the matching body force and boundary data must
/// return them to solver precision, not just to discretization order.
#[test]
fn stokes_manufactured_solution_is_reproduced() {
    let mu = 0.7;
    let grid = FluidGrid::build([0.0, 0.0], [1.0, 1.0], [6, 6]).unwrap();
    let ops = FluidOperators::build(grid, PressureSpace::P1).unwrap();
    let dofs = &ops.dofs;
    let n = dofs.n_total();

    let mut trips = Triplets::new(n, n);
    ops.visc_raw.extend_scaled_into(&mut trips, mu / 2.0);
    ops.grad_both.extend_scaled_into(&mut trips, 1.0);
    // f = -mu lap(u*) + grad p* with lap(u*) = (2, 2), grad p* = (1, 1)
    let load = ops.body_force_load(&|_| [1.0 - 2.0 * mu, 1.0 - 2.0 * mu]);
    let mut rhs = vec![0.0; n];
    rhs[..load.len()].copy_from_slice(&load);

    let exact = |x: [f64; 2]| [x[1] * x[1], x[0] * x[0]];
    let cmap = build_constraints(
        &ops.grid,
        dofs,
        &BcSpec::noslip(),
        true,
        Some(&exact),
    )
    .unwrap();
    let (ft, fb) = apply_constraints(&cmap, &trips, &rhs);
    let sol = solve_constrained(&ft, &fb, 1e-11).unwrap();
    let (u, p_vertices, _) = split_and_demean(&sol, &ops.grid, dofs);

    let mut u_err: f64 = 0.0;
    for node in 0..dofs.n_u_nodes {
        let x = ops.grid.velocity_node_coord(node);
        let want = exact(x);
        for c in 0..2 {
            u_err = u_err.max((u[node * 2 + c] - want[c]).abs());
        }
    }
    assert!(u_err < 1e-10, "velocity error {u_err}");

    let mut p_err: f64 = 0.0;
    for v in 0..dofs.n_p_vertices {
        let x = ops.grid.pressure_vertex_coord(v);
        p_err = p_err.max((p_vertices[v] - (x[0] + x[1] - 1.0)).abs());
    }
    assert!(p_err < 1e-10, "pressure error {p_err}");
}

/// On a periodic grid the discrete operators are invariant under cyclic
/// relabeling, so advancing shifted initial data equals shifting the
/// advanced solution.
#[test]
fn periodic_step_commutes_with_grid_shifts() {
    let nx = 8;
    let grid = FluidGrid::build([0.0, 0.0], [1.0, 1.0], [nx, nx]).unwrap();
    let ops = FluidOperators::build(grid, PressureSpace::P1P0).unwrap();
    let dofs = ops.dofs;
    let params = PhysicalParams {
        rho_f: 1.0,
        mu_f: 0.01,
        rho_s: 1.5,
        c1: 1.0,
    };
    let cmap = build_constraints(&ops.grid, &dofs, &BcSpec::periodic(), true, None).unwrap();
    let shift = 1.0 / nx as f64;

    let sample = |offset: f64| -> Vec<f64> {
        let mut u = vec![0.0; dofs.n_velocity_dofs()];
        for n in 0..dofs.n_u_nodes {
            let x = ops.grid.velocity_node_coord(n);
            let v = stream_velocity(
                0.05,
                2.0 * std::f64::consts::PI,
                2.0 * std::f64::consts::PI,
                x[0] - offset,
                x[1],
            );
            u[n * 2] = v[0];
            u[n * 2 + 1] = v[1];
        }
        u
    };
    let advance = |u0: &[f64]| -> Vec<f64> {
        let (trips, rhs) =
            assemble_global(&ops, &params, 1e-2, u0, Some(u0), true, None).unwrap();
        let (ft, fb) = apply_constraints(&cmap, &trips, &rhs);
        let sol = solve_constrained(&ft, &fb, 1e-11).unwrap();
        split_and_demean(&sol, &ops.grid, &dofs).0
    };

    let u1 = advance(&sample(0.0));
    let u1_shifted = advance(&sample(shift));

    // node n minus one cell in x, wrapped on the torus
    let lattice = ops.grid.velocity_lattice();
    let period = lattice[0] - 1;
    let mut err: f64 = 0.0;
    for n in 0..dofs.n_u_nodes {
        let mut m = ops.grid.velocity_node_multi(n);
        m[0] = (m[0] + period - 2) % period;
        m[1] %= period;
        let src = FluidGrid::<2>::flat_index(m, lattice);
        for c in 0..2 {
            err = err.max((u1_shifted[n * 2 + c] - u1[src * 2 + c]).abs());
        }
    }
    assert!(err < 1e-10, "equivariance violation {err}");
}

/// The volumetric coupling load evaluated through reference gradients and
/// the stored F must match direct quadrature on the deformed placement,
/// element by element assembled: integral of J^-1 div(phi) over the
/// current mesh equals integral of tr(grad_X phi F^-1) over the reference.
#[test]
fn volumetric_term_reference_equals_current_quadrature() {
    let mesh =
        SolidMesh::<2>::generate(SolidShape::QuarterDisc, [0.0, 0.0], 0.4, 0.05).unwrap();
    // a smooth displacement keeps every element safely oriented
    let disp: Vec<[f64; 2]> = mesh
        .reference
        .iter()
        .map(|p| {
            [
                0.08 * (1.7 * p[1]).sin() + 0.03 * p[0] * p[0],
                -0.06 * (1.3 * p[0]).cos() * p[1] + 0.04 * p[1],
            ]
        })
        .collect();
    let grads = element_velocity_gradients(&mesh, &disp);
    let f: Vec<[[f64; 2]; 2]> = grads
        .iter()
        .map(|g| {
            let mut fe = tensor::identity::<2>();
            for c in 0..2 {
                for b in 0..2 {
                    fe[c][b] += g[c][b];
                }
            }
            fe
        })
        .collect();

    let reference_route = volumetric_load(&mesh, &f).unwrap();

    // direct route: piecewise-constant integrand on each deformed element,
    // current measure J * ref measure, current gradient F^-T grad_X
    let mut direct = vec![[0.0; 2]; mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        let fe = &f[e];
        let det = tensor::det(fe);
        assert!(det > 0.0);
        let inv = tensor::inverse(fe).unwrap();
        let meas_cur = det * mesh.element_ref_measure(e);
        for (local, &node) in mesh.element_nodes(e).iter().enumerate() {
            let gx = mesh.element_ref_grads(e)[local];
            for c in 0..2 {
                // (F^-T gx)_c = sum_b inv[b][c] gx[b]
                let mut g_cur = 0.0;
                for b in 0..2 {
                    g_cur += inv[b][c] * gx[b];
                }
                direct[node as usize][c] += (1.0 / det) * g_cur * meas_cur;
            }
        }
    }

    let mut err: f64 = 0.0;
    for (a, b) in reference_route.iter().zip(&direct) {
        for c in 0..2 {
            err = err.max((a[c] - b[c]).abs());
        }
    }
    assert!(err < 1e-12, "route disagreement {err}");
}
