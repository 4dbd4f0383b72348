//! Energy bookkeeping and per-step remainder terms.
//!
//! The scheme's stability statement is quantitative: across one step the
//! total energy (fluid kinetic + solid-excess kinetic + accumulated viscous
//! dissipation + elastic potential) may not grow by more than a computable
//! remainder plus the linear-solver budget. Everything here evaluates the
//! exact discrete quantities that appear in that inequality, using the same
//! matrices and the same reference-mesh measures as the solves, so the
//! ledger closes to round-off rather than to quadrature error.

use crate::assembly::{scalar_mass, scalar_quadform, FluidOperators, PhysicalParams};
use crate::error::FsiError;
use crate::mesh::{MeshConfig, SolidMesh};
use crate::stepper::SimulationState;
use crate::tensor::{self, Mat};
use crate::Result;

/// Energy components of one state plus the remainder of the step that
/// produced it.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub t: f64,
    /// (ρf/2)∫|u|² over the whole grid (fluid plus fictitious fluid).
    pub e_k_fluid: f64,
    /// (ρδ/2)∫|u^{sh}|² dX over the reference solid mesh.
    pub e_k_solid_delta: f64,
    /// Accumulated viscous dissipation Σ (Δt μ/2)·‖D(u_k)‖².
    pub e_d: f64,
    /// Elastic potential Σ Ψ(F_e)·measure_e.
    pub e_p: f64,
    pub e_total: f64,
    /// E_total / E_total(t0); absent when the initial energy is zero.
    pub e_ratio: Option<f64>,
    /// Signed remainder of the last completed step.
    pub r_step: f64,
    /// ρs × current solid measure.
    pub mass_solid: f64,
    /// Relative change of the solid measure against its initial placement.
    pub mass_variation: f64,
}

/// Hyperelastic stored energy Σ_e Ψ(F_e)·measure_e over the reference mesh,
/// Ψ(F) = (c1/2)(tr(FFᵀ) − d) − c1·ln(det F). Can be negative where the
/// solid locally expands (det F > 1); errs on nonpositive determinants.
pub fn potential_energy<const D: usize>(
    mesh: &SolidMesh<D>,
    f: &[Mat<D>],
    c1: f64,
) -> Result<f64> {
    debug_assert_eq!(f.len(), mesh.n_elements());
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let det = tensor::det(&f[e]);
        if !(det > 0.0) {
            return Err(FsiError::InvertedElement { element: e, det });
        }
        let psi = 0.5 * c1 * (tensor::frob2(&f[e]) - D as f64) - c1 * det.ln();
        acc += psi * mesh.element_ref_measure(e);
    }
    Ok(acc)
}

/// Relative volume change of the solid against its initial placement.
pub fn mass_variation<const D: usize>(mesh: &SolidMesh<D>) -> f64 {
    let initial = mesh.measure(MeshConfig::Initial);
    (mesh.measure(MeshConfig::Current) - initial) / initial
}

/// Implicit-step remainder
///   R = (c1·Δt²/2) Σ_e (|F_e⁻¹ G_e|² − |G_e|²)·measure_e,
/// with F the end-of-step deformation gradient and G = ∇_X u^{sh}.
pub fn residual_implicit<const D: usize>(
    mesh: &SolidMesh<D>,
    f_next: &[Mat<D>],
    grads: &[Mat<D>],
    c1: f64,
    dt: f64,
) -> Result<f64> {
    debug_assert_eq!(f_next.len(), mesh.n_elements());
    debug_assert_eq!(grads.len(), mesh.n_elements());
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let det = tensor::det(&f_next[e]);
        if !(det > 0.0) {
            return Err(FsiError::InvertedElement { element: e, det });
        }
        let inv = tensor::inverse(&f_next[e]).expect("positive determinant");
        let fig = tensor::matmul(&inv, &grads[e]);
        acc += (tensor::frob2(&fig) - tensor::frob2(&grads[e])) * mesh.element_ref_measure(e);
    }
    Ok(0.5 * c1 * dt * dt * acc)
}

/// Splitting remainder from evaluating the volumetric coupling on the old
/// configuration:
///   R = c1·Δt Σ_e [tr(G_e F_old⁻¹) − tr(G_e F_new⁻¹)]·measure_e.
/// Vanishes for rigid solid motion (G = 0) and when the configurations
/// coincide.
pub fn residual_volumetric_lag<const D: usize>(
    mesh: &SolidMesh<D>,
    f_old: &[Mat<D>],
    f_new: &[Mat<D>],
    grads: &[Mat<D>],
    c1: f64,
    dt: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let mut pair = [0.0; 2];
        for (k, f) in [&f_old[e], &f_new[e]].into_iter().enumerate() {
            let det = tensor::det(f);
            if !(det > 0.0) {
                return Err(FsiError::InvertedElement { element: e, det });
            }
            let inv = tensor::inverse(f).expect("positive determinant");
            pair[k] = tensor::trace(&tensor::matmul(&grads[e], &inv));
        }
        acc += (pair[0] - pair[1]) * mesh.element_ref_measure(e);
    }
    Ok(c1 * dt * acc)
}

/// Evaluate all energy components of a state. `e_total_t0` is the reference
/// energy for the ratio; pass the report's own `e_total` at the initial
/// state so the first ratio is exactly one.
pub fn energy_report<const D: usize>(
    state: &SimulationState<D>,
    ops: &FluidOperators<D>,
    params: &PhysicalParams,
    e_total_t0: Option<f64>,
) -> Result<EnergyReport> {
    let e_k_fluid = ops.kinetic_energy(&state.u, params.rho_f);
    let ms = scalar_mass(&state.solid);
    let e_k_solid_delta = 0.5 * params.rho_delta() * scalar_quadform(&ms, &state.u_solid);
    let e_p = potential_energy(&state.solid, &state.f, params.c1)?;
    let e_total = e_k_fluid + e_k_solid_delta + state.e_d_accum + e_p;
    let e_ratio = e_total_t0.and_then(|e0| if e0 == 0.0 { None } else { Some(e_total / e0) });
    Ok(EnergyReport {
        t: state.t,
        e_k_fluid,
        e_k_solid_delta,
        e_d: state.e_d_accum,
        e_p,
        e_total,
        e_ratio,
        r_step: state.r_last,
        mass_solid: params.rho_s * state.solid.measure(MeshConfig::Current),
        mass_variation: mass_variation(&state.solid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Single triangle (0,0)-(2,0)-(0,1) with reference measure exactly 1.
    fn unit_measure_triangle() -> SolidMesh<2> {
        SolidMesh::<2>::from_parts(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]], vec![0, 1, 2])
            .unwrap()
    }

    #[test]
    fn potential_energy_hand_values() {
        let mesh = unit_measure_triangle();
        // Ψ(diag(2, 0.5)) with c1 = 1: 0.5·(4.25 − 2) − ln 1 = 1.125
        let f = [[[2.0, 0.0], [0.0, 0.5]]];
        assert_relative_eq!(
            potential_energy(&mesh, &f, 1.0).unwrap(),
            1.125,
            epsilon = 1e-15
        );
        // identity and rotations store nothing
        assert_eq!(
            potential_energy(&mesh, &[tensor::identity::<2>()], 3.0).unwrap(),
            0.0
        );
        let (s, c) = (0.6_f64.sin(), 0.6_f64.cos());
        let rot = [[[c, -s], [s, c]]];
        assert!(potential_energy(&mesh, &rot, 2.0).unwrap().abs() < 1e-14);
        // inverted element is an error
        let bad = [[[1.0, 0.0], [0.0, -1.0]]];
        assert!(matches!(
            potential_energy(&mesh, &bad, 1.0),
            Err(FsiError::InvertedElement { element: 0, .. })
        ));
    }

    #[test]
    fn residual_implicit_hand_value() {
        let mesh = unit_measure_triangle();
        let f = [[[2.0, 0.0], [0.0, 0.5]]];
        let g = [tensor::identity::<2>()];
        // (0.01/2)·(|diag(0.5,2)|² − |I|²) = 0.005·(4.25 − 2) = 0.011250
        assert_relative_eq!(
            residual_implicit(&mesh, &f, &g, 1.0, 0.1).unwrap(),
            0.011250,
            epsilon = 1e-15
        );
        // F = I or G = 0 give exactly zero
        assert_eq!(
            residual_implicit(&mesh, &[tensor::identity()], &g, 1.0, 0.1).unwrap(),
            0.0
        );
        assert_eq!(
            residual_implicit(&mesh, &f, &[tensor::zero()], 1.0, 0.1).unwrap(),
            0.0
        );
    }

    #[test]
    fn volumetric_lag_hand_value_and_zero_cases() {
        let mesh = unit_measure_triangle();
        let f_old = [tensor::identity::<2>()];
        let f_new = [[[2.0, 0.0], [0.0, 0.5]]];
        let g = [tensor::identity::<2>()];
        // tr(I·I) − tr(I·diag(0.5,2)) = 2 − 2.5; c1·dt·(−0.5) = −0.05
        assert_relative_eq!(
            residual_volumetric_lag(&mesh, &f_old, &f_new, &g, 1.0, 0.1).unwrap(),
            -0.05,
            epsilon = 1e-15
        );
        // rigid solid motion: G = 0
        assert_eq!(
            residual_volumetric_lag(&mesh, &f_old, &f_new, &[tensor::zero()], 1.0, 0.1)
                .unwrap(),
            0.0
        );
        // identical configurations
        assert_eq!(
            residual_volumetric_lag(&mesh, &f_new, &f_new, &g, 1.0, 0.1).unwrap(),
            0.0
        );
    }

    #[test]
    fn mass_variation_zero_under_rigid_translation() {
        let mut mesh =
            SolidMesh::<2>::generate(crate::mesh::SolidShape::Disc, [0.5, 0.5], 0.2, 0.05)
                .unwrap();
        assert_eq!(mass_variation(&mesh), 0.0);
        let moved: Vec<[f64; 2]> = mesh
            .current
            .iter()
            .map(|p| [p[0] + 0.3, p[1] - 0.1])
            .collect();
        mesh.set_current(moved);
        assert!(mass_variation(&mesh).abs() < 1e-13);
    }

    proptest! {
        /// Trace identity behind the kinetic-elastic exchange: with
        /// F1 = F0 + Δt·G,
        /// ½tr(F1F1ᵀ) − ½tr(F0F0ᵀ) = Δt·F1:G − (Δt²/2)|G|² exactly.
        #[test]
        fn trace_identity(
            f in prop::array::uniform4(-2.0f64..2.0),
            g in prop::array::uniform4(-3.0f64..3.0),
            dt_sel in 0usize..3,
        ) {
            let dt = [1.0, 0.1, 1e-3][dt_sel];
            let f0: Mat<2> = [[f[0], f[1]], [f[2], f[3]]];
            let gm: Mat<2> = [[g[0], g[1]], [g[2], g[3]]];
            let f1 = tensor::add(&f0, &tensor::scale(&gm, dt));
            let lhs = 0.5 * (tensor::frob2(&f1) - tensor::frob2(&f0));
            let rhs = dt * tensor::ddot(&f1, &gm) - 0.5 * dt * dt * tensor::frob2(&gm);
            let scale = 0.5 * tensor::frob2(&f1)
                + 0.5 * tensor::frob2(&f0)
                + (dt * tensor::ddot(&f1, &gm)).abs()
                + dt * dt * tensor::frob2(&gm);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale.max(1e-30));
        }

        /// Concavity bound behind the volumetric term: when both
        /// determinants stay positive,
        /// ln det F1 − ln det F0 ≥ Δt·tr(G·F1⁻¹) − (Δt²/2)|F1⁻¹G|².
        #[test]
        fn log_det_lower_bound(
            f in prop::array::uniform4(-1.5f64..1.5),
            g in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let dt = 0.05;
            let mut f0: Mat<2> = [[f[0], f[1]], [f[2], f[3]]];
            // push toward invertibility with positive determinant
            f0[0][0] += 2.0;
            f0[1][1] += 2.0;
            let gm: Mat<2> = [[g[0], g[1]], [g[2], g[3]]];
            let f1 = tensor::add(&f0, &tensor::scale(&gm, dt));
            prop_assume!(tensor::det(&f0) > 0.1 && tensor::det(&f1) > 0.1);
            let inv1 = tensor::inverse(&f1).unwrap();
            let lhs = tensor::det(&f1).ln() - tensor::det(&f0).ln();
            let fig = tensor::matmul(&inv1, &gm);
            let rhs = dt * tensor::trace(&tensor::matmul(&gm, &inv1))
                - 0.5 * dt * dt * tensor::frob2(&fig);
            prop_assert!(lhs >= rhs - 1e-12);
        }
    }
}
