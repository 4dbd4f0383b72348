//! Solid operators on the reference mesh.
//!
//! Everything here integrates over the stress-free reference configuration
//! with P1 shape functions, so gradients are constant per element and the
//! closed-form simplex mass matrix is exact. The deformation enters only
//! through two load vectors: the hyperelastic stress load g(F) with
//! g[i][c] = ∫ F : ∇_X(φ_i e_c) dX, and the volumetric coupling load
//! j(F) with j[i][c] = ∫ tr(∇_X(φ_i e_c) F⁻¹) dX, which is the
//! change-of-variables image of −∫ J⁻¹ ∇·v over the current configuration.
//! At F = I both loads coincide term by term, which is what keeps the
//! resting state exactly stationary.

use crate::error::FsiError;
use crate::mesh::SolidMesh;
use crate::sparse::{Csr, Triplets};
use crate::tensor::{self, Mat};
use crate::Result;

/// Scalar P1 mass matrix ∫ φ_i φ_j dX (exact closed form).
pub fn scalar_mass<const D: usize>(mesh: &SolidMesh<D>) -> Csr {
    let n = mesh.n_nodes();
    let mut t = Triplets::with_capacity(n, n, mesh.n_elements() * (D + 1) * (D + 1));
    let denom = ((D + 1) * (D + 2)) as f64;
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let meas = mesh.element_ref_measure(e);
        let off = meas / denom;
        let diag = 2.0 * meas / denom;
        for (li, &i) in nodes.iter().enumerate() {
            for (lj, &j) in nodes.iter().enumerate() {
                t.push(i as usize, j as usize, if li == lj { diag } else { off });
            }
        }
    }
    Csr::from_triplets(&t)
}

/// Scalar P1 stiffness matrix ∫ ∇φ_i · ∇φ_j dX.
pub fn scalar_stiffness<const D: usize>(mesh: &SolidMesh<D>) -> Csr {
    let n = mesh.n_nodes();
    let mut t = Triplets::with_capacity(n, n, mesh.n_elements() * (D + 1) * (D + 1));
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let grads = mesh.element_ref_grads(e);
        let meas = mesh.element_ref_measure(e);
        for li in 0..=D {
            for lj in li..=D {
                let mut dot = 0.0;
                for a in 0..D {
                    dot += grads[li][a] * grads[lj][a];
                }
                let v = meas * dot;
                t.push(nodes[li] as usize, nodes[lj] as usize, v);
                if lj != li {
                    t.push(nodes[lj] as usize, nodes[li] as usize, v);
                }
            }
        }
    }
    Csr::from_triplets(&t)
}

/// coef_mass·M + coef_stiff·K in one assembly pass; this is the constant
/// scalar operator the coupled solve scatters through the coupling matrix.
pub fn solid_system_matrix<const D: usize>(
    mesh: &SolidMesh<D>,
    coef_mass: f64,
    coef_stiff: f64,
) -> Csr {
    let n = mesh.n_nodes();
    let mut t = Triplets::with_capacity(n, n, mesh.n_elements() * (D + 1) * (D + 1));
    let denom = ((D + 1) * (D + 2)) as f64;
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let grads = mesh.element_ref_grads(e);
        let meas = mesh.element_ref_measure(e);
        for li in 0..=D {
            for lj in li..=D {
                let mut dot = 0.0;
                for a in 0..D {
                    dot += grads[li][a] * grads[lj][a];
                }
                let m = if li == lj { 2.0 } else { 1.0 } * meas / denom;
                let v = coef_mass * m + coef_stiff * (meas * dot);
                t.push(nodes[li] as usize, nodes[lj] as usize, v);
                if lj != li {
                    t.push(nodes[lj] as usize, nodes[li] as usize, v);
                }
            }
        }
    }
    Csr::from_triplets(&t)
}

/// Stress load g(F): g[i][c] = Σ_e meas_e Σ_b F_e[c][b] ∂_b φ_i.
pub fn stress_load<const D: usize>(mesh: &SolidMesh<D>, f: &[Mat<D>]) -> Vec<[f64; D]> {
    debug_assert_eq!(f.len(), mesh.n_elements());
    let mut load = vec![[0.0; D]; mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let grads = mesh.element_ref_grads(e);
        let meas = mesh.element_ref_measure(e);
        for (li, &i) in nodes.iter().enumerate() {
            for c in 0..D {
                let mut s = 0.0;
                for b in 0..D {
                    s += f[e][c][b] * grads[li][b];
                }
                load[i as usize][c] += meas * s;
            }
        }
    }
    load
}

/// Volumetric load j(F): j[i][c] = Σ_e meas_e Σ_b (F_e⁻¹)[b][c] ∂_b φ_i.
/// Fails on the first element whose deformation gradient is not invertible
/// with positive determinant.
pub fn volumetric_load<const D: usize>(
    mesh: &SolidMesh<D>,
    f: &[Mat<D>],
) -> Result<Vec<[f64; D]>> {
    debug_assert_eq!(f.len(), mesh.n_elements());
    let mut load = vec![[0.0; D]; mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        let det = tensor::det(&f[e]);
        if !(det > 0.0) {
            return Err(FsiError::InvertedElement { element: e, det });
        }
        let inv = tensor::inverse(&f[e]).expect("positive determinant");
        let nodes = mesh.element_nodes(e);
        let grads = mesh.element_ref_grads(e);
        let meas = mesh.element_ref_measure(e);
        for (li, &i) in nodes.iter().enumerate() {
            for c in 0..D {
                let mut s = 0.0;
                for b in 0..D {
                    s += inv[b][c] * grads[li][b];
                }
                load[i as usize][c] += meas * s;
            }
        }
    }
    Ok(load)
}

/// Per-element velocity gradients ∇_X u of a nodal field on the reference
/// mesh (constant per element for P1).
pub fn element_velocity_gradients<const D: usize>(
    mesh: &SolidMesh<D>,
    u: &[[f64; D]],
) -> Vec<Mat<D>> {
    debug_assert_eq!(u.len(), mesh.n_nodes());
    let mut out = vec![[[0.0; D]; D]; mesh.n_elements()];
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let grads = mesh.element_ref_grads(e);
        let g = &mut out[e];
        for (li, &i) in nodes.iter().enumerate() {
            for c in 0..D {
                for b in 0..D {
                    g[c][b] += u[i as usize][c] * grads[li][b];
                }
            }
        }
    }
    out
}

/// Apply a scalar node matrix to a vector-valued nodal field per component.
pub fn scalar_matvec<const D: usize>(m: &Csr, x: &[[f64; D]]) -> Vec<[f64; D]> {
    debug_assert_eq!(x.len(), m.n_cols);
    let mut y = vec![[0.0; D]; m.n_rows];
    for i in 0..m.n_rows {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for c in 0..D {
                y[i][c] += v * x[j as usize][c];
            }
        }
    }
    y
}

/// Σ_c x_cᵀ M x_c for a vector-valued nodal field.
pub fn scalar_quadform<const D: usize>(m: &Csr, x: &[[f64; D]]) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.n_rows {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let mut dot = 0.0;
            for c in 0..D {
                dot += x[i][c] * x[j as usize][c];
            }
            acc += v * dot;
        }
    }
    acc
}
