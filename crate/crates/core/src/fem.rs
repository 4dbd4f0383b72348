//! Reference elements, quadrature rules and physical gradients.
//!
//! Velocity lives on tensor-product biquadratic elements (Q2), pressure on
//! bilinear vertices optionally enriched with one per-cell constant
//! (Q1 + P0), and the solid on linear simplices. Local node ordering is
//! lexicographic with axis 0 fastest, matching the grid connectivity.

use crate::error::FsiError;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// 9-node biquadratic quadrilateral.
    Q2Quad,
    /// 27-node triquadratic hexahedron.
    Q2Hex,
    /// 3-node linear triangle on the unit simplex.
    P1Triangle,
    /// 4-node linear tetrahedron on the unit simplex.
    P1Tet,
    /// 4 bilinear vertex functions plus one per-cell constant.
    Q1P0Quad,
    /// 8 trilinear vertex functions plus one per-cell constant.
    Q1P0Hex,
}

/// Reference integration domain of an element kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefDomain {
    /// [-1, 1]^D box.
    Box,
    /// Unit simplex {x_i >= 0, sum x_i <= 1}.
    Simplex,
}

impl ElementKind {
    pub fn dim(&self) -> usize {
        match self {
            ElementKind::Q2Quad | ElementKind::P1Triangle | ElementKind::Q1P0Quad => 2,
            ElementKind::Q2Hex | ElementKind::P1Tet | ElementKind::Q1P0Hex => 3,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            ElementKind::Q2Quad => 9,
            ElementKind::Q2Hex => 27,
            ElementKind::P1Triangle => 3,
            ElementKind::P1Tet => 4,
            ElementKind::Q1P0Quad => 5,
            ElementKind::Q1P0Hex => 9,
        }
    }

    pub fn domain(&self) -> RefDomain {
        match self {
            ElementKind::Q2Quad | ElementKind::Q2Hex | ElementKind::Q1P0Quad
            | ElementKind::Q1P0Hex => RefDomain::Box,
            ElementKind::P1Triangle | ElementKind::P1Tet => RefDomain::Simplex,
        }
    }
}

/// Quadratic 1D shape functions on [-1, 1] with nodes at -1, 0, +1.
#[inline]
fn q2_line(xi: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
        [xi - 0.5, -2.0 * xi, xi + 0.5],
    )
}

/// Linear 1D shape functions on [-1, 1] with nodes at -1, +1.
#[inline]
fn q1_line(xi: f64) -> ([f64; 2], [f64; 2]) {
    ([0.5 * (1.0 - xi), 0.5 * (1.0 + xi)], [-0.5, 0.5])
}

/// Shape function values and reference gradients at a local point.
///
/// For the Q1+P0 kinds the last entry is the cell constant: value 1,
/// gradient 0; the Kronecker-delta property applies to the vertex part only.
pub fn shape_values<const D: usize>(
    kind: ElementKind,
    xi: [f64; D],
) -> (Vec<f64>, Vec<[f64; D]>) {
    assert_eq!(kind.dim(), D, "element kind dimension mismatch");
    match kind {
        ElementKind::Q2Quad | ElementKind::Q2Hex => tensor_shapes::<D, 3>(xi, q2_line),
        ElementKind::Q1P0Quad | ElementKind::Q1P0Hex => {
            let (mut vals, mut grads) = tensor_shapes::<D, 2>(xi, q1_line);
            vals.push(1.0);
            grads.push([0.0; D]);
            (vals, grads)
        }
        ElementKind::P1Triangle | ElementKind::P1Tet => {
            let mut vals = Vec::with_capacity(D + 1);
            let mut grads = Vec::with_capacity(D + 1);
            let mut first = 1.0;
            for &x in xi.iter() {
                first -= x;
            }
            vals.push(first);
            let mut g0 = [0.0; D];
            for g in g0.iter_mut() {
                *g = -1.0;
            }
            grads.push(g0);
            for a in 0..D {
                vals.push(xi[a]);
                let mut g = [0.0; D];
                g[a] = 1.0;
                grads.push(g);
            }
            (vals, grads)
        }
    }
}

/// Tensor-product shapes from a 1D basis with N nodes per axis,
/// lexicographic ordering (axis 0 fastest).
fn tensor_shapes<const D: usize, const N: usize>(
    xi: [f64; D],
    line: fn(f64) -> ([f64; N], [f64; N]),
) -> (Vec<f64>, Vec<[f64; D]>) {
    let mut vals_1d = [[0.0; N]; D];
    let mut grads_1d = [[0.0; N]; D];
    for a in 0..D {
        let (v, g) = line(xi[a]);
        vals_1d[a] = v;
        grads_1d[a] = g;
    }
    let n_total = N.pow(D as u32);
    let mut vals = Vec::with_capacity(n_total);
    let mut grads = Vec::with_capacity(n_total);
    for node in 0..n_total {
        let mut idx = [0usize; D];
        let mut rem = node;
        for a in 0..D {
            idx[a] = rem % N;
            rem /= N;
        }
        let mut v = 1.0;
        for a in 0..D {
            v *= vals_1d[a][idx[a]];
        }
        let mut g = [0.0; D];
        for b in 0..D {
            let mut p = 1.0;
            for a in 0..D {
                p *= if a == b {
                    grads_1d[a][idx[a]]
                } else {
                    vals_1d[a][idx[a]]
                };
            }
            g[b] = p;
        }
        vals.push(v);
        grads.push(g);
    }
    (vals, grads)
}

/// Positive-weight quadrature rule on a reference domain.
#[derive(Debug, Clone)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], closed forms up to n = 5.
fn gauss_line(n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let (pts, wts): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let p = 1.0 / 3.0f64.sqrt();
            (vec![-p, p], vec![1.0, 1.0])
        }
        3 => {
            let p = (3.0f64 / 5.0).sqrt();
            (vec![-p, 0.0, p], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt();
            let p1 = ((3.0 - 2.0 * s) / 7.0).sqrt();
            let p2 = ((3.0 + 2.0 * s) / 7.0).sqrt();
            let w1 = (18.0 + 30.0f64.sqrt()) / 36.0;
            let w2 = (18.0 - 30.0f64.sqrt()) / 36.0;
            (vec![-p2, -p1, p1, p2], vec![w2, w1, w1, w2])
        }
        5 => {
            let s = (10.0f64 / 7.0).sqrt();
            let p1 = (5.0 - 2.0 * s).sqrt() / 3.0;
            let p2 = (5.0 + 2.0 * s).sqrt() / 3.0;
            let w0 = 128.0 / 225.0;
            let w1 = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
            let w2 = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
            (vec![-p2, -p1, 0.0, p1, p2], vec![w2, w1, w0, w1, w2])
        }
        _ => return None,
    };
    Some((pts, wts))
}

/// Quadrature rule exact for polynomials up to `order` on the reference
/// domain of `kind`.
///
/// Boxes use tensor Gauss-Legendre (orders up to 9). Simplices use the
/// classical symmetric rules for orders 1-2 (midpoint triangle rule, 4-point
/// tetrahedron rule) and a collapsed-coordinate tensor construction for
/// orders 3-5, which keeps every weight positive.
pub fn quadrature_rule<const D: usize>(
    kind: ElementKind,
    order: usize,
) -> Result<QuadratureRule<D>> {
    assert_eq!(kind.dim(), D, "element kind dimension mismatch");
    match kind.domain() {
        RefDomain::Box => {
            let n = order / 2 + 1;
            let (pts, wts) = gauss_line(n).ok_or_else(|| FsiError::UnsupportedOrder {
                kind: format!("{kind:?}"),
                order,
            })?;
            let n_total = n.pow(D as u32);
            let mut points = Vec::with_capacity(n_total);
            let mut weights = Vec::with_capacity(n_total);
            for q in 0..n_total {
                let mut idx = [0usize; D];
                let mut rem = q;
                for a in 0..D {
                    idx[a] = rem % n;
                    rem /= n;
                }
                let mut p = [0.0; D];
                let mut w = 1.0;
                for a in 0..D {
                    p[a] = pts[idx[a]];
                    w *= wts[idx[a]];
                }
                points.push(p);
                weights.push(w);
            }
            Ok(QuadratureRule { points, weights })
        }
        RefDomain::Simplex => simplex_rule::<D>(order).ok_or_else(|| FsiError::UnsupportedOrder {
            kind: format!("{kind:?}"),
            order,
        }),
    }
}

fn simplex_rule<const D: usize>(order: usize) -> Option<QuadratureRule<D>> {
    if order == 0 || order > 5 {
        return None;
    }
    match (D, order) {
        (2, 1) => Some(rule_from::<D>(&[[1.0 / 3.0, 1.0 / 3.0, 0.0]], &[0.5])),
        (2, 2) => Some(rule_from::<D>(
            &[[0.5, 0.0, 0.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.0]],
            &[1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        )),
        (3, 1) => Some(rule_from::<D>(&[[0.25, 0.25, 0.25]], &[1.0 / 6.0])),
        (3, 2) => {
            let a = (5.0 + 3.0 * 5.0f64.sqrt()) / 20.0;
            let b = (5.0 - 5.0f64.sqrt()) / 20.0;
            Some(rule_from::<D>(
                &[[b, b, b], [a, b, b], [b, a, b], [b, b, a]],
                &[1.0 / 24.0; 4],
            ))
        }
        _ => collapsed_simplex_rule::<D>(order),
    }
}

fn rule_from<const D: usize>(pts: &[[f64; 3]], wts: &[f64]) -> QuadratureRule<D> {
    let points = pts
        .iter()
        .map(|p| {
            let mut q = [0.0; D];
            q.copy_from_slice(&p[..D]);
            q
        })
        .collect();
    QuadratureRule {
        points,
        weights: wts.to_vec(),
    }
}

/// Collapsed (Duffy) tensor rule on the unit simplex. The per-axis Gauss
/// count covers both the monomial degree and the collapse jacobian, so the
/// rule is exact for total degree `order`.
fn collapsed_simplex_rule<const D: usize>(order: usize) -> Option<QuadratureRule<D>> {
    let n = (order + D).div_ceil(2);
    let (pts, wts) = gauss_line(n)?;
    // Map [-1, 1] Gauss to [0, 1].
    let g: Vec<f64> = pts.iter().map(|p| 0.5 * (p + 1.0)).collect();
    let w: Vec<f64> = wts.iter().map(|w| 0.5 * w).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match D {
        2 => {
            for (gi, wi) in g.iter().zip(&w) {
                for (gj, wj) in g.iter().zip(&w) {
                    let x = *gi;
                    let y = gj * (1.0 - gi);
                    let mut p = [0.0; D];
                    p[0] = x;
                    p[1] = y;
                    points.push(p);
                    weights.push(wi * wj * (1.0 - gi));
                }
            }
        }
        3 => {
            for (gi, wi) in g.iter().zip(&w) {
                for (gj, wj) in g.iter().zip(&w) {
                    for (gk, wk) in g.iter().zip(&w) {
                        let x = *gi;
                        let y = gj * (1.0 - gi);
                        let z = gk * (1.0 - gi) * (1.0 - gj);
                        let mut p = [0.0; D];
                        p[0] = x;
                        p[1] = y;
                        p[2] = z;
                        points.push(p);
                        weights.push(wi * wj * wk * (1.0 - gi) * (1.0 - gi) * (1.0 - gj));
                    }
                }
            }
        }
        _ => return None,
    }
    Some(QuadratureRule { points, weights })
}

/// Physical gradients and jacobian determinant of the reference-to-physical
/// map at one quadrature point.
///
/// `element` is only used for error reporting. Fails when the map is
/// inverted (determinant <= 0).
pub fn physical_gradients<const D: usize>(
    element: usize,
    node_coords: &[[f64; D]],
    ref_grads: &[[f64; D]],
) -> Result<(Vec<[f64; D]>, f64)> {
    assert_eq!(node_coords.len(), ref_grads.len());
    // J_ab = d x_a / d xi_b
    let mut j = [[0.0; D]; D];
    for (x, g) in node_coords.iter().zip(ref_grads) {
        for a in 0..D {
            for b in 0..D {
                j[a][b] += x[a] * g[b];
            }
        }
    }
    let det = crate::tensor::det(&j);
    if det <= 0.0 || !det.is_finite() {
        return Err(FsiError::InvertedElement { element, det });
    }
    let j_inv = crate::tensor::inverse(&j).ok_or(FsiError::InvertedElement { element, det })?;
    // grad_phys = J^{-T} grad_ref
    let phys = ref_grads
        .iter()
        .map(|g| {
            let mut p = [0.0; D];
            for a in 0..D {
                let mut s = 0.0;
                for b in 0..D {
                    s += j_inv[b][a] * g[b];
                }
                p[a] = s;
            }
            p
        })
        .collect();
    Ok((phys, det))
}
