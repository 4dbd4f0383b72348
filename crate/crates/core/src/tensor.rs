//! Small fixed-size tensor algebra for deformation gradients.
//!
//! Deformation gradients and velocity gradients are per-element constant
//! D x D matrices (D = 2 or 3), stored as nested arrays. Operations here are
//! written out explicitly so their floating-point behaviour is easy to
//! reason about in the energy identity tests.

/// Row-major D x D matrix.
pub type Mat<const D: usize> = [[f64; D]; D];

/// D-vector.
pub type Vec_<const D: usize> = [f64; D];

pub fn identity<const D: usize>() -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        m[i][i] = 1.0;
    }
    m
}

pub fn zero<const D: usize>() -> Mat<D> {
    [[0.0; D]; D]
}

pub fn add<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[i][j] + b[i][j];
        }
    }
    m
}

pub fn scale<const D: usize>(a: &Mat<D>, s: f64) -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[i][j] * s;
        }
    }
    m
}

pub fn matmul<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            let mut s = 0.0;
            for k in 0..D {
                s += a[i][k] * b[k][j];
            }
            m[i][j] = s;
        }
    }
    m
}

pub fn transpose<const D: usize>(a: &Mat<D>) -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[j][i];
        }
    }
    m
}

pub fn trace<const D: usize>(a: &Mat<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i][i];
    }
    s
}

/// Frobenius inner product a : b.
pub fn ddot<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        for j in 0..D {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Squared Frobenius norm |a|^2.
pub fn frob2<const D: usize>(a: &Mat<D>) -> f64 {
    ddot(a, a)
}

pub fn det<const D: usize>(a: &Mat<D>) -> f64 {
    match D {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("only D = 1, 2, 3 are used"),
    }
}

/// Inverse; returns None when the determinant vanishes.
pub fn inverse<const D: usize>(a: &Mat<D>) -> Option<Mat<D>> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let inv_d = 1.0 / d;
    let mut m = [[0.0; D]; D];
    match D {
        1 => m[0][0] = inv_d,
        2 => {
            m[0][0] = a[1][1] * inv_d;
            m[0][1] = -a[0][1] * inv_d;
            m[1][0] = -a[1][0] * inv_d;
            m[1][1] = a[0][0] * inv_d;
        }
        3 => {
            m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_d;
            m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_d;
            m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_d;
            m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_d;
            m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_d;
            m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_d;
            m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_d;
            m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_d;
            m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_d;
        }
        _ => unreachable!("only D = 1, 2, 3 are used"),
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn det_and_inverse_2d() {
        let a: Mat<2> = [[2.0, 1.0], [1.0, 3.0]];
        assert_relative_eq!(det(&a), 5.0);
        let inv = inverse(&a).unwrap();
        let p = matmul(&a, &inv);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(p[i][j], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn det_and_inverse_3d() {
        let a: Mat<3> = [[2.0, 1.0, 0.5], [0.3, 3.0, 1.0], [0.1, 0.2, 1.5]];
        let inv = inverse(&a).unwrap();
        let p = matmul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(p[i][j], expect, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(det(&identity::<3>()), 1.0);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a: Mat<2> = [[1.0, 2.0], [2.0, 4.0]];
        assert!(inverse(&a).is_none());
    }

    #[test]
    fn trace_and_ddot() {
        let a: Mat<2> = [[1.0, 2.0], [3.0, 4.0]];
        assert_relative_eq!(trace(&a), 5.0);
        assert_relative_eq!(ddot(&a, &a), 1.0 + 4.0 + 9.0 + 16.0);
        assert_relative_eq!(frob2(&identity::<3>()), 3.0);
    }
}
