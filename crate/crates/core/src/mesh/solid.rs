//! Updated-Lagrangian solid mesh on linear simplices.
//!
//! Three coordinate sets are carried: the stress-free reference
//! configuration X (integration domain for the solid operators, never
//! mutated), the initial placement x_0, and the current placement x_n.
//! Only the current coordinates change during time stepping.
//!
//! Generated shapes:
//! * `Disc`: concentric rings, ring k at radius k R / m holding 6k nodes,
//!   giving 1 + 3m(m+1) nodes and 6 m^2 triangles for m rings.
//! * `QuarterDisc`: same rings restricted to the first quadrant, ring k
//!   holding ceil(3k/2) arcs with nodes on both straight edges; the mesh
//!   extends from `center` toward +x, +y.
//! * `BallOctant`: the order-n principal-lattice subdivision of a reference
//!   tetrahedron (n^3 tets, (n+1)(n+2)(n+3)/6 nodes) mapped radially so
//!   layer s lands on the sphere of radius s R / n; the mesh extends from
//!   `center` toward -x, -y, -z (the orientation used when the solid sits
//!   at the high corner of a symmetry-reduced box).

use crate::error::FsiError;
use crate::tensor::{self, Mat};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolidShape {
    Disc,
    QuarterDisc,
    BallOctant,
}

/// Which stored coordinate set a geometric query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshConfig {
    Reference,
    Initial,
    Current,
}

#[derive(Debug, Clone)]
pub struct SolidMesh<const D: usize> {
    /// Stress-free reference coordinates X.
    pub reference: Vec<[f64; D]>,
    /// Placement at t = 0.
    pub initial: Vec<[f64; D]>,
    /// Placement at the current time level.
    pub current: Vec<[f64; D]>,
    /// D+1 node indices per simplex.
    pub connectivity: Vec<u32>,
    /// Reference shape-function gradients, D+1 per element.
    ref_grads: Vec<[f64; D]>,
    /// Reference simplex measures, one per element.
    ref_measures: Vec<f64>,
}

impl<const D: usize> SolidMesh<D> {
    /// Build from reference coordinates and connectivity; all three
    /// coordinate sets start equal. Validates indices and orientation.
    pub fn from_parts(reference: Vec<[f64; D]>, connectivity: Vec<u32>) -> Result<Self> {
        if connectivity.len() % (D + 1) != 0 {
            return Err(FsiError::InvalidMesh(format!(
                "connectivity length {} is not a multiple of {}",
                connectivity.len(),
                D + 1
            )));
        }
        let n_nodes = reference.len();
        if n_nodes == 0 || connectivity.is_empty() {
            return Err(FsiError::InvalidMesh("empty mesh".into()));
        }
        for &c in &connectivity {
            if c as usize >= n_nodes {
                return Err(FsiError::InvalidMesh(format!(
                    "node index {c} out of range (mesh has {n_nodes} nodes)"
                )));
            }
        }
        let mut mesh = Self {
            initial: reference.clone(),
            current: reference.clone(),
            reference,
            connectivity,
            ref_grads: Vec::new(),
            ref_measures: Vec::new(),
        };
        mesh.precompute_reference()?;
        Ok(mesh)
    }

    /// Reference gradients and measures; fails on degenerate or inverted
    /// elements.
    fn precompute_reference(&mut self) -> Result<()> {
        let n_el = self.n_elements();
        self.ref_grads = vec![[0.0; D]; n_el * (D + 1)];
        self.ref_measures = vec![0.0; n_el];
        let d_fact: f64 = (1..=D).map(|k| k as f64).product();
        for e in 0..n_el {
            let nodes = self.element_nodes(e);
            let x0 = self.reference[nodes[0] as usize];
            // edge matrix: column i-1 = X_i - X_0
            let mut edges: Mat<D> = [[0.0; D]; D];
            for i in 1..=D {
                let xi = self.reference[nodes[i] as usize];
                for a in 0..D {
                    edges[a][i - 1] = xi[a] - x0[a];
                }
            }
            let det = tensor::det(&edges);
            if det <= 0.0 || !det.is_finite() {
                return Err(FsiError::InvertedElement {
                    element: e,
                    det: det / d_fact,
                });
            }
            self.ref_measures[e] = det / d_fact;
            let inv = tensor::inverse(&edges).expect("det > 0 checked above");
            // grad of barycentric lambda_i is row i-1 of edges^{-1};
            // grad of the vertex-0 function is minus their sum
            let mut g0 = [0.0; D];
            for i in 1..=D {
                let mut g = [0.0; D];
                for a in 0..D {
                    g[a] = inv[i - 1][a];
                    g0[a] -= inv[i - 1][a];
                }
                self.ref_grads[e * (D + 1) + i] = g;
            }
            self.ref_grads[e * (D + 1)] = g0;
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.reference.len()
    }

    pub fn n_elements(&self) -> usize {
        self.connectivity.len() / (D + 1)
    }

    pub fn element_nodes(&self, e: usize) -> &[u32] {
        &self.connectivity[e * (D + 1)..(e + 1) * (D + 1)]
    }

    /// Reference shape gradients of element e, one per vertex.
    pub fn element_ref_grads(&self, e: usize) -> &[[f64; D]] {
        &self.ref_grads[e * (D + 1)..(e + 1) * (D + 1)]
    }

    pub fn element_ref_measure(&self, e: usize) -> f64 {
        self.ref_measures[e]
    }

    fn coords(&self, which: MeshConfig) -> &[[f64; D]] {
        match which {
            MeshConfig::Reference => &self.reference,
            MeshConfig::Initial => &self.initial,
            MeshConfig::Current => &self.current,
        }
    }

    /// Signed measure (area/volume) of one element in a coordinate set.
    pub fn element_measure(&self, e: usize, which: MeshConfig) -> f64 {
        let coords = self.coords(which);
        let nodes = self.element_nodes(e);
        let x0 = coords[nodes[0] as usize];
        let mut edges: Mat<D> = [[0.0; D]; D];
        for i in 1..=D {
            let xi = coords[nodes[i] as usize];
            for a in 0..D {
                edges[a][i - 1] = xi[a] - x0[a];
            }
        }
        let d_fact: f64 = (1..=D).map(|k| k as f64).product();
        tensor::det(&edges) / d_fact
    }

    /// Total signed measure of the mesh in a coordinate set.
    pub fn measure(&self, which: MeshConfig) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_measure(e, which))
            .sum()
    }

    /// Generate one of the built-in shapes. `target_h` controls the element
    /// size; it must be positive and no larger than the radius.
    pub fn generate(
        shape: SolidShape,
        center: [f64; D],
        radius: f64,
        target_h: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(FsiError::InvalidMesh(format!("nonpositive radius {radius}")));
        }
        if !(target_h > 0.0) {
            return Err(FsiError::InvalidMesh(format!(
                "nonpositive target element size {target_h}"
            )));
        }
        if target_h > radius {
            return Err(FsiError::InvalidMesh(format!(
                "target element size {target_h} exceeds radius {radius}"
            )));
        }
        let m = (radius / target_h).ceil() as usize;
        match (D, shape) {
            (2, SolidShape::Disc) => disc_mesh::<D>(center, radius, m, false),
            (2, SolidShape::QuarterDisc) => disc_mesh::<D>(center, radius, m, true),
            (3, SolidShape::BallOctant) => ball_octant_mesh::<D>(center, radius, m),
            _ => Err(FsiError::DimensionMismatch(format!(
                "shape {shape:?} is not available in {D}D"
            ))),
        }
    }

    /// Overwrite the current placement.
    pub fn set_current(&mut self, coords: Vec<[f64; D]>) {
        debug_assert_eq!(coords.len(), self.n_nodes());
        self.current = coords;
    }

    /// Volume-preserving stretch diag(s, 1/s) in the first two axes about
    /// `center`, applied to the initial and current placements; the
    /// reference configuration keeps its stress-free shape. Requires an
    /// undeformed mesh (all three coordinate sets still equal).
    pub fn apply_stretch(&mut self, center: [f64; D], s: f64) -> Result<()> {
        if !(s > 0.0) {
            return Err(FsiError::InvalidMesh(format!(
                "stretch ratio must be positive, got {s}"
            )));
        }
        if D < 2 {
            return Err(FsiError::DimensionMismatch(
                "stretch needs at least two axes".into(),
            ));
        }
        let undeformed = self
            .reference
            .iter()
            .zip(&self.current)
            .zip(&self.initial)
            .all(|((r, c), i)| r == c && r == i);
        if !undeformed {
            return Err(FsiError::InvalidMesh(
                "stretch must be applied to an undeformed mesh".into(),
            ));
        }
        for x in self.initial.iter_mut() {
            x[0] = center[0] + s * (x[0] - center[0]);
            x[1] = center[1] + (x[1] - center[1]) / s;
        }
        self.current = self.initial.clone();
        Ok(())
    }

    /// Serialize the reference configuration: header `dim nnodes nelems`,
    /// one coordinate line per node (17 significant digits, so the decimal
    /// text round-trips bit-exactly), one 1-based vertex line per element.
    pub fn to_ascii(&self) -> String {
        let mut s = format!("{} {} {}\n", D, self.n_nodes(), self.n_elements());
        for p in &self.reference {
            let line: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        for e in 0..self.n_elements() {
            let line: Vec<String> = self
                .element_nodes(e)
                .iter()
                .map(|v| (v + 1).to_string())
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parse the format written by [`to_ascii`](Self::to_ascii). The node
    /// coordinates become all three configurations, as in `from_parts`.
    pub fn from_ascii(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| FsiError::MeshFormat("empty file".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(FsiError::MeshFormat(format!(
                "header must be `dim nnodes nelems`, got {header:?}"
            )));
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| FsiError::MeshFormat(format!("bad {what}: {s:?}")))
        };
        let dim = parse_usize(head[0], "dimension")?;
        if dim != D {
            return Err(FsiError::DimensionMismatch(format!(
                "mesh file is {dim}D, expected {D}D"
            )));
        }
        let n_nodes = parse_usize(head[1], "node count")?;
        let n_elems = parse_usize(head[2], "element count")?;
        let mut coords = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            let line = lines.next().ok_or_else(|| {
                FsiError::MeshFormat(format!("missing node line {}", k + 1))
            })?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != D {
                return Err(FsiError::MeshFormat(format!(
                    "node line {} has {} values, expected {D}",
                    k + 1,
                    vals.len()
                )));
            }
            let mut p = [0.0; D];
            for (a, v) in vals.iter().enumerate() {
                p[a] = v.parse().map_err(|_| {
                    FsiError::MeshFormat(format!("bad coordinate {v:?} on node line {}", k + 1))
                })?;
            }
            coords.push(p);
        }
        let mut conn = Vec::with_capacity(n_elems * (D + 1));
        for k in 0..n_elems {
            let line = lines.next().ok_or_else(|| {
                FsiError::MeshFormat(format!("missing element line {}", k + 1))
            })?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != D + 1 {
                return Err(FsiError::MeshFormat(format!(
                    "element line {} has {} indices, expected {}",
                    k + 1,
                    vals.len(),
                    D + 1
                )));
            }
            for v in vals {
                let idx = parse_usize(v, "vertex index")?;
                if idx == 0 {
                    return Err(FsiError::MeshFormat(format!(
                        "vertex indices are 1-based, got 0 on element line {}",
                        k + 1
                    )));
                }
                conn.push((idx - 1) as u32);
            }
        }
        if lines.next().is_some() {
            return Err(FsiError::MeshFormat("trailing content after last element".into()));
        }
        Self::from_parts(coords, conn)
    }
}

/// Ring counts: full disc 6k, quarter disc ceil(3k/2).
fn ring_count(k: usize, quarter: bool) -> usize {
    if quarter {
        (3 * k + 1) / 2
    } else {
        6 * k
    }
}

/// Concentric-ring triangulation of a disc or quarter disc with m rings.
fn disc_mesh<const D: usize>(
    center: [f64; D],
    radius: f64,
    m: usize,
    quarter: bool,
) -> Result<SolidMesh<D>> {
    assert_eq!(D, 2);
    let sector = if quarter {
        std::f64::consts::FRAC_PI_2
    } else {
        2.0 * std::f64::consts::PI
    };
    let mut coords: Vec<[f64; D]> = vec![center];
    // ring_start[k], ring_n[k]: first node index and node count of ring k
    let mut ring_start = vec![0usize];
    let mut ring_n = vec![1usize];
    for k in 1..=m {
        let segs = ring_count(k, quarter);
        let n_nodes = if quarter { segs + 1 } else { segs };
        ring_start.push(coords.len());
        ring_n.push(n_nodes);
        let r = radius * k as f64 / m as f64;
        for j in 0..n_nodes {
            let theta = sector * j as f64 / segs as f64;
            let mut p = center;
            p[0] += r * theta.cos();
            p[1] += r * theta.sin();
            coords.push(p);
        }
    }
    let mut conn: Vec<u32> = Vec::new();
    // center fan
    {
        let segs = ring_count(1, quarter);
        for j in 0..segs {
            let a = ring_start[1] + j;
            let b = ring_start[1] + (j + 1) % ring_n[1];
            conn.extend_from_slice(&[0, a as u32, b as u32]);
        }
    }
    // strips between consecutive rings, merged by angle
    for k in 1..m {
        let (ia, na) = (ring_start[k], ring_count(k, quarter));
        let (ib, nb) = (ring_start[k + 1], ring_count(k + 1, quarter));
        let node = |start: usize, n_nodes: usize, j: usize| (start + j % n_nodes) as u32;
        let mut i = 0usize; // segments consumed on inner ring
        let mut j = 0usize; // segments consumed on outer ring
        while i < na || j < nb {
            let next_inner = (i + 1) as f64 / na as f64;
            let next_outer = (j + 1) as f64 / nb as f64;
            if j < nb && (i == na || next_outer <= next_inner) {
                conn.extend_from_slice(&[
                    node(ia, ring_n[k], i),
                    node(ib, ring_n[k + 1], j),
                    node(ib, ring_n[k + 1], j + 1),
                ]);
                j += 1;
            } else {
                conn.extend_from_slice(&[
                    node(ia, ring_n[k], i),
                    node(ib, ring_n[k + 1], j),
                    node(ia, ring_n[k], i + 1),
                ]);
                i += 1;
            }
        }
    }
    SolidMesh::from_parts(coords, conn)
}

/// Octant of a ball via the principal-lattice subdivision of a reference
/// tetrahedron, mapped so the L1 level sets become spheres. The octant
/// extends from `center` toward -x, -y, -z.
fn ball_octant_mesh<const D: usize>(
    center: [f64; D],
    radius: f64,
    n: usize,
) -> Result<SolidMesh<D>> {
    assert_eq!(D, 3);
    // lattice node (i, j, k), i + j + k <= n
    let idx = |i: usize, j: usize, k: usize| -> u32 {
        // nodes enumerated k-major, then j, then i
        let mut count = 0usize;
        for kk in 0..k {
            let s = n - kk;
            count += (s + 1) * (s + 2) / 2;
        }
        let s = n - k;
        for jj in 0..j {
            count += s + 1 - jj;
        }
        (count + i) as u32
    };
    let mut coords: Vec<[f64; D]> = Vec::new();
    for k in 0..=n {
        for j in 0..=(n - k) {
            for i in 0..=(n - k - j) {
                let p = [i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64];
                let s = p[0] + p[1] + p[2];
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let mut q = [0.0; D];
                if norm > 0.0 {
                    let scale = radius * s / norm;
                    for a in 0..3 {
                        q[a] = p[a] * scale;
                    }
                }
                // place toward the negative octant
                let mut x = [0.0; D];
                for a in 0..3 {
                    x[a] = center[a] - q[a];
                }
                coords.push(x);
            }
        }
    }
    let mut conn: Vec<u32> = Vec::new();
    let mut push_tet = |a: u32, b: u32, c: u32, d: u32| {
        conn.extend_from_slice(&[a, b, c, d]);
    };
    for k in 0..n {
        for j in 0..(n - k) {
            for i in 0..(n - k - j) {
                let s = i + j + k;
                let v000 = idx(i, j, k);
                let v100 = idx(i + 1, j, k);
                let v010 = idx(i, j + 1, k);
                let v001 = idx(i, j, k + 1);
                push_tet(v000, v100, v010, v001);
                if s + 2 <= n {
                    let v110 = idx(i + 1, j + 1, k);
                    let v101 = idx(i + 1, j, k + 1);
                    let v011 = idx(i, j + 1, k + 1);
                    // octahedron split along the v100 - v011 diagonal
                    push_tet(v100, v011, v010, v110);
                    push_tet(v100, v011, v110, v101);
                    push_tet(v100, v011, v101, v001);
                    push_tet(v100, v011, v001, v010);
                    if s + 3 <= n {
                        let v111 = idx(i + 1, j + 1, k + 1);
                        push_tet(v110, v101, v011, v111);
                    }
                }
            }
        }
    }
    // the reflection toward the negative octant flips orientation; repair
    // element by element by swapping two vertices where needed
    let mut mesh_coords = coords;
    let d_fact = 6.0;
    let n_el = conn.len() / 4;
    for e in 0..n_el {
        let nodes: Vec<usize> = conn[e * 4..e * 4 + 4].iter().map(|&c| c as usize).collect();
        let x0 = mesh_coords[nodes[0]];
        let mut edges: Mat<D> = [[0.0; D]; D];
        for i in 1..=3 {
            for a in 0..3 {
                edges[a][i - 1] = mesh_coords[nodes[i]][a] - x0[a];
            }
        }
        if tensor::det(&edges) / d_fact < 0.0 {
            conn.swap(e * 4 + 2, e * 4 + 3);
        }
    }
    SolidMesh::from_parts(std::mem::take(&mut mesh_coords), conn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn disc_node_and_element_counts() {
        // m rings: 1 + 3m(m+1) nodes, 6m^2 triangles
        for m in 1..=5 {
            let mesh =
                SolidMesh::<2>::generate(SolidShape::Disc, [0.0, 0.0], 1.0, 1.0 / m as f64)
                    .unwrap();
            assert_eq!(mesh.n_nodes(), 1 + 3 * m * (m + 1));
            assert_eq!(mesh.n_elements(), 6 * m * m);
        }
    }

    #[test]
    fn fine_disc_area_converges_to_the_exact_circle() {
        // m = 23 gives 3174 triangles, fine enough for 0.5% area error
        let r = 0.2;
        let mesh =
            SolidMesh::<2>::generate(SolidShape::Disc, [0.5, 0.5], r, r / 23.0).unwrap();
        assert_eq!(mesh.n_elements(), 6 * 23 * 23);
        let area = mesh.measure(MeshConfig::Reference);
        let exact = PI * r * r;
        assert!(
            (area - exact).abs() / exact < 0.005,
            "area {area} vs {exact}"
        );
    }

    #[test]
    fn coarse_disc_area_within_5_percent() {
        let r = 0.2;
        let mesh = SolidMesh::<2>::generate(SolidShape::Disc, [0.0, 0.0], r, r / 4.0).unwrap();
        assert_eq!(mesh.n_elements(), 96);
        let area = mesh.measure(MeshConfig::Reference);
        let exact = PI * r * r;
        assert!((area - exact).abs() / exact < 0.05);
    }

    #[test]
    fn quarter_disc_area() {
        let r = 0.4;
        let mesh =
            SolidMesh::<2>::generate(SolidShape::QuarterDisc, [0.0, 0.0], r, r / 12.0).unwrap();
        let area = mesh.measure(MeshConfig::Reference);
        let exact = 0.25 * PI * r * r;
        assert!((area - exact).abs() / exact < 0.01);
        // all nodes in the closed first quadrant relative to center
        for p in &mesh.reference {
            assert!(p[0] >= -1e-14 && p[1] >= -1e-14);
        }
    }

    #[test]
    fn ball_octant_volume() {
        let r = 0.2;
        let mesh = SolidMesh::<3>::generate(
            SolidShape::BallOctant,
            [0.5, 0.5, 0.3],
            r,
            r / 6.0,
        )
        .unwrap();
        assert_eq!(mesh.n_elements(), 6 * 6 * 6);
        let vol = mesh.measure(MeshConfig::Reference);
        let exact = (1.0 / 8.0) * (4.0 / 3.0) * PI * r * r * r;
        // inscribed linear tets under-count; measured deficit is 4.1% at
        // n=6 and falls as 1/n^2 (see refinement test below)
        assert!((vol - exact).abs() / exact < 0.045, "vol {vol} vs {exact}");
        // extends toward the negative octant from center
        for p in &mesh.reference {
            assert!(p[0] <= 0.5 + 1e-14 && p[1] <= 0.5 + 1e-14 && p[2] <= 0.3 + 1e-14);
            assert!(p[0] >= 0.3 - 1e-14);
        }
        // positive measures element-wise
        for e in 0..mesh.n_elements() {
            assert!(mesh.element_measure(e, MeshConfig::Reference) > 0.0);
        }
    }

    /// Halving target_h reduces the boundary-measure error by at least 3x
    /// (second-order boundary approximation).
    #[test]
    fn refinement_reduces_measure_error() {
        let r = 0.3;
        let exact2 = PI * r * r;
        let e_coarse = {
            let mesh =
                SolidMesh::<2>::generate(SolidShape::Disc, [0.0, 0.0], r, r / 4.0).unwrap();
            (mesh.measure(MeshConfig::Reference) - exact2).abs()
        };
        let e_fine = {
            let mesh =
                SolidMesh::<2>::generate(SolidShape::Disc, [0.0, 0.0], r, r / 8.0).unwrap();
            (mesh.measure(MeshConfig::Reference) - exact2).abs()
        };
        assert!(e_coarse / e_fine >= 3.0, "ratio {}", e_coarse / e_fine);

        let exact3 = (1.0 / 8.0) * (4.0 / 3.0) * PI * r * r * r;
        let e_coarse = {
            let mesh =
                SolidMesh::<3>::generate(SolidShape::BallOctant, [0.0; 3], r, r / 3.0).unwrap();
            (mesh.measure(MeshConfig::Reference) - exact3).abs()
        };
        let e_fine = {
            let mesh =
                SolidMesh::<3>::generate(SolidShape::BallOctant, [0.0; 3], r, r / 6.0).unwrap();
            (mesh.measure(MeshConfig::Reference) - exact3).abs()
        };
        assert!(e_coarse / e_fine >= 3.0, "ratio {}", e_coarse / e_fine);
    }

    #[test]
    fn generate_rejects_bad_sizes() {
        assert!(SolidMesh::<2>::generate(SolidShape::Disc, [0.0; 2], -1.0, 0.1).is_err());
        assert!(SolidMesh::<2>::generate(SolidShape::Disc, [0.0; 2], 0.2, 0.0).is_err());
        assert!(SolidMesh::<2>::generate(SolidShape::Disc, [0.0; 2], 0.2, 0.3).is_err());
        assert!(SolidMesh::<2>::generate(SolidShape::BallOctant, [0.0; 2], 0.2, 0.1).is_err());
    }

    #[test]
    fn stretch_preserves_area_and_maps_exactly() {
        let r = 0.4;
        let center = [0.0, 0.0];
        let mut mesh =
            SolidMesh::<2>::generate(SolidShape::QuarterDisc, center, r, r / 10.0).unwrap();
        let before = mesh.measure(MeshConfig::Reference);
        let snapshot = mesh.reference.clone();
        let s = 1.4;
        mesh.apply_stretch(center, s).unwrap();
        // area preserved (diag(s, 1/s) is unimodular)
        let after = mesh.measure(MeshConfig::Current);
        assert_relative_eq!(after, before, max_relative = 1e-12);
        // exact coordinate map, reference untouched
        for (orig, (cur, refc)) in snapshot.iter().zip(mesh.current.iter().zip(&mesh.reference)) {
            assert_eq!(cur[0], s * orig[0]);
            assert_eq!(cur[1], orig[1] / s);
            assert_eq!(refc, orig);
        }
        assert_eq!(mesh.initial, mesh.current);
        // a second stretch must be rejected: mesh no longer undeformed
        assert!(mesh.apply_stretch(center, s).is_err());
    }

    #[test]
    fn from_parts_rejects_inverted_and_out_of_range() {
        // clockwise triangle
        let coords = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        assert!(matches!(
            SolidMesh::<2>::from_parts(coords, vec![0, 1, 2]),
            Err(FsiError::InvertedElement { .. })
        ));
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(SolidMesh::<2>::from_parts(coords.clone(), vec![0, 1, 3]).is_err());
        assert!(SolidMesh::<2>::from_parts(coords, vec![0, 1, 2]).is_ok());
    }

    #[test]
    fn reference_gradients_reproduce_linear_fields() {
        let mesh =
            SolidMesh::<2>::generate(SolidShape::Disc, [0.2, -0.1], 0.5, 0.1).unwrap();
        // nodal values of f(X) = 3 X_0 - 2 X_1 + 1; per-element gradient
        // must come out as (3, -2)
        let nodal: Vec<f64> = mesh
            .reference
            .iter()
            .map(|p| 3.0 * p[0] - 2.0 * p[1] + 1.0)
            .collect();
        for e in 0..mesh.n_elements() {
            let mut g = [0.0; 2];
            for (local, &node) in mesh.element_nodes(e).iter().enumerate() {
                let sg = mesh.element_ref_grads(e)[local];
                g[0] += nodal[node as usize] * sg[0];
                g[1] += nodal[node as usize] * sg[1];
            }
            assert_relative_eq!(g[0], 3.0, epsilon = 1e-10);
            assert_relative_eq!(g[1], -2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ascii_round_trip_is_bit_exact() {
        let mesh =
            SolidMesh::<2>::generate(SolidShape::Disc, [0.5, 0.25], 0.2, 0.2 / 3.0).unwrap();
        let text = mesh.to_ascii();
        let back = SolidMesh::<2>::from_ascii(&text).unwrap();
        assert_eq!(back.reference, mesh.reference);
        assert_eq!(back.connectivity, mesh.connectivity);
        // decimal text itself is the round-trip contract
        assert_eq!(back.to_ascii(), text);

        let mesh3 =
            SolidMesh::<3>::generate(SolidShape::BallOctant, [0.5, 0.5, 0.3], 0.2, 0.05)
                .unwrap();
        let text3 = mesh3.to_ascii();
        let back3 = SolidMesh::<3>::from_ascii(&text3).unwrap();
        assert_eq!(back3.to_ascii(), text3);
    }

    #[test]
    fn ascii_parser_rejects_malformed_input() {
        assert!(matches!(
            SolidMesh::<2>::from_ascii(""),
            Err(FsiError::MeshFormat(_))
        ));
        assert!(matches!(
            SolidMesh::<2>::from_ascii("3 3 1\n0 0 0\n1 0 0\n0 1 0\n1 2 3\n"),
            Err(FsiError::DimensionMismatch(_))
        ));
        // 0-based index
        assert!(matches!(
            SolidMesh::<2>::from_ascii("2 3 1\n0 0\n1 0\n0 1\n0 1 2\n"),
            Err(FsiError::MeshFormat(_))
        ));
        // missing node line
        assert!(matches!(
            SolidMesh::<2>::from_ascii("2 3 1\n0 0\n1 0\n"),
            Err(FsiError::MeshFormat(_))
        ));
        // header, nodes, elements, then junk
        assert!(matches!(
            SolidMesh::<2>::from_ascii("2 3 1\n0 0\n1 0\n0 1\n1 2 3\nextra\n"),
            Err(FsiError::MeshFormat(_))
        ));
    }
}

