//! Minimal sparse matrix plumbing: triplet accumulation and CSR storage.
//!
//! Assembly pushes unsorted (row, col, value) triplets; `Csr::from_triplets`
//! sorts by (row, col) and sums duplicates. Construction is fully
//! deterministic (stable for equal keys, single-threaded) so repeated
//! assemblies of the same state are bit-identical, which the output
//! determinism tests rely on.

/// Unassembled COO accumulator.
#[derive(Debug, Clone)]
pub struct Triplets {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(u32, u32, f64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row as u32, col as u32, val));
    }

    pub fn extend_from(&mut self, other: &Triplets) {
        debug_assert!(other.n_rows == self.n_rows && other.n_cols == self.n_cols);
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn extend_scaled(&mut self, other: &Triplets, scale: f64) {
        debug_assert!(other.n_rows <= self.n_rows && other.n_cols <= self.n_cols);
        self.entries
            .extend(other.entries.iter().map(|&(r, c, v)| (r, c, v * scale)));
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Sort-and-sum compression. Entries with equal (row, col) are added in
    /// their push order, keeping the result independent of machine state.
    pub fn from_triplets(t: &Triplets) -> Self {
        let mut order: Vec<u32> = (0..t.entries.len() as u32).collect();
        order.sort_by_key(|&i| {
            let (r, c, _) = t.entries[i as usize];
            ((r as u64) << 32) | c as u64
        });

        let mut row_ptr = vec![0usize; t.n_rows + 1];
        let mut cols = Vec::with_capacity(t.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.entries.len());
        let mut last: Option<(u32, u32)> = None;
        for &i in &order {
            let (r, c, v) = t.entries[i as usize];
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..t.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows: t.n_rows,
            n_cols: t.n_cols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Append all entries, scaled, to a triplet list (indices unchanged).
    pub fn extend_scaled_into(&self, out: &mut Triplets, scale: f64) {
        debug_assert!(self.n_rows <= out.n_rows && self.n_cols <= out.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out.entries.push((r as u32, c, v * scale));
            }
        }
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c as usize];
            }
            y[r] = s;
        }
        y
    }

    /// x^T A x together with sum_ij |A_ij x_i x_j|, the natural magnitude
    /// scale for "is this zero" checks on skew forms.
    pub fn quadratic_form_with_scale(&self, x: &[f64]) -> (f64, f64) {
        let mut q = 0.0;
        let mut scale = 0.0;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let term = v * x[r] * x[*c as usize];
                q += term;
                scale += term.abs();
            }
        }
        (q, scale)
    }

    /// Largest absolute asymmetry |A_ij - A_ji| relative to the largest
    /// entry magnitude. Only meaningful for square matrices.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let mut max_abs = 0.0f64;
        for v in &self.vals {
            max_abs = max_abs.max(v.abs());
        }
        if max_abs == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let vt = self.get(*c as usize, r);
                worst = worst.max((v - vt).abs());
            }
        }
        worst / max_abs
    }

    /// Entry lookup by binary search; zero when absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_triplets_sums_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 4.0);
        t.push(0, 0, 1.0);
        let a = Csr::from_triplets(&t);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 2.0);
        t.push(0, 2, 1.0);
        t.push(2, 1, -1.0);
        let a = Csr::from_triplets(&t);
        let y = a.matvec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![5.0, 0.0, -2.0]);
    }

    #[test]
    fn quadratic_form_of_skew_matrix_vanishes() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 3.0);
        t.push(1, 0, -3.0);
        let a = Csr::from_triplets(&t);
        let (q, scale) = a.quadratic_form_with_scale(&[1.5, -2.0]);
        assert_eq!(q, 0.0);
        assert!(scale > 0.0);
    }
}
