/// Compressed sparse row matrix, f64 entries.
///
/// Built from (row, col, value) triplets; duplicates are summed. Row entries
/// are stored column-sorted, which keeps mat-vec deterministic.
#[derive(Debug, Clone)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(u32, u32, f64)]) -> Self {
        let mut entries: Vec<(u32, u32, f64)> = triplets.to_vec();
        // stable sort: duplicates are summed in push order, so symmetric
        // inputs assemble to a bitwise-symmetric matrix
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut counts = vec![0usize; nrows];
        let mut e = 0;
        while e < entries.len() {
            let (r, c, _) = entries[e];
            assert!(
                (r as usize) < nrows && (c as usize) < ncols,
                "triplet out of bounds"
            );
            let mut v = 0.0;
            while e < entries.len() && entries[e].0 == r && entries[e].1 == c {
                v += entries[e].2;
                e += 1;
            }
            indices.push(c);
            values.push(v);
            counts[r as usize] += 1;
        }
        let mut indptr = vec![0usize; nrows + 1];
        for r in 0..nrows {
            indptr[r + 1] = indptr[r] + counts[r];
        }

        Csr {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c as usize];
            }
            y[r] = acc;
        }
    }

    /// y += Aᵀ x
    pub fn tr_mul_vec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                y[*c as usize] += v * xr;
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c as usize)] += v;
            }
        }
        m
    }

    /// Iterate stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .map(move |(c, v)| (r, *c as usize, *v))
                .collect::<Vec<_>>()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_dedup_and_matvec() {
        // 2x3 with a duplicate at (0,1) and an empty middle column
        let a = Csr::from_triplets(2, 3, &[(1, 2, 5.0), (0, 1, 2.0), (0, 1, 3.0), (1, 0, -1.0)]);
        assert_eq!(a.nnz(), 3);
        let mut y = vec![0.0; 2];
        a.mul_vec(&[1.0, 10.0, 100.0], &mut y);
        assert_eq!(y, vec![50.0, 499.0]);
    }

    #[test]
    fn empty_rows_are_fine() {
        let a = Csr::from_triplets(4, 2, &[(2, 0, 1.0)]);
        let mut y = vec![9.0; 4];
        a.mul_vec(&[3.0, 4.0], &mut y);
        assert_eq!(y, vec![0.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn transpose_mul_matches_dense() {
        let a = Csr::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0), (2, 1, 4.0)]);
        let x = [1.0, -1.0, 0.5];
        let mut y = vec![0.0; 2];
        a.tr_mul_vec_add(&x, &mut y);
        let dense = a.to_dense();
        let yd = dense.transpose() * nalgebra::DVector::from_row_slice(&x);
        assert!((y[0] - yd[0]).abs() < 1e-14);
        assert!((y[1] - yd[1]).abs() < 1e-14);
    }
}
