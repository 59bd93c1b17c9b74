//! Compressed sparse column storage for the assembled complex system.

use faer::sparse::{SparseColMat, Triplet};

use crate::fespace::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<C64>,
}

impl CscMatrix {
    /// Square matrix from `(row, col, value)` entries; duplicates are summed in
    /// input order, so the result does not depend on anything but that order.
    pub fn from_triplets(n: usize, trip: &[(usize, usize, C64)]) -> CscMatrix {
        let mut count = vec![0usize; n + 1];
        for &(r, c, _) in trip {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n}");
            count[c + 1] += 1;
        }
        for c in 0..n {
            count[c + 1] += count[c];
        }
        let mut next = count.clone();
        let mut rows = vec![0usize; trip.len()];
        let mut vals = vec![C64::new(0.0, 0.0); trip.len()];
        for &(r, c, v) in trip {
            rows[next[c]] = r;
            vals[next[c]] = v;
            next[c] += 1;
        }
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(trip.len());
        let mut values = Vec::with_capacity(trip.len());
        let mut perm: Vec<usize> = Vec::new();
        for c in 0..n {
            let (s, e) = (count[c], count[c + 1]);
            perm.clear();
            perm.extend(s..e);
            perm.sort_by_key(|&i| rows[i]);
            let mut last = usize::MAX;
            for &i in &perm {
                if rows[i] == last {
                    *values.last_mut().unwrap() += vals[i];
                } else {
                    row_idx.push(rows[i]);
                    values.push(vals[i]);
                    last = rows[i];
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        CscMatrix { n, col_ptr, row_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let s = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        match s.binary_search(&r) {
            Ok(i) => self.values[self.col_ptr[c] + i],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for c in 0..self.n {
            let xc = x[c];
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for i in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[i]] += self.values[i] * xc;
            }
        }
        y
    }

    /// `xᵀ A y` without conjugation.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (r, v) in self.row_idx.iter().zip(&self.values) {
            rows[*r] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Largest `|A_ij − A_ji| / max(|A_ij|, 1)` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..self.n {
            for i in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[i];
                let a = self.values[i];
                worst = worst.max((a - self.get(c, r)).norm() / a.norm().max(1.0));
            }
        }
        worst
    }

    pub fn to_faer(&self) -> SparseColMat<usize, C64> {
        let mut trip = Vec::with_capacity(self.nnz());
        for c in 0..self.n {
            for i in self.col_ptr[c]..self.col_ptr[c + 1] {
                trip.push(Triplet::new(self.row_idx[i], c, self.values[i]));
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip).expect("valid sparse structure")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn duplicates_summed_and_matvec() {
        let a = CscMatrix::from_triplets(2, &[(0, 0, c(1.0)), (1, 0, c(2.0)), (0, 0, c(3.0)), (1, 1, c(5.0))]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 0), c(4.0));
        assert_eq!(a.get(0, 1), c(0.0));
        assert_eq!(a.matvec(&[c(1.0), c(1.0)]), vec![c(4.0), c(7.0)]);
        assert_eq!(a.norm_inf(), 7.0);
        assert_eq!(a.max_asymmetry(), 1.0);
    }
}
