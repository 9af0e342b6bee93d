//! Dense cubic (all dimensions equal) tensors of rank 3 and 4.

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        DenseTensor { dim, rank, data: vec![0.0; dim.pow(rank as u32)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Largest deviation under index permutation, relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        let mut idx = vec![0usize; self.rank];
        for flat in 0..self.data.len() {
            let mut rem = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rem % self.dim;
                rem /= self.dim;
            }
            let v = self.data[flat];
            // adjacent transpositions generate all permutations
            for k in 0..self.rank - 1 {
                idx.swap(k, k + 1);
                worst = worst.max((self.get(&idx) - v).abs());
                idx.swap(k, k + 1);
            }
        }
        worst / scale
    }

    /// Contracts every index with the columns of `m` (dim x new_dim), one index at a time:
    /// `out[a..] = sum_{i..} t[i..] m[i,a] ...`.
    pub fn transform(&self, m: &nalgebra::DMatrix<f64>) -> DenseTensor {
        assert_eq!(m.nrows(), self.dim);
        let nd = m.ncols();
        let mut cur = self.data.clone();
        let mut dims = vec![self.dim; self.rank];
        // contract the leading index each pass and rotate it to the back
        for _ in 0..self.rank {
            let inner: usize = dims[1..].iter().product();
            let mut next = vec![0.0; inner * nd];
            for i in 0..dims[0] {
                let src = &cur[i * inner..(i + 1) * inner];
                for a in 0..nd {
                    let w = m[(i, a)];
                    if w == 0.0 {
                        continue;
                    }
                    for (r, s) in src.iter().enumerate() {
                        next[r * nd + a] += w * s;
                    }
                }
            }
            dims.remove(0);
            dims.push(nd);
            cur = next;
        }
        DenseTensor { dim: nd, rank: self.rank, data: cur }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn transform_matches_naive_contraction() {
        let mut t = DenseTensor::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t.set(&[i, j, k], (i + 2 * j + 5 * k) as f64 * 0.1 + (i * j * k) as f64);
                }
            }
        }
        let m = DMatrix::from_fn(3, 2, |i, a| (i as f64 + 1.0) * (a as f64 - 0.5));
        let out = t.transform(&m);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                s += t.get(&[i, j, k]) * m[(i, a)] * m[(j, b)] * m[(k, c)];
                            }
                        }
                    }
                    assert!((out.get(&[a, b, c]) - s).abs() < 1e-12 * s.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn detects_asymmetry() {
        let mut t = DenseTensor::zeros(2, 4);
        t.set(&[0, 0, 0, 1], 1.0);
        assert!(t.symmetry_defect() > 0.5);
        for idx in [[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]] {
            t.set(&idx, 1.0);
        }
        assert_eq!(t.symmetry_defect(), 0.0);
    }
}
