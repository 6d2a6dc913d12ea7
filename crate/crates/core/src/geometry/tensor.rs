use std::ops::{Index, IndexMut};

macro_rules! dense_tensor {
    ($name:ident, $rank:literal) => {
        /// Dense cubic array over `n` indices per slot.
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            n: usize,
            data: Vec<f64>,
        }

        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self {
                    n,
                    data: vec![0.0; n.pow($rank)],
                }
            }

            pub fn from_fn(n: usize, mut f: impl FnMut([usize; $rank]) -> f64) -> Self {
                let mut t = Self::zeros(n);
                for flat in 0..t.data.len() {
                    let idx = t.unflatten(flat);
                    t.data[flat] = f(idx);
                }
                t
            }

            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
            }

            /// Largest entry-wise difference to `other`.
            pub fn max_diff(&self, other: &Self) -> f64 {
                assert_eq!(self.n, other.n);
                self.data
                    .iter()
                    .zip(&other.data)
                    .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
            }

            /// Every multi-index with its entry, in row-major order.
            pub fn entries(&self) -> impl Iterator<Item = ([usize; $rank], f64)> + '_ {
                self.data
                    .iter()
                    .enumerate()
                    .map(|(flat, &v)| (self.unflatten(flat), v))
            }

            fn unflatten(&self, mut flat: usize) -> [usize; $rank] {
                let mut idx = [0; $rank];
                for slot in (0..$rank).rev() {
                    idx[slot] = flat % self.n;
                    flat /= self.n;
                }
                idx
            }

            fn flatten(&self, idx: [usize; $rank]) -> usize {
                idx.iter().fold(0, |acc, &i| {
                    debug_assert!(i < self.n);
                    acc * self.n + i
                })
            }
        }

        impl Index<[usize; $rank]> for $name {
            type Output = f64;
            fn index(&self, idx: [usize; $rank]) -> &f64 {
                &self.data[self.flatten(idx)]
            }
        }

        impl IndexMut<[usize; $rank]> for $name {
            fn index_mut(&mut self, idx: [usize; $rank]) -> &mut f64 {
                let flat = self.flatten(idx);
                &mut self.data[flat]
            }
        }
    };
}

dense_tensor!(Tensor3, 3);
dense_tensor!(Tensor4, 4);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = Tensor3::from_fn(2, |[i, j, k]| (100 * i + 10 * j + k) as f64);
        assert_eq!(t[[1, 0, 1]], 101.0);
        assert_eq!(t.as_slice()[5], 101.0);
        let (idx, v) = t.entries().nth(6).unwrap();
        assert_eq!((idx, v), ([1, 1, 0], 110.0));
    }
}
