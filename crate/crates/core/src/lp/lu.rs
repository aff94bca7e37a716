//! Dense LU factorization with partial pivoting, for basis refactoring.

pub(crate) struct Lu {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors the row-major `m x m` matrix. Returns `None` when a pivot
    /// falls below `tiny` in magnitude.
    pub(crate) fn factor(mut a: Vec<f64>, m: usize, tiny: f64) -> Option<Self> {
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (p, max) = (k..m)
                .map(|i| (i, a[i * m + k].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if max <= tiny {
                return None;
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * m + k];
            for i in (k + 1)..m {
                let f = a[i * m + k] / pivot;
                if f == 0.0 {
                    continue;
                }
                a[i * m + k] = f;
                for j in (k + 1)..m {
                    a[i * m + j] -= f * a[k * m + j];
                }
            }
        }
        Some(Self { m, lu: a, perm })
    }

    /// Solves `A x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..m {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = x[i];
            for j in (i + 1)..m {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s / self.lu[i * m + i];
        }
        x
    }

    /// Solves `A^T y = c`.
    pub(crate) fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        // A = P^T L U, so A^T y = c  <=>  U^T L^T (P y) = c.
        let mut w = c.to_vec();
        for i in 0..m {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * m + i] * w[j];
            }
            w[i] = s / self.lu[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = w[i];
            for j in (i + 1)..m {
                s -= self.lu[j * m + i] * w[j];
            }
            w[i] = s;
        }
        let mut y = vec![0.0; m];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_both_orientations() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = Lu::factor(a.clone(), 3, 1e-14).unwrap();
        let x = lu.solve(&[3.0, 2.0, 4.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [3.0, 2.0, 4.0][i]).abs() < 1e-12);
        }
        let y = lu.solve_transpose(&[1.0, -1.0, 2.0]);
        for j in 0..3 {
            let r: f64 = (0..3).map(|i| a[i * 3 + j] * y[i]).sum();
            assert!((r - [1.0, -1.0, 2.0][j]).abs() < 1e-12);
        }
        assert!(Lu::factor(vec![1.0, 2.0, 2.0, 4.0], 2, 1e-12).is_none());
    }
}
