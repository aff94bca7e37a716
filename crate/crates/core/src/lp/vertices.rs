//! Brute-force vertex enumeration of `{x : A x <= b}` in small dimension.

use super::lu::Lu;

/// Vertices of the polytope `{x in R^d : A x <= b}` with `A` row-major
/// `m x d`. Every `d`-subset of rows is tried as an active set. Returns
/// `None` if the number of subsets exceeds `max_subsets`.
pub fn polytope_vertices(
    a: &[f64],
    b: &[f64],
    d: usize,
    tol: f64,
    max_subsets: usize,
) -> Option<Vec<Vec<f64>>> {
    let m = b.len();
    assert_eq!(a.len(), m * d, "constraint matrix shape");
    if d == 0 {
        return Some(if b.iter().all(|&bi| bi >= -tol) {
            vec![vec![]]
        } else {
            vec![]
        });
    }
    if binomial(m, d).is_none_or(|c| c > max_subsets) {
        return None;
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let mut sub = Vec::with_capacity(d * d);
        for &r in &idx {
            sub.extend_from_slice(&a[r * d..(r + 1) * d]);
        }
        if let Some(lu) = Lu::factor(sub, d, 1e-10) {
            let rhs: Vec<f64> = idx.iter().map(|&r| b[r]).collect();
            let x = lu.solve(&rhs);
            let feasible = (0..m).all(|r| {
                let ax: f64 = (0..d).map(|j| a[r * d + j] * x[j]).sum();
                ax <= b[r] + tol * (1.0 + b[r].abs())
            });
            let fresh = !out
                .iter()
                .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= tol * 10.0));
            if feasible && fresh {
                out.push(x);
            }
        }
        // next combination in lexicographic order
        let mut i = d;
        while i > 0 && idx[i - 1] == m - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Some(out)
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let mut acc: usize = 1;
    for i in 0..k.min(n - k) {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_has_four_vertices() {
        let a = [1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0];
        let b = [1.0, 0.0, 1.0, 0.0];
        let v = polytope_vertices(&a, &b, 2, 1e-9, 1000).unwrap();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn respects_subset_cap() {
        let a = vec![1.0; 40 * 4];
        let b = vec![1.0; 40];
        assert!(polytope_vertices(&a, &b, 4, 1e-9, 1000).is_none());
    }
}
