//! Dense solves for the small parameter-space systems.

use crate::error::{Error, Result};

/// Inverse by Gauss-Jordan with partial pivoting; `None` if singular.
pub fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        let d = m[c][c];
        for x in m[c].iter_mut() {
            *x /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn norm1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n).map(|j| a.iter().map(|r| r[j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves a x = b, failing when the 1-norm condition number exceeds `limit`.
pub fn solve_conditioned(a: &[Vec<f64>], b: &[f64], limit: f64) -> Result<Vec<f64>> {
    let inv = inverse(a).ok_or(Error::SingularGeometry(f64::INFINITY))?;
    let cond = norm1(a) * norm1(&inv);
    if !(cond <= limit) {
        return Err(Error::SingularGeometry(cond));
    }
    Ok(inv.iter().map(|r| r.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_condition() {
        let a = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let x = solve_conditioned(&a, &[2.0, 3.0], 1e12).unwrap();
        assert_eq!(x, vec![3.0, -2.0]);
        let s = vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]];
        assert!(matches!(solve_conditioned(&s, &[1.0, 1.0], 1e12), Err(Error::SingularGeometry(_))));
    }
}
