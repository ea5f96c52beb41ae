//! Dense exact linear algebra over a [`Scalar`] field.

use crate::scalar::Scalar;

pub type Matrix<T> = Vec<Vec<T>>;

/// Solves `a · x = b` for square `a` by Gauss–Jordan elimination.
///
/// Returns `None` when `a` is singular.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), n);
    let mut m: Matrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = T::one() / m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..=n {
                let sub = f.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - sub;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Rank by row reduction.
pub fn rank<T: Scalar>(a: &Matrix<T>) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[r][c].clone();
            for k in c..cols {
                let sub = f.clone() * m[r][k].clone();
                m[i][k] = m[i][k].clone() - sub;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Determinant by elimination.
pub fn determinant<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut det = T::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return T::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = det * m[c][c].clone();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[c][c].clone();
            for k in c..n {
                let sub = f.clone() * m[c][k].clone();
                m[i][k] = m[i][k].clone() - sub;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::from_i64(v)).collect())
            .collect()
    }

    #[test]
    fn solves_small_system() {
        let a = mat(&[&[2, 1], &[1, 3]]);
        let b = [Rational::from_i64(3), Rational::from_i64(5)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![Rational::from_frac(4, 5), Rational::from_frac(7, 5)]);
    }

    #[test]
    fn singular_is_none() {
        let a = mat(&[&[1, 2], &[2, 4]]);
        assert!(solve(&a, &[Rational::from_i64(1), Rational::from_i64(2)]).is_none());
        assert_eq!(rank(&a), 1);
        assert_eq!(determinant(&a), Rational::from_i64(0));
    }

    #[test]
    fn determinant_and_rank() {
        let a = mat(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]]);
        assert_eq!(determinant(&a), Rational::from_i64(-2));
        assert_eq!(rank(&a), 3);
        assert_eq!(rank(&mat(&[&[1, 2, 3]])), 1);
    }
}
