//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Reduces `rows` to reduced row echelon form in place and returns the pivot columns.
pub fn row_reduce(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][col];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut rows = rows.to_vec();
    row_reduce(&mut rows).len()
}

/// Unique solution of the square system `a x = b`, or `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// A nonzero vector spanning the kernel of `rows` when that kernel is one-dimensional.
pub fn kernel_line(rows: &[Vec<Rational>], n_cols: usize) -> Option<Vec<Rational>> {
    let mut rows = rows.to_vec();
    let pivots = row_reduce(&mut rows);
    if pivots.len() + 1 != n_cols {
        return None;
    }
    let free = (0..n_cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); n_cols];
    v[free] = Rational::one();
    for (row, &pc) in rows.iter().zip(&pivots) {
        v[pc] = -row[free].clone();
    }
    Some(v)
}

pub fn determinant(matrix: &[Vec<Rational>]) -> Rational {
    let n = matrix.len();
    let mut m = matrix.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= &m[col][col];
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot[col];
            for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                *x -= &factor * p;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn solves_two_by_two() {
        let a = m(&[&[1, 0], &[-1, -1]]);
        let x = solve(&a, &[int(-1), int(-1)]).unwrap();
        assert_eq!(x, vec![int(-1), int(2)]);
    }

    #[test]
    fn singular_system_has_no_unique_solution() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&a, &[int(1), int(2)]).is_none());
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = m(&[&[2, -1, 0], &[1, 3, 4], &[0, 5, -2]]);
        // 2(3*-2 - 20) + 1*(1*-2 - 0) = -52 - 2
        assert_eq!(determinant(&a), int(-54));
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])), int(-1));
    }

    #[test]
    fn kernel_of_one_row_in_the_plane() {
        let k = kernel_line(&m(&[&[1, 1]]), 2).unwrap();
        assert_eq!(k[0].clone() + &k[1], int(0));
        assert!(kernel_line(&m(&[&[1, 0], &[0, 1]]), 2).is_none());
        assert_eq!(rank(&[vec![rat(1, 2), int(1)], vec![int(1), int(2)]]), 1);
    }
}
