//! Fraction-free Gaussian elimination for small dense systems with rational
//! coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact_arith::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<ExactRational>),
    /// Rank falls short of the number of unknowns.
    Underdetermined {
        rank: usize,
    },
    Inconsistent,
}

/// Solves `rows[r] . x = rhs[r]`. Each row is scaled to integers and the
/// elimination stays in `BigInt`, dividing out row contents as it goes.
pub fn solve(rows: &[Vec<ExactRational>], rhs: &[ExactRational]) -> Solution {
    assert_eq!(rows.len(), rhs.len());
    let n = rows.first().map_or(0, Vec::len);
    let mut mat: Vec<Vec<BigInt>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut full: Vec<&ExactRational> = row.iter().collect();
            full.push(b);
            integer_row(&full)
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();

    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let pick = (rank..mat.len())
            .filter(|&r| !mat[r][col].is_zero())
            .min_by_key(|&r| mat[r][col].abs());
        let Some(p) = pick else { continue };
        mat.swap(rank, p);
        let (head, tail) = mat.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let g = row[col].gcd(&pivot_row[col]);
            let row_m = &pivot_row[col] / &g;
            let piv_m = &row[col] / &g;
            for (x, y) in row.iter_mut().zip(pivot_row) {
                *x = &*x * &row_m - y * &piv_m;
            }
            reduce_content(row);
        }
        pivots.push(col);
        rank += 1;
    }

    if mat[rank..].iter().any(|r| !r[n].is_zero()) {
        return Solution::Inconsistent;
    }
    if rank < n {
        return Solution::Underdetermined { rank };
    }

    let mut x = vec![ExactRational::zero(); n];
    for r in (0..rank).rev() {
        let col = pivots[r];
        let mut acc = ExactRational::from_integer(mat[r][n].clone());
        for c in col + 1..n {
            acc -= ExactRational::from_integer(mat[r][c].clone()) * &x[c];
        }
        x[col] = acc
            .checked_div(&ExactRational::from_integer(mat[r][col].clone()))
            .expect("pivot is nonzero");
    }
    Solution::Unique(x)
}

fn integer_row(row: &[&ExactRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut out: Vec<BigInt> = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    reduce_content(&mut out);
    out
}

fn reduce_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g > BigInt::one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::frac(n, d)
    }

    #[test]
    fn unique_with_redundant_rows() {
        // x + y = 3, x - y = 1, 2x + 2y = 6
        let rows = vec![
            vec![q(1, 1), q(1, 1)],
            vec![q(1, 1), q(-1, 1)],
            vec![q(2, 1), q(2, 1)],
        ];
        let rhs = vec![q(3, 1), q(1, 1), q(6, 1)];
        assert_eq!(solve(&rows, &rhs), Solution::Unique(vec![q(2, 1), q(1, 1)]));
    }

    #[test]
    fn rational_coefficients() {
        // x/2 + y/3 = 1, x/4 - y = -1/2
        let rows = vec![vec![q(1, 2), q(1, 3)], vec![q(1, 4), q(-1, 1)]];
        let rhs = vec![q(1, 1), q(-1, 2)];
        let Solution::Unique(x) = solve(&rows, &rhs) else {
            panic!()
        };
        assert_eq!(&x[0] * q(1, 2) + &x[1] * q(1, 3), q(1, 1));
        assert_eq!(&x[0] * q(1, 4) - &x[1], q(-1, 2));
    }

    #[test]
    fn detects_failures() {
        let rows = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert_eq!(
            solve(&rows, &[q(1, 1), q(2, 1)]),
            Solution::Underdetermined { rank: 1 }
        );
        assert_eq!(solve(&rows, &[q(1, 1), q(3, 1)]), Solution::Inconsistent);
    }
}
