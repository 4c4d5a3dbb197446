//! Exact rank and linear solves.
//!
//! Rank uses fraction-free (Bareiss) elimination over the integers after
//! clearing denominators row by row; solving goes through plain Gaussian
//! elimination over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rational::Rational;

/// Scales each row by the lcm of its denominators.
fn integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect()
}

/// Rank over ℚ by Bareiss elimination. Every intermediate division is exact.
pub fn rank(m: &RatMatrix) -> usize {
    let mut a = integer_rows(m);
    let rows = m.rows();
    let cols = m.cols();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                debug_assert!((&v % &prev).is_zero());
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Solves the square system `m · x = b`. Errors when `m` is singular.
pub fn solve(m: &RatMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    let n = m.rows();
    if !m.is_square() || b.len() != n {
        return Err(Error::InvalidParameter(
            "solve needs a square system".into(),
        ));
    }
    let mut a = m.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !a[(r, col)].is_zero())
            .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
        a.swap_rows(p, col);
        rhs.swap(p, col);
        let pivot = a[(col, col)].clone();
        for r in col + 1..n {
            if a[(r, col)].is_zero() {
                continue;
            }
            let f = &a[(r, col)] / &pivot;
            for c in col..n {
                let d = &f * &a[(col, c)];
                a[(r, c)] -= d;
            }
            let d = &f * &rhs[col];
            rhs[r] -= d;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for j in i + 1..n {
            acc -= &a[(i, j)] * &x[j];
        }
        x[i] = &acc / &a[(i, i)];
    }
    Ok(x)
}
