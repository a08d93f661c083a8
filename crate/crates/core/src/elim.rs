//! Fraction-free (Bareiss) elimination over the Gaussian integers.
//!
//! Rows are first scaled to clear denominators, so every intermediate entry
//! is a Gaussian integer and each division in the Bareiss update is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::exact::{ComplexRational, Rational};

pub type Matrix = Vec<Vec<ComplexRational>>;

/// Row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Matrix,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

fn clear_denominators(row: &[ComplexRational]) -> Vec<ComplexRational> {
    let lcm = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.denominator_lcm()));
    let k = Rational::from_integer(lcm);
    row.iter().map(|c| c.scale(&k)).collect()
}

fn is_gaussian_integer(c: &ComplexRational) -> bool {
    c.re.is_integer() && c.im.is_integer()
}

pub fn transpose(m: &Matrix, cols: usize) -> Matrix {
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Bareiss elimination of `m` (every row of length `cols`), skipping columns
/// without a usable pivot.
pub fn echelon(m: &Matrix, cols: usize) -> Echelon {
    let mut a: Matrix = m.iter().map(|r| clear_denominators(r)).collect();
    let mut pivots = Vec::new();
    let mut prev = ComplexRational::one();
    let mut row = 0;
    for col in 0..cols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        for i in row + 1..a.len() {
            for j in col + 1..cols {
                let num = &a[row][col] * &a[i][j] - &a[i][col] * &a[row][j];
                let q = num.checked_div(&prev).expect("previous pivot is non-zero");
                debug_assert!(is_gaussian_integer(&q), "Bareiss division must be exact");
                a[i][j] = q;
            }
            a[i][col] = ComplexRational::zero();
        }
        prev = a[row][col].clone();
        pivots.push(col);
        row += 1;
    }
    a.truncate(row);
    Echelon { rows: a, pivots, cols }
}

pub fn rank(m: &Matrix, cols: usize) -> usize {
    echelon(m, cols).pivots.len()
}

/// Basis of `{v : m v = 0}`, one vector per free column with that coordinate
/// set to 1 and the other free coordinates 0.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<ComplexRational>> {
    let ech = echelon(m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![ComplexRational::zero(); cols];
            v[f] = ComplexRational::one();
            for (r, &pc) in ech.pivots.iter().enumerate().rev() {
                let row = &ech.rows[r];
                let s = (pc + 1..cols).fold(ComplexRational::zero(), |acc, j| acc + &row[j] * &v[j]);
                v[pc] = (-s).checked_div(&row[pc]).expect("pivot is non-zero");
            }
            v
        })
        .collect()
}

/// Greedily keeps the vectors that raise the rank, in input order.
pub fn independent_subset(vs: &[Vec<ComplexRational>], cols: usize) -> Vec<Vec<ComplexRational>> {
    let mut kept: Matrix = Vec::new();
    for v in vs {
        kept.push(v.clone());
        if rank(&kept, cols) < kept.len() {
            kept.pop();
        }
    }
    kept
}

pub fn mat_vec(m: &Matrix, v: &[ComplexRational]) -> Vec<ComplexRational> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(ComplexRational::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}
