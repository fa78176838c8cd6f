//! Exact linear algebra over the rationals: symmetric solves, inertia
//! (signature) computation, and negative-definiteness tests.

use num::{Signed, Zero};

use crate::eps::EpsRational;
use crate::rational::Q;

/// Scalar admitted on the right-hand side of a linear system whose matrix
/// is rational: plain rationals and first-order infinitesimals. Method
/// names avoid the `num` trait vocabulary so call sites stay unambiguous.
pub trait Scalar: Clone + PartialEq {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn minus(&self, other: &Self) -> Self;
    /// Multiply by a plain rational.
    fn times_q(&self, c: &Q) -> Self;
    /// Divide by a nonzero plain rational.
    fn over_q(&self, c: &Q) -> Self;
}

impl Scalar for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times_q(&self, c: &Q) -> Self {
        self * c
    }
    fn over_q(&self, c: &Q) -> Self {
        self / c
    }
}

impl Scalar for EpsRational {
    fn nil() -> Self {
        EpsRational::zero()
    }
    fn is_nil(&self) -> bool {
        EpsRational::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        EpsRational::is_positive(self)
    }
    fn is_neg(&self) -> bool {
        EpsRational::is_negative(self)
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times_q(&self, c: &Q) -> Self {
        self.scale(c)
    }
    fn over_q(&self, c: &Q) -> Self {
        self.div_scale(c)
    }
}

/// Solve `m x = rhs` for a square rational matrix by Gaussian elimination.
/// Returns `None` when the matrix is singular. The right-hand side may be
/// rational or infinitesimal; every pivot is a plain rational, so the
/// elimination is exact in both cases.
pub fn solve<S: Scalar>(m: &[Vec<Q>], rhs: &[S]) -> Option<Vec<S>> {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n) && rhs.len() == n);
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut b: Vec<S> = rhs.to_vec();

    let mut row_of_col = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for col in 0..n {
        let pivot_row = (0..n).find(|&r| !used[r] && !Zero::is_zero(&a[r][col]))?;
        used[pivot_row] = true;
        row_of_col[col] = pivot_row;
        let pivot = a[pivot_row][col].clone();
        for r in 0..n {
            if r == pivot_row || Zero::is_zero(&a[r][col]) {
                continue;
            }
            let factor = &a[r][col] / &pivot;
            for c in col..n {
                let t = &a[pivot_row][c] * &factor;
                a[r][c] = &a[r][c] - &t;
            }
            b[r] = b[r].minus(&b[pivot_row].times_q(&factor));
        }
    }
    let mut x = vec![S::nil(); n];
    for col in 0..n {
        let r = row_of_col[col];
        x[col] = b[r].over_q(&a[r][col]);
    }
    Some(x)
}

/// Inertia of a symmetric rational matrix: `(n_plus, n_minus, n_zero)`.
///
/// Sylvester reduction by congruence. When every remaining diagonal entry
/// vanishes but some off-diagonal entry does not, a row/column addition
/// restores a nonzero diagonal pivot first.
pub fn inertia(m: &[Vec<Q>]) -> (usize, usize, usize) {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut alive: Vec<usize> = (0..n).collect();
    let (mut plus, mut minus) = (0usize, 0usize);

    while !alive.is_empty() {
        let diag = alive.iter().position(|&i| !a[i][i].is_zero());
        let pivot_idx = match diag {
            Some(pos) => alive[pos],
            None => {
                // All alive diagonal entries are zero; look for a nonzero
                // off-diagonal pair (i, j) and fold j into i.
                let mut pair = None;
                'outer: for (pi, &i) in alive.iter().enumerate() {
                    for &j in alive.iter().skip(pi + 1) {
                        if !a[i][j].is_zero() {
                            pair = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                match pair {
                    None => break, // zero block: the rest is kernel
                    Some((i, j)) => {
                        // Congruence e_i <- e_i + e_j: row_i += row_j, col_i += col_j.
                        for c in 0..n {
                            let t = a[j][c].clone();
                            a[i][c] = &a[i][c] + &t;
                        }
                        for r in 0..n {
                            let t = a[r][j].clone();
                            a[r][i] = &a[r][i] + &t;
                        }
                        i
                    }
                }
            }
        };
        let p = pivot_idx;
        let pivot = a[p][p].clone();
        if pivot.is_positive() {
            plus += 1;
        } else {
            minus += 1;
        }
        alive.retain(|&i| i != p);
        // Row p stays intact until the whole elimination pass is done:
        // later rows still read a[p][c].
        for &r in &alive {
            if a[r][p].is_zero() {
                continue;
            }
            let factor = &a[r][p] / &pivot;
            for &c in &alive {
                let t = &a[p][c] * &factor;
                a[r][c] = &a[r][c] - &t;
            }
        }
    }
    (plus, minus, n - plus - minus)
}

/// True when the symmetric matrix is negative-definite.
pub fn negative_definite(m: &[Vec<Q>]) -> bool {
    let n = m.len();
    inertia(m) == (0, n, 0)
}
