//! Exact linear algebra: Gaussian elimination over any scalar field and a
//! phase-one simplex over the rationals for feasibility questions.

use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LinSolve<S> {
    Unique(Vec<S>),
    /// The system is consistent but does not pin down all unknowns.
    Underdetermined,
    Inconsistent,
}

/// Solves A x = b exactly. A is given as rows; any number of rows is
/// accepted (overdetermined systems are fine when consistent).
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> LinSolve<S> {
    assert_eq!(a.len(), b.len());
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].inverse().expect("pivot is nonzero");
        for x in m[rank].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let t = f.clone() * m[rank][c].clone();
                    m[r][c] = m[r][c].clone() - t;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }

    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return LinSolve::Inconsistent;
        }
    }
    if pivot_of_col.iter().any(Option::is_none) {
        return LinSolve::Underdetermined;
    }
    let x = pivot_of_col
        .iter()
        .map(|p| m[p.unwrap()][cols].clone())
        .collect();
    LinSolve::Unique(x)
}

/// Decides whether A x = b has a solution with x >= 0, by phase-one
/// simplex with Bland's rule (exact rational arithmetic, guaranteed to
/// terminate).
pub fn feasible_nonneg(a: &[Vec<Rational>], b: &[Rational]) -> bool {
    let rows = a.len();
    assert_eq!(b.len(), rows);
    let cols = if rows == 0 { return true } else { a[0].len() };

    // Tableau with artificial basis: rows scaled so rhs >= 0, one
    // artificial column per row, objective = sum of artificials.
    let total = cols + rows;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for r in 0..rows {
        let flip = b[r].is_negative();
        let mut row: Vec<Rational> = Vec::with_capacity(total + 1);
        for c in 0..cols {
            row.push(if flip { -a[r][c].clone() } else { a[r][c].clone() });
        }
        for i in 0..rows {
            row.push(if i == r { Rational::one() } else { Rational::zero() });
        }
        row.push(if flip { -b[r].clone() } else { b[r].clone() });
        t.push(row);
    }
    // Objective row: minimize sum of artificials; expressed in terms of
    // non-basic columns by subtracting each constraint row.
    let mut obj: Vec<Rational> = vec![Rational::zero(); total + 1];
    for r in 0..rows {
        for c in 0..=total {
            obj[c] = &obj[c] - &t[r][c];
        }
    }
    for c in cols..total {
        obj[c] = Rational::zero();
    }
    t.push(obj);

    let mut basis: Vec<usize> = (cols..total).collect();
    loop {
        // Bland: entering column = lowest index with negative reduced cost.
        let Some(enter) = (0..total).find(|&c| t[rows][c].is_negative()) else {
            break;
        };
        // Ratio test; Bland tie-break on basis variable index.
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if t[r][enter].is_positive() {
                let ratio = &t[r][total] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((lr, _)) = leave else {
            // Unbounded below cannot happen for a sum of nonnegative
            // artificials; defensive exit.
            break;
        };
        let pivot = t[lr][enter].clone();
        for c in 0..=total {
            t[lr][c] = &t[lr][c] / &pivot;
        }
        for r in 0..=rows {
            if r != lr && !t[r][enter].is_zero() {
                let f = t[r][enter].clone();
                for c in 0..=total {
                    let d = &f * &t[lr][c];
                    t[r][c] = &t[r][c] - &d;
                }
            }
        }
        basis[lr] = enter;
    }
    // Feasible iff the artificial objective reaches zero.
    t[rows][total].is_zero()
}
