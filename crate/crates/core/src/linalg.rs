//! Exact dense linear algebra over ordered fields.
//!
//! Everything here works on plain `Vec<Vec<T>>` row matrices: the systems
//! involved are at most a few dozen rows, and exactness matters far more
//! than speed. The simplex routine is a phase-one feasibility solver with
//! Bland's rule, which cannot cycle and therefore always terminates.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An ordered field with exact arithmetic.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Compare the value against zero.
    fn cmp_zero(&self) -> Ordering;

    fn is_positive_value(&self) -> bool {
        self.cmp_zero() == Ordering::Greater
    }
}

impl Field for BigRational {
    fn cmp_zero(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// Reduce `m` to reduced row echelon form in place, returning the pivot columns.
pub fn row_reduce<T: Field>(m: &mut [Vec<T>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = T::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone();
            for j in c..cols {
                if m[r][j].is_zero() {
                    continue;
                }
                let delta = factor.clone() * m[r][j].clone();
                m[i][j] = m[i][j].clone() - delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Field>(rows: &[Vec<T>]) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m).len()
}

/// Unique solution of `a · x = b`, or `None` when the system is singular or
/// inconsistent. `a` may have more rows than columns.
pub fn solve<T: Field>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let n = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.contains(&n) || pivots.len() != n {
        return None;
    }
    Some((0..n).map(|i| aug[i][n].clone()).collect())
}

/// Basis of the right null space of the matrix given by `rows` with `ncols` columns.
pub fn nullspace<T: Field>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); ncols];
            v[f] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Find `x ≥ 0` with `a · x = b`, or `None` if no such point exists.
pub fn nonnegative_solution<T: Field>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m;

    // Tableau rows: [A | I | rhs], with every rhs made non-negative.
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs.cmp_zero() == Ordering::Less;
        let mut t: Vec<T> = row
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        t.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        t.push(if flip { -rhs.clone() } else { rhs.clone() });
        tab.push(t);
    }
    let mut basis: Vec<usize> = (n..width).collect();

    // Phase-one objective: z[j] is the rate at which raising column j
    // lowers the total artificial mass.
    let mut z: Vec<T> = vec![T::zero(); width + 1];
    for row in &tab {
        for (j, v) in row.iter().enumerate() {
            if j < n || j == width {
                z[j] = z[j].clone() + v.clone();
            }
        }
    }

    loop {
        let Some(enter) = (0..n).find(|&j| z[j].is_positive_value()) else {
            break;
        };
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive_value() {
                continue;
            }
            let ratio = row[width].clone() / row[enter].clone();
            let better = match &leave {
                None => true,
                Some((li, best)) => match (ratio.clone() - best.clone()).cmp_zero() {
                    Ordering::Less => true,
                    Ordering::Equal => basis[i] < basis[*li],
                    Ordering::Greater => false,
                },
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase one is bounded below by zero, so some row must block.
        let (pr, _) = leave.expect("phase-one simplex is bounded");
        pivot(&mut tab, &mut z, pr, enter);
        basis[pr] = enter;
    }

    if !z[width].is_zero() {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][width].clone();
        }
    }
    Some(x)
}

fn pivot<T: Field>(tab: &mut [Vec<T>], z: &mut [T], pr: usize, pc: usize) {
    let inv = T::one() / tab[pr][pc].clone();
    for v in tab[pr].iter_mut() {
        if !v.is_zero() {
            *v = v.clone() * inv.clone();
        }
    }
    let pivot_row = tab[pr].clone();
    let eliminate = |row: &mut [T]| {
        let factor = row[pc].clone();
        if factor.is_zero() {
            return;
        }
        for (v, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != pr {
            eliminate(row);
        }
    }
    eliminate(z);
}

/// Weights `λ ≥ 0`, `Σλ = 1`, with `Σ λ_i · points[i] = target`, if they exist.
pub fn convex_combination<T: Field>(points: &[Vec<T>], target: &[T]) -> Option<Vec<T>> {
    let dim = target.len();
    let mut a: Vec<Vec<T>> = (0..dim)
        .map(|d| points.iter().map(|p| p[d].clone()).collect())
        .collect();
    a.push(vec![T::one(); points.len()]);
    let mut b = target.to_vec();
    b.push(T::one());
    nonnegative_solution(&a, &b)
}
