//! Reference constructions shared by the integration tests. Everything
//! here is computed from raw probability tables, without going through
//! the swap or model code under test.
#![allow(dead_code)]

use nlswap::boxes::{index, BipartiteBox};
use nlswap::exact_scalar::rational;
use nlswap::functionals::LinearFunctional;
use nlswap::linalg::{nullspace, rank, solve};
use nlswap::{ExactScalar, Rational};
use num_traits::{One, Zero};

pub fn q(n: i64, d: i64) -> ExactScalar {
    ExactScalar::ratio(n, d)
}

/// Unnormalised `P(ac, b' = 0 | xz)`: the coupler weights contracted with
/// both boxes over Bob's outputs and inputs.
pub fn contracted_success(chi: &LinearFunctional, ab: &BipartiteBox, bc: &BipartiteBox) -> BipartiteBox {
    let w = chi.coefficients();
    BipartiteBox::from_fn(|a, c, x, z| {
        let mut total = ExactScalar::zero();
        for b1 in 0..2 {
            for b2 in 0..2 {
                for y1 in 0..2 {
                    for y2 in 0..2 {
                        let weight = &w[index(b1, b2, y1, y2)];
                        if weight.is_zero() {
                            continue;
                        }
                        total += weight * &(ab.get(a, b1, x, y1) * bc.get(b2, c, y2, z));
                    }
                }
            }
        }
        // A constant offset acts on every outcome of the product box.
        let marginal_a = ab.get(a, 0, x, 0) + ab.get(a, 1, x, 0);
        let marginal_c = bc.get(0, c, 0, z) + bc.get(1, c, 0, z);
        total + chi.offset() * &(marginal_a * marginal_c)
    })
}

/// `P(b' = 0)` from Bob's outcome statistics, read directly off the tables.
pub fn brute_success_probability(chi: &LinearFunctional, ab: &BipartiteBox, bc: &BipartiteBox) -> ExactScalar {
    let w = chi.coefficients();
    let mut total = chi.offset().clone();
    for b1 in 0..2 {
        for b2 in 0..2 {
            for y1 in 0..2 {
                for y2 in 0..2 {
                    let pb1 = ab.get(0, b1, 0, y1) + ab.get(1, b1, 0, y1);
                    let pb2 = bc.get(b2, 0, y2, 0) + bc.get(b2, 1, y2, 0);
                    total += &w[index(b1, b2, y1, y2)] * &(pb1 * pb2);
                }
            }
        }
    }
    total
}

/// Vertices of the non-signalling polytope found from scratch: points of
/// its affine hull where 8 independent positivity facets are tight.
pub fn brute_force_ns_vertices() -> Vec<[Rational; 16]> {
    let one = Rational::one();
    let zero = Rational::zero();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let mut row = vec![zero.clone(); 16];
            for a in 0..2 {
                for b in 0..2 {
                    row[index(a, b, x, y)] = one.clone();
                }
            }
            rows.push(row);
        }
    }
    for s in 0..2u8 {
        for o in 0..2u8 {
            let mut alice = vec![zero.clone(); 16];
            let mut bob = vec![zero.clone(); 16];
            for other in 0..2u8 {
                alice[index(o, other, s, 0)] += &one;
                alice[index(o, other, s, 1)] -= &one;
                bob[index(other, o, 0, s)] += &one;
                bob[index(other, o, 1, s)] -= &one;
            }
            rows.push(alice);
            rows.push(bob);
        }
    }
    assert_eq!(rank(&rows), 8);
    let basis = nullspace(&rows, 16);
    assert_eq!(basis.len(), 8);
    let base = rational(1, 4);

    let mut found: Vec<[Rational; 16]> = Vec::new();
    for mask in 0u32..1 << 16 {
        if mask.count_ones() != 8 {
            continue;
        }
        let tight: Vec<usize> = (0..16).filter(|j| mask >> j & 1 == 1).collect();
        let a: Vec<Vec<Rational>> = tight
            .iter()
            .map(|&j| basis.iter().map(|v| v[j].clone()).collect())
            .collect();
        let b: Vec<Rational> = tight.iter().map(|_| -base.clone()).collect();
        let Some(t) = solve(&a, &b) else { continue };
        let point: [Rational; 16] = std::array::from_fn(|j| {
            base.clone() + basis.iter().zip(&t).map(|(v, tk)| &v[j] * tk).sum::<Rational>()
        });
        if point.iter().any(|p| p < &zero) {
            continue;
        }
        if !found.contains(&point) {
            found.push(point);
        }
    }
    found
}

pub fn box_from_rationals(p: &[Rational; 16]) -> BipartiteBox {
    BipartiteBox::from_table(std::array::from_fn(|i| ExactScalar::from_rational(p[i].clone())))
}

pub fn flatten(bx: &BipartiteBox) -> Vec<ExactScalar> {
    bx.entries().to_vec()
}
