//! Theories with bounded non-locality.
//!
//! A theory allows boxes with CH value in `[X_b, X_t]`. Its genuine
//! non-local box is the isotropic box at CH = X_t; its genuine local boxes
//! are the noisy local boxes that Bob can obtain by conditioning on Alice's
//! announced input and output.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::boxes::{make_isotropic, make_noisy_local_pair, tensor, BipartiteBox};
use crate::error::{Error, Result};
use crate::exact_scalar::ExactScalar;
use crate::functionals::{ch_value, coupler_valid_on, make_coupler, Coupler};
use crate::swap::{swap_threshold, xi_for_ch};

fn q(n: i64, d: i64) -> ExactScalar {
    ExactScalar::ratio(n, d)
}

fn check_x_top(x_top: &ExactScalar) -> Result<()> {
    if *x_top <= ExactScalar::one() || *x_top > q(3, 2) {
        return Err(Error::OutOfRange {
            what: "X_t",
            value: x_top.to_string(),
            range: "(1, 3/2]",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplerClass {
    /// Below the minimal boundary: the swapped box stays local.
    NoSwapping,
    /// Strictly between the minimal and perfect boundaries.
    Valid,
    /// On the minimal boundary: the swapped box sits exactly at CH = 1.
    MinimalBoundary,
    /// On the perfect boundary: the swapped box is as non-local as the inputs.
    Perfect,
    /// Above the perfect boundary: swapping would exceed X_t.
    CreatesNonlocality,
}

impl CouplerClass {
    pub fn name(&self) -> &'static str {
        match self {
            CouplerClass::NoSwapping => "NoSwapping",
            CouplerClass::Valid => "Valid",
            CouplerClass::MinimalBoundary => "MinimalBoundary",
            CouplerClass::Perfect => "Perfect",
            CouplerClass::CreatesNonlocality => "CreatesNonlocality",
        }
    }
}

impl std::fmt::Display for CouplerClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `X_b = (3/2 − X_t)/2`, the largest X_b that cannot create non-locality.
pub fn perfect_xb(x_top: &ExactScalar) -> Result<ExactScalar> {
    check_x_top(x_top)?;
    Ok(perfect_xb_unchecked(x_top))
}

/// `1/2 − (X_t − 1/2)²`, the open lower boundary of swapping couplers.
pub fn minimal_xb(x_top: &ExactScalar) -> Result<ExactScalar> {
    check_x_top(x_top)?;
    Ok(minimal_xb_unchecked(x_top))
}

/// The perfect boundary as a polynomial, valid also at the `X_t → 1` limit.
pub fn perfect_xb_unchecked(x_top: &ExactScalar) -> ExactScalar {
    (q(3, 2) - x_top) * q(1, 2)
}

pub fn minimal_xb_unchecked(x_top: &ExactScalar) -> ExactScalar {
    let d = x_top - &q(1, 2);
    q(1, 2) - &d * &d
}

/// Classify `(X_t, X_b)`. The perfect bound is inclusive, the minimal bound
/// exclusive.
pub fn classify(x_top: &ExactScalar, x_bottom: &ExactScalar) -> Result<CouplerClass> {
    let upper = perfect_xb(x_top)?;
    let lower = minimal_xb_unchecked(x_top);
    Ok(if *x_bottom > upper {
        CouplerClass::CreatesNonlocality
    } else if *x_bottom == upper {
        CouplerClass::Perfect
    } else if *x_bottom == lower {
        CouplerClass::MinimalBoundary
    } else if *x_bottom < lower {
        CouplerClass::NoSwapping
    } else {
        CouplerClass::Valid
    })
}

/// CH range `(Z_b, Z_t)` of products of noisy local boxes,
/// `Z_b = (1 − (2ξ − 1)²)/2`, `Z_t = 1 − Z_b`.
pub fn noisy_local_bounds(xi: &ExactScalar) -> Result<(ExactScalar, ExactScalar)> {
    if *xi < q(1, 2) || *xi > ExactScalar::one() {
        return Err(Error::OutOfRange {
            what: "xi",
            value: xi.to_string(),
            range: "[1/2, 1]",
        });
    }
    let bias = xi * &q(2, 1) - q(1, 1);
    let z_b = (ExactScalar::one() - &bias * &bias) * q(1, 2);
    let z_t = ExactScalar::one() - &z_b;
    Ok((z_b, z_t))
}

/// The 16 noisy local products `L^ξ_{αβ} ⊗ L^ξ_{γδ}`, `(α, β, γ, δ)` lexicographic.
pub fn noisy_local_family(xi: &ExactScalar) -> Result<Vec<BipartiteBox>> {
    let mut out = Vec::with_capacity(16);
    for i in 0..16u8 {
        let alice = make_noisy_local_pair(i >> 3 & 1, i >> 2 & 1, xi)?;
        let bob = make_noisy_local_pair(i >> 1 & 1, i & 1, xi)?;
        out.push(tensor(&alice, &bob));
    }
    Ok(out)
}

/// A theory `(X_t, X_b)` with its genuine boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryModel {
    x_top: ExactScalar,
    x_bottom: ExactScalar,
    xi: ExactScalar,
}

impl TheoryModel {
    pub fn new(x_top: ExactScalar, x_bottom: ExactScalar) -> Result<Self> {
        check_x_top(&x_top)?;
        if x_bottom >= x_top {
            return Err(Error::DegenerateRange {
                x_top: x_top.to_string(),
                x_bottom: x_bottom.to_string(),
            });
        }
        let xi = xi_for_ch(&x_top);
        Ok(TheoryModel { x_top, x_bottom, xi })
    }

    pub fn x_top(&self) -> &ExactScalar {
        &self.x_top
    }

    pub fn x_bottom(&self) -> &ExactScalar {
        &self.x_bottom
    }

    /// Isotropic weight of the genuine non-local box, `2ξ − 1/2 = X_t`.
    pub fn xi(&self) -> &ExactScalar {
        &self.xi
    }

    pub fn genuine_nonlocal(&self) -> BipartiteBox {
        make_isotropic(&self.xi).expect("ξ lies in (3/4, 1]")
    }

    pub fn genuine_local_family(&self) -> Vec<BipartiteBox> {
        noisy_local_family(&self.xi).expect("ξ lies in (3/4, 1]")
    }

    /// The genuine non-local box followed by the 16 noisy local boxes.
    pub fn genuine_boxes(&self) -> Vec<BipartiteBox> {
        let mut boxes = vec![self.genuine_nonlocal()];
        boxes.extend(self.genuine_local_family());
        boxes
    }

    pub fn coupler(&self) -> Coupler {
        make_coupler(&self.x_top, &self.x_bottom).expect("X_b < X_t checked on construction")
    }

    pub fn classify(&self) -> CouplerClass {
        classify(&self.x_top, &self.x_bottom).expect("X_t checked on construction")
    }
}

/// Whether the perfect coupler at `X_t` answers with valid probabilities on
/// every genuine box of the theory, i.e. `perfect_xb(X_t) ≤ Z_b(ξ)`.
pub fn perfect_coupler_consistent(x_top: &ExactScalar) -> Result<bool> {
    let model = TheoryModel::new(x_top.clone(), perfect_xb(x_top)?)?;
    let (z_b, _) = noisy_local_bounds(model.xi())?;
    let bound_holds = *model.x_bottom() <= z_b;
    Ok(bound_holds && coupler_valid_on(&model.coupler(), &model.genuine_boxes()))
}

/// `Z_b(ξ) − perfect_xb(X_t)` for the theory at `X_t`; zero only at `X_t = 3/2`.
pub fn perfect_coupler_margin(x_top: &ExactScalar) -> Result<ExactScalar> {
    let (z_b, _) = noisy_local_bounds(&xi_for_ch(x_top))?;
    Ok(z_b - perfect_xb(x_top)?)
}

/// The genuine coupler `(3/2, 0)` stops swapping exactly at Tsirelson's
/// bound, and the minimal coupler at Tsirelson's bound is `X_b = 0`.
pub fn tsirelson_emergence_one() -> bool {
    let bq = ExactScalar::tsirelson_bound();
    let threshold = make_coupler(&q(3, 2), &ExactScalar::zero())
        .and_then(|c| swap_threshold(&c))
        .map(|t| t == bq)
        .unwrap_or(false);
    let minimal = minimal_xb(&bq).map(|x| x.is_zero()).unwrap_or(false);
    threshold && minimal
}

/// Isotropic weight `ξ ≥ 1/2` whose noisy local products have lowest CH
/// value `z_b`: `(2ξ − 1)² = 1 − 2·z_b`.
pub fn xi_for_local_floor(z_b: &ExactScalar) -> Result<ExactScalar> {
    let bias_sq = ExactScalar::one() - z_b * &q(2, 1);
    if bias_sq.is_negative_value() || bias_sq > ExactScalar::one() {
        return Err(Error::OutOfRange {
            what: "Z_b",
            value: z_b.to_string(),
            range: "[0, 1/2]",
        });
    }
    Ok((ExactScalar::one() + bias_sq.sqrt()?) * q(1, 2))
}

/// Noisy local boxes with CH floor 1/4 can only come from the Tsirelson box.
pub fn tsirelson_emergence_two() -> bool {
    xi_for_local_floor(&q(1, 4))
        .and_then(|xi| make_isotropic(&xi))
        .map(|bx| ch_value(&bx) == ExactScalar::tsirelson_bound())
        .unwrap_or(false)
}

/// A theory with symmetric bounds `X_b = 1 − X_t` admits no swapping
/// coupler: `1 − X_t` never exceeds the strict minimal bound.
pub fn symmetric_theory_has_no_coupler(x_top: &ExactScalar) -> Result<bool> {
    let class = classify(x_top, &(ExactScalar::one() - x_top))?;
    Ok(matches!(class, CouplerClass::NoSwapping | CouplerClass::MinimalBoundary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bq() -> ExactScalar {
        ExactScalar::tsirelson_bound()
    }

    #[test]
    fn classification_landmarks() {
        assert_eq!(classify(&q(3, 2), &q(0, 1)).unwrap(), CouplerClass::Perfect);
        assert_eq!(classify(&bq(), &q(0, 1)).unwrap(), CouplerClass::MinimalBoundary);
        assert_eq!(classify(&q(3, 2), &q(-1, 2)).unwrap(), CouplerClass::MinimalBoundary);
        assert_eq!(classify(&q(3, 2), &q(-3, 5)).unwrap(), CouplerClass::NoSwapping);
        assert_eq!(classify(&q(3, 2), &q(-1, 4)).unwrap(), CouplerClass::Valid);
        assert_eq!(classify(&q(5, 4), &q(1, 2)).unwrap(), CouplerClass::CreatesNonlocality);
        assert!(classify(&q(1, 1), &q(0, 1)).is_err());
        assert!(classify(&q(8, 5), &q(0, 1)).is_err());
    }

    #[test]
    fn perfect_boundary() {
        assert!(perfect_xb(&q(3, 2)).unwrap().is_zero());
        assert_eq!(perfect_xb(&bq()).unwrap(), (q(1, 1) - ExactScalar::inv_sqrt2()) * q(1, 2));
        assert_eq!(perfect_xb_unchecked(&q(1, 1)), q(1, 4));
        assert!(perfect_xb(&q(1, 1)).is_err());
    }

    #[test]
    fn minimal_boundary() {
        assert_eq!(minimal_xb(&q(3, 2)).unwrap(), q(-1, 2));
        assert!(minimal_xb(&bq()).unwrap().is_zero());
        assert_eq!(minimal_xb_unchecked(&q(1, 1)), q(1, 4));
        assert_eq!(minimal_xb_unchecked(&q(1, 1)), perfect_xb_unchecked(&q(1, 1)));
    }

    #[test]
    fn noisy_bounds() {
        assert_eq!(noisy_local_bounds(&q(1, 1)).unwrap(), (q(0, 1), q(1, 1)));
        let xi = q(1, 2) + ExactScalar::inv_sqrt2() * q(1, 2);
        assert_eq!(noisy_local_bounds(&xi).unwrap(), (q(1, 4), q(3, 4)));
        assert!(noisy_local_bounds(&q(1, 3)).is_err());
    }

    #[test]
    fn noisy_bounds_match_brute_force_extremes() {
        for xi in [q(1, 2), q(3, 5), q(4, 5), q(9, 10), q(1, 1), q(1, 2) + ExactScalar::inv_sqrt2() * q(1, 2)] {
            let values: Vec<ExactScalar> = noisy_local_family(&xi).unwrap().iter().map(ch_value).collect();
            let (z_b, z_t) = noisy_local_bounds(&xi).unwrap();
            assert_eq!(values.iter().min().unwrap(), &z_b);
            assert_eq!(values.iter().max().unwrap(), &z_t);
        }
    }

    #[test]
    fn perfect_consistency() {
        assert!(perfect_coupler_consistent(&q(3, 2)).unwrap());
        assert!(perfect_coupler_margin(&q(3, 2)).unwrap().is_zero());
        for x_top in [bq(), q(5, 4), q(21, 20)] {
            assert!(perfect_coupler_consistent(&x_top).unwrap());
            assert!(perfect_coupler_margin(&x_top).unwrap().signum() > 0);
        }
        // At Tsirelson: (1 − 1/√2)/2 ≈ 0.146 < Z_b = 1/4.
        assert!(perfect_xb(&bq()).unwrap() < q(1, 4));
    }

    #[test]
    fn emergences() {
        assert!(tsirelson_emergence_one());
        assert!(tsirelson_emergence_two());
        let shifted = make_coupler(&q(3, 2), &q(1, 100)).unwrap();
        assert_eq!(swap_threshold(&shifted).unwrap(), q(6, 5));
        assert_ne!(swap_threshold(&shifted).unwrap(), bq());
        assert!(minimal_xb(&(bq() + q(1, 100))).unwrap().signum() < 0);
    }

    #[test]
    fn local_floor_inversion() {
        let xi = xi_for_local_floor(&q(1, 4)).unwrap();
        let bias = &xi * &q(2, 1) - q(1, 1);
        assert_eq!(&bias * &bias, q(1, 2));
        // 3/8 gives ξ = 3/4, the local box at CH = 1.
        let xi = xi_for_local_floor(&q(3, 8)).unwrap();
        assert_eq!(xi, q(3, 4));
        assert_ne!(ch_value(&make_isotropic(&xi).unwrap()), bq());
        assert!(matches!(xi_for_local_floor(&q(1, 5)), Err(Error::Unrepresentable(_))));
    }

    #[test]
    fn symmetric_theories() {
        // 1 − 5/4 = −1/4 against the minimal bound 1/4 + 5/4 − 25/16 = −1/16.
        assert_eq!(minimal_xb(&q(5, 4)).unwrap(), q(-1, 16));
        assert!(symmetric_theory_has_no_coupler(&q(5, 4)).unwrap());
        assert!(symmetric_theory_has_no_coupler(&bq()).unwrap());
        assert_eq!(classify(&bq(), &(q(1, 1) - bq())).unwrap(), CouplerClass::NoSwapping);
        assert!(symmetric_theory_has_no_coupler(&q(3, 2)).unwrap());
        assert_eq!(classify(&q(3, 2), &q(-1, 2)).unwrap(), CouplerClass::MinimalBoundary);
    }

    #[test]
    fn model_boxes() {
        let m = TheoryModel::new(q(5, 4), q(1, 8)).unwrap();
        assert_eq!(m.xi(), &q(7, 8));
        assert_eq!(ch_value(&m.genuine_nonlocal()), q(5, 4));
        assert_eq!(m.genuine_boxes().len(), 17);
        assert_eq!(m.classify(), CouplerClass::Perfect);
        assert!(coupler_valid_on(&m.coupler(), &m.genuine_boxes()));
        assert!(TheoryModel::new(q(5, 4), q(2, 1)).is_err());
    }
}
