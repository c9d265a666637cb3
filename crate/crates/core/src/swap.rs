//! Action of a coupler on a pair of boxes.
//!
//! Alice–Bob share `P(ab₁|xy₁)` and Bob–Charlie share `P(b₂c|y₂z)`. Bob feeds
//! his two halves into the coupler and learns one bit `b'`; Alice and
//! Charlie are then left with a success box (`b' = 0`) or a failure box
//! (`b' = 1`).
//!
//! The success probability only depends on Bob's local box and is defined
//! for any inputs. The conditional boxes are computed from the coupler's
//! action on PR/anti-PR pairs, so they require both inputs to lie on the
//! PR/anti-PR segment.

use num_traits::One;
use serde_json::json;

use crate::boxes::{anti_pr_box, pr_box, tensor, BipartiteBox, BoxLabel, LabelledBox};
use crate::error::{Error, Result};
use crate::exact_scalar::ExactScalar;
use crate::functionals::{ch_value, Coupler};

/// `box = μ·PR + (1 − μ)·anti-PR`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicDecomposition {
    pub mu: ExactScalar,
}

impl IsotropicDecomposition {
    pub fn reconstruct(&self) -> BipartiteBox {
        let rest = ExactScalar::one() - &self.mu;
        pr_box().scale(&self.mu).plus(&anti_pr_box().scale(&rest))
    }
}

pub fn decompose_isotropic(bx: &BipartiteBox) -> Result<IsotropicDecomposition> {
    // PR puts 1/2 on P(00|00), anti-PR puts 0 there.
    let mu = bx.get(0, 0, 0, 0) * &ExactScalar::int(2);
    if mu.is_negative_value() || mu > ExactScalar::one() {
        return Err(Error::NotIsotropic);
    }
    let decomposition = IsotropicDecomposition { mu };
    if decomposition.reconstruct() != *bx {
        return Err(Error::NotIsotropic);
    }
    Ok(decomposition)
}

/// Bob's joint box `P(b₁b₂|y₁y₂) = P(b₁|y₁)·P(b₂|y₂)`, laid out with `b₁`
/// in the first-party slot.
pub fn bob_joint_box(box_ab: &BipartiteBox, box_bc: &BipartiteBox) -> BipartiteBox {
    tensor(&box_ab.bob_marginal(), &box_bc.alice_marginal())
}

/// `P(b' = 0)`: the coupler applied to Bob's joint box.
pub fn success_probability(coupler: &Coupler, box_ab: &BipartiteBox, box_bc: &BipartiteBox) -> ExactScalar {
    coupler.evaluate(&bob_joint_box(box_ab, box_bc))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapOutcome {
    pub p_success: ExactScalar,
    pub success_box: BipartiteBox,
    pub failure_box: BipartiteBox,
    pub ch_success: ExactScalar,
    pub ch_failure: ExactScalar,
}

impl SwapOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        let table = |bx: &BipartiteBox| LabelledBox::new(BoxLabel::Custom, bx.clone()).to_json();
        json!({
            "p_success": self.p_success.to_canonical_string(),
            "ch_success": self.ch_success.to_canonical_string(),
            "ch_failure": self.ch_failure.to_canonical_string(),
            "success_box": table(&self.success_box),
            "failure_box": table(&self.failure_box),
        })
    }
}

/// Run the coupler on two isotropic boxes.
///
/// The CH part of the coupler maps `PR⊗PR` and `anti-PR⊗anti-PR` to
/// `PR/2`, and the mixed pairs to `anti-PR/2`; the deterministic part maps
/// every pair to the maximally mixed box. Inputs with PR weights `μ`, `ν`
/// therefore leave Alice and Charlie with the unnormalised `b' = 0` box
///
/// `[(A/2)·PR + ((1−A)/2)·anti-PR − X_b·𝟙] / (X_t − X_b)`,
///
/// where `A = μν + (1−μ)(1−ν)`.
pub fn swap(coupler: &Coupler, box_ab: &BipartiteBox, box_bc: &BipartiteBox) -> Result<SwapOutcome> {
    let mu = decompose_isotropic(box_ab)?.mu;
    let nu = decompose_isotropic(box_bc)?.mu;
    let one = ExactScalar::one();
    let half = ExactScalar::ratio(1, 2);

    let p_success = success_probability(coupler, box_ab, box_bc);
    if p_success.signum() <= 0 || p_success >= one {
        return Err(Error::DegenerateSwap {
            p_success: p_success.to_string(),
        });
    }

    let aligned = &mu * &nu + (&one - &mu) * (&one - &nu);
    let crossed = &one - &aligned;
    let ch_part = pr_box()
        .scale(&(&aligned * &half))
        .plus(&anti_pr_box().scale(&(&crossed * &half)));
    let deterministic_part = BipartiteBox::maximally_mixed().scale(coupler.x_bottom());
    let width = coupler.x_top() - coupler.x_bottom();
    let joint_success = ch_part.minus(&deterministic_part).scale(&width.inverse()?);

    let success_box = joint_success.scale(&p_success.inverse()?);
    let failure_box = BipartiteBox::maximally_mixed()
        .minus(&joint_success)
        .scale(&(&one - &p_success).inverse()?);

    Ok(SwapOutcome {
        ch_success: ch_value(&success_box),
        ch_failure: ch_value(&failure_box),
        p_success,
        success_box,
        failure_box,
    })
}

/// Bob's choice to apply the coupler must be invisible to Alice and Charlie:
/// `Σ_b' P(b')·P(ac|xz, b') = P(a|x)·P(c|z)`, with the marginals read off the
/// input boxes.
pub fn verify_coupler_nonsignalling(coupler: &Coupler, box_ab: &BipartiteBox, box_bc: &BipartiteBox) -> Result<bool> {
    let outcome = swap(coupler, box_ab, box_bc)?;
    let p_fail = ExactScalar::one() - &outcome.p_success;
    let averaged = outcome
        .success_box
        .scale(&outcome.p_success)
        .plus(&outcome.failure_box.scale(&p_fail));
    let product = tensor(&box_ab.alice_marginal(), &box_bc.bob_marginal());
    Ok(averaged == product)
}

/// CH value `v*` of equal isotropic inputs at which the swapped box sits
/// exactly on the local bound (`ch_success = 1`):
/// `v* = 1/2 + sqrt((1 − 2X_b)/2)`.
pub fn swap_threshold(coupler: &Coupler) -> Result<ExactScalar> {
    let gap = ExactScalar::one() - coupler.x_bottom() * &ExactScalar::int(2);
    if gap.signum() <= 0 {
        return Err(Error::DegenerateSwap {
            p_success: "≤ 0".into(),
        });
    }
    let root = (gap * ExactScalar::ratio(1, 2)).sqrt()?;
    Ok(ExactScalar::ratio(1, 2) + root)
}

/// The isotropic weight `ξ` with CH value `v`, i.e. `ξ = (v + 1/2)/2`.
pub fn xi_for_ch(ch: &ExactScalar) -> ExactScalar {
    (ch + &ExactScalar::ratio(1, 2)) * ExactScalar::ratio(1, 2)
}
