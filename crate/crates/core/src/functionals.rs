//! Linear functionals on boxes: the CH expression, the deterministic
//! coupler and the CH-based coupler family.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::boxes::{index, BipartiteBox, Bit};
use crate::error::{Error, Result};
use crate::exact_scalar::ExactScalar;

/// `f(P) = Σ w·P + offset`, coefficients in the box layout.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinearFunctional {
    w: [ExactScalar; 16],
    offset: ExactScalar,
}

impl LinearFunctional {
    pub fn new(w: [ExactScalar; 16], offset: ExactScalar) -> Self {
        LinearFunctional { w, offset }
    }

    pub fn zero() -> Self {
        LinearFunctional {
            w: std::array::from_fn(|_| ExactScalar::zero()),
            offset: ExactScalar::zero(),
        }
    }

    /// The positivity facet functional `P ↦ P(ab|xy)`.
    pub fn coordinate(a: Bit, b: Bit, x: Bit, y: Bit) -> Self {
        let mut f = Self::zero();
        f.w[index(a, b, x, y)] = ExactScalar::one();
        f
    }

    pub fn coefficients(&self) -> &[ExactScalar; 16] {
        &self.w
    }

    pub fn offset(&self) -> &ExactScalar {
        &self.offset
    }

    pub fn evaluate(&self, bx: &BipartiteBox) -> ExactScalar {
        let mut acc = self.offset.clone();
        for (w, p) in self.w.iter().zip(bx.entries()) {
            if !w.is_zero() {
                acc += w * p;
            }
        }
        acc
    }

    pub fn plus(&self, other: &Self) -> Self {
        LinearFunctional {
            w: std::array::from_fn(|i| &self.w[i] + &other.w[i]),
            offset: &self.offset + &other.offset,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        LinearFunctional {
            w: std::array::from_fn(|i| &self.w[i] - &other.w[i]),
            offset: &self.offset - &other.offset,
        }
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        LinearFunctional {
            w: std::array::from_fn(|i| &self.w[i] * k),
            offset: &self.offset * k,
        }
    }

    /// JSON form: `{"coefficients": [[..]; 4], "offset": ".."}`, rows as in the box format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FunctionalDocument {
            coefficients: self.w.chunks(4).map(<[_]>::to_vec).collect(),
            offset: self.offset.clone(),
        })
        .expect("functionals always serialize")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: FunctionalDocument = serde_json::from_value(value.clone())?;
        let flat: Vec<ExactScalar> = doc.coefficients.into_iter().flatten().collect();
        let w: [ExactScalar; 16] = flat
            .try_into()
            .map_err(|v: Vec<_>| Error::Json(format!("{} coefficients, expected 16", v.len())))?;
        Ok(LinearFunctional { w, offset: doc.offset })
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionalDocument {
    coefficients: Vec<Vec<ExactScalar>>,
    #[serde(default = "ExactScalar::zero")]
    offset: ExactScalar,
}

/// CH = P(11|00) + P(00|10) + P(00|01) − P(00|11).
pub fn ch_functional() -> LinearFunctional {
    LinearFunctional::coordinate(1, 1, 0, 0)
        .plus(&LinearFunctional::coordinate(0, 0, 1, 0))
        .plus(&LinearFunctional::coordinate(0, 0, 0, 1))
        .minus(&LinearFunctional::coordinate(0, 0, 1, 1))
}

pub fn ch_value(bx: &BipartiteBox) -> ExactScalar {
    ch_functional().evaluate(bx)
}

/// The coupler that always answers `b' = 0`: the sum of the four
/// `(x, y) = (0, 0)` entries.
pub fn deterministic_coupler() -> LinearFunctional {
    (0..4u8).fold(LinearFunctional::zero(), |acc, ab| {
        acc.plus(&LinearFunctional::coordinate(ab >> 1, ab & 1, 0, 0))
    })
}

/// The coupler `χ = (CH − X_b·χ_D) / (X_t − X_b)`, which answers `b' = 0`
/// with certainty on boxes at CH = X_t and never on boxes at CH = X_b.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coupler {
    functional: LinearFunctional,
    x_top: ExactScalar,
    x_bottom: ExactScalar,
}

impl Coupler {
    pub fn functional(&self) -> &LinearFunctional {
        &self.functional
    }

    pub fn x_top(&self) -> &ExactScalar {
        &self.x_top
    }

    pub fn x_bottom(&self) -> &ExactScalar {
        &self.x_bottom
    }

    /// Probability of `b' = 0` on `bx`.
    pub fn evaluate(&self, bx: &BipartiteBox) -> ExactScalar {
        self.functional.evaluate(bx)
    }
}

pub fn make_coupler(x_top: &ExactScalar, x_bottom: &ExactScalar) -> Result<Coupler> {
    if x_bottom >= x_top {
        return Err(Error::DegenerateRange {
            x_top: x_top.to_string(),
            x_bottom: x_bottom.to_string(),
        });
    }
    let scale = (x_top - x_bottom).inverse()?;
    let functional = ch_functional()
        .minus(&deterministic_coupler().scale(x_bottom))
        .scale(&scale);
    Ok(Coupler {
        functional,
        x_top: x_top.clone(),
        x_bottom: x_bottom.clone(),
    })
}

/// Whether the coupler answers with a valid probability on every listed box.
/// By linearity it is enough to pass the extremal boxes of a model.
pub fn coupler_valid_on<'a>(coupler: &Coupler, boxes: impl IntoIterator<Item = &'a BipartiteBox>) -> bool {
    boxes.into_iter().all(|bx| {
        let v = coupler.evaluate(bx);
        !v.is_negative_value() && v <= ExactScalar::one()
    })
}
