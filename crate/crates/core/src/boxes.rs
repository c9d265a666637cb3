//! Binary-input, binary-output boxes.
//!
//! A bipartite box is the table of joint probabilities `P(ab|xy)`, stored
//! as a 16-vector in `(a, b, x, y)` row-major order, i.e. at index
//! `8a + 4b + 2x + y`. Functionals use the same layout.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_scalar::ExactScalar;

pub type Bit = u8;

fn bit(value: Bit) -> Bit {
    assert!(value < 2, "bit out of range: {value}");
    value
}

/// Position of `P(ab|xy)` in the 16-vector.
pub const fn index(a: Bit, b: Bit, x: Bit, y: Bit) -> usize {
    (8 * a + 4 * b + 2 * x + y) as usize
}

/// All `(a, b, x, y)` tuples in layout order.
pub fn all_indices() -> impl Iterator<Item = (Bit, Bit, Bit, Bit)> {
    (0..16u8).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1))
}

fn range_check(what: &'static str, value: &ExactScalar) -> Result<()> {
    if value.is_negative_value() || *value > ExactScalar::one() {
        return Err(Error::OutOfRange {
            what,
            value: value.to_string(),
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Descriptive metadata for a box. Never consulted by the calculus itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum BoxLabel {
    Deterministic {
        alpha: Bit,
        beta: Bit,
        gamma: Bit,
        delta: Bit,
    },
    PrVariant {
        alpha: Bit,
        beta: Bit,
        gamma: Bit,
    },
    AntiPr,
    Isotropic {
        xi: ExactScalar,
    },
    NoisyLocal {
        alpha: Bit,
        beta: Bit,
        gamma: Bit,
        delta: Bit,
        xi: ExactScalar,
    },
    MaximallyMixed,
    Custom,
}

/// Joint probabilities `P(ab|xy)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BipartiteBox {
    p: [ExactScalar; 16],
}

impl BipartiteBox {
    /// Wrap a raw table. No validity is enforced; see [`verify_box`].
    pub fn from_table(p: [ExactScalar; 16]) -> Self {
        BipartiteBox { p }
    }

    pub fn from_fn(mut f: impl FnMut(Bit, Bit, Bit, Bit) -> ExactScalar) -> Self {
        let mut entries = all_indices().map(|(a, b, x, y)| f(a, b, x, y));
        BipartiteBox {
            p: std::array::from_fn(|_| entries.next().expect("16 entries")),
        }
    }

    pub fn get(&self, a: Bit, b: Bit, x: Bit, y: Bit) -> &ExactScalar {
        &self.p[index(a, b, x, y)]
    }

    pub fn entries(&self) -> &[ExactScalar; 16] {
        &self.p
    }

    pub fn zero() -> Self {
        BipartiteBox {
            p: std::array::from_fn(|_| ExactScalar::zero()),
        }
    }

    /// The box with every entry equal to 1/4.
    pub fn maximally_mixed() -> Self {
        Self::from_fn(|_, _, _, _| ExactScalar::ratio(1, 4))
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        BipartiteBox {
            p: std::array::from_fn(|i| &self.p[i] * k),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        BipartiteBox {
            p: std::array::from_fn(|i| &self.p[i] + &other.p[i]),
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        BipartiteBox {
            p: std::array::from_fn(|i| &self.p[i] - &other.p[i]),
        }
    }

    /// `Σ wᵢ·boxᵢ`; weights are not required to be a probability vector.
    pub fn combine<'a>(terms: impl IntoIterator<Item = (&'a ExactScalar, &'a BipartiteBox)>) -> Self {
        terms
            .into_iter()
            .fold(Self::zero(), |acc, (w, bx)| acc.plus(&bx.scale(w)))
    }

    /// `P(a|x)` as computed from the `y` column: `Σ_b P(ab|xy)`.
    pub fn alice_prob(&self, a: Bit, x: Bit, y: Bit) -> ExactScalar {
        self.get(a, 0, x, y) + self.get(a, 1, x, y)
    }

    pub fn bob_prob(&self, b: Bit, x: Bit, y: Bit) -> ExactScalar {
        self.get(0, b, x, y) + self.get(1, b, x, y)
    }

    /// Alice's marginal `P(a|x)`, read at `y = 0`.
    pub fn alice_marginal(&self) -> SinglePartyBox {
        SinglePartyBox::from_fn(|a, x| self.alice_prob(a, x, 0))
    }

    /// Bob's marginal `P(b|y)`, read at `x = 0`.
    pub fn bob_marginal(&self) -> SinglePartyBox {
        SinglePartyBox::from_fn(|b, y| self.bob_prob(b, 0, y))
    }
}

impl fmt::Debug for BipartiteBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BipartiteBox[")?;
        for (i, v) in self.p.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// Single-party box `P(b|y)`, stored at index `2b + y`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SinglePartyBox {
    q: [ExactScalar; 4],
}

impl SinglePartyBox {
    pub fn from_fn(mut f: impl FnMut(Bit, Bit) -> ExactScalar) -> Self {
        SinglePartyBox {
            q: [f(0, 0), f(0, 1), f(1, 0), f(1, 1)],
        }
    }

    pub fn get(&self, b: Bit, y: Bit) -> &ExactScalar {
        &self.q[2 * b as usize + y as usize]
    }

    pub fn entries(&self) -> &[ExactScalar; 4] {
        &self.q
    }

    /// Deterministic box `b = αy ⊕ β`.
    pub fn deterministic(alpha: Bit, beta: Bit) -> Self {
        let (alpha, beta) = (bit(alpha), bit(beta));
        Self::from_fn(|b, y| {
            if b == (alpha & y) ^ beta {
                ExactScalar::one()
            } else {
                ExactScalar::zero()
            }
        })
    }

    pub fn uniform() -> Self {
        Self::from_fn(|_, _| ExactScalar::ratio(1, 2))
    }

    pub fn is_valid(&self) -> bool {
        self.q.iter().all(|v| !v.is_negative_value())
            && (0..2).all(|y| (self.get(0, y) + self.get(1, y)).is_one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoxReport {
    pub nonneg: bool,
    pub normalized: bool,
    pub nonsignalling: bool,
}

impl BoxReport {
    pub fn is_valid(&self) -> bool {
        self.nonneg && self.normalized && self.nonsignalling
    }
}

pub fn verify_box(bx: &BipartiteBox) -> BoxReport {
    let nonneg = bx.entries().iter().all(|v| !v.is_negative_value());
    let normalized = (0..2).all(|x| {
        (0..2).all(|y| {
            let total: ExactScalar = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| bx.get(a, b, x, y).clone())
                .sum();
            total.is_one()
        })
    });
    let alice_ok = (0..2).all(|a| (0..2).all(|x| bx.alice_prob(a, x, 0) == bx.alice_prob(a, x, 1)));
    let bob_ok = (0..2).all(|b| (0..2).all(|y| bx.bob_prob(b, 0, y) == bx.bob_prob(b, 1, y)));
    BoxReport {
        nonneg,
        normalized,
        nonsignalling: alice_ok && bob_ok,
    }
}

fn indicator(cond: bool, value: ExactScalar) -> ExactScalar {
    if cond {
        value
    } else {
        ExactScalar::zero()
    }
}

/// Local deterministic box `a = αx ⊕ β`, `b = γy ⊕ δ`.
pub fn make_deterministic(alpha: Bit, beta: Bit, gamma: Bit, delta: Bit) -> BipartiteBox {
    let (alpha, beta, gamma, delta) = (bit(alpha), bit(beta), bit(gamma), bit(delta));
    BipartiteBox::from_fn(|a, b, x, y| {
        indicator(a == (alpha & x) ^ beta && b == (gamma & y) ^ delta, ExactScalar::one())
    })
}

/// PR variant with `a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ`. `(0,0,0)` is the PR box and
/// `(0,0,1)` the anti-PR box.
pub fn make_pr_variant(alpha: Bit, beta: Bit, gamma: Bit) -> BipartiteBox {
    let (alpha, beta, gamma) = (bit(alpha), bit(beta), bit(gamma));
    BipartiteBox::from_fn(|a, b, x, y| {
        indicator(a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma, ExactScalar::ratio(1, 2))
    })
}

pub fn pr_box() -> BipartiteBox {
    make_pr_variant(0, 0, 0)
}

pub fn anti_pr_box() -> BipartiteBox {
    make_pr_variant(0, 0, 1)
}

/// `ξ·PR + (1 − ξ)·anti-PR`.
pub fn make_isotropic(xi: &ExactScalar) -> Result<BipartiteBox> {
    range_check("xi", xi)?;
    let rest = ExactScalar::one() - xi;
    Ok(pr_box().scale(xi).plus(&anti_pr_box().scale(&rest)))
}

/// `L^ξ_{αβ} = ξ·[b = αy⊕β] + (1 − ξ)·[b = αy⊕β⊕1]`.
pub fn make_noisy_local_pair(alpha: Bit, beta: Bit, xi: &ExactScalar) -> Result<SinglePartyBox> {
    range_check("xi", xi)?;
    let hit = SinglePartyBox::deterministic(alpha, beta);
    let miss = SinglePartyBox::deterministic(alpha, beta ^ 1);
    let rest = ExactScalar::one() - xi;
    Ok(SinglePartyBox::from_fn(|b, y| {
        hit.get(b, y) * xi + miss.get(b, y) * &rest
    }))
}

/// Product box `P(ab|xy) = P_A(a|x)·P_B(b|y)`.
pub fn tensor(alice: &SinglePartyBox, bob: &SinglePartyBox) -> BipartiteBox {
    BipartiteBox::from_fn(|a, b, x, y| alice.get(a, x) * bob.get(b, y))
}

/// Bob's box after Alice announces input `x` and output `a`:
/// `P(b|y, a, x) = P(ab|xy) / P(a|x)`.
pub fn condition_on_alice(bx: &BipartiteBox, x: Bit, a: Bit) -> Result<SinglePartyBox> {
    let (x, a) = (bit(x), bit(a));
    let mut out: [ExactScalar; 4] = std::array::from_fn(|_| ExactScalar::zero());
    for y in 0..2 {
        let marginal = bx.alice_prob(a, x, y);
        if marginal.is_zero() {
            return Err(Error::UndefinedConditional { x, a });
        }
        let inv = marginal.inverse()?;
        for b in 0..2 {
            out[2 * b as usize + y as usize] = bx.get(a, b, x, y) * &inv;
        }
    }
    Ok(SinglePartyBox { q: out })
}

/// The 16 deterministic boxes, in `(α, β, γ, δ)` lexicographic order.
pub fn deterministic_boxes() -> Vec<BipartiteBox> {
    (0..16u8)
        .map(|i| make_deterministic(i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1))
        .collect()
}

/// The 8 PR variants, in `(α, β, γ)` lexicographic order.
pub fn pr_variants() -> Vec<BipartiteBox> {
    (0..8u8)
        .map(|i| make_pr_variant(i >> 2 & 1, i >> 1 & 1, i & 1))
        .collect()
}

/// Vertices of the binary non-signalling polytope: the 16 deterministic
/// boxes followed by the 8 PR variants.
pub fn enumerate_ns_vertices() -> Vec<BipartiteBox> {
    let mut v = deterministic_boxes();
    v.extend(pr_variants());
    v
}

/// A box together with optional descriptive metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledBox {
    pub label: BoxLabel,
    pub table: BipartiteBox,
}

impl LabelledBox {
    pub fn new(label: BoxLabel, table: BipartiteBox) -> Self {
        LabelledBox { label, table }
    }

    /// JSON form `{"kind": ..., "params": ..., "table": [[..]; 4]}` where
    /// table row `2a + b` holds the four `(x, y)` entries.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<ExactScalar>> = self.table.entries().chunks(4).map(<[_]>::to_vec).collect();
        let mut doc = match self.label {
            BoxLabel::Custom => serde_json::Map::new(),
            ref label => match serde_json::to_value(label).expect("labels serialize") {
                serde_json::Value::Object(map) => map,
                _ => unreachable!("adjacently tagged enums serialize to objects"),
            },
        };
        doc.insert("table".into(), serde_json::to_value(rows).expect("tables serialize"));
        serde_json::Value::Object(doc)
    }

    /// Accepts a 4×4 table, a single row of 16, or a flat array of 16.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let table = value
            .get("table")
            .ok_or_else(|| Error::Json("missing \"table\"".into()))?;
        let flat: Vec<ExactScalar> = match serde_json::from_value::<Vec<Vec<ExactScalar>>>(table.clone()) {
            Ok(rows) => rows.into_iter().flatten().collect(),
            Err(_) => serde_json::from_value::<Vec<ExactScalar>>(table.clone())?,
        };
        let entries: [ExactScalar; 16] = flat
            .try_into()
            .map_err(|v: Vec<_>| Error::Json(format!("table has {} entries, expected 16", v.len())))?;
        let label = match value.get("kind") {
            Some(kind) => {
                let mut tagged = serde_json::Map::new();
                tagged.insert("kind".into(), kind.clone());
                if let Some(params) = value.get("params") {
                    tagged.insert("params".into(), params.clone());
                }
                serde_json::from_value(serde_json::Value::Object(tagged))?
            }
            None => BoxLabel::Custom,
        };
        Ok(LabelledBox {
            label,
            table: BipartiteBox::from_table(entries),
        })
    }
}
