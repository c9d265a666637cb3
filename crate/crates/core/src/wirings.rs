//! Extremal measurements on the full non-signalling polytope.
//!
//! Every extremal consistent measurement on binary boxes is a wiring: a
//! classical procedure that feeds inputs into the two halves of a box and
//! post-processes the outputs. They are built here from the 16 positivity
//! facets `P(ab|xy) ≥ 0`:
//!
//! * the two deterministic wirings `χ_D` and `0`;
//! * 16 AND wirings `χ_j = P_j` and their 16 complements `χ_D − χ_j`;
//! * the sums `χ_j + χ_k` that stay below 1 on every vertex, identified up
//!   to equality on non-signalling boxes.
//!
//! Kinds are assigned independently, by simulating explicit classical
//! strategies on the 24 vertices and matching evaluation patterns.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use crate::boxes::{all_indices, enumerate_ns_vertices, BipartiteBox, Bit};
use crate::error::{Error, Result};
use crate::exact_scalar::ExactScalar;
use crate::functionals::{deterministic_coupler, LinearFunctional};
use crate::linalg::convex_combination;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WiringKind {
    Deterministic,
    OneSided,
    And,
    Xor,
    Sequential,
}

impl WiringKind {
    pub const ALL: [WiringKind; 5] = [
        WiringKind::Deterministic,
        WiringKind::And,
        WiringKind::OneSided,
        WiringKind::Xor,
        WiringKind::Sequential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WiringKind::Deterministic => "deterministic",
            WiringKind::OneSided => "one-sided",
            WiringKind::And => "and",
            WiringKind::Xor => "xor",
            WiringKind::Sequential => "sequential",
        }
    }
}

impl fmt::Display for WiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

/// How inputs are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "order", rename_all = "snake_case")]
pub enum InputRule {
    /// Fixed inputs into both halves.
    Parallel { x: Bit, y: Bit },
    /// Query `first` with `input`, then the other half with `output ⊕ flip`.
    Adaptive { first: Party, input: Bit, flip: Bit },
}

/// A classical wiring: an input rule plus the answer `b' = g(a, b)`, with
/// `g` stored as a truth table at index `2a + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Strategy {
    pub inputs: InputRule,
    pub answer: [Bit; 4],
}

impl Strategy {
    fn answer(&self, a: Bit, b: Bit) -> Bit {
        self.answer[(2 * a + b) as usize]
    }

    /// Probability that the strategy answers `b' = 0` on a non-signalling box.
    pub fn simulate(&self, bx: &BipartiteBox) -> ExactScalar {
        let mut total = ExactScalar::zero();
        for a in 0..2 {
            for b in 0..2 {
                if self.answer(a, b) != 0 {
                    continue;
                }
                let (x, y) = match self.inputs {
                    InputRule::Parallel { x, y } => (x, y),
                    InputRule::Adaptive { first: Party::Alice, input, flip } => (input, a ^ flip),
                    InputRule::Adaptive { first: Party::Bob, input, flip } => (b ^ flip, input),
                };
                total += bx.get(a, b, x, y);
            }
        }
        total
    }

    /// Structural kind of the strategy's description.
    pub fn kind(&self) -> WiringKind {
        let g = self.answer;
        let zeros = g.iter().filter(|&&v| v == 0).count();
        let depends_on_a = g[0] != g[2] || g[1] != g[3];
        let depends_on_b = g[0] != g[1] || g[2] != g[3];
        if zeros == 0 || zeros == 4 {
            return WiringKind::Deterministic;
        }
        match self.inputs {
            InputRule::Parallel { .. } => {
                if !(depends_on_a && depends_on_b) {
                    WiringKind::OneSided
                } else if zeros % 2 == 1 {
                    WiringKind::And
                } else {
                    WiringKind::Xor
                }
            }
            InputRule::Adaptive { first, .. } => {
                let reads_second = match first {
                    Party::Alice => depends_on_b,
                    Party::Bob => depends_on_a,
                };
                if reads_second {
                    WiringKind::Sequential
                } else {
                    WiringKind::OneSided
                }
            }
        }
    }

    /// Every parallel strategy and every adaptive strategy, each with all
    /// 16 answer tables.
    pub fn all() -> Vec<Strategy> {
        let mut rules = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                rules.push(InputRule::Parallel { x, y });
            }
        }
        for first in [Party::Alice, Party::Bob] {
            for input in 0..2 {
                for flip in 0..2 {
                    rules.push(InputRule::Adaptive { first, input, flip });
                }
            }
        }
        let mut out = Vec::with_capacity(rules.len() * 16);
        for inputs in rules {
            for table in 0..16u8 {
                let answer = [table >> 3 & 1, table >> 2 & 1, table >> 1 & 1, table & 1];
                out.push(Strategy { inputs, answer });
            }
        }
        out
    }
}

/// How a wiring was built from the positivity facets. Facets are numbered
/// by their position in the box layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Provenance {
    /// `χ_D` (`outputs_zero`) or the zero functional.
    Deterministic { outputs_zero: bool },
    Facet { facet: usize },
    Complement { facet: usize },
    PairSum { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wiring {
    pub functional: LinearFunctional,
    pub kind: WiringKind,
    pub provenance: Provenance,
    pub strategy: Strategy,
}

impl Wiring {
    fn build(functional: LinearFunctional, provenance: Provenance) -> Result<Self> {
        let (kind, strategy) = classify_functional(&functional)?;
        Ok(Wiring {
            functional,
            kind,
            provenance,
            strategy,
        })
    }

    /// Evaluations on the 24 non-signalling vertices. Two functionals with
    /// the same pattern agree on every non-signalling box.
    pub fn pattern(&self) -> Vec<ExactScalar> {
        vertex_pattern(&self.functional)
    }

    pub fn is_valid_on_ns(&self) -> bool {
        valid_pattern(&self.pattern())
    }

    /// `χ_D − χ`.
    pub fn complement_functional(&self) -> LinearFunctional {
        deterministic_coupler().minus(&self.functional)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "functional": self.functional.to_json(),
            "kind": self.kind,
            "provenance": self.provenance,
            "strategy": self.strategy,
        })
    }
}

fn vertices() -> &'static [BipartiteBox] {
    use std::sync::OnceLock;
    static VERTICES: OnceLock<Vec<BipartiteBox>> = OnceLock::new();
    VERTICES.get_or_init(enumerate_ns_vertices)
}

pub fn vertex_pattern(f: &LinearFunctional) -> Vec<ExactScalar> {
    vertices().iter().map(|v| f.evaluate(v)).collect()
}

fn valid_pattern(pattern: &[ExactScalar]) -> bool {
    pattern.iter().all(|v| !v.is_negative_value() && *v <= ExactScalar::one())
}

fn strategy_table() -> &'static [(Vec<ExactScalar>, WiringKind, Strategy)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(Vec<ExactScalar>, WiringKind, Strategy)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table: Vec<_> = Strategy::all()
            .into_iter()
            .map(|s| {
                let pattern = vertices().iter().map(|v| s.simulate(v)).collect();
                (pattern, s.kind(), s)
            })
            .collect();
        table.sort_by_key(|entry| (entry.1, entry.2));
        table
    })
}

/// The simplest classical strategy reproducing `f` on every vertex, and its kind.
pub fn classify_functional(f: &LinearFunctional) -> Result<(WiringKind, Strategy)> {
    let pattern = vertex_pattern(f);
    strategy_table()
        .iter()
        .find(|(p, _, _)| *p == pattern)
        .map(|(_, kind, s)| (*kind, *s))
        .ok_or(Error::Unclassifiable)
}

pub fn classify_wiring(w: &Wiring) -> Result<WiringKind> {
    classify_functional(&w.functional).map(|(kind, _)| kind)
}

/// The 16 functionals `P ↦ P(ab|xy)`, in box layout order.
pub fn positivity_facets() -> Vec<LinearFunctional> {
    all_indices()
        .map(|(a, b, x, y)| LinearFunctional::coordinate(a, b, x, y))
        .collect()
}

pub fn deterministic_wirings() -> Result<Vec<Wiring>> {
    Ok(vec![
        Wiring::build(deterministic_coupler(), Provenance::Deterministic { outputs_zero: true })?,
        Wiring::build(LinearFunctional::zero(), Provenance::Deterministic { outputs_zero: false })?,
    ])
}

/// The 16 facet wirings followed by their 16 complements.
pub fn and_wirings() -> Result<Vec<Wiring>> {
    let facets = positivity_facets();
    let mut out = Vec::with_capacity(32);
    for (j, f) in facets.iter().enumerate() {
        out.push(Wiring::build(f.clone(), Provenance::Facet { facet: j })?);
    }
    let d = deterministic_coupler();
    for (j, f) in facets.iter().enumerate() {
        out.push(Wiring::build(d.minus(f), Provenance::Complement { facet: j })?);
    }
    Ok(out)
}

/// Counts from the pairwise-sum construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairwiseReport {
    /// Unordered pairs of distinct facets.
    pub candidates: usize,
    /// Pairs whose sum stays within `[0, 1]` on every vertex.
    pub valid: usize,
    /// Valid sums that are distinct on non-signalling boxes.
    pub distinct: usize,
}

fn pairwise_sums_with_report() -> Result<(Vec<Wiring>, PairwiseReport)> {
    let facets = positivity_facets();
    let mut report = PairwiseReport {
        candidates: 0,
        valid: 0,
        distinct: 0,
    };
    let mut seen: BTreeMap<Vec<ExactScalar>, ()> = BTreeMap::new();
    let mut out = Vec::new();
    for j in 0..facets.len() {
        for k in j + 1..facets.len() {
            report.candidates += 1;
            let sum = facets[j].plus(&facets[k]);
            let pattern = vertex_pattern(&sum);
            if !valid_pattern(&pattern) {
                continue;
            }
            report.valid += 1;
            if seen.insert(pattern, ()).is_some() {
                continue;
            }
            out.push(Wiring::build(sum, Provenance::PairSum { first: j, second: k })?);
        }
    }
    report.distinct = out.len();
    Ok((out, report))
}

/// Valid sums of two distinct facet wirings, one representative per
/// measurement (first pair in lexicographic order).
pub fn pairwise_sums() -> Result<Vec<Wiring>> {
    pairwise_sums_with_report().map(|(w, _)| w)
}

pub fn pairwise_report() -> Result<PairwiseReport> {
    pairwise_sums_with_report().map(|(_, r)| r)
}

/// All 82 extremal wirings, ordered by provenance.
pub fn enumerate_all_wirings() -> Result<Vec<Wiring>> {
    let mut all = deterministic_wirings()?;
    all.extend(and_wirings()?);
    all.extend(pairwise_sums()?);
    let mut seen = BTreeMap::new();
    all.retain(|w| seen.insert(w.pattern(), ()).is_none());
    all.sort_by_key(|w| w.provenance);
    Ok(all)
}

pub fn kind_histogram(wirings: &[Wiring]) -> BTreeMap<WiringKind, usize> {
    let mut hist: BTreeMap<WiringKind, usize> = WiringKind::ALL.iter().map(|k| (*k, 0)).collect();
    for w in wirings {
        *hist.entry(w.kind).or_default() += 1;
    }
    hist
}

/// Whether the wiring at `index` is not a convex combination of the others,
/// compared as measurements on non-signalling boxes.
pub fn is_extremal(wirings: &[Wiring], index: usize) -> bool {
    let target = wirings[index].pattern();
    let others: Vec<Vec<ExactScalar>> = wirings
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != index)
        .map(|(_, w)| w.pattern())
        .collect();
    convex_combination(&others, &target).is_none()
}
