//! Command-line mini-languages for couplers and boxes.

use nlswap::boxes::{
    anti_pr_box, make_deterministic, make_isotropic, make_noisy_local_pair, make_pr_variant, pr_box, tensor,
    verify_box, BipartiteBox, Bit, BoxLabel, LabelledBox,
};
use nlswap::functionals::{make_coupler, Coupler};
use nlswap::models::perfect_xb;
use nlswap::swap::{swap_threshold, xi_for_ch};
use nlswap::{Error, ExactScalar, Result};

use crate::CliError;

fn shifted(err: Error, offset: usize) -> Error {
    match err {
        Error::Parse { position, message } => Error::Parse {
            position: position + offset,
            message,
        },
        other => other,
    }
}

/// `X_t,X_b` or one of the presets `genuine`, `quantum-perfect`, `quantum-minimal`.
pub fn parse_coupler(spec: &str) -> Result<Coupler> {
    let bq = ExactScalar::tsirelson_bound();
    let (x_top, x_bottom) = match spec.trim() {
        "genuine" => (ExactScalar::ratio(3, 2), ExactScalar::int(0)),
        "quantum-perfect" => {
            let x_bottom = perfect_xb(&bq)?;
            (bq, x_bottom)
        }
        "quantum-minimal" => (bq, ExactScalar::int(0)),
        _ => {
            let comma = spec.find(',').ok_or_else(|| Error::Parse {
                position: spec.len(),
                message: "expected `X_t,X_b` or a preset name".into(),
            })?;
            let x_top = ExactScalar::parse(&spec[..comma])?;
            let x_bottom = ExactScalar::parse(&spec[comma + 1..]).map_err(|e| shifted(e, comma + 1))?;
            (x_top, x_bottom)
        }
    };
    make_coupler(&x_top, &x_bottom)
}

fn parse_bits(text: &str, count: usize, offset: usize) -> Result<Vec<Bit>> {
    if text.len() != count {
        return Err(Error::Parse {
            position: offset,
            message: format!("expected {count} bits, found `{text}`"),
        });
    }
    text.chars()
        .enumerate()
        .map(|(i, ch)| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse {
                position: offset + i,
                message: format!("`{ch}` is not a bit"),
            }),
        })
        .collect()
}

/// Box specs: `pr`, `anti-pr`, `mixed`, `pr:ABC`, `det:ABCD`, `noisy:ABCD:XI`,
/// `iso:XI`, `iso:top`, `iso:threshold` (both relative to `coupler`) and
/// `@path.json`.
pub fn parse_box(spec: &str, coupler: Option<&Coupler>) -> std::result::Result<LabelledBox, CliError> {
    let labelled = parse_box_with(spec, coupler)?;
    check_valid(&labelled.table)?;
    Ok(labelled)
}

/// As [`parse_box`], without rejecting invalid tables read from files.
pub fn parse_box_unchecked(spec: &str) -> std::result::Result<LabelledBox, CliError> {
    parse_box_with(spec, None)
}

fn parse_box_with(spec: &str, coupler: Option<&Coupler>) -> std::result::Result<LabelledBox, CliError> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
        return Ok(LabelledBox::from_json(&value)?);
    }
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    let offset = head.len() + 1;
    let needs_coupler = || Error::Parse {
        position: offset,
        message: "this box spec needs a coupler".into(),
    };
    let labelled = match (head, rest) {
        ("pr", None) => LabelledBox::new(BoxLabel::PrVariant { alpha: 0, beta: 0, gamma: 0 }, pr_box()),
        ("anti-pr", None) => LabelledBox::new(BoxLabel::AntiPr, anti_pr_box()),
        ("mixed", None) => LabelledBox::new(BoxLabel::MaximallyMixed, BipartiteBox::maximally_mixed()),
        ("pr", Some(bits)) => {
            let b = parse_bits(bits, 3, offset)?;
            LabelledBox::new(
                BoxLabel::PrVariant { alpha: b[0], beta: b[1], gamma: b[2] },
                make_pr_variant(b[0], b[1], b[2]),
            )
        }
        ("det", Some(bits)) => {
            let b = parse_bits(bits, 4, offset)?;
            LabelledBox::new(
                BoxLabel::Deterministic { alpha: b[0], beta: b[1], gamma: b[2], delta: b[3] },
                make_deterministic(b[0], b[1], b[2], b[3]),
            )
        }
        ("noisy", Some(rest)) => {
            let (bits, xi) = rest.split_once(':').ok_or_else(|| Error::Parse {
                position: offset + rest.len(),
                message: "expected `noisy:ABCD:XI`".into(),
            })?;
            let b = parse_bits(bits, 4, offset)?;
            let xi = ExactScalar::parse(xi).map_err(|e| shifted(e, offset + bits.len() + 1))?;
            let table = tensor(&make_noisy_local_pair(b[0], b[1], &xi)?, &make_noisy_local_pair(b[2], b[3], &xi)?);
            LabelledBox::new(
                BoxLabel::NoisyLocal { alpha: b[0], beta: b[1], gamma: b[2], delta: b[3], xi },
                table,
            )
        }
        ("iso", Some(arg)) => {
            let xi = match arg.trim() {
                "top" => xi_for_ch(coupler.ok_or_else(needs_coupler)?.x_top()),
                "threshold" => xi_for_ch(&swap_threshold(coupler.ok_or_else(needs_coupler)?)?),
                expr => ExactScalar::parse(expr).map_err(|e| shifted(e, offset))?,
            };
            let table = make_isotropic(&xi)?;
            LabelledBox::new(BoxLabel::Isotropic { xi }, table)
        }
        _ => {
            return Err(Error::Parse {
                position: 0,
                message: format!("unknown box spec `{spec}`"),
            }
            .into())
        }
    };
    Ok(labelled)
}

fn check_valid(bx: &BipartiteBox) -> Result<()> {
    let report = verify_box(bx);
    if report.is_valid() {
        return Ok(());
    }
    Err(Error::OutOfRange {
        what: "box",
        value: format!(
            "(non-negative: {}, normalized: {}, non-signalling: {})",
            report.nonneg, report.normalized, report.nonsignalling
        ),
        range: "valid non-signalling boxes",
    })
}
