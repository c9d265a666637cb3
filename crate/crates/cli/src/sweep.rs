//! Boundary curves of the coupler region over a grid of `X_t` values.

use nlswap::boxes::make_isotropic;
use nlswap::functionals::make_coupler;
use nlswap::models::{minimal_xb, minimal_xb_unchecked, noisy_local_bounds, perfect_xb, perfect_xb_unchecked};
use nlswap::swap::{success_probability, xi_for_ch};
use nlswap::{Error, ExactScalar, Result};
use rayon::prelude::*;
use serde_json::json;

pub const HEADER: [&str; 6] = ["x_top", "perfect_xb", "minimal_xb", "z_b", "z_t", "p_success_perfect"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Grid,
    /// The theory at Tsirelson's bound, where the minimal coupler is `X_b = 0`.
    Dot,
    /// `X_t → 1`, where perfect and minimal couplers meet.
    Limit,
}

impl Marker {
    fn name(self) -> &'static str {
        match self {
            Marker::Grid => "",
            Marker::Dot => "dot",
            Marker::Limit => "limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x_top: ExactScalar,
    pub perfect_xb: ExactScalar,
    pub minimal_xb: ExactScalar,
    pub z_b: ExactScalar,
    pub z_t: ExactScalar,
    pub p_success_perfect: ExactScalar,
    pub marker: Marker,
}

impl SweepRow {
    fn values(&self) -> [&ExactScalar; 6] {
        [
            &self.x_top,
            &self.perfect_xb,
            &self.minimal_xb,
            &self.z_b,
            &self.z_t,
            &self.p_success_perfect,
        ]
    }
}

/// Parse `START:END:N` into `N` evenly spaced points, both ends included.
pub fn parse_grid(spec: &str) -> Result<Vec<ExactScalar>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, count] = parts[..] else {
        return Err(Error::Parse {
            position: 0,
            message: format!("expected START:END:N, found `{spec}`"),
        });
    };
    let start = ExactScalar::parse(start)?;
    let end = ExactScalar::parse(end)?;
    let count: i64 = count.trim().parse().map_err(|_| Error::Parse {
        position: spec.len() - count.len(),
        message: format!("`{count}` is not a point count"),
    })?;
    if count < 1 {
        return Err(Error::OutOfRange {
            what: "grid size",
            value: count.to_string(),
            range: "at least 1",
        });
    }
    let points: Vec<ExactScalar> = if count == 1 {
        vec![start]
    } else {
        let step = (&end - &start) * ExactScalar::ratio(1, count - 1);
        (0..count).map(|k| &start + &(&step * &ExactScalar::int(k))).collect()
    };
    for p in &points {
        // Reuse the model's domain check for X_t.
        perfect_xb(p)?;
    }
    Ok(points)
}

fn row(x_top: ExactScalar, marker: Marker) -> Result<SweepRow> {
    let (perfect, minimal) = match marker {
        Marker::Limit => (perfect_xb_unchecked(&x_top), minimal_xb_unchecked(&x_top)),
        _ => (perfect_xb(&x_top)?, minimal_xb(&x_top)?),
    };
    let xi = xi_for_ch(&x_top);
    let (z_b, z_t) = noisy_local_bounds(&xi)?;
    let genuine = make_isotropic(&xi)?;
    let coupler = make_coupler(&x_top, &perfect)?;
    let p_success_perfect = success_probability(&coupler, &genuine, &genuine);
    Ok(SweepRow {
        x_top,
        perfect_xb: perfect,
        minimal_xb: minimal,
        z_b,
        z_t,
        p_success_perfect,
        marker,
    })
}

/// Grid rows plus the dot and limit marker rows, sorted by `x_top`.
pub fn sweep(grid: &[ExactScalar]) -> Result<Vec<SweepRow>> {
    let mut points: Vec<(ExactScalar, Marker)> = grid.iter().map(|x| (x.clone(), Marker::Grid)).collect();
    points.push((ExactScalar::tsirelson_bound(), Marker::Dot));
    points.push((ExactScalar::int(1), Marker::Limit));
    points.sort_by(|l, r| l.0.cmp(&r.0));
    points
        .into_par_iter()
        .map(|(x, marker)| row(x, marker))
        .collect()
}

pub fn to_csv(rows: &[SweepRow], precision: usize) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = HEADER.iter().map(|h| h.to_string()).collect();
    header.extend(HEADER.iter().map(|h| format!("{h}_exact")));
    header.push("marker".into());
    writer.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut record: Vec<String> = r.values().iter().map(|v| v.to_decimal(precision)).collect();
        record.extend(r.values().iter().map(|v| v.to_canonical_string()));
        record.push(r.marker.name().into());
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn to_json(rows: &[SweepRow], precision: usize) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            for (name, v) in HEADER.iter().zip(r.values()) {
                obj.insert(
                    name.to_string(),
                    json!({ "exact": v.to_canonical_string(), "decimal": v.to_decimal(precision) }),
                );
            }
            if r.marker != Marker::Grid {
                obj.insert("marker".into(), json!(r.marker.name()));
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    json!({ "rows": rows })
}
