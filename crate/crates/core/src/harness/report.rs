//! Ratio reports, band summaries, JSON-lines and CSV output.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};

/// How a ratio lhs/rhs is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// lhs ~ rhs: ratio inside the equivalence band, stable under refinement.
    Equivalence,
    /// lhs <= rhs with constant 1.
    Inequality,
    /// lhs = rhs up to rounding.
    Identity,
    /// lhs <= C rhs: ratio below the upper end of the equivalence band.
    Bounded,
    /// lhs <= C rhs with C not prescribed: recorded, passes when finite.
    Empirical,
    /// lhs = rhs within the analytic tolerance.
    Analytic,
    /// The input must be rejected; lhs and rhs are unused.
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub side: f64,
    pub n_space: usize,
    pub m_scale: usize,
    pub s_min: f64,
    pub s_max: f64,
}

impl From<&Domain> for Grid {
    fn from(d: &Domain) -> Self {
        Grid { d: d.d(), side: d.side(), n_space: d.n_space(), m_scale: d.m_scale(), s_min: d.s_min(), s_max: d.s_max() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub suite: String,
    pub experiment: String,
    pub member: String,
    pub claim: Claim,
    #[serde(deserialize_with = "nan_from_null")]
    pub lhs: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub exponents: String,
    pub grid: Grid,
    /// Scale window the norms see, as text.
    pub truncation: String,
    pub band: [f64; 2],
    pub status: Status,
    pub note: String,
}

// serde_json writes non-finite floats as null
fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Ratio range of one experiment at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandAt {
    pub n_space: usize,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub members: usize,
    pub degenerate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub suite: String,
    pub experiment: String,
    pub claim: Claim,
    pub band: [f64; 2],
    pub resolutions: Vec<BandAt>,
    /// max over consecutive resolutions of max(|lo'/lo - 1|, |hi'/hi - 1|).
    pub drift: Option<f64>,
    pub drift_limit: f64,
    pub failures: usize,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Ratio(RatioReport),
    Band(BandSummary),
}

impl Record {
    pub fn status(&self) -> Status {
        match self {
            Record::Ratio(r) => r.status,
            Record::Band(b) => b.status,
        }
    }

    pub fn suite(&self) -> &str {
        match self {
            Record::Ratio(r) => &r.suite,
            Record::Band(b) => &b.suite,
        }
    }

    pub fn experiment(&self) -> &str {
        match self {
            Record::Ratio(r) => &r.experiment,
            Record::Band(b) => &b.experiment,
        }
    }
}

/// Status of lhs/rhs under a claim. A ratio with both sides zero, or any non-finite
/// side, is degenerate and never passes.
pub fn judge(claim: Claim, lhs: f64, rhs: f64, band: [f64; 2], tol: f64) -> (Option<f64>, Status) {
    if claim == Claim::Rejection {
        return (None, Status::Fail);
    }
    if !lhs.is_finite() || !rhs.is_finite() || (lhs == 0.0 && rhs == 0.0) {
        return (None, Status::Degenerate);
    }
    if rhs == 0.0 {
        return (None, Status::Fail);
    }
    let r = lhs / rhs;
    let ok = match claim {
        Claim::Equivalence => r >= band[0] && r <= band[1],
        Claim::Inequality => r <= 1.0 + tol,
        Claim::Identity | Claim::Analytic => (r - 1.0).abs() <= tol,
        Claim::Bounded => r <= band[1],
        Claim::Empirical => true,
        Claim::Rejection => unreachable!(),
    };
    (Some(r), if ok { Status::Pass } else { Status::Fail })
}

/// Per-resolution ranges and drift of the reports of one experiment, in report order.
pub fn summarize(reports: &[RatioReport], drift_limit: f64) -> Option<BandSummary> {
    let first = reports.first()?;
    let mut sizes: Vec<usize> = reports.iter().map(|r| r.grid.n_space).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let resolutions: Vec<BandAt> = sizes
        .iter()
        .map(|&n| {
            let at: Vec<&RatioReport> = reports.iter().filter(|r| r.grid.n_space == n).collect();
            let ratios: Vec<f64> = at.iter().filter_map(|r| r.ratio).collect();
            BandAt {
                n_space: n,
                lo: ratios.iter().cloned().reduce(f64::min),
                hi: ratios.iter().cloned().reduce(f64::max),
                members: at.len(),
                degenerate: at.iter().filter(|r| r.status == Status::Degenerate).count(),
            }
        })
        .collect();
    let rel = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if a > 0.0 => Some((b / a - 1.0).abs()),
        _ => None,
    };
    let drift = resolutions
        .windows(2)
        .filter_map(|w| Some(rel(w[0].lo, w[1].lo)?.max(rel(w[0].hi, w[1].hi)?)))
        .reduce(f64::max);
    let failures = reports.iter().filter(|r| r.status == Status::Fail).count();
    let drift_ok = first.claim != Claim::Equivalence || drift.map_or(true, |d| d <= drift_limit);
    let any_pass = reports.iter().any(|r| r.status == Status::Pass);
    let status = if failures > 0 || !drift_ok {
        Status::Fail
    } else if any_pass {
        Status::Pass
    } else {
        Status::Degenerate
    };
    Some(BandSummary {
        suite: first.suite.clone(),
        experiment: first.experiment.clone(),
        claim: first.claim,
        band: first.band,
        resolutions,
        drift,
        drift_limit,
        failures,
        status,
    })
}

pub fn write_jsonl<W: Write>(records: &[Record], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    record: &'static str,
    suite: &'a str,
    experiment: &'a str,
    member: &'a str,
    claim: Claim,
    n_space: Option<usize>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    ratio: Option<f64>,
    lo: Option<f64>,
    hi: Option<f64>,
    drift: Option<f64>,
    band_lo: f64,
    band_hi: f64,
    exponents: &'a str,
    status: Status,
    note: &'a str,
}

/// One row per ratio report and one per resolution of each band summary.
pub fn write_csv<W: Write>(records: &[Record], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Format(e.to_string());
    for rec in records {
        match rec {
            Record::Ratio(r) => out
                .serialize(CsvRow {
                    record: "ratio",
                    suite: &r.suite,
                    experiment: &r.experiment,
                    member: &r.member,
                    claim: r.claim,
                    n_space: Some(r.grid.n_space),
                    lhs: Some(r.lhs),
                    rhs: Some(r.rhs),
                    ratio: r.ratio,
                    lo: None,
                    hi: None,
                    drift: None,
                    band_lo: r.band[0],
                    band_hi: r.band[1],
                    exponents: &r.exponents,
                    status: r.status,
                    note: &r.note,
                })
                .map_err(err)?,
            Record::Band(b) => {
                for at in &b.resolutions {
                    out.serialize(CsvRow {
                        record: "band",
                        suite: &b.suite,
                        experiment: &b.experiment,
                        member: "",
                        claim: b.claim,
                        n_space: Some(at.n_space),
                        lhs: None,
                        rhs: None,
                        ratio: None,
                        lo: at.lo,
                        hi: at.hi,
                        drift: b.drift,
                        band_lo: b.band[0],
                        band_hi: b.band[1],
                        exponents: "",
                        status: b.status,
                        note: "",
                    })
                    .map_err(err)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}
