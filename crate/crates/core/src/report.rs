//! Verification reports and plot data, all as CSV.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::intgeo::{AngleReport, Bracket, MeasureEstimate};

pub const REPORT_HEADER: [&str; 9] = ["check", "surface", "lhs", "rhs", "abs_err", "rel_err", "err_est", "samples", "seed"];

/// One row of a verification report. `err_est` is the estimate's own error
/// (standard error when sampled, quadrature bound otherwise), empty if none.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check: String,
    pub surface: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub err_est: Option<f64>,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl ReportRow {
    pub fn new(check: impl Into<String>, surface: impl Into<String>, lhs: f64, rhs: f64, samples: usize, seed: Option<u64>) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = if rhs != 0.0 { abs_err / rhs.abs() } else { abs_err };
        Self {
            check: check.into(),
            surface: surface.into(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            err_est: None,
            samples,
            seed,
        }
    }

    pub fn from_estimate(check: impl Into<String>, surface: impl Into<String>, est: &MeasureEstimate, rhs: f64) -> Self {
        Self::new(check, surface, est.value, rhs, est.samples, est.seed).with_err(est.error)
    }

    pub fn with_err(mut self, err: f64) -> Self {
        self.err_est = Some(err);
        self
    }
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record([
            r.check.clone(),
            r.surface.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.abs_err.to_string(),
            r.rel_err.to_string(),
            r.err_est.map_or(String::new(), |e| e.to_string()),
            r.samples.to_string(),
            r.seed.map_or(String::new(), |s| s.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(Error::Format(format!("unexpected report header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}")));
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ReportRow {
                check: rec[0].to_string(),
                surface: rec[1].to_string(),
                lhs: num(&rec[2])?,
                rhs: num(&rec[3])?,
                abs_err: num(&rec[4])?,
                rel_err: num(&rec[5])?,
                err_est: match &rec[6] {
                    "" => None,
                    s => Some(num(s)?),
                },
                samples: rec[7].parse().map_err(|e| Error::Format(format!("samples: {e}")))?,
                seed: match &rec[8] {
                    "" => None,
                    s => Some(s.parse().map_err(|e| Error::Format(format!("seed: {e}")))?),
                },
            })
        })
        .collect()
}

/// `theta,Theta` rows.
pub fn write_theta_plot<W: Write>(r: &AngleReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "Theta"])?;
    for (t, m) in r.thetas.iter().zip(&r.means) {
        w.write_record([t.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `lo,hi,center,sin_center` rows, one per trapped bracket.
pub fn write_bracket_plot<W: Write>(brackets: &[Bracket], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lo", "hi", "center", "sin_center"])?;
    for b in brackets {
        w.write_record([
            b.lo.to_string(),
            b.hi.to_string(),
            b.center().to_string(),
            b.center().sin().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
