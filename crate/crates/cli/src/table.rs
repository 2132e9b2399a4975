//! Deterministic CSV emission for the convergence reports: fixed column
//! order, 12 significant digits, one row per box.

use std::io::Write;

use anyhow::{bail, Result};
use subpress_core::measure::EntropyReport;
use subpress_core::pressure::PressureReport;
use subpress_core::subadd::OwEstimate;

/// Any of the three box-sequence reports.
pub enum ConvergenceTable<'a> {
    Pressure(&'a PressureReport),
    Entropy(&'a EntropyReport),
    Ow(&'a OwEstimate),
}

fn f12(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt12(x: Option<f64>) -> String {
    x.map(f12).unwrap_or_default()
}

impl ConvergenceTable<'_> {
    pub fn is_empty(&self) -> bool {
        match self {
            ConvergenceTable::Pressure(r) => r.rows.is_empty(),
            ConvergenceTable::Entropy(r) => r.values.is_empty(),
            ConvergenceTable::Ow(r) => r.samples.is_empty(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        if self.is_empty() {
            bail!("refusing to emit an empty convergence table");
        }
        match self {
            ConvergenceTable::Pressure(report) => {
                writeln!(out, "n,box_size,log_P,normalized,increment,certified")?;
                for row in &report.rows {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        row.n,
                        row.box_size,
                        f12(row.log_p),
                        f12(row.normalized),
                        opt12(row.increment),
                        row.certified
                    )?;
                }
            }
            ConvergenceTable::Entropy(report) => {
                writeln!(out, "n,normalized,inf_to_date,increment")?;
                for (i, &(n, v)) in report.values.iter().enumerate() {
                    let inf = report.inf_to_date[i].1;
                    let inc = report
                        .increments
                        .iter()
                        .find(|&&(m, _)| m == n)
                        .map(|&(_, x)| x);
                    writeln!(out, "{n},{},{},{}", f12(v), f12(inf), opt12(inc))?;
                }
            }
            ConvergenceTable::Ow(report) => {
                writeln!(out, "n,normalized,inf_to_date,increment")?;
                let mut running = f64::INFINITY;
                for &(n, v) in &report.samples {
                    running = running.min(v);
                    let inc = if n == report.samples.last().unwrap().0 {
                        report.increment_estimate
                    } else {
                        None
                    };
                    writeln!(out, "{n},{},{},{}", f12(v), f12(running), opt12(inc))?;
                }
            }
        }
        Ok(())
    }
}
