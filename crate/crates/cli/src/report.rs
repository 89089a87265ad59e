//! Report rows and their renderings.

use std::io::Write;

use pricegap::{analyze, diagnose_shape, MarketInstance, PricingReport, Scalar, SearchConfig, ShapeDiagnosis};
use serde::{Deserialize, Serialize};

use crate::spec::Built;
use crate::CliError;

pub const SIG_DIGITS: usize = 12;

/// Ratios may exceed one by rounding in the profit sums.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub concave_profit: Vec<bool>,
    pub regular: Vec<String>,
    pub mhr: Vec<String>,
    pub common_support: bool,
    pub grid_used: usize,
}

impl From<ShapeDiagnosis> for Diagnosis {
    fn from(d: ShapeDiagnosis) -> Self {
        Diagnosis {
            concave_profit: d.concave_profit,
            regular: d.regular.iter().map(|v| v.as_str().to_string()).collect(),
            mhr: d.mhr.iter().map(|v| v.as_str().to_string()).collect(),
            common_support: d.common_support,
            grid_used: d.grid_used,
        }
    }
}

impl Diagnosis {
    /// `true` if every segment holds, `false` if any fails, `n/a` otherwise.
    fn summary(v: &[String]) -> String {
        use pricegap::Verdict;
        if v.iter().any(|s| s == Verdict::Fails.as_str()) {
            "false".into()
        } else if v.iter().all(|s| s == Verdict::Holds.as_str()) {
            "true".into()
        } else {
            "n/a".into()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub id: String,
    pub family: String,
    pub k: usize,
    pub pi_star: f64,
    pub pi_uniform: f64,
    pub uniform_price: f64,
    pub pi_candidates: f64,
    pub pi_midpoint: Option<f64>,
    pub pi_lower_envelope: Option<f64>,
    pub pi_random_expect: Option<f64>,
    pub ratio: f64,
    pub diagnosis: Diagnosis,
}

pub const CSV_HEADER: [&str; 15] = [
    "id",
    "family",
    "k",
    "pi_star",
    "pi_uniform",
    "uniform_price",
    "pi_candidates",
    "pi_midpoint",
    "pi_lower_envelope",
    "pi_random_expect",
    "ratio",
    "concave",
    "regular",
    "mhr",
    "common_support",
];

impl ReportRecord {
    pub fn from_report<T: Scalar>(id: &str, family: &str, r: &PricingReport<T>, d: ShapeDiagnosis) -> Self {
        let f = |x: T| x.to_f64_lossy();
        ReportRecord {
            id: id.to_string(),
            family: family.to_string(),
            k: r.per_segment_prices.len(),
            pi_star: f(r.pi_star),
            pi_uniform: f(r.pi_uniform),
            uniform_price: f(r.uniform_price),
            pi_candidates: f(r.pi_candidates),
            pi_midpoint: r.pi_midpoint.map(f),
            pi_lower_envelope: r.pi_lower_envelope.map(f),
            pi_random_expect: r.pi_random_expect.map(f),
            ratio: f(r.ratio),
            diagnosis: d.into(),
        }
    }

    fn numbers(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> {
        [
            ("pi_star", Some(self.pi_star)),
            ("pi_uniform", Some(self.pi_uniform)),
            ("uniform_price", Some(self.uniform_price)),
            ("pi_candidates", Some(self.pi_candidates)),
            ("pi_midpoint", self.pi_midpoint),
            ("pi_lower_envelope", self.pi_lower_envelope),
            ("pi_random_expect", self.pi_random_expect),
            ("ratio", Some(self.ratio)),
        ]
        .into_iter()
    }

    /// Every number finite and the ratio in `[0, 1]`.
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in self.numbers() {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::Invariant(format!("{}: {name} is not finite ({v})", self.id)));
                }
            }
        }
        if !(0.0..=1.0 + RATIO_SLACK).contains(&self.ratio) {
            return Err(CliError::Invariant(format!("{}: ratio {} outside [0, 1]", self.id, self.ratio)));
        }
        Ok(())
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![self.id.clone(), self.family.clone(), self.k.to_string()];
        row.extend(self.numbers().map(|(_, v)| v.map(fmt_sig).unwrap_or_default()));
        let d = &self.diagnosis;
        row.push(d.concave_profit.iter().all(|&c| c).to_string());
        row.push(Diagnosis::summary(&d.regular));
        row.push(Diagnosis::summary(&d.mhr));
        row.push(d.common_support.to_string());
        row
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Machine => writeln!(out, "{}", serde_json::to_string(self).expect("records serialize"))?,
            Format::Table => {
                let mut rows: Vec<(String, String)> = vec![
                    ("id".into(), self.id.clone()),
                    ("family".into(), self.family.clone()),
                    ("k".into(), self.k.to_string()),
                ];
                rows.extend(self.numbers().map(|(n, v)| (n.to_string(), v.map(fmt_sig).unwrap_or_else(|| "-".into()))));
                let d = &self.diagnosis;
                rows.push(("concave_profit".into(), join(d.concave_profit.iter().map(|c| c.to_string()))));
                rows.push(("regular".into(), join(d.regular.iter().cloned())));
                rows.push(("mhr".into(), join(d.mhr.iter().cloned())));
                rows.push(("common_support".into(), d.common_support.to_string()));
                write_table(out, &rows)?;
            }
        }
        Ok(())
    }
}

fn join(it: impl Iterator<Item = String>) -> String {
    it.collect::<Vec<_>>().join(" ")
}

pub(crate) fn write_table(out: &mut dyn Write, rows: &[(String, String)]) -> std::io::Result<()> {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<width$}  {v}")?;
    }
    Ok(())
}

/// `x` with [`SIG_DIGITS`] significant digits, trailing zeros dropped.
/// Plain notation for exponents in `[-5, 12)`, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Analysis plus shape diagnosis of one market.
pub fn analyze_market<T: Scalar>(
    id: &str,
    family: &str,
    m: &MarketInstance<T>,
    cfg: &SearchConfig,
    shape_grid: usize,
) -> Result<ReportRecord, CliError> {
    let r = analyze(m, cfg)?;
    let d = diagnose_shape(m, shape_grid)?;
    let rec = ReportRecord::from_report(id, family, &r, d);
    rec.validate()?;
    Ok(rec)
}

pub fn analyze_built(
    id: &str,
    family: &str,
    b: &Built,
    cfg: &SearchConfig,
    shape_grid: usize,
) -> Result<ReportRecord, CliError> {
    match b {
        Built::F64(m) => analyze_market(id, family, m, cfg, shape_grid),
        Built::Wide(m) => analyze_market(id, family, m, cfg, shape_grid),
    }
}

pub fn write_csv(out: &mut dyn Write, records: &[ReportRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Column-aligned rendering of the CSV rows.
pub fn write_columns(out: &mut dyn Write, records: &[ReportRecord]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = std::iter::once(CSV_HEADER.iter().map(|s| s.to_string()).collect())
        .chain(records.iter().map(|r| r.csv_row()))
        .collect();
    let widths: Vec<usize> =
        (0..CSV_HEADER.len()).map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
    for r in &rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", cells.join("  ").trim_end())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig_digit_cases() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(60.0 / 137.0), "0.43795620438");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(0.99999999999999), "1");
        assert_eq!(fmt_sig(5.5), "5.5");
    }

    proptest! {
        #[test]
        fn sig_digits_within_half_ulp_of_twelve(x in -1e20f64..1e20) {
            let s = fmt_sig(x);
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-12 * x.abs().max(f64::MIN_POSITIVE));
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
            prop_assert!(digits.trim_start_matches('0').len() <= SIG_DIGITS);
        }
    }

    #[test]
    fn record_rejects_ratio_above_one() {
        let m = pricegap::constructions::staircase::<f64>(3).unwrap().market;
        let mut rec = analyze_market("s", "staircase", &m, &SearchConfig::default(), 64).unwrap();
        rec.ratio = 1.5;
        assert!(matches!(rec.validate(), Err(CliError::Invariant(_))));
        rec.ratio = f64::NAN;
        assert!(rec.validate().is_err());
    }

    #[test]
    fn csv_has_header_and_fixed_columns() {
        let m = pricegap::constructions::staircase::<f64>(5).unwrap().market;
        let rec = analyze_market("staircase-k5", "staircase", &m, &SearchConfig::default(), 64).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), CSV_HEADER.len());
        assert_eq!(cells[10], "0.43795620438");
        assert_eq!(cells[7], "");
    }
}
