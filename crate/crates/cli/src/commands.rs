//! Subcommand definitions and handlers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pricegap::{
    threshold_seq_optimum, ConstructionParams, Family, MarketInstance, Scalar, ScreeningInstance, SearchConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{self, fmt_sig, write_table, Format, ReportRecord};
use crate::spec::{Built, ConstructionSpec, ExplicitMarket, InstanceSpec};
use crate::verify;
use crate::CliError;

const SANDWICH_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "pricegap", version, about = "Uniform pricing versus third-degree price discrimination")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file for a named family.
    Generate(GenerateArgs),
    /// Analyze one instance file.
    Analyze(AnalyzeArgs),
    /// Analyze a family over a list of K values; CSV output.
    Sweep(SweepArgs),
    /// Check the half-approximation properties on random concave markets.
    Verify(VerifyArgs),
    /// Static, threshold-screening and discriminatory profits of an instance.
    Screen(ScreenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "l-cap")]
    pub l_cap: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Comma-separated peaks (unbounded-flat).
    #[arg(long, value_delimiter = ',')]
    pub peaks: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub family: String,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub params: FamilyArgs,
    /// Write the expanded segments instead of the construction parameters.
    #[arg(long)]
    pub explicit: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    /// Shape-diagnosis grid.
    #[arg(long, default_value_t = verify::SHAPE_GRID)]
    pub grid: usize,
    /// Price search cap for unbounded supports without a flat profit tail.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub family: String,
    /// K values: `N`, `A..B` (inclusive) or `A..B*F` (geometric), comma-separated.
    #[arg(long)]
    pub k: String,
    #[command(flatten)]
    pub params: FamilyArgs,
    #[arg(long, default_value_t = verify::SHAPE_GRID)]
    pub grid: usize,
    /// `machine` writes CSV, `table` aligned columns.
    #[arg(long, value_enum, default_value_t = Format::Machine)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of random instances.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    pub input: PathBuf,
    /// Threshold grid on the common support.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sink<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn params(family: &str, k: Option<usize>, fa: &FamilyArgs) -> Result<ConstructionParams, CliError> {
    let family: Family = family.parse()?;
    Ok(ConstructionParams {
        family: Some(family),
        k,
        epsilon: fa.eps,
        a: fa.a,
        l_cap: fa.l_cap,
        kappa: fa.kappa,
        peaks: fa.peaks.clone(),
    })
}

fn id_for(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into())
}

pub fn generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = params(&a.family, a.k, &a.params)?;
    let cs = ConstructionSpec::from_params(&p);
    let (built, metadata) = cs.build()?;
    let spec = if a.explicit {
        let e = match &built {
            Built::F64(m) => ExplicitMarket::from_market(m),
            Built::Wide(m) => ExplicitMarket::from_market(m),
        }
        .map_err(|e| CliError::Construction(format!("cannot expand {} explicitly: {e}", a.family)))?;
        InstanceSpec { metadata, ..InstanceSpec::explicit(e) }
    } else {
        InstanceSpec::construction(cs, metadata)
    };
    let mut out = sink(&a.out, stdout)?;
    writeln!(out, "{}", spec.to_json())?;
    out.flush()?;
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = InstanceSpec::read(&a.input)?;
    let built = spec.build()?;
    let cfg = SearchConfig { cap: a.cap, ..SearchConfig::default() };
    let rec = report::analyze_built(&id_for(&a.input), spec.family_name(), &built, &cfg, a.grid)?;
    let mut out = sink(&a.out, stdout)?;
    rec.write(&mut *out, a.format)?;
    out.flush()?;
    Ok(())
}

/// Expands a K list such as `2,5,10` or `2..1024*2`.
pub fn parse_k_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("bad K item `{item}` (use N, A..B or A..B*F)"));
    let mut ks = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, factor) = match rest.split_once('*') {
                Some((h, f)) => (h, Some(f)),
                None => (rest, None),
            };
            let lo: usize = lo.parse().map_err(|_| bad(item))?;
            let hi: usize = hi.parse().map_err(|_| bad(item))?;
            match factor {
                None => ks.extend(lo..=hi),
                Some(f) => {
                    let f: usize = f.parse().map_err(|_| bad(item))?;
                    if f < 2 || lo == 0 {
                        return Err(bad(item));
                    }
                    let mut k = lo;
                    while k <= hi {
                        ks.push(k);
                        k = k.checked_mul(f).ok_or_else(|| bad(item))?;
                    }
                }
            }
        } else {
            ks.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if ks.is_empty() {
        return Err(CliError::Usage("empty K list".into()));
    }
    Ok(ks)
}

pub fn sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let ks = parse_k_list(&a.k)?;
    let family: Family = a.family.parse()?;
    if family == Family::TightPair {
        return Err(CliError::Usage("tight-pair has no K parameter to sweep".into()));
    }
    let cfg = SearchConfig::default();
    let records = ks
        .par_iter()
        .map(|&k| {
            let p = params(&a.family, Some(k), &a.params)?;
            let (built, _) = ConstructionSpec::from_params(&p).build()?;
            report::analyze_built(&format!("{}-k{k}", family.name()), family.name(), &built, &cfg, a.grid)
        })
        .collect::<Result<Vec<ReportRecord>, CliError>>()?;
    let mut out = sink(&a.out, stdout)?;
    match a.format {
        Format::Machine => report::write_csv(&mut *out, &records)?,
        Format::Table => report::write_columns(&mut *out, &records)?,
    }
    out.flush()?;
    Ok(())
}

pub fn verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match verify::run(a.seed, a.n)? {
        Ok(s) => {
            let mut out = sink(&a.out, stdout)?;
            match a.format {
                Format::Machine => writeln!(out, "{}", serde_json::to_string(&s).expect("summary serializes"))?,
                Format::Table => {
                    let rows = [
                        ("seed", s.seed.to_string()),
                        ("instances", s.instances.to_string()),
                        ("resampled", s.resampled.to_string()),
                        ("min_ratio", fmt_sig(s.min_ratio)),
                        ("min_midpoint_share", fmt_sig(s.min_midpoint_share)),
                        ("min_random_share", fmt_sig(s.min_random_share)),
                        ("pinned_tight_pair_ratio", fmt_sig(s.pinned_ratio)),
                        ("pinned_tight_pair_bound", fmt_sig(s.pinned_bound)),
                        ("status", "pass".into()),
                    ];
                    let rows: Vec<(String, String)> = rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                    write_table(&mut *out, &rows)?;
                }
            }
            out.flush()?;
            Ok(())
        }
        Err(f) => {
            writeln!(stderr, "instance {} violates:", f.index)?;
            for p in &f.problems {
                writeln!(stderr, "  {p}")?;
            }
            writeln!(stderr, "{}", f.spec.to_json())?;
            Err(CliError::Invariant(format!("verify failed on instance {}", f.index)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenRecord {
    pub id: String,
    pub k: usize,
    pub grid: usize,
    pub pi_static: f64,
    pub pi_seq_threshold: f64,
    pub pi_star_bound: f64,
    pub thresholds: Vec<f64>,
    pub base_utilities: Vec<f64>,
    pub exhaustive: bool,
    pub profiles_evaluated: usize,
}

fn screen_market<T: Scalar>(id: &str, m: &MarketInstance<T>, grid: usize) -> Result<ScreenRecord, CliError> {
    let s = ScreeningInstance::new(m.clone(), grid)?;
    let r = threshold_seq_optimum(&s, &SearchConfig::default())?;
    let f = |x: T| x.to_f64_lossy();
    Ok(ScreenRecord {
        id: id.to_string(),
        k: m.k(),
        grid,
        pi_static: f(r.pi_static),
        pi_seq_threshold: f(r.pi_seq_threshold),
        pi_star_bound: f(r.pi_star_bound),
        thresholds: r.thresholds.into_iter().map(f).collect(),
        base_utilities: r.base_utilities.into_iter().map(f).collect(),
        exhaustive: r.exhaustive,
        profiles_evaluated: r.profiles_evaluated,
    })
}

impl ScreenRecord {
    pub fn sandwich_violation(&self) -> Option<String> {
        if self.pi_static > self.pi_seq_threshold + SANDWICH_TOL {
            Some(format!("static profit {} above threshold optimum {}", self.pi_static, self.pi_seq_threshold))
        } else if self.pi_seq_threshold > self.pi_star_bound + SANDWICH_TOL {
            Some(format!(
                "threshold optimum {} above discrimination bound {}",
                self.pi_seq_threshold, self.pi_star_bound
            ))
        } else {
            None
        }
    }
}

pub fn screen(a: &ScreenArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = InstanceSpec::read(&a.input)?;
    let id = id_for(&a.input);
    let rec = match spec.build()? {
        Built::F64(m) => screen_market(&id, &m, a.grid)?,
        Built::Wide(m) => screen_market(&id, &m, a.grid)?,
    };
    let mut out = sink(&a.out, stdout)?;
    match a.format {
        Format::Machine => writeln!(out, "{}", serde_json::to_string(&rec).expect("record serializes"))?,
        Format::Table => {
            let list = |v: &[f64]| v.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(" ");
            let rows = [
                ("id", rec.id.clone()),
                ("k", rec.k.to_string()),
                ("grid", rec.grid.to_string()),
                ("pi_static", fmt_sig(rec.pi_static)),
                ("pi_seq_threshold", fmt_sig(rec.pi_seq_threshold)),
                ("pi_star_bound", fmt_sig(rec.pi_star_bound)),
                ("thresholds", list(&rec.thresholds)),
                ("base_utilities", list(&rec.base_utilities)),
                ("search", if rec.exhaustive { "exhaustive" } else { "coordinate ascent" }.to_string()),
                ("profiles_evaluated", rec.profiles_evaluated.to_string()),
            ];
            let rows: Vec<(String, String)> = rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            write_table(&mut *out, &rows)?;
        }
    }
    out.flush()?;
    match rec.sandwich_violation() {
        Some(v) => Err(CliError::Invariant(v)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("2,5,10").unwrap(), vec![2, 5, 10]);
        assert_eq!(parse_k_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_k_list("2..1024*2").unwrap(), vec![2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]);
        assert_eq!(parse_k_list("3, 1..2").unwrap(), vec![3, 1, 2]);
        for bad in ["", "x", "2..", "2..8*1", "0..8*2", "1..b"] {
            assert!(matches!(parse_k_list(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }
}
