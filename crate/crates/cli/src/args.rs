use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kzc", version, about = "Lyapunov spectra of the Kontsevich-Zorich cocycle on orienting double covers")]
pub struct Cli {
    /// Worker threads for replica farming (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genus, cover genus, dimensions and exponent counts of a stratum.
    StratumInfo {
        #[arg(long, allow_hyphen_values = true)]
        stratum: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Estimate the invariant and anti-invariant spectra.
    Spectrum(SpectrumArgs),
    /// Reproduce rows of the exponent table as CSV.
    Table(TableArgs),
    /// Grow one long orbit and fit homology growth rates.
    Deviation(DeviationArgs),
    /// Run the cylinder-lemma suite on random square-tiled covers.
    CheckPeriodic(PeriodicArgs),
    /// List shipped representatives, or print one of them.
    Catalog {
        #[arg(long, allow_hyphen_values = true)]
        stratum: Option<String>,
        #[arg(long, default_value = "")]
        component: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "input")]
pub struct Input {
    /// Stratum pattern such as `2,1,-1^3`, looked up in the catalog.
    #[arg(long, allow_hyphen_values = true)]
    pub stratum: Option<String>,
    /// Two-line generalized permutation file.
    #[arg(long)]
    pub perm_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: Input,
    /// Catalog component label (adj, irr, I, II).
    #[arg(long, default_value = "")]
    pub component: String,
    /// Acceleration steps per replica; `1e7` is accepted.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    pub steps: u64,
    /// Replica seeds: a count (`8`, starting at --seed), a range (`3..11`) or a list (`1,4,9`).
    #[arg(long, value_parser = parse_seeds, default_value = "1")]
    pub seeds: SeedSpec,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_parser = parse_count, default_value = "10")]
    pub reorth_every: u64,
    /// Discarded initial steps (default: 1% of --steps).
    #[arg(long, value_parser = parse_count)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    /// Track the full cover cocycle and label exponents by parity.
    #[arg(long)]
    pub unsplit: bool,
    /// Append the result here instead of printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// `;`-separated strata, each `pattern` or `pattern:component` (default: whole catalog).
    #[arg(long, allow_hyphen_values = true)]
    pub strata: Option<String>,
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    pub steps: u64,
    #[arg(long, value_parser = parse_seeds, default_value = "1")]
    pub seeds: SeedSpec,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_parser = parse_count, default_value = "10")]
    pub reorth_every: u64,
    #[arg(long, value_parser = parse_count)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeviationArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value = "")]
    pub component: String,
    /// Orbit length; `1e8` is accepted.
    #[arg(long = "T", value_parser = parse_count, default_value = "1e8")]
    pub t_max: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` writes a run record, `csv` the checkpoint series.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PeriodicArgs {
    #[arg(long, default_value_t = 500)]
    pub fixtures: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 24)]
    pub max_squares: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn resolve(&self, base: u64) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (0..*n).map(|i| base.wrapping_add(i)).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

/// Non-negative integer, optionally in scientific notation or with `_`.
pub fn parse_count(text: &str) -> Result<u64, String> {
    let t = text.trim().replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = t.parse().map_err(|_| format!("'{text}' is not a count"))?;
    if !x.is_finite() || x < 0.0 || x.fract() != 0.0 || x >= u64::MAX as f64 {
        return Err(format!("'{text}' is not a non-negative integer"));
    }
    Ok(x as u64)
}

pub fn parse_seeds(text: &str) -> Result<SeedSpec, String> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let (a, b) = (parse_count(a)?, parse_count(b)?);
        if b <= a {
            return Err(format!("empty seed range '{text}'"));
        }
        return Ok(SeedSpec::List((a..b).collect()));
    }
    if t.contains(',') {
        let v = t.split(',').map(parse_count).collect::<Result<Vec<_>, _>>()?;
        return Ok(SeedSpec::List(v));
    }
    match parse_count(t)? {
        0 => Err("at least one seed is needed".into()),
        n => Ok(SeedSpec::Count(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("10_000"), Ok(10_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("3").unwrap().resolve(1), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4..7").unwrap().resolve(1), vec![4, 5, 6]);
        assert_eq!(parse_seeds("9,2").unwrap().resolve(1), vec![9, 2]);
        assert!(parse_seeds("0").is_err());
    }
}
